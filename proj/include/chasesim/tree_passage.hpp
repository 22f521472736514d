#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "chasesim/error.hpp"
#include "chasesim/graph.hpp"
#include "chasesim/process.hpp"
#include "chasesim/random.hpp"

namespace chasesim {

inline constexpr VertexId kNoParent = std::numeric_limits<VertexId>::max();

/// Breadth-first orientation of a tree graph away from its root.
class RootedTree {
 public:
  explicit RootedTree(const Graph& g) : n_(g.size()), parent_(n_, kNoParent), depth_(n_, 0) {
    std::vector<char> seen(n_, 0);
    order_.reserve(n_);
    order_.push_back(g.root());
    seen[g.root()] = 1;
    child_offsets_.assign(n_ + 1, 0);
    for (std::size_t head = 0; head < order_.size(); ++head) {
      const VertexId x = order_[head];
      for (VertexId y : g.neighbors(x)) {
        if (y == parent_[x]) continue;
        if (seen[y]) throw Error(ErrorCode::NotATree, "cycle through vertex " + std::to_string(y));
        seen[y] = 1;
        parent_[y] = x;
        depth_[y] = depth_[x] + 1;
        order_.push_back(y);
      }
    }
    // Children in CSR form, in BFS order.
    for (VertexId y : order_)
      if (parent_[y] != kNoParent) ++child_offsets_[parent_[y] + 1];
    for (std::size_t i = 0; i < n_; ++i) child_offsets_[i + 1] += child_offsets_[i];
    children_.resize(child_offsets_[n_]);
    std::vector<std::uint32_t> fill(child_offsets_.begin(), child_offsets_.end() - 1);
    for (VertexId y : order_)
      if (parent_[y] != kNoParent) children_[fill[parent_[y]]++] = y;
  }

  std::size_t size() const noexcept { return n_; }
  VertexId root() const noexcept { return order_.front(); }
  /// Reachable vertices in breadth-first order, root first.
  const std::vector<VertexId>& order() const noexcept { return order_; }
  VertexId parent(VertexId v) const { return parent_[v]; }
  std::uint32_t depth(VertexId v) const { return depth_[v]; }
  std::span<const VertexId> children(VertexId v) const {
    return {children_.data() + child_offsets_[v], children_.data() + child_offsets_[v + 1]};
  }

 private:
  std::size_t n_;
  std::vector<VertexId> parent_;
  std::vector<std::uint32_t> depth_;
  std::vector<VertexId> order_;
  std::vector<std::uint32_t> child_offsets_;
  std::vector<VertexId> children_;
};

/// Passage times indexed by the child end of each tree edge (parent -> v);
/// entries for the root's nonexistent parent edge are unused.
struct TreePassageTimes {
  std::vector<double> red_in;     // parent -> v red spread, Exp(lambda)
  std::vector<double> blue_in;    // parent -> v blue spread, Exp(1)
  std::vector<double> blue_out;   // v -> parent blue spread, Exp(1)
  std::vector<double> conversion; // at v, Exp(alpha)
};

/// Draws in BFS order: per vertex the conversion time, then (non-root) the
/// red, forward blue and backward blue times.
inline TreePassageTimes sample_passage_times(const RootedTree& t, const ProcessParams& p,
                                             RandomStream& rng) {
  TreePassageTimes times;
  const std::size_t n = t.size();
  times.red_in.assign(n, 0.0);
  times.blue_in.assign(n, 0.0);
  times.blue_out.assign(n, 0.0);
  times.conversion.assign(n, std::numeric_limits<double>::infinity());
  for (VertexId v : t.order()) {
    times.conversion[v] = rng.exponential(p.alpha);
    if (t.parent(v) == kNoParent) continue;
    times.red_in[v] = rng.exponential(p.lambda);
    times.blue_in[v] = rng.exponential(1.0);
    times.blue_out[v] = rng.exponential(1.0);
  }
  return times;
}

struct TreeOutcome {
  std::vector<VertexId> ever_red;  // BFS order
  std::uint64_t damage = 0;        // X = |ever_red|
  /// Time each vertex first turns blue; +inf if never reached or never blue.
  std::vector<double> survival;
  /// Red arrival time along the geodesic from the root, ignoring blue.
  std::vector<double> red_arrival;
  /// Fastest conversion-then-predation time from v's own subtree back to v.
  std::vector<double> subtree_infection;
  /// levels[n] = vertices ever red at depth n.
  std::vector<std::vector<VertexId>> levels;
  /// children_sets[x] = children of x ever red (empty if x never red).
  std::vector<std::vector<VertexId>> children_sets;
};

/// X from passage times alone. Bottom-up:
///   T_x = min(C_x, min_children (R_in + T_child + B_out)).
/// Top-down over reached vertices:
///   S_root = T_root,  S_x = (R_x + T_x) ^ (S_parent + B_in),
///   child y reached iff R_y <= S_x.
/// With alpha = 0 every T is infinite and every vertex is reached.
inline TreeOutcome evaluate_passage_times(const RootedTree& t, const TreePassageTimes& times) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t n = t.size();
  const auto& order = t.order();
  TreeOutcome out;
  out.subtree_infection.assign(n, inf);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const VertexId x = *it;
    double best = times.conversion[x];
    for (VertexId c : t.children(x))
      best = std::min(best, times.red_in[c] + out.subtree_infection[c] + times.blue_out[c]);
    out.subtree_infection[x] = best;
  }
  out.red_arrival.assign(n, inf);
  out.survival.assign(n, inf);
  out.children_sets.assign(n, {});
  const VertexId root = t.root();
  out.red_arrival[root] = 0.0;
  out.survival[root] = out.subtree_infection[root];
  out.ever_red.push_back(root);
  for (std::size_t head = 0; head < out.ever_red.size(); ++head) {
    const VertexId x = out.ever_red[head];
    for (VertexId y : t.children(x)) {
      const double arrival = out.red_arrival[x] + times.red_in[y];
      out.red_arrival[y] = arrival;
      if (!(arrival <= out.survival[x])) continue;
      out.children_sets[x].push_back(y);
      out.survival[y] =
          std::min(arrival + out.subtree_infection[y], out.survival[x] + times.blue_in[y]);
      out.ever_red.push_back(y);
    }
  }
  out.damage = out.ever_red.size();
  for (VertexId v : out.ever_red) {
    const std::uint32_t d = t.depth(v);
    if (out.levels.size() <= d) out.levels.resize(d + 1);
    out.levels[d].push_back(v);
  }
  return out;
}

inline TreeOutcome tree_passage_sample(const RootedTree& t, const ProcessParams& p, RandomStream& rng) {
  return evaluate_passage_times(t, sample_passage_times(t, p, rng));
}

inline TreeOutcome tree_passage_sample(const Graph& tree, const ProcessParams& p, RandomStream& rng) {
  return tree_passage_sample(RootedTree(tree), p, rng);
}

}  // namespace chasesim
