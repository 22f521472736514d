#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chasesim/error.hpp"

namespace chasesim {

using VertexId = std::uint32_t;
/// Index of a directed adjacency slot (u -> v) in the CSR arrays.
using SlotId = std::uint32_t;

enum class Family { Path, Tree, Star, Complete, Torus, Custom };

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::Path: return "path";
    case Family::Tree: return "tree";
    case Family::Star: return "star";
    case Family::Complete: return "complete";
    case Family::Torus: return "torus";
    case Family::Custom: return "custom";
  }
  return "custom";
}

enum class Geometry { Cylinder, Torus };

constexpr std::string_view to_string(Geometry g) {
  return g == Geometry::Cylinder ? "cylinder" : "torus";
}

/// Rows of `width` consecutive ids; row r holds ids [r*width, (r+1)*width).
/// Row 0 is the bottom row.
struct RowLayout {
  std::uint32_t rows = 0;
  std::uint32_t width = 0;

  bool operator==(const RowLayout&) const = default;
};

/// Which end of a regular tree the root sits on. `Rooted` gives the root
/// `offspring` children; `Regular` gives it `offspring + 1` so every interior
/// vertex has degree offspring + 1.
enum class TreeRoot { Rooted, Regular };

/// Immutable simple undirected graph in CSR form with a distinguished root.
/// Each undirected edge {u, v} owns two directed slots u->v and v->u, and
/// reverse_slot() maps one to the other.
class Graph {
 public:
  using Edge = std::pair<VertexId, VertexId>;

  Graph() = default;

  /// Builds from an undirected edge list. Edges may be given in either
  /// orientation. A nonzero root is relabelled to 0 by swapping ids.
  static Graph from_edges(std::size_t n, VertexId root, std::span<const Edge> edges,
                          Family family = Family::Custom) {
    if (n == 0) throw Error(ErrorCode::ZeroVertices, "graph needs at least one vertex");
    if (n > std::numeric_limits<VertexId>::max() / 2)
      throw Error(ErrorCode::SizeCapExceeded, "vertex count too large");
    if (root >= n) throw Error(ErrorCode::VertexOutOfRange, "root " + std::to_string(root));
    auto relabel = [root](VertexId v) -> VertexId {
      if (root == 0) return v;
      if (v == root) return 0;
      if (v == 0) return root;
      return v;
    };
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
      if (u >= n || v >= n)
        throw Error(ErrorCode::VertexOutOfRange,
                    "edge " + std::to_string(u) + " " + std::to_string(v));
      if (u == v) throw Error(ErrorCode::SelfLoop, "vertex " + std::to_string(u));
      u = relabel(u);
      v = relabel(v);
      canon.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canon.begin(), canon.end());
    auto dup = std::adjacent_find(canon.begin(), canon.end());
    if (dup != canon.end())
      throw Error(ErrorCode::DuplicateEdge,
                  "edge " + std::to_string(dup->first) + " " + std::to_string(dup->second));

    Graph g;
    g.family_ = family;
    g.offsets_.assign(n + 1, 0);
    for (auto [u, v] : canon) {
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] += g.offsets_[i];
    const std::size_t slots = g.offsets_[n];
    g.targets_.resize(slots);
    g.sources_.resize(slots);
    std::vector<SlotId> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : canon) {
      g.targets_[fill[u]++] = v;
      g.targets_[fill[v]++] = u;
    }
    for (VertexId u = 0; u < n; ++u) {
      std::sort(g.targets_.begin() + g.offsets_[u], g.targets_.begin() + g.offsets_[u + 1]);
      for (SlotId e = g.offsets_[u]; e < g.offsets_[u + 1]; ++e) g.sources_[e] = u;
    }
    g.reverse_.resize(slots);
    for (SlotId e = 0; e < slots; ++e) g.reverse_[e] = g.find_slot(g.targets_[e], g.sources_[e]);
    return g;
  }

  /// Builds from per-vertex neighbour lists, which must already be symmetric.
  static Graph from_adjacency(const std::vector<std::vector<VertexId>>& adjacency,
                              VertexId root = 0) {
    const std::size_t n = adjacency.size();
    std::vector<Edge> edges;
    for (VertexId u = 0; u < n; ++u) {
      for (VertexId v : adjacency[u]) {
        if (v >= n)
          throw Error(ErrorCode::VertexOutOfRange,
                      "neighbour " + std::to_string(v) + " of " + std::to_string(u));
        if (v == u) throw Error(ErrorCode::SelfLoop, "vertex " + std::to_string(u));
        const auto& back = adjacency[v];
        if (std::count(back.begin(), back.end(), u) != 1 ||
            std::count(adjacency[u].begin(), adjacency[u].end(), v) != 1) {
          if (std::count(adjacency[u].begin(), adjacency[u].end(), v) > 1)
            throw Error(ErrorCode::DuplicateEdge,
                        "edge " + std::to_string(u) + " " + std::to_string(v));
          throw Error(ErrorCode::AsymmetricEdge,
                      std::to_string(u) + " lists " + std::to_string(v) + " but not conversely");
        }
        if (u < v) edges.emplace_back(u, v);
      }
    }
    return from_edges(n, root, edges);
  }

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }
  std::size_t slot_count() const noexcept { return targets_.size(); }
  VertexId root() const noexcept { return 0; }
  Family family() const noexcept { return family_; }

  std::span<const VertexId> neighbors(VertexId v) const {
    return {targets_.data() + offsets_[v], targets_.data() + offsets_[v + 1]};
  }
  std::size_t degree(VertexId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const {
    std::size_t d = 0;
    for (VertexId v = 0; v < size(); ++v) d = std::max(d, degree(v));
    return d;
  }

  SlotId slot_begin(VertexId v) const { return offsets_[v]; }
  SlotId slot_end(VertexId v) const { return offsets_[v + 1]; }
  VertexId slot_source(SlotId e) const { return sources_[e]; }
  VertexId slot_target(SlotId e) const { return targets_[e]; }
  SlotId reverse_slot(SlotId e) const { return reverse_[e]; }

  bool has_edge(VertexId u, VertexId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  const std::optional<RowLayout>& rows() const noexcept { return rows_; }
  std::vector<VertexId> row(std::uint32_t r) const {
    std::vector<VertexId> ids(rows_->width);
    for (std::uint32_t c = 0; c < rows_->width; ++c) ids[c] = r * rows_->width + c;
    return ids;
  }

  /// Canonical truncation boundary (e.g. deepest tree level); may be empty.
  std::span<const VertexId> boundary() const noexcept { return boundary_; }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (VertexId u = 0; u < size(); ++u)
      for (VertexId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  void set_rows(RowLayout layout) {
    if (layout.rows == 0 || layout.width == 0 ||
        static_cast<std::size_t>(layout.rows) * layout.width != size())
      throw Error(ErrorCode::InvalidSpec, "row layout does not partition the vertex set");
    rows_ = layout;
  }

  void set_boundary(std::vector<VertexId> boundary) {
    for (VertexId v : boundary)
      if (v >= size()) throw Error(ErrorCode::VertexOutOfRange, "boundary vertex " + std::to_string(v));
    boundary_ = std::move(boundary);
  }

  void set_family(Family f) noexcept { family_ = f; }

  /// Structural equality: same vertex count and adjacency (root is always 0).
  bool same_structure(const Graph& other) const {
    return offsets_ == other.offsets_ && targets_ == other.targets_;
  }

  /// Re-checks the structural invariants; throws on the first violation.
  void validate() const {
    for (VertexId u = 0; u < size(); ++u) {
      auto nb = neighbors(u);
      for (std::size_t i = 0; i < nb.size(); ++i) {
        if (nb[i] == u) throw Error(ErrorCode::SelfLoop, "vertex " + std::to_string(u));
        if (i > 0 && nb[i] == nb[i - 1])
          throw Error(ErrorCode::DuplicateEdge,
                      "edge " + std::to_string(u) + " " + std::to_string(nb[i]));
        if (!has_edge(nb[i], u))
          throw Error(ErrorCode::AsymmetricEdge,
                      std::to_string(u) + " -> " + std::to_string(nb[i]));
      }
    }
    for (SlotId e = 0; e < slot_count(); ++e)
      if (slot_source(reverse_slot(e)) != slot_target(e) ||
          slot_target(reverse_slot(e)) != slot_source(e))
        throw Error(ErrorCode::AsymmetricEdge, "reverse slot mismatch at " + std::to_string(e));
  }

 private:
  SlotId find_slot(VertexId u, VertexId v) const {
    auto first = targets_.begin() + offsets_[u];
    auto last = targets_.begin() + offsets_[u + 1];
    return static_cast<SlotId>(std::lower_bound(first, last, v) - targets_.begin());
  }

  std::vector<SlotId> offsets_;
  std::vector<VertexId> targets_;
  std::vector<VertexId> sources_;
  std::vector<SlotId> reverse_;
  Family family_ = Family::Custom;
  std::optional<RowLayout> rows_;
  std::vector<VertexId> boundary_;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

/// Path 0 - 1 - ... - (n-1), rooted at 0. Finite truncation of the positive integers.
inline Graph build_path(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::ZeroVertices, "path needs n >= 1");
  std::vector<Graph::Edge> edges;
  edges.reserve(n - 1);
  for (VertexId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  Graph g = Graph::from_edges(n, 0, edges, Family::Path);
  g.set_boundary({static_cast<VertexId>(n - 1)});
  return g;
}

/// Star with root 0 and leaves 1..n.
inline Graph build_star(std::size_t leaves) {
  std::vector<Graph::Edge> edges;
  edges.reserve(leaves);
  for (VertexId i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return Graph::from_edges(leaves + 1, 0, edges, Family::Star);
}

inline Graph build_complete(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::ZeroVertices, "complete graph needs n >= 1");
  std::vector<Graph::Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return Graph::from_edges(n, 0, edges, Family::Complete);
}

inline constexpr std::size_t kDefaultTreeCap = std::size_t{1} << 24;

/// Vertex count of a regular tree truncated at `depth`, or nullopt above `cap`.
inline std::optional<std::size_t> regular_tree_size(std::size_t offspring, std::size_t depth,
                                                    TreeRoot root, std::size_t cap) {
  std::size_t total = 1;
  std::size_t level = 1;
  for (std::size_t d = 1; d <= depth; ++d) {
    const std::size_t branch = (d == 1 && root == TreeRoot::Regular) ? offspring + 1 : offspring;
    if (level > cap / branch) return std::nullopt;
    level *= branch;
    total += level;
    if (total > cap) return std::nullopt;
  }
  return total;
}

/// Tree truncated at `depth`, ids assigned level by level. The deepest level
/// is recorded as the canonical boundary.
inline Graph build_regular_tree(std::size_t offspring, std::size_t depth,
                                TreeRoot root = TreeRoot::Rooted,
                                std::size_t cap = kDefaultTreeCap) {
  if (offspring == 0) throw Error(ErrorCode::InvalidSpec, "offspring must be >= 1");
  auto n = regular_tree_size(offspring, depth, root, cap);
  if (!n)
    throw Error(ErrorCode::SizeCapExceeded,
                "tree with offspring " + std::to_string(offspring) + " and depth " +
                    std::to_string(depth) + " exceeds cap " + std::to_string(cap));
  std::vector<Graph::Edge> edges;
  edges.reserve(*n - 1);
  std::vector<VertexId> frontier{0};
  VertexId next = 1;
  for (std::size_t d = 1; d <= depth; ++d) {
    const std::size_t branch = (d == 1 && root == TreeRoot::Regular) ? offspring + 1 : offspring;
    std::vector<VertexId> level;
    level.reserve(frontier.size() * branch);
    for (VertexId parent : frontier)
      for (std::size_t c = 0; c < branch; ++c) {
        edges.emplace_back(parent, next);
        level.push_back(next++);
      }
    frontier = std::move(level);
  }
  Graph g = Graph::from_edges(*n, 0, edges, Family::Tree);
  g.set_boundary(std::move(frontier));
  return g;
}

/// L x L grid wrapped horizontally; in Torus mode also wrapped vertically.
/// Vertex (row r, column c) has id r*L + c and row 0 is the bottom.
inline Graph build_torus(std::size_t side, Geometry geometry = Geometry::Cylinder) {
  if (side < 3) throw Error(ErrorCode::TooSmall, "torus side must be >= 3");
  if (side > 46340) throw Error(ErrorCode::SizeCapExceeded, "torus side too large");
  const auto L = static_cast<VertexId>(side);
  std::vector<Graph::Edge> edges;
  edges.reserve(2 * side * side);
  for (VertexId r = 0; r < L; ++r)
    for (VertexId c = 0; c < L; ++c) {
      const VertexId v = r * L + c;
      edges.emplace_back(v, r * L + (c + 1) % L);
      if (r + 1 < L)
        edges.emplace_back(v, v + L);
      else if (geometry == Geometry::Torus)
        edges.emplace_back(v, c);
    }
  Graph g = Graph::from_edges(side * side, 0, edges, Family::Torus);
  g.set_rows({L, L});
  return g;
}

/// Copy of `g` with one extra vertex (id n) attached to the root.
inline Graph with_pendant_vertex(const Graph& g) {
  auto edges = g.edges();
  const auto extra = static_cast<VertexId>(g.size());
  edges.emplace_back(g.root(), extra);
  Graph out = Graph::from_edges(g.size() + 1, 0, edges, g.family());
  if (!g.boundary().empty()) out.set_boundary({g.boundary().begin(), g.boundary().end()});
  return out;
}

// ---------------------------------------------------------------------------
// Text format
//
//   n=<int> root=<int> [rows=<int>]
//   u v
//   ...
//
// One undirected edge per line. Blank lines and lines starting with '#' are
// skipped. Serialization writes u < v in lexicographic order with root 0.
// ---------------------------------------------------------------------------

namespace detail {

inline bool parse_uint(std::string_view s, std::uint64_t& out) {
  if (s.empty()) return false;
  std::uint64_t v = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return false;
    if (v > (std::numeric_limits<std::uint64_t>::max() - 9) / 10) return false;
    v = v * 10 + static_cast<std::uint64_t>(ch - '0');
  }
  out = v;
  return true;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

inline Graph parse_graph(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  std::uint64_t n = 0, root = 0, rows = 0;
  std::vector<Graph::Edge> edges;
  std::vector<std::size_t> edge_lines;

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    if (!have_header) {
      bool saw_n = false, saw_root = false;
      for (auto tok : tokens) {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos)
          throw ParseFailure(ErrorCode::ParseError, line_no, "expected key=value in header");
        auto key = tok.substr(0, eq);
        std::uint64_t value = 0;
        if (!detail::parse_uint(tok.substr(eq + 1), value))
          throw ParseFailure(ErrorCode::ParseError, line_no, "bad integer for " + std::string(key));
        if (key == "n") { n = value; saw_n = true; }
        else if (key == "root") { root = value; saw_root = true; }
        else if (key == "rows") { rows = value; }
        else throw ParseFailure(ErrorCode::ParseError, line_no, "unknown header key " + std::string(key));
      }
      if (!saw_n || !saw_root)
        throw ParseFailure(ErrorCode::ParseError, line_no, "header must be 'n=<int> root=<int>'");
      if (n == 0) throw ParseFailure(ErrorCode::ZeroVertices, line_no, "n must be >= 1");
      if (root >= n) throw ParseFailure(ErrorCode::ParseError, line_no, "root out of range");
      if (rows != 0 && (n % rows != 0 || root != 0))
        throw ParseFailure(ErrorCode::ParseError, line_no, "rows must divide n and need root=0");
      have_header = true;
    } else {
      std::uint64_t u = 0, v = 0;
      if (tokens.size() != 2 || !detail::parse_uint(tokens[0], u) || !detail::parse_uint(tokens[1], v))
        throw ParseFailure(ErrorCode::ParseError, line_no, "expected 'u v'");
      if (u >= n || v >= n) throw ParseFailure(ErrorCode::ParseError, line_no, "vertex out of range");
      if (u == v) throw ParseFailure(ErrorCode::SelfLoop, line_no, "self-loop at " + std::to_string(u));
      edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
      edge_lines.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseFailure(ErrorCode::ParseError, 1, "missing header");

  // Report duplicates against the line that repeats an earlier edge.
  std::vector<std::pair<Graph::Edge, std::size_t>> keyed;
  keyed.reserve(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    keyed.push_back({{std::min(u, v), std::max(u, v)}, edge_lines[i]});
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 1; i < keyed.size(); ++i)
    if (keyed[i].first == keyed[i - 1].first)
      throw ParseFailure(ErrorCode::DuplicateEdge, keyed[i].second, "duplicate edge");

  Graph g = Graph::from_edges(n, static_cast<VertexId>(root), edges);
  if (rows != 0) g.set_rows({static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(n / rows)});
  return g;
}

inline std::string serialize_graph(const Graph& g) {
  std::ostringstream out;
  out << "n=" << g.size() << " root=" << g.root();
  if (g.rows()) out << " rows=" << g.rows()->rows;
  out << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
  return out.str();
}

}  // namespace chasesim
