#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chasesim/error.hpp"
#include "chasesim/graph.hpp"
#include "chasesim/random.hpp"

namespace chasesim {

// ---------------------------------------------------------------------------
// Parameters and states
// ---------------------------------------------------------------------------

/// Red spreads at `lambda` per (red, white) adjacency, red converts at `alpha`
/// per red site, blue spreads at 1 per (blue, red) adjacency.
struct ProcessParams {
  double lambda = 1.0;
  double alpha = 1.0;
};

inline ProcessParams validate_params(double lambda, double alpha) {
  if (!std::isfinite(lambda) || !std::isfinite(alpha))
    throw Error(ErrorCode::NonFinite, "lambda and alpha must be finite");
  if (lambda <= 0.0) throw Error(ErrorCode::NonPositiveLambda, "lambda must be > 0");
  if (alpha < 0.0) throw Error(ErrorCode::NegativeAlpha, "alpha must be >= 0");
  return {lambda, alpha};
}

enum class SiteState : std::uint8_t { White, Red, BlueByConversion, BlueByPredation };

constexpr bool is_blue(SiteState s) noexcept {
  return s == SiteState::BlueByConversion || s == SiteState::BlueByPredation;
}

/// Snapshot codes: 0 white, 1 red, 2 blue by predation, 3 blue by conversion.
constexpr int snapshot_code(SiteState s) noexcept {
  switch (s) {
    case SiteState::White: return 0;
    case SiteState::Red: return 1;
    case SiteState::BlueByPredation: return 2;
    case SiteState::BlueByConversion: return 3;
  }
  return 0;
}

enum class InitSpec { StandardRoot, Band, ClassicalWithBlueNeighbor };

constexpr std::string_view to_string(InitSpec s) {
  switch (s) {
    case InitSpec::StandardRoot: return "standard";
    case InitSpec::Band: return "band";
    case InitSpec::ClassicalWithBlueNeighbor: return "classical";
  }
  return "standard";
}

enum class EventKind : std::uint8_t { RedSpread, Convert, BlueSpread };

/// For Convert, source == target.
struct EventRecord {
  EventKind kind;
  VertexId source;
  VertexId target;
  double time;
};

// ---------------------------------------------------------------------------
// Indexed dynamic set
// ---------------------------------------------------------------------------

/// Set of ids drawn from [0, universe) with O(1) insert, erase (swap-remove)
/// and access by position.
class IndexedSet {
 public:
  static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

  explicit IndexedSet(std::size_t universe = 0) : pos_(universe, npos) {}

  void insert(std::uint32_t id) {
    pos_[id] = static_cast<std::uint32_t>(items_.size());
    items_.push_back(id);
  }

  void erase(std::uint32_t id) {
    const std::uint32_t at = pos_[id];
    const std::uint32_t last = items_.back();
    items_[at] = last;
    pos_[last] = at;
    items_.pop_back();
    pos_[id] = npos;
  }

  bool contains(std::uint32_t id) const { return pos_[id] != npos; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::uint32_t operator[](std::size_t i) const { return items_[i]; }
  std::span<const std::uint32_t> items() const noexcept { return items_; }

  void clear() {
    for (std::uint32_t id : items_) pos_[id] = npos;
    items_.clear();
  }

 private:
  std::vector<std::uint32_t> items_;
  std::vector<std::uint32_t> pos_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct EventCounts {
  std::size_t rw = 0;
  std::size_t br = 0;
  std::size_t red = 0;

  bool operator==(const EventCounts&) const = default;
};

/// Per-vertex states plus the eligible (red, white) slots, (blue, red) slots
/// and red sites, each kept in an IndexedSet so the three class sizes are
/// always current and members can be sampled uniformly.
class Configuration {
 public:
  explicit Configuration(const Graph& g)
      : graph_(&g),
        states_(g.size(), SiteState::White),
        rw_(g.slot_count()),
        br_(g.slot_count()),
        red_(g.size()) {}

  /// Takes ownership of a graph built for this configuration.
  explicit Configuration(std::shared_ptr<const Graph> g) : Configuration(*g) { owned_ = std::move(g); }

  Configuration(const Configuration&) = default;
  Configuration& operator=(const Configuration&) = default;
  Configuration(Configuration&&) noexcept = default;
  Configuration& operator=(Configuration&&) noexcept = default;

  const Graph& graph() const noexcept { return *graph_; }
  SiteState state(VertexId v) const { return states_[v]; }
  std::span<const SiteState> states() const noexcept { return states_; }

  std::size_t rw_count() const noexcept { return rw_.size(); }
  std::size_t br_count() const noexcept { return br_.size(); }
  std::size_t red_count() const noexcept { return red_.size(); }
  EventCounts counts() const noexcept { return {rw_.size(), br_.size(), red_.size()}; }
  double clock() const noexcept { return clock_; }
  std::size_t ever_red() const noexcept { return ever_red_; }

  const IndexedSet& rw_slots() const noexcept { return rw_; }
  const IndexedSet& br_slots() const noexcept { return br_; }
  const IndexedSet& red_sites() const noexcept { return red_; }

  double total_rate(const ProcessParams& p) const noexcept {
    return p.lambda * static_cast<double>(rw_.size()) + static_cast<double>(br_.size()) +
           p.alpha * static_cast<double>(red_.size());
  }

  /// Counts recomputed from the states by a full scan.
  EventCounts recount() const {
    EventCounts c;
    const Graph& g = *graph_;
    for (VertexId u = 0; u < g.size(); ++u) {
      if (states_[u] == SiteState::Red) ++c.red;
      for (VertexId v : g.neighbors(u)) {
        if (states_[u] == SiteState::Red && states_[v] == SiteState::White) ++c.rw;
        if (is_blue(states_[u]) && states_[v] == SiteState::Red) ++c.br;
      }
    }
    return c;
  }

  /// White -> Red.
  void make_red(VertexId v) {
    states_[v] = SiteState::Red;
    touched_.push_back(v);
    ++ever_red_;
    red_.insert(v);
    const Graph& g = *graph_;
    for (SlotId e = g.slot_begin(v); e < g.slot_end(v); ++e) {
      const SiteState s = states_[g.slot_target(e)];
      if (s == SiteState::White)
        rw_.insert(e);
      else if (s == SiteState::Red)
        rw_.erase(g.reverse_slot(e));
      else
        br_.insert(g.reverse_slot(e));
    }
  }

  /// Red -> Blue with the given cause.
  void make_blue(VertexId v, SiteState cause) {
    states_[v] = cause;
    red_.erase(v);
    const Graph& g = *graph_;
    for (SlotId e = g.slot_begin(v); e < g.slot_end(v); ++e) {
      const SiteState s = states_[g.slot_target(e)];
      if (s == SiteState::White)
        rw_.erase(e);
      else if (s == SiteState::Red)
        br_.insert(e);
      else
        br_.erase(g.reverse_slot(e));
    }
  }

  /// White -> Blue; only used to lay down initial blue sites.
  void seed_blue(VertexId v) {
    states_[v] = SiteState::BlueByPredation;
    touched_.push_back(v);
    const Graph& g = *graph_;
    for (SlotId e = g.slot_begin(v); e < g.slot_end(v); ++e)
      if (states_[g.slot_target(e)] == SiteState::Red) {
        br_.insert(e);
        rw_.erase(g.reverse_slot(e));
      }
  }

  void advance_clock(double dt) noexcept { clock_ += dt; }

  /// Back to all-white at time 0; cost proportional to the sites touched.
  void clear() {
    for (VertexId v : touched_) states_[v] = SiteState::White;
    touched_.clear();
    rw_.clear();
    br_.clear();
    red_.clear();
    clock_ = 0.0;
    ever_red_ = 0;
  }

 private:
  const Graph* graph_;
  std::shared_ptr<const Graph> owned_;
  std::vector<SiteState> states_;
  std::vector<VertexId> touched_;
  IndexedSet rw_;
  IndexedSet br_;
  IndexedSet red_;
  double clock_ = 0.0;
  std::size_t ever_red_ = 0;
};

/// Lays the initial colouring onto a cleared configuration whose graph is
/// already the right one for `spec` (see init_configuration for the pendant
/// vertex of the classical start).
inline void apply_initial(Configuration& c, InitSpec spec) {
  const Graph& g = c.graph();
  switch (spec) {
    case InitSpec::StandardRoot:
      c.make_red(g.root());
      break;
    case InitSpec::Band: {
      if (!g.rows() || g.rows()->rows < 2)
        throw Error(ErrorCode::BandOnNonTorus, "band start needs a graph with row structure");
      for (VertexId v : g.row(0)) c.seed_blue(v);
      for (VertexId v : g.row(1)) c.make_red(v);
      break;
    }
    case InitSpec::ClassicalWithBlueNeighbor: {
      // The pendant vertex is the last id.
      c.make_red(g.root());
      c.seed_blue(static_cast<VertexId>(g.size() - 1));
      break;
    }
  }
}

/// Fresh configuration for `spec`. The classical start adds a blue vertex
/// attached to the root, so the returned configuration owns that graph.
inline Configuration init_configuration(const Graph& g, InitSpec spec) {
  if (spec == InitSpec::ClassicalWithBlueNeighbor) {
    Configuration c(std::make_shared<const Graph>(with_pendant_vertex(g)));
    apply_initial(c, spec);
    return c;
  }
  if (spec == InitSpec::Band && (!g.rows() || g.rows()->rows < 2))
    throw Error(ErrorCode::BandOnNonTorus, "band start needs a graph with row structure");
  Configuration c(g);
  apply_initial(c, spec);
  return c;
}

/// One exact event: exponential holding time at the total rate, then an event
/// class chosen proportionally to its aggregate rate, then a uniform member.
inline EventRecord gillespie_step(Configuration& c, const ProcessParams& p, RandomStream& rng) {
  const double red_rate = p.lambda * static_cast<double>(c.rw_count());
  const double blue_rate = static_cast<double>(c.br_count());
  const double convert_rate = p.alpha * static_cast<double>(c.red_count());
  const double total = red_rate + blue_rate + convert_rate;
  if (!(total > 0.0)) throw Error(ErrorCode::NoActiveEvents, "no event has positive rate");

  c.advance_clock(rng.exponential(total));
  const Graph& g = c.graph();
  double u = rng.uniform() * total;

  // Fall through to the next non-empty class if rounding lands past a boundary.
  if (u < red_rate || (blue_rate == 0.0 && convert_rate == 0.0)) {
    const SlotId e = c.rw_slots()[rng.index(c.rw_count())];
    const VertexId from = g.slot_source(e), to = g.slot_target(e);
    c.make_red(to);
    return {EventKind::RedSpread, from, to, c.clock()};
  }
  u -= red_rate;
  if (u < blue_rate || convert_rate == 0.0) {
    const SlotId e = c.br_slots()[rng.index(c.br_count())];
    const VertexId from = g.slot_source(e), to = g.slot_target(e);
    c.make_blue(to, SiteState::BlueByPredation);
    return {EventKind::BlueSpread, from, to, c.clock()};
  }
  const VertexId v = c.red_sites()[rng.index(c.red_count())];
  c.make_blue(v, SiteState::BlueByConversion);
  return {EventKind::Convert, v, v, c.clock()};
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

enum class RunStatus { Fixated, Escaped, TruncationHit, StepLimitHit };

constexpr std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Fixated: return "Fixated";
    case RunStatus::Escaped: return "Escaped";
    case RunStatus::TruncationHit: return "TruncationHit";
    case RunStatus::StepLimitHit: return "StepLimitHit";
  }
  return "Fixated";
}

struct RunOutcome {
  /// Sites ever red. Equals the blue count at fixation, excluding blue
  /// sites that were blue from the start.
  std::uint64_t damage = 0;
  RunStatus status = RunStatus::Fixated;
  std::optional<double> fixation_time;
  std::uint64_t n_conversions = 0;
  std::uint64_t n_predations = 0;
  std::uint64_t n_red_spreads = 0;
  std::uint64_t seed = 0;

  bool operator==(const RunOutcome&) const = default;
};

struct RunLimits {
  std::optional<std::uint64_t> max_events;
  /// A vertex here turning red stops the run with TruncationHit.
  std::vector<VertexId> boundary_set;
  /// A vertex here turning red stops the run with Escaped.
  std::vector<VertexId> target_set;
};

namespace detail {

enum : std::uint8_t { kBoundaryFlag = 1, kTargetFlag = 2 };

inline std::vector<std::uint8_t> limit_flags(std::size_t n, const RunLimits& limits) {
  std::vector<std::uint8_t> flags(n, 0);
  for (VertexId v : limits.boundary_set) {
    if (v >= n) throw Error(ErrorCode::VertexOutOfRange, "boundary vertex " + std::to_string(v));
    flags[v] |= kBoundaryFlag;
  }
  for (VertexId v : limits.target_set) {
    if (v >= n) throw Error(ErrorCode::VertexOutOfRange, "target vertex " + std::to_string(v));
    flags[v] |= kTargetFlag;
  }
  return flags;
}

/// Status implied by a vertex that just turned red, if any.
inline std::optional<RunStatus> red_hits(std::uint8_t flag) {
  if (flag & kTargetFlag) return RunStatus::Escaped;
  if (flag & kBoundaryFlag) return RunStatus::TruncationHit;
  return std::nullopt;
}

}  // namespace detail

/// Reusable aggregate-rate engine bound to one (graph, params, start, limits).
/// Buffers persist across run() calls so replica loops only pay for the sites
/// each run touches.
class Simulator {
 public:
  Simulator(const Graph& g, ProcessParams p, InitSpec spec, RunLimits limits = {})
      : owned_(spec == InitSpec::ClassicalWithBlueNeighbor
                   ? std::make_shared<const Graph>(with_pendant_vertex(g))
                   : nullptr),
        graph_(owned_ ? owned_.get() : &g),
        params_(p),
        spec_(spec),
        max_events_(limits.max_events),
        flags_(detail::limit_flags(graph_->size(), limits)),
        config_(*graph_) {
    if (spec == InitSpec::Band && (!graph_->rows() || graph_->rows()->rows < 2))
      throw Error(ErrorCode::BandOnNonTorus, "band start needs a graph with row structure");
  }

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const Configuration& configuration() const noexcept { return config_; }
  const Graph& graph() const noexcept { return *graph_; }

  RunOutcome run(RandomStream& rng) {
    config_.clear();
    apply_initial(config_, spec_);
    RunOutcome out;
    out.seed = rng.seed();

    for (VertexId v : config_.red_sites().items())
      if (auto hit = detail::red_hits(flags_[v])) return finish(out, *hit);

    std::uint64_t events = 0;
    while (true) {
      if (config_.red_count() == 0) {
        out.fixation_time = config_.clock();
        return finish(out, RunStatus::Fixated);
      }
      // Red alive with nothing left to do (alpha = 0 and no blue contact):
      // red occupies its component for ever, which is censored like a
      // boundary contact.
      if (!(config_.total_rate(params_) > 0.0)) return finish(out, RunStatus::TruncationHit);
      if (max_events_ && events >= *max_events_) return finish(out, RunStatus::StepLimitHit);

      const EventRecord ev = gillespie_step(config_, params_, rng);
      ++events;
      switch (ev.kind) {
        case EventKind::RedSpread:
          ++out.n_red_spreads;
          if (auto hit = detail::red_hits(flags_[ev.target])) return finish(out, *hit);
          break;
        case EventKind::Convert: ++out.n_conversions; break;
        case EventKind::BlueSpread: ++out.n_predations; break;
      }
    }
  }

 private:
  RunOutcome& finish(RunOutcome& out, RunStatus status) {
    out.status = status;
    out.damage = config_.ever_red();
    return out;
  }

  std::shared_ptr<const Graph> owned_;
  const Graph* graph_;
  ProcessParams params_;
  InitSpec spec_;
  std::optional<std::uint64_t> max_events_;
  std::vector<std::uint8_t> flags_;
  Configuration config_;
};

inline RunOutcome run_to_fixation(const Graph& g, const ProcessParams& p, InitSpec spec,
                                  const RunLimits& limits, RandomStream& rng) {
  Simulator sim(g, p, spec, limits);
  return sim.run(rng);
}

/// Limits for the escape experiment: the top row is the target.
inline RunLimits band_limits(const Graph& torus) {
  if (!torus.rows() || torus.rows()->rows < 3)
    throw Error(ErrorCode::BandOnNonTorus, "band experiment needs a torus or cylinder");
  RunLimits limits;
  limits.target_set = torus.row(torus.rows()->rows - 1);
  return limits;
}

/// Bottom row blue, next row red; Escaped once any top-row site turns red.
class BandExperiment {
 public:
  BandExperiment(const Graph& torus, ProcessParams p)
      : sim_(torus, p, InitSpec::Band, band_limits(torus)) {}

  RunOutcome run(RandomStream& rng) { return sim_.run(rng); }

 private:
  Simulator sim_;
};

inline RunOutcome run_band_experiment(const Graph& torus, const ProcessParams& p, RandomStream& rng) {
  BandExperiment exp(torus, p);
  return exp.run(rng);
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

inline std::vector<int> snapshot(const Configuration& c) {
  std::vector<int> codes;
  codes.reserve(c.states().size());
  for (SiteState s : c.states()) codes.push_back(snapshot_code(s));
  return codes;
}

/// Row-major code grid, one row per line starting with row 0. Requires rows.
inline std::string snapshot_csv(const Configuration& c) {
  const auto& layout = c.graph().rows();
  if (!layout) throw Error(ErrorCode::InvalidSpec, "grid snapshot needs a graph with rows");
  std::ostringstream out;
  for (std::uint32_t r = 0; r < layout->rows; ++r) {
    for (std::uint32_t col = 0; col < layout->width; ++col) {
      if (col) out << ',';
      out << snapshot_code(c.state(r * layout->width + col));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace chasesim
