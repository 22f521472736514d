#pragma once

#include <limits>
#include <tuple>
#include <vector>

#include "chasesim/process.hpp"

namespace chasesim {

/// Reference engine: after every event it draws a fresh exponential clock for
/// every active (red, white) adjacency, (blue, red) adjacency and red site and
/// fires the earliest. Memorylessness makes this exact. It shares no state
/// bookkeeping with Configuration, so agreement between the two engines is a
/// real cross-check. Cost is O(edges) per event; intended for small graphs.
///
/// Equal clock values are broken by the smallest (source, target), with a
/// conversion at u ordered as (u, u).
inline RunOutcome per_clock_run(const Graph& base, const ProcessParams& p, InitSpec spec,
                                const RunLimits& limits, RandomStream& rng) {
  const Graph augmented =
      spec == InitSpec::ClassicalWithBlueNeighbor ? with_pendant_vertex(base) : Graph{};
  const Graph& g = spec == InitSpec::ClassicalWithBlueNeighbor ? augmented : base;
  const std::size_t n = g.size();
  const auto flags = detail::limit_flags(n, limits);

  std::vector<SiteState> state(n, SiteState::White);
  std::uint64_t ever_red = 0;
  auto paint_red = [&](VertexId v) {
    state[v] = SiteState::Red;
    ++ever_red;
  };
  switch (spec) {
    case InitSpec::StandardRoot: paint_red(g.root()); break;
    case InitSpec::ClassicalWithBlueNeighbor:
      paint_red(g.root());
      state[n - 1] = SiteState::BlueByPredation;
      break;
    case InitSpec::Band:
      if (!g.rows() || g.rows()->rows < 2)
        throw Error(ErrorCode::BandOnNonTorus, "band start needs a graph with row structure");
      for (VertexId v : g.row(0)) state[v] = SiteState::BlueByPredation;
      for (VertexId v : g.row(1)) paint_red(v);
      break;
  }

  RunOutcome out;
  out.seed = rng.seed();
  auto finish = [&](RunStatus s) {
    out.status = s;
    out.damage = ever_red;
    return out;
  };
  for (VertexId v = 0; v < n; ++v)
    if (state[v] == SiteState::Red)
      if (auto hit = detail::red_hits(flags[v])) return finish(*hit);

  double clock = 0.0;
  std::uint64_t events = 0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  while (true) {
    bool any_red = false;
    for (SiteState s : state) any_red = any_red || s == SiteState::Red;
    if (!any_red) {
      out.fixation_time = clock;
      return finish(RunStatus::Fixated);
    }
    if (limits.max_events && events >= *limits.max_events) return finish(RunStatus::StepLimitHit);

    double best = inf;
    std::tuple<VertexId, VertexId, EventKind> pick{0, 0, EventKind::Convert};
    auto offer = [&](double t, VertexId u, VertexId v, EventKind k) {
      if (t < best) {
        best = t;
        pick = {u, v, k};
      }
    };
    // Candidates are visited in increasing (source, target) order, so with a
    // strict comparison the first minimum wins ties.
    for (VertexId u = 0; u < n; ++u) {
      const SiteState su = state[u];
      if (su == SiteState::White) continue;
      bool conversion_offered = false;
      auto offer_conversion = [&] {
        if (su == SiteState::Red && !conversion_offered) {
          offer(rng.exponential(p.alpha), u, u, EventKind::Convert);
          conversion_offered = true;
        }
      };
      for (VertexId v : g.neighbors(u)) {
        if (v > u) offer_conversion();
        if (su == SiteState::Red && state[v] == SiteState::White)
          offer(rng.exponential(p.lambda), u, v, EventKind::RedSpread);
        else if (is_blue(su) && state[v] == SiteState::Red)
          offer(rng.exponential(1.0), u, v, EventKind::BlueSpread);
      }
      offer_conversion();
    }
    if (best == inf) return finish(RunStatus::TruncationHit);

    clock += best;
    ++events;
    auto [u, v, kind] = pick;
    switch (kind) {
      case EventKind::RedSpread:
        paint_red(v);
        ++out.n_red_spreads;
        if (auto hit = detail::red_hits(flags[v])) return finish(*hit);
        break;
      case EventKind::BlueSpread:
        state[v] = SiteState::BlueByPredation;
        ++out.n_predations;
        break;
      case EventKind::Convert:
        state[u] = SiteState::BlueByConversion;
        ++out.n_conversions;
        break;
    }
  }
}

}  // namespace chasesim
