#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "chasesim/error.hpp"
#include "chasesim/graph.hpp"
#include "chasesim/process.hpp"
#include "chasesim/random.hpp"

namespace chasesim {

struct BoundInputs {
  std::uint32_t d = 3;  // max degree
  double alpha = 1.0;
  double p_c = 0.5;     // site percolation threshold, user supplied
};

struct BoundReport {
  double lambda_lower = 0.0;
  double lambda_upper = 0.0;
};

/// A real number or +infinity, kept apart so infinity never enters arithmetic.
struct ExtendedReal {
  bool infinite = false;
  double value = 0.0;

  static ExtendedReal finite(double v) { return {false, v}; }
  static ExtendedReal infinity() { return {true, 0.0}; }
  bool operator==(const ExtendedReal&) const = default;
};

inline double lambda_lower(std::uint32_t d, double alpha) {
  if (d < 3) throw Error(ErrorCode::BadDegree, "max degree must be >= 3, got " + std::to_string(d));
  if (!std::isfinite(alpha) || alpha < 0.0)
    throw Error(ErrorCode::BadInputs, "alpha must be finite and nonnegative");
  return alpha / static_cast<double>(d - 2);
}

inline double lambda_upper(std::uint32_t d, double alpha, double p_c) {
  if (d < 3) throw Error(ErrorCode::BadInputs, "max degree must be >= 3, got " + std::to_string(d));
  if (!std::isfinite(alpha) || !(alpha > 0.0)) throw Error(ErrorCode::BadInputs, "alpha must be positive");
  if (!(p_c > 0.0 && p_c < 1.0)) throw Error(ErrorCode::BadInputs, "p_c must lie in (0, 1)");
  return (static_cast<double>(d) + alpha) / (1.0 - std::pow(p_c, 1.0 / static_cast<double>(d)));
}

inline BoundReport bound_report(const BoundInputs& in) {
  if (!(in.alpha > 0.0)) throw Error(ErrorCode::BadInputs, "alpha must be positive");
  return {lambda_lower(in.d, in.alpha), lambda_upper(in.d, in.alpha, in.p_c)};
}

/// P(red survives along a fixed path of k steps) <= (lambda/(lambda+alpha))^k.
inline double path_survival_bound(double lambda, double alpha, std::uint64_t k) {
  return std::pow(lambda / (lambda + alpha), static_cast<double>(k));
}

/// 1 + (d lambda/(lambda+alpha)) * sum_k r^k with r = (d-1) lambda/(lambda+alpha).
inline ExtendedReal expected_damage_bound(double lambda, double alpha, std::uint32_t d) {
  if (d < 3) throw Error(ErrorCode::BadDegree, "max degree must be >= 3, got " + std::to_string(d));
  const double ratio = static_cast<double>(d - 1) * lambda / (lambda + alpha);
  if (ratio >= 1.0) return ExtendedReal::infinity();
  return ExtendedReal::finite(1.0 + (static_cast<double>(d) * lambda / (lambda + alpha)) / (1.0 - ratio));
}

inline double good_site_prob_lower(double lambda, double alpha, std::uint32_t d) {
  if (d < 1) throw Error(ErrorCode::BadDegree, "degree must be >= 1");
  return std::pow(lambda / (lambda + static_cast<double>(d) + alpha), static_cast<double>(d));
}

struct GoodSiteSample {
  std::vector<char> good_mask;
  std::uint64_t root_cluster_size = 0;  // 0 when the root itself is not good
  std::uint64_t good_count = 0;
};

/// x is good when every outgoing red delay beats every incoming blue delay
/// and x's own conversion delay. Empty neighborhoods are vacuously good.
inline GoodSiteSample good_site_percolation_sim(const Graph& g, const ProcessParams& p,
                                                RandomStream& rng) {
  const std::size_t n = g.size();
  std::vector<double> red(g.slot_count()), blue(g.slot_count());
  for (SlotId s = 0; s < g.slot_count(); ++s) {
    red[s] = rng.exponential(p.lambda);
    blue[s] = rng.exponential(1.0);
  }
  GoodSiteSample out;
  out.good_mask.assign(n, 0);
  for (VertexId x = 0; x < n; ++x) {
    double slowest_red = 0.0;
    double fastest_blue = rng.exponential(p.alpha);
    for (SlotId s = g.slot_begin(x); s < g.slot_end(x); ++s) {
      slowest_red = std::max(slowest_red, red[s]);
      fastest_blue = std::min(fastest_blue, blue[g.reverse_slot(s)]);
    }
    if (slowest_red < fastest_blue) {
      out.good_mask[x] = 1;
      ++out.good_count;
    }
  }
  if (n == 0 || !out.good_mask[g.root()]) return out;
  std::vector<char> seen(n, 0);
  std::vector<VertexId> queue{g.root()};
  seen[g.root()] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (VertexId y : g.neighbors(queue[head]))
      if (out.good_mask[y] && !seen[y]) {
        seen[y] = 1;
        queue.push_back(y);
      }
  out.root_cluster_size = queue.size();
  return out;
}

}  // namespace chasesim
