#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "chasesim/error.hpp"

namespace chasesim {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = kZ95) {
  if (n == 0) throw Error(ErrorCode::EmptyInput, "Wilson interval needs n >= 1");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
  const double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  // Rounding can push an endpoint past p_hat at the extremes.
  return {std::clamp(std::min(centre - half, p), 0.0, 1.0),
          std::clamp(std::max(centre + half, p), 0.0, 1.0)};
}

struct ChiSquareResult {
  double chi2 = 0.0;
  std::uint64_t dof = 0;
  double p_value = 1.0;
  bool pass = true;
  std::uint64_t bins = 0;
};

inline constexpr double kSignificance = 0.01;

/// Two-sample chi-square homogeneity test. The pooled support is cut into
/// consecutive bins, greedily, so that each bin's expected count under the
/// pooled law is at least `min_bin` in both samples; a short tail joins the
/// last full bin.
template <class T>
ChiSquareResult distribution_compare(std::span<const T> a, std::span<const T> b,
                                     std::uint64_t min_bin = 5, double significance = kSignificance) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "both samples must be nonempty");
  std::map<T, std::pair<std::uint64_t, std::uint64_t>> counts;
  for (const T& x : a) ++counts[x].first;
  for (const T& x : b) ++counts[x].second;
  if (counts.size() < 2) throw Error(ErrorCode::DegenerateSupport, "samples share a single value");

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double total = na + nb;
  auto enough = [&](std::uint64_t pooled) {
    const double p = static_cast<double>(pooled);
    return p * na / total >= static_cast<double>(min_bin) && p * nb / total >= static_cast<double>(min_bin);
  };
  std::vector<std::pair<std::uint64_t, std::uint64_t>> bins;
  std::pair<std::uint64_t, std::uint64_t> open{0, 0};
  for (const auto& [value, c] : counts) {
    open.first += c.first;
    open.second += c.second;
    if (enough(open.first + open.second)) {
      bins.push_back(open);
      open = {0, 0};
    }
  }
  if (open.first + open.second > 0) {
    if (bins.empty()) {
      bins.push_back(open);
    } else {
      bins.back().first += open.first;
      bins.back().second += open.second;
    }
  }
  if (bins.size() < 2)
    throw Error(ErrorCode::DegenerateSupport, "pooled support too thin for two bins");

  ChiSquareResult r;
  r.bins = bins.size();
  for (auto [ca, cb] : bins) {
    const double pooled = static_cast<double>(ca + cb);
    const double ea = pooled * na / total;
    const double eb = pooled * nb / total;
    r.chi2 += (static_cast<double>(ca) - ea) * (static_cast<double>(ca) - ea) / ea;
    r.chi2 += (static_cast<double>(cb) - eb) * (static_cast<double>(cb) - eb) / eb;
  }
  r.dof = bins.size() - 1;
  r.p_value = boost::math::gamma_q(static_cast<double>(r.dof) / 2.0, r.chi2 / 2.0);
  r.pass = r.p_value >= significance;
  return r;
}

template <class T>
ChiSquareResult distribution_compare(const std::vector<T>& a, const std::vector<T>& b,
                                     std::uint64_t min_bin = 5, double significance = kSignificance) {
  return distribution_compare(std::span<const T>(a), std::span<const T>(b), min_bin, significance);
}

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

template <class T>
MeanEstimate mean_and_error(std::span<const T> xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyInput, "no samples");
  double sum = 0.0;
  for (const T& x : xs) sum += static_cast<double>(x);
  const double n = static_cast<double>(xs.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (const T& x : xs) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace chasesim
