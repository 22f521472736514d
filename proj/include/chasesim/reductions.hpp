#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "chasesim/error.hpp"
#include "chasesim/process.hpp"
#include "chasesim/random.hpp"

// Alternative exact samplers of the damage X on the half-line, the star and
// the complete graph. None of them touches the event-driven engine, so
// comparing their output with direct simulation is a genuine cross-check.

namespace chasesim {

// ---------------------------------------------------------------------------
// Jump chain on the half-line
// ---------------------------------------------------------------------------

/// Transition law out of height k >= 1. Targets, in order: k+1, k-1, k-2, ..., 0.
struct JumpProbabilities {
  std::uint64_t height = 0;
  double up = 0.0;        // k -> k+1
  double down_one = 0.0;  // k -> k-1
  double drop_each = 0.0; // k -> j for each 0 <= j <= k-2

  std::vector<double> as_vector() const {
    std::vector<double> v{up, down_one};
    for (std::uint64_t j = 0; j + 2 <= height; ++j) v.push_back(drop_each);
    return v;
  }
};

inline JumpProbabilities jump_probabilities(std::uint64_t k, const ProcessParams& p) {
  if (k == 0) throw Error(ErrorCode::ZeroHeight, "jump chain height must be >= 1");
  const double denom = 1.0 + p.lambda + p.alpha * static_cast<double>(k);
  return {k, p.lambda / denom, (1.0 + p.alpha) / denom, p.alpha / denom};
}

struct JumpChainTrace {
  std::uint64_t y0 = 0;
  /// Heights after each step; the last entry is 0 unless truncated.
  std::vector<std::uint64_t> steps;
  std::uint64_t upsteps = 0;
  /// Set when the step cap stopped the chain before it reached 0.
  bool truncated = false;

  std::uint64_t kappa() const noexcept { return steps.size(); }
};

/// One step from height k >= 1.
inline std::uint64_t jump_chain_step(std::uint64_t k, const ProcessParams& p, RandomStream& rng) {
  const double kd = static_cast<double>(k);
  const double u = rng.uniform() * (1.0 + p.lambda + p.alpha * kd);
  if (u < p.lambda) return k + 1;
  if (u < p.lambda + 1.0 + p.alpha || k == 1) return k - 1;
  return rng.index(k - 1);  // uniform over 0..k-2
}

/// Runs until the chain first hits 0. With alpha = 0 and lambda >= 1 the
/// chain need not return, so `max_steps` bounds it.
inline JumpChainTrace run_jump_chain(std::uint64_t y0, const ProcessParams& p, RandomStream& rng,
                                     std::optional<std::uint64_t> max_steps = std::nullopt,
                                     bool keep_steps = true) {
  JumpChainTrace trace;
  trace.y0 = y0;
  std::uint64_t y = y0;
  std::uint64_t count = 0;
  while (y > 0) {
    if (max_steps && count >= *max_steps) {
      trace.truncated = true;
      break;
    }
    const std::uint64_t next = jump_chain_step(y, p, rng);
    if (next > y) ++trace.upsteps;
    y = next;
    ++count;
    if (keep_steps) trace.steps.push_back(y);
  }
  return trace;
}

// ---------------------------------------------------------------------------
// First conversion on the half-line
// ---------------------------------------------------------------------------

/// Sites are 1-based as on the positive integers.
struct FirstConversion {
  std::uint64_t rightmost_red = 1;  // N
  std::uint64_t converted = 1;      // M
  double time = 0.0;                // gamma
};

/// Before the first conversion there is no blue, so red occupies 1..N and
/// the front advances at rate lambda while each red site converts at rate
/// alpha. Simulated directly until the first conversion.
inline FirstConversion sample_first_conversion(const ProcessParams& p, RandomStream& rng) {
  if (!(p.alpha > 0.0)) throw Error(ErrorCode::AlphaZero, "first conversion needs alpha > 0");
  std::uint64_t front = 1;
  double t = 0.0;
  while (true) {
    const double convert = p.alpha * static_cast<double>(front);
    const double total = p.lambda + convert;
    t += rng.exponential(total);
    if (rng.uniform() * total < p.lambda) {
      ++front;
      continue;
    }
    return {front, 1 + rng.index(front), t};
  }
}

/// X = N + U(N - M) using one first-conversion sample and one jump chain.
inline std::uint64_t sample_X_via_jump_chain(const ProcessParams& p, RandomStream& rng) {
  const FirstConversion fc = sample_first_conversion(p, rng);
  const auto chain = run_jump_chain(fc.rightmost_red - fc.converted, p, rng, std::nullopt, false);
  return fc.rightmost_red + chain.upsteps;
}

// ---------------------------------------------------------------------------
// Star
// ---------------------------------------------------------------------------

struct StarRace {
  /// sigma[i] for i = 0..n: time of the i-th leaf turning red; sigma[0] = 0.
  std::vector<double> sigma;
  /// delays[0] ~ Exp(alpha); delays[i] ~ Exp(alpha) + Exp(1) for i >= 1.
  std::vector<double> delays;
  /// running_min[i] = min_{k <= i} sigma[k] + delays[k].
  std::vector<double> running_min;
  std::uint64_t stop_index = 0;  // I

  std::uint64_t damage() const noexcept { return stop_index + 1; }
};

/// I = min{ i : sigma(i+1) > M_i } with sigma(n+1) = infinity.
inline std::uint64_t star_stop_index(const std::vector<double>& sigma,
                                     const std::vector<double>& running_min) {
  const std::size_t n = sigma.size() - 1;
  for (std::size_t i = 0; i < n; ++i)
    if (sigma[i + 1] > running_min[i]) return i;
  return n;
}

inline std::vector<double> running_minimum(const std::vector<double>& sigma,
                                           const std::vector<double>& delays) {
  std::vector<double> m(sigma.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    best = std::min(best, sigma[i] + delays[i]);
    m[i] = best;
  }
  return m;
}

/// Leaves turn red as a pure death process at rate lambda per white leaf;
/// leaf i (or the root itself, i = 0) would turn the root blue after its
/// delay. The number of leaves reached before the root goes blue is I.
inline StarRace star_race(std::uint64_t leaves, const ProcessParams& p, RandomStream& rng) {
  StarRace race;
  race.sigma.assign(leaves + 1, 0.0);
  for (std::uint64_t i = 1; i <= leaves; ++i)
    race.sigma[i] =
        race.sigma[i - 1] + rng.exponential(static_cast<double>(leaves - i + 1) * p.lambda);
  race.delays.assign(leaves + 1, 0.0);
  race.delays[0] = rng.exponential(p.alpha);
  for (std::uint64_t i = 1; i <= leaves; ++i)
    race.delays[i] = rng.exponential(p.alpha) + rng.exponential(1.0);
  race.running_min = running_minimum(race.sigma, race.delays);
  race.stop_index = star_stop_index(race.sigma, race.running_min);
  return race;
}

inline std::uint64_t star_sample_X(std::uint64_t leaves, const ProcessParams& p, RandomStream& rng) {
  return star_race(leaves, p, rng).damage();
}

// ---------------------------------------------------------------------------
// Complete graph
// ---------------------------------------------------------------------------

struct BirthDeathTrace {
  /// sigma[i], i = 0..n-1: death times of the white pool (n-1 at start).
  std::vector<double> sigma;
  /// rho[i], i = 0..: jump times of the birth process with immigration.
  std::vector<double> rho;
  double rho_star = std::numeric_limits<double>::infinity();
  double tau = 0.0;
  std::uint64_t survivors = 0;  // W at tau

  std::uint64_t damage(std::uint64_t n) const noexcept { return n - survivors; }
};

/// Evaluates tau = sigma(n-1) ^ rho_* and the survivors at tau from given
/// jump sequences. `rho` must extend to the first i with rho(i) < sigma(i)
/// (sigma(i) = infinity for i > n-1).
inline void finish_birth_death(BirthDeathTrace& t, std::uint64_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto sigma_at = [&](std::size_t i) { return i < t.sigma.size() ? t.sigma[i] : inf; };
  t.rho_star = inf;
  for (std::size_t i = 1; i < t.rho.size(); ++i)
    if (t.rho[i] < sigma_at(i)) {
      t.rho_star = t.rho[i];
      break;
    }
  t.tau = std::min(t.sigma[n - 1], t.rho_star);
  std::uint64_t deaths = 0;
  for (std::size_t i = 1; i < t.sigma.size(); ++i)
    if (t.sigma[i] <= t.tau) ++deaths;
  t.survivors = (n - 1) - deaths;
}

/// Death process: n-1 white sites, each removed at rate lambda.
/// Birth process: starts at 0, grows at rate (size + alpha).
inline BirthDeathTrace complete_birth_death(std::uint64_t n, const ProcessParams& p,
                                            RandomStream& rng) {
  if (n == 0) throw Error(ErrorCode::ZeroVertices, "complete graph needs n >= 1");
  if (!(p.alpha > 0.0)) throw Error(ErrorCode::AlphaZero, "complete-graph reduction needs alpha > 0");
  BirthDeathTrace t;
  t.sigma.assign(n, 0.0);
  for (std::uint64_t i = 0; i + 1 < n; ++i)
    t.sigma[i + 1] = t.sigma[i] + rng.exponential(p.lambda * static_cast<double>(n - 1 - i));
  t.rho.push_back(0.0);
  // Births are only needed up to the first index where they overtake deaths.
  for (std::uint64_t i = 0;; ++i) {
    t.rho.push_back(t.rho[i] + rng.exponential(static_cast<double>(i) + p.alpha));
    const std::size_t k = i + 1;
    if (k >= n || t.rho[k] < t.sigma[k]) break;
  }
  finish_birth_death(t, n);
  return t;
}

inline std::uint64_t complete_sample_X(std::uint64_t n, const ProcessParams& p, RandomStream& rng) {
  return complete_birth_death(n, p, rng).damage(n);
}

}  // namespace chasesim
