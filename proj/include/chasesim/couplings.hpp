#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "chasesim/error.hpp"
#include "chasesim/process.hpp"
#include "chasesim/random.hpp"
#include "chasesim/reductions.hpp"
#include "chasesim/tree_passage.hpp"

// Monotone couplings: each produces (X, X') from one randomness source such
// that X' <= X holds in every realization when the primed parameters are the
// dominated ones (smaller lambda, larger alpha, fewer vertices).

namespace chasesim {

struct CouplingParams {
  double lambda = 1.0;
  double alpha = 1.0;
  std::uint64_t n = 0;  // leaves or vertices where relevant, else 0
};

struct CoupledPair {
  std::uint64_t x_large = 0;  // X under the dominant parameters
  std::uint64_t x_small = 0;  // X' under the dominated parameters
  CouplingParams dominant;
  CouplingParams dominated;
  std::uint64_t shared_seed = 0;

  bool dominance_holds() const noexcept { return x_small <= x_large; }
};

/// Exp(rate_a) and Exp(rate_b) from one uniform; rate_a >= rate_b implies
/// first <= second.
inline std::pair<double, double> coupled_exponentials(double u, double rate_a, double rate_b) {
  return {RandomStream::exponential_from_uniform(u, rate_a),
          RandomStream::exponential_from_uniform(u, rate_b)};
}

inline void require_order(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::BadOrder, what);
}

// ---------------------------------------------------------------------------
// Trees, monotone in alpha
// ---------------------------------------------------------------------------

struct TreeCoupling {
  CoupledPair pair;
  TreeOutcome large;  // alpha
  TreeOutcome small;  // alpha'
};

/// Red and blue passage times shared; conversion times C = -ln(u)/alpha and
/// C' = -ln(u)/alpha' from the same uniform, so C' <= C.
inline TreeCoupling tree_alpha_coupling(const RootedTree& t, double lambda, double alpha,
                                        double alpha_prime, RandomStream& rng) {
  require_order(alpha >= 0.0 && alpha_prime >= alpha, "tree coupling needs alpha' >= alpha >= 0");
  const std::size_t n = t.size();
  TreePassageTimes a, b;
  for (auto* times : {&a, &b}) {
    times->red_in.assign(n, 0.0);
    times->blue_in.assign(n, 0.0);
    times->blue_out.assign(n, 0.0);
    times->conversion.assign(n, std::numeric_limits<double>::infinity());
  }
  for (VertexId v : t.order()) {
    std::tie(a.conversion[v], b.conversion[v]) =
        coupled_exponentials(rng.open_uniform(), alpha, alpha_prime);
    if (t.parent(v) == kNoParent) continue;
    a.red_in[v] = b.red_in[v] = rng.exponential(lambda);
    a.blue_in[v] = b.blue_in[v] = rng.exponential(1.0);
    a.blue_out[v] = b.blue_out[v] = rng.exponential(1.0);
  }
  TreeCoupling out;
  out.large = evaluate_passage_times(t, a);
  out.small = evaluate_passage_times(t, b);
  out.pair = {out.large.damage, out.small.damage, {lambda, alpha, n}, {lambda, alpha_prime, n},
              rng.seed()};
  return out;
}

inline TreeCoupling tree_alpha_coupling(const Graph& tree, double lambda, double alpha,
                                        double alpha_prime, RandomStream& rng) {
  return tree_alpha_coupling(RootedTree(tree), lambda, alpha, alpha_prime, rng);
}

// ---------------------------------------------------------------------------
// Half-line, monotone in lambda and alpha jointly
// ---------------------------------------------------------------------------

namespace detail {

/// Lazily drawn shared passage times on sites 1, 2, ...; index 0 unused.
/// Red times satisfy R' >= R and conversion times C' <= C; blue times equal.
class HalfLineTimes {
 public:
  HalfLineTimes(double lambda, double lambda_prime, double alpha, double alpha_prime,
                RandomStream& rng)
      : lambda_(lambda), lambda_prime_(lambda_prime), alpha_(alpha), alpha_prime_(alpha_prime),
        rng_(rng) {
    grow_to(1);
  }

  /// Ensures sites up to x exist.
  void grow_to(std::size_t x) {
    while (arrival_.size() <= x) {
      const std::size_t site = arrival_.size();
      if (site == 0) {
        push_unused();
        continue;
      }
      auto [c, cp] = coupled_exponentials(rng_.open_uniform(), alpha_, alpha_prime_);
      conversion_.push_back(c);
      conversion_prime_.push_back(cp);
      if (site == 1) {
        red_in_.push_back(0.0);
        red_in_prime_.push_back(0.0);
        blue_in_.push_back(0.0);
        blue_out_.push_back(0.0);
        arrival_.push_back(0.0);
        arrival_prime_.push_back(0.0);
        continue;
      }
      auto [r, rp] = coupled_exponentials(rng_.open_uniform(), lambda_, lambda_prime_);
      red_in_.push_back(r);
      red_in_prime_.push_back(rp);
      blue_in_.push_back(rng_.exponential(1.0));
      blue_out_.push_back(rng_.exponential(1.0));
      arrival_.push_back(arrival_[site - 1] + r);
      arrival_prime_.push_back(arrival_prime_[site - 1] + rp);
    }
  }

  double arrival(std::size_t x) { grow_to(x); return arrival_[x]; }
  double arrival_prime(std::size_t x) { grow_to(x); return arrival_prime_[x]; }
  double conversion(std::size_t x) { grow_to(x); return conversion_[x]; }
  double conversion_prime(std::size_t x) { grow_to(x); return conversion_prime_[x]; }
  double red_in_prime(std::size_t x) { grow_to(x); return red_in_prime_[x]; }
  double blue_in(std::size_t x) { grow_to(x); return blue_in_[x]; }
  double blue_out(std::size_t x) { grow_to(x); return blue_out_[x]; }

 private:
  void push_unused() {
    for (auto* v : {&conversion_, &conversion_prime_, &red_in_, &red_in_prime_, &blue_in_,
                    &blue_out_, &arrival_, &arrival_prime_})
      v->push_back(0.0);
  }

  double lambda_, lambda_prime_, alpha_, alpha_prime_;
  RandomStream& rng_;
  std::vector<double> conversion_, conversion_prime_, red_in_, red_in_prime_, blue_in_, blue_out_;
  std::vector<double> arrival_, arrival_prime_;
};

}  // namespace detail

struct HalfLineStart {
  std::uint64_t rightmost_red = 1;   // N
  std::uint64_t rightmost_blue = 1;  // M
  std::uint64_t height() const noexcept { return rightmost_red - rightmost_blue; }
};

struct JumpChainCoupling {
  CoupledPair pair;
  HalfLineStart start;        // (N, M) at the first conversion gamma
  HalfLineStart start_prime;  // (N', M') at gamma' in the primed process
  /// (Y_t, Y'_t) after each coupled step, flat steps included.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> heights;
  std::uint64_t upsteps = 0;
  std::uint64_t upsteps_prime = 0;
};

/// Step 1: shared passage times give (N, M) at the first conversion gamma of
/// the (lambda, alpha) process, and gamma' = R'_M + C'_M; the primed state at
/// gamma' is read off the tree construction restricted to sites with
/// R'_x <= gamma' (farther sites cannot affect any comparison up to gamma').
/// Step 2: coupled jump chains driven by the thinning clocks
///   tau_B ~ Exp(1), tau_R ~ Exp(lambda'), sigma_R ~ Exp(lambda - lambda'),
///   tau_i ~ Exp(alpha) (i <= Y), sigma_i ~ Exp(alpha' - alpha) (i <= Y'),
/// where a chain without a matching clock takes a flat step.
inline JumpChainCoupling jumpchain_coupling(double lambda, double lambda_prime, double alpha,
                                            double alpha_prime, RandomStream& rng) {
  require_order(lambda >= lambda_prime && lambda_prime > 0.0,
                "jump-chain coupling needs lambda >= lambda' > 0");
  require_order(alpha_prime >= alpha && alpha > 0.0,
                "jump-chain coupling needs 0 < alpha <= alpha'");
  constexpr double inf = std::numeric_limits<double>::infinity();
  detail::HalfLineTimes sites(lambda, lambda_prime, alpha, alpha_prime, rng);

  // Unprimed first conversion.
  double gamma = inf;
  std::size_t converted = 0;
  for (std::size_t x = 1; sites.arrival(x) < gamma; ++x) {
    const double t = sites.arrival(x) + sites.conversion(x);
    if (t < gamma) {
      gamma = t;
      converted = x;
    }
  }
  std::size_t front = converted;
  while (sites.arrival(front + 1) <= gamma) ++front;
  JumpChainCoupling out;
  out.start = {front, converted};

  // Primed state at gamma'.
  const double gamma_prime = sites.arrival_prime(converted) + sites.conversion_prime(converted);
  std::size_t last = 1;
  while (sites.arrival_prime(last + 1) <= gamma_prime) ++last;
  std::vector<double> infection(last + 1, inf);
  infection[last] = sites.conversion_prime(last);
  for (std::size_t x = last; x-- > 1;)
    infection[x] = std::min(sites.conversion_prime(x),
                            sites.red_in_prime(x + 1) + infection[x + 1] + sites.blue_out(x + 1));
  double survival = infection[1];
  std::size_t rightmost_nonwhite = 1;
  std::size_t rightmost_blue = survival <= gamma_prime ? 1 : 0;
  for (std::size_t x = 2; x <= last; ++x) {
    const double arrival = sites.arrival_prime(x);
    if (!(arrival <= survival)) break;
    survival = std::min(arrival + infection[x], survival + sites.blue_in(x));
    rightmost_nonwhite = x;
    if (survival <= gamma_prime) rightmost_blue = x;
  }
  out.start_prime = {rightmost_nonwhite, rightmost_blue};

  // Step 2.
  std::uint64_t y = out.start.height();
  std::uint64_t yp = out.start_prime.height();
  while (y > 0) {
    if (yp == 0) {
      // The primed chain has stopped; the other runs on its own marginal.
      const std::uint64_t next = jump_chain_step(y, {lambda, alpha}, rng);
      if (next > y) ++out.upsteps;
      y = next;
      out.heights.emplace_back(y, yp);
      continue;
    }
    enum class Clock { Blue, RedBoth, RedOnly, ConvertBoth, ConvertPrimeOnly };
    double best = rng.exponential(1.0);
    Clock which = Clock::Blue;
    std::uint64_t index = 0;
    auto offer = [&](double t, Clock c, std::uint64_t i) {
      if (t < best) {
        best = t;
        which = c;
        index = i;
      }
    };
    offer(rng.exponential(lambda_prime), Clock::RedBoth, 0);
    offer(rng.exponential(lambda - lambda_prime), Clock::RedOnly, 0);
    for (std::uint64_t i = 1; i <= y; ++i) offer(rng.exponential(alpha), Clock::ConvertBoth, i);
    for (std::uint64_t i = 1; i <= yp; ++i)
      offer(rng.exponential(alpha_prime - alpha), Clock::ConvertPrimeOnly, i);

    switch (which) {
      case Clock::Blue:
        --y;
        --yp;
        break;
      case Clock::RedBoth:
        ++y;
        ++yp;
        ++out.upsteps;
        ++out.upsteps_prime;
        break;
      case Clock::RedOnly:
        ++y;
        ++out.upsteps;
        break;
      case Clock::ConvertBoth:
        // i-th red from the front converts; the primed chain only has y'.
        y = index - 1;
        if (index <= yp) yp = index - 1;
        break;
      case Clock::ConvertPrimeOnly:
        yp = index - 1;
        break;
    }
    out.heights.emplace_back(y, yp);
  }

  out.pair = {out.start.rightmost_red + out.upsteps,
              out.start_prime.rightmost_red + out.upsteps_prime,
              {lambda, alpha, 0},
              {lambda_prime, alpha_prime, 0},
              rng.seed()};
  return out;
}

// ---------------------------------------------------------------------------
// Star, monotone in n, lambda and alpha
// ---------------------------------------------------------------------------

struct StarCoupling {
  CoupledPair pair;
  StarRace race;
  StarRace race_prime;
};

/// Death-process increments Exp((n-i+1) lambda) and Exp((n'-i+1) lambda')
/// share a uniform for i <= n'; delays T_i = Exp(alpha) + Exp(1) and
/// T'_i = Exp(alpha') + Exp(1) share both parts.
inline StarCoupling star_coupling(std::uint64_t n, std::uint64_t n_prime, double lambda,
                                  double lambda_prime, double alpha, double alpha_prime,
                                  RandomStream& rng) {
  require_order(n >= n_prime, "star coupling needs n >= n'");
  require_order(lambda >= lambda_prime && lambda_prime > 0.0, "star coupling needs lambda >= lambda' > 0");
  require_order(alpha_prime >= alpha && alpha >= 0.0, "star coupling needs 0 <= alpha <= alpha'");
  StarCoupling out;
  StarRace& a = out.race;
  StarRace& b = out.race_prime;
  a.sigma.assign(n + 1, 0.0);
  b.sigma.assign(n_prime + 1, 0.0);
  for (std::uint64_t i = 1; i <= n; ++i) {
    const double u = rng.open_uniform();
    const double rate = static_cast<double>(n - i + 1) * lambda;
    a.sigma[i] = a.sigma[i - 1] + RandomStream::exponential_from_uniform(u, rate);
    if (i <= n_prime)
      b.sigma[i] = b.sigma[i - 1] + RandomStream::exponential_from_uniform(
                                        u, static_cast<double>(n_prime - i + 1) * lambda_prime);
  }
  a.delays.assign(n + 1, 0.0);
  b.delays.assign(n_prime + 1, 0.0);
  {
    auto [t0, t0p] = coupled_exponentials(rng.open_uniform(), alpha, alpha_prime);
    a.delays[0] = t0;
    b.delays[0] = t0p;
  }
  for (std::uint64_t i = 1; i <= n; ++i) {
    auto [c, cp] = coupled_exponentials(rng.open_uniform(), alpha, alpha_prime);
    const double chase = rng.exponential(1.0);
    a.delays[i] = c + chase;
    if (i <= n_prime) b.delays[i] = cp + chase;
  }
  for (StarRace* r : {&a, &b}) {
    r->running_min = running_minimum(r->sigma, r->delays);
    r->stop_index = star_stop_index(r->sigma, r->running_min);
  }
  out.pair = {a.damage(), b.damage(), {lambda, alpha, n}, {lambda_prime, alpha_prime, n_prime},
              rng.seed()};
  return out;
}

// ---------------------------------------------------------------------------
// Complete graph, monotone in n, lambda and alpha
// ---------------------------------------------------------------------------

struct CompleteCoupling {
  CoupledPair pair;
  BirthDeathTrace trace;
  BirthDeathTrace trace_prime;
};

/// Death increments Exp(lambda (n-1-i)) and Exp(lambda' (n'-1-i)) share a
/// uniform for i <= n'-2; birth increments Exp(i + alpha) and Exp(i + alpha')
/// share a uniform for every i.
inline CompleteCoupling complete_coupling(std::uint64_t n, std::uint64_t n_prime, double lambda,
                                          double lambda_prime, double alpha, double alpha_prime,
                                          RandomStream& rng) {
  require_order(n >= n_prime && n_prime >= 1, "complete coupling needs n >= n' >= 1");
  require_order(lambda >= lambda_prime && lambda_prime > 0.0,
                "complete coupling needs lambda >= lambda' > 0");
  require_order(alpha_prime >= alpha && alpha > 0.0, "complete coupling needs 0 < alpha <= alpha'");
  CompleteCoupling out;
  BirthDeathTrace& a = out.trace;
  BirthDeathTrace& b = out.trace_prime;
  a.sigma.assign(n, 0.0);
  b.sigma.assign(n_prime, 0.0);
  for (std::uint64_t i = 0; i + 1 < n; ++i) {
    const double u = rng.open_uniform();
    a.sigma[i + 1] =
        a.sigma[i] + RandomStream::exponential_from_uniform(u, lambda * static_cast<double>(n - 1 - i));
    if (i + 1 < n_prime)
      b.sigma[i + 1] = b.sigma[i] + RandomStream::exponential_from_uniform(
                                        u, lambda_prime * static_cast<double>(n_prime - 1 - i));
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto done = [inf](const BirthDeathTrace& t, std::size_t nn) {
    const std::size_t k = t.rho.size() - 1;
    if (k == 0) return false;
    const double s = k < nn ? t.sigma[k] : inf;
    return k >= nn || t.rho[k] < s;
  };
  a.rho.push_back(0.0);
  b.rho.push_back(0.0);
  for (std::uint64_t i = 0; !(done(a, n) && done(b, n_prime)); ++i) {
    const double u = rng.open_uniform();
    const double base = static_cast<double>(i);
    auto [da, db] = coupled_exponentials(u, base + alpha, base + alpha_prime);
    // A sequence that already reached its stopping index keeps growing so
    // both share the same uniforms index by index; extra terms are inert.
    a.rho.push_back(a.rho.back() + da);
    b.rho.push_back(b.rho.back() + db);
  }
  finish_birth_death(a, n);
  finish_birth_death(b, n_prime);
  out.pair = {a.damage(n), b.damage(n_prime), {lambda, alpha, n},
              {lambda_prime, alpha_prime, n_prime}, rng.seed()};
  return out;
}

// ---------------------------------------------------------------------------
// Audit
// ---------------------------------------------------------------------------

struct DominanceReport {
  std::uint64_t n_pairs = 0;
  std::uint64_t n_violations = 0;
  bool pass = false;
};

inline DominanceReport verify_dominance(std::span<const CoupledPair> pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no coupled pairs to audit");
  DominanceReport r;
  r.n_pairs = pairs.size();
  for (const auto& p : pairs)
    if (!p.dominance_holds()) ++r.n_violations;
  r.pass = r.n_violations == 0;
  return r;
}

}  // namespace chasesim
