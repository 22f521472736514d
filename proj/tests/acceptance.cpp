// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Pass criterion numbers as arguments to run a subset.
//
// Tolerances and sample sizes are fixed here on purpose; do not tune them to
// make a run pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "chasesim/chasesim.hpp"

using namespace chasesim;

namespace {

// criterion 1
constexpr double kLambdaGridLo = 1.7, kLambdaGridHi = 2.3, kLambdaStep = 0.05;
constexpr double kLambdaCritLo = 1.85, kLambdaCritHi = 2.10;
// criterion 2
constexpr double kAlphaGridLo = 0.15, kAlphaGridHi = 0.40, kAlphaStep = 0.025;
constexpr double kAlphaCritLo = 0.22, kAlphaCritHi = 0.33;
constexpr std::uint64_t kSweepSamples = 5000;
const std::vector<std::uint64_t> kSweepSizes{32, 64, 128};
// criteria 3-6, 8
constexpr std::uint64_t kOracleSamples = 100000;
constexpr std::size_t kPathSites = 200;
constexpr double kMaxTruncationRate = 1e-3;
// criterion 7
constexpr std::uint64_t kCoupledPairs = 10000;
// criterion 9
constexpr std::uint64_t kSubcriticalReplicas = 10000;
constexpr double kDepthRelTolerance = 0.02;
constexpr double kSigmas = 3.0;
// criterion 10
constexpr std::uint64_t kSupercriticalReplicas = 1000;
constexpr double kMinTruncationFraction = 0.5;
// criterion 11
constexpr double kSixPlaces = 0.5e-6;
// criterion 12
constexpr std::uint64_t kAlphaZeroReplicas = 1000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> grid_of(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<int>(std::lround((hi - lo) / step));
  // round to 1e-9 so 1.7 + 3*0.05 prints as 1.85, not 1.8500000000000001
  for (int i = 0; i <= n; ++i) g.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  return g;
}

// Damage samples from direct simulation, one stream per replica.
std::vector<std::uint64_t> direct_damage(const Graph& g, const ProcessParams& p, std::uint64_t n,
                                         std::uint64_t seed, const RunLimits& limits = {},
                                         std::uint64_t* truncated = nullptr) {
  const auto outs = run_replicas(
      [&] {
        return [sim = std::make_shared<Simulator>(g, p, InitSpec::StandardRoot, limits)](
                   std::uint64_t, RandomStream& rng) { return sim->run(rng); };
      },
      n, seed);
  std::vector<std::uint64_t> xs;
  xs.reserve(n);
  for (const auto& o : outs) {
    xs.push_back(o.damage);
    if (truncated && o.status == RunStatus::TruncationHit) ++*truncated;
  }
  return xs;
}

template <class F>
std::vector<std::uint64_t> sampled(std::uint64_t n, std::uint64_t seed, F f) {
  return run_replicas([&] { return [&](std::uint64_t, RandomStream& rng) -> std::uint64_t { return f(rng); }; }, n,
                      seed);
}

Verdict chi_verdict(const ChiSquareResult& r, const std::string& extra = "") {
  return {r.pass, fmt("chi2 %.2f dof %zu p %.4f", r.chi2, static_cast<std::size_t>(r.dof), r.p_value) + extra};
}

Verdict crossing_criterion(Vary vary, double fixed, double lo, double hi, double step, double want_lo,
                           double want_hi, std::uint64_t seed) {
  SweepSpec spec;
  spec.vary = vary;
  spec.fixed_value = fixed;
  spec.grid = grid_of(lo, hi, step);
  spec.sizes = kSweepSizes;
  spec.samples_per_point = kSweepSamples;
  spec.base_seed = seed;
  spec.geometry = Geometry::Cylinder;
  const auto rows = sweep(spec);
  for (const auto& r : rows)
    std::printf("    L=%-4llu %s=%-6g p_hat=%.4f [%.4f, %.4f]\n", static_cast<unsigned long long>(r.L),
                std::string(to_string(vary)).c_str(), r.value, r.p_hat, r.ci_low, r.ci_high);
  try {
    const CrossingEstimate est = estimate_crossing(rows);
    std::string pairs;
    for (const auto& p : est.pairs)
      pairs += fmt(" (%llu,%llu)->%.4f", static_cast<unsigned long long>(p.L1),
                   static_cast<unsigned long long>(p.L2), p.crossing);
    const bool ok = est.point_estimate >= want_lo && est.point_estimate <= want_hi;
    return {ok, fmt("crossing %.4f (spread %.4f) want [%.2f, %.2f];", est.point_estimate, est.spread, want_lo,
                    want_hi) +
                    pairs};
  } catch (const Error& e) {
    return {false, std::string("crossing failed: ") + e.what()};
  }
}

Verdict criterion_1() {
  return crossing_criterion(Vary::Lambda, 1.0, kLambdaGridLo, kLambdaGridHi, kLambdaStep, kLambdaCritLo,
                            kLambdaCritHi, 101);
}

Verdict criterion_2() {
  return crossing_criterion(Vary::Alpha, 1.0, kAlphaGridLo, kAlphaGridHi, kAlphaStep, kAlphaCritLo, kAlphaCritHi,
                            102);
}

Verdict criterion_3() {
  const ProcessParams p{1, 1};
  const Graph path = build_path(kPathSites);
  RunLimits limits;
  limits.boundary_set.assign(path.boundary().begin(), path.boundary().end());
  std::uint64_t truncated = 0;
  const auto direct = direct_damage(path, p, kOracleSamples, 103, limits, &truncated);
  const auto reduced = sampled(kOracleSamples, 203, [&](RandomStream& r) { return sample_X_via_jump_chain(p, r); });
  const double rate = static_cast<double>(truncated) / kOracleSamples;
  Verdict v = chi_verdict(distribution_compare(reduced, direct), fmt("; truncation rate %.2g", rate));
  v.pass = v.pass && rate < kMaxTruncationRate;
  return v;
}

Verdict criterion_4() {
  const ProcessParams p{1, 1};
  const auto direct = direct_damage(build_star(5), p, kOracleSamples, 104);
  const auto reduced = sampled(kOracleSamples, 204, [&](RandomStream& r) { return star_sample_X(5, p, r); });
  return chi_verdict(distribution_compare(reduced, direct));
}

Verdict criterion_5() {
  const ProcessParams p{1, 1};
  const auto direct = direct_damage(build_complete(6), p, kOracleSamples, 105);
  const auto reduced = sampled(kOracleSamples, 205, [&](RandomStream& r) { return complete_sample_X(6, p, r); });
  return chi_verdict(distribution_compare(reduced, direct));
}

Verdict criterion_6() {
  const ProcessParams p{1, 1};
  const Graph g = build_regular_tree(2, 4, TreeRoot::Rooted);
  const RootedTree t(g);
  const auto direct = direct_damage(g, p, kOracleSamples, 106);
  const auto reduced = sampled(kOracleSamples, 206, [&](RandomStream& r) { return tree_passage_sample(t, p, r).damage; });
  return chi_verdict(distribution_compare(reduced, direct));
}

Verdict criterion_7() {
  struct Point {
    std::string coupling;
    std::function<CoupledPair(RandomStream&)> draw;
  };
  const RootedTree tree(build_regular_tree(2, 8, TreeRoot::Rooted));
  std::vector<Point> points{
      {"tree-alpha l=1 a=0.5 a'=1", [&](RandomStream& r) { return tree_alpha_coupling(tree, 1, 0.5, 1, r).pair; }},
      {"tree-alpha l=1 a=1 a'=2", [&](RandomStream& r) { return tree_alpha_coupling(tree, 1, 1, 2, r).pair; }},
      {"tree-alpha l=2 a=0.2 a'=3", [&](RandomStream& r) { return tree_alpha_coupling(tree, 2, 0.2, 3, r).pair; }},
      {"jumpchain l=2 l'=1 a=0.5 a'=1", [](RandomStream& r) { return jumpchain_coupling(2, 1, 0.5, 1, r).pair; }},
      {"jumpchain l=1.5 l'=1.5 a=0.5 a'=2",
       [](RandomStream& r) { return jumpchain_coupling(1.5, 1.5, 0.5, 2, r).pair; }},
      {"jumpchain l=3 l'=1 a=1 a'=1", [](RandomStream& r) { return jumpchain_coupling(3, 1, 1, 1, r).pair; }},
      {"star n=10 n'=5 l=2 l'=1 a=0.5 a'=1",
       [](RandomStream& r) { return star_coupling(10, 5, 2, 1, 0.5, 1, r).pair; }},
      {"star n=8 n'=8 l=1 l'=0.5 a=1 a'=1", [](RandomStream& r) { return star_coupling(8, 8, 1, 0.5, 1, 1, r).pair; }},
      {"star n=6 n'=3 l=1 l'=1 a=0.3 a'=2", [](RandomStream& r) { return star_coupling(6, 3, 1, 1, 0.3, 2, r).pair; }},
      {"complete n=8 n'=6 l=2 l'=1 a=0.5 a'=1",
       [](RandomStream& r) { return complete_coupling(8, 6, 2, 1, 0.5, 1, r).pair; }},
      {"complete n=6 n'=6 l=1.5 l'=1 a=1 a'=1",
       [](RandomStream& r) { return complete_coupling(6, 6, 1.5, 1, 1, 1, r).pair; }},
      {"complete n=10 n'=4 l=1 l'=1 a=0.5 a'=2",
       [](RandomStream& r) { return complete_coupling(10, 4, 1, 1, 0.5, 2, r).pair; }},
  };
  bool ok = true;
  std::uint64_t total_violations = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto pairs = run_replicas([&] { return [&](std::uint64_t, RandomStream& r) { return points[i].draw(r); }; },
                                    kCoupledPairs, derive_seed(107, {i}));
    const DominanceReport rep = verify_dominance(pairs);
    std::printf("    %-40s pairs %llu violations %llu\n", points[i].coupling.c_str(),
                static_cast<unsigned long long>(rep.n_pairs), static_cast<unsigned long long>(rep.n_violations));
    ok = ok && rep.pass;
    total_violations += rep.n_violations;
  }
  return {ok, fmt("%zu grid points, %llu violations", points.size(), static_cast<unsigned long long>(total_violations))};
}

Verdict criterion_8() {
  const ProcessParams p{1, 1};
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 108;
  for (const auto& [name, g] : {std::pair<std::string, Graph>{"P5", build_path(5)}, {"K4", build_complete(4)}}) {
    const auto fast = direct_damage(g, p, kOracleSamples, seed++);
    const auto slow = sampled(kOracleSamples, seed++, [&](RandomStream& r) {
      return per_clock_run(g, p, InitSpec::StandardRoot, {}, r).damage;
    });
    const auto r = distribution_compare(fast, slow);
    ok = ok && r.pass;
    detail += fmt("%s: chi2 %.2f dof %zu p %.4f; ", name.c_str(), r.chi2, static_cast<std::size_t>(r.dof), r.p_value);
  }
  return {ok, detail};
}

Verdict criterion_9() {
  const ProcessParams p{0.5, 1};
  const auto bound = expected_damage_bound(0.5, 1, 3);
  auto mean_at = [&](std::size_t depth, std::uint64_t seed) {
    const auto xs = direct_damage(build_regular_tree(2, depth, TreeRoot::Rooted), p, kSubcriticalReplicas, seed);
    return mean_and_error(std::span<const std::uint64_t>(xs));
  };
  const MeanEstimate m12 = mean_at(12, 109);
  const MeanEstimate m10 = mean_at(10, 209);
  const double rel = std::abs(m12.mean - m10.mean) / m10.mean;
  const bool below = !bound.infinite && m12.mean - kSigmas * m12.std_error < bound.value &&
                     m10.mean - kSigmas * m10.std_error < bound.value;
  return {rel < kDepthRelTolerance && below,
          fmt("mean depth12 %.4f +- %.4f, depth10 %.4f +- %.4f, rel diff %.4f (< %.2f), bound %.4f",
              m12.mean, m12.std_error, m10.mean, m10.std_error, rel, kDepthRelTolerance, bound.value)};
}

Verdict criterion_10() {
  const double lambda = 25.0;
  const double upper = lambda_upper(3, 1, 0.5);
  const Graph g = build_regular_tree(2, 12, TreeRoot::Rooted);
  RunLimits limits;
  limits.boundary_set.assign(g.boundary().begin(), g.boundary().end());
  std::uint64_t truncated = 0;
  direct_damage(g, {lambda, 1}, kSupercriticalReplicas, 110, limits, &truncated);
  const double frac = static_cast<double>(truncated) / kSupercriticalReplicas;
  return {lambda > upper && frac > kMinTruncationFraction,
          fmt("lambda %.1f > upper %.4f; boundary-hit fraction %.3f (> %.1f)", lambda, upper, frac,
              kMinTruncationFraction)};
}

Verdict criterion_11() {
  const double lower = lambda_lower(3, 1);
  const double upper = lambda_upper(3, 1, 0.5);
  const double want_upper = 4.0 / (1.0 - std::pow(2.0, -1.0 / 3.0));
  const double survival = path_survival_bound(1, 1, 3);
  const bool ok = lower == 1.0 && std::abs(upper - want_upper) < kSixPlaces && survival == 0.125;
  return {ok, fmt("lambda_lower %.6f, lambda_upper %.6f (closed form %.6f), path survival %.6f", lower, upper,
                  want_upper, survival)};
}

Verdict criterion_12() {
  const ProcessParams p{1.3, 0.0};
  const std::vector<std::pair<std::string, Graph>> graphs{
      {"path", build_path(30)},
      {"star", build_star(12)},
      {"complete", build_complete(10)},
      {"tree", build_regular_tree(2, 6, TreeRoot::Rooted)},
      {"tree-regular", build_regular_tree(2, 5, TreeRoot::Regular)},
      {"cylinder", build_torus(10, Geometry::Cylinder)},
      {"torus", build_torus(10, Geometry::Torus)},
  };
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 112;
  for (const auto& [name, g] : graphs) {
    const auto counts = run_replicas(
        [&] {
          return [sim = std::make_shared<Simulator>(g, p, InitSpec::StandardRoot)](std::uint64_t, RandomStream& rng) {
            const RunOutcome r = sim->run(rng);
            const auto& c = sim->configuration();
            std::uint64_t blue = 0;
            for (VertexId v = 0; v < c.graph().size(); ++v) blue += is_blue(c.state(v));
            return std::array<std::uint64_t, 3>{blue, r.n_conversions, r.n_predations};
          };
        },
        kAlphaZeroReplicas, seed++);
    std::uint64_t blue = 0, conv = 0;
    for (const auto& c : counts) {
      blue += c[0];
      conv += c[1] + c[2];
    }
    ok = ok && blue == 0 && conv == 0;
    detail += fmt("%s %llu/%llu ", name.c_str(), static_cast<unsigned long long>(blue),
                  static_cast<unsigned long long>(conv));
  }
  return {ok, "blue/blue-events per family: " + detail};
}

Verdict criterion_13() {
  SweepSpec spec;
  spec.vary = Vary::Lambda;
  spec.fixed_value = 1.0;
  spec.grid = {1.6, 1.9, 2.2};
  spec.sizes = {8, 12};
  spec.samples_per_point = 400;
  spec.base_seed = 113;
  const std::string reference = sweep_csv(sweep(spec, 1));
  bool ok = true;
  for (unsigned w : {2u, 3u, 8u}) ok = ok && sweep_csv(sweep(spec, w)) == reference;
  SweepSpec alpha = spec;
  alpha.vary = Vary::Alpha;
  alpha.grid = {0.2, 0.3};
  alpha.geometry = Geometry::Torus;
  const std::string ref_alpha = sweep_csv(sweep(alpha, 1));
  ok = ok && sweep_csv(sweep(alpha, 4)) == ref_alpha && sweep_csv(sweep(alpha, 1)) == ref_alpha;
  return {ok, fmt("workers 1,2,3,8 on a lambda sweep and 1,4 on an alpha torus sweep; %zu bytes",
                  reference.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Verdict()>> criteria{criterion_1, criterion_2,  criterion_3,  criterion_4,
                                                       criterion_5, criterion_6,  criterion_7,  criterion_8,
                                                       criterion_9, criterion_10, criterion_11, criterion_12,
                                                       criterion_13};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s  (%.1fs)\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
