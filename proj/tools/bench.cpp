#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "chasesim/chasesim.hpp"
#include "chasesim/io.hpp"

using namespace chasesim;

int main(int argc, char** argv) {
  const std::uint64_t L = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 64;
  const double lambda = argc > 2 ? std::atof(argv[2]) : 2.0;
  const double alpha = argc > 3 ? std::atof(argv[3]) : 1.0;
  const std::uint64_t n = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 1000;
  const Graph torus = build_torus(L, Geometry::Cylinder);
  BandExperiment exp(torus, validate_params(lambda, alpha));
  std::uint64_t escaped = 0, events = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < n; ++i) {
    RandomStream rng(derive_seed(1, {i}));
    const RunOutcome r = exp.run(rng);
    escaped += r.status == RunStatus::Escaped;
    events += r.n_conversions + r.n_predations + r.n_red_spreads;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("L=%llu runs=%llu escaped=%.4f events/run=%.0f sec=%.3f ns/event=%.1f\n",
              (unsigned long long)L, (unsigned long long)n, double(escaped) / n,
              double(events) / n, secs, 1e9 * secs / double(events));
}
