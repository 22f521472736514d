#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "chasesim/error.hpp"
#include "chasesim/graph.hpp"
#include "chasesim/process.hpp"
#include "chasesim/random.hpp"
#include "chasesim/stats.hpp"

namespace chasesim {

// ---------------------------------------------------------------------------
// Replica execution
// ---------------------------------------------------------------------------

/// CHASESIM_WORKERS if set to a positive integer, else the hardware count.
inline unsigned default_workers() {
  if (const char* env = std::getenv("CHASESIM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs replicas 0..n-1. `make_task()` is called once per worker and returns
/// a callable `task(std::uint64_t replica, RandomStream&)`, so per-worker
/// buffers are reused across replicas. Replica i draws from
/// RandomStream(seed_of(i)) alone; results are stored by index, which makes
/// the output independent of the worker count and schedule. The first
/// failing replica (by index) has its exception rethrown.
template <class Factory, class SeedOf>
auto run_replicas_seeded(Factory&& make_task, std::uint64_t n, SeedOf&& seed_of,
                         unsigned workers = default_workers()) {
  using Task = decltype(make_task());
  using Result = std::invoke_result_t<Task&, std::uint64_t, RandomStream&>;
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::uint64_t> next{0};
  std::mutex setup_mutex;
  std::exception_ptr setup_error;
  auto work = [&] {
    std::optional<Task> task;
    try {
      task.emplace(make_task());
    } catch (...) {
      std::lock_guard lock(setup_mutex);
      if (!setup_error) setup_error = std::current_exception();
      return;
    }
    for (std::uint64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        RandomStream rng(seed_of(i));
        results[i] = (*task)(i, rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(n, 1)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (setup_error) std::rethrow_exception(setup_error);
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

/// Replica i uses the stream derive_seed(base_seed, {i}).
template <class Factory>
auto run_replicas(Factory&& make_task, std::uint64_t n, std::uint64_t base_seed,
                  unsigned workers = default_workers()) {
  return run_replicas_seeded(
      std::forward<Factory>(make_task), n,
      [base_seed](std::uint64_t i) { return derive_seed(base_seed, {i}); }, workers);
}

// ---------------------------------------------------------------------------
// Escape probability and sweeps
// ---------------------------------------------------------------------------

enum class Vary { Lambda, Alpha };

constexpr std::string_view to_string(Vary v) { return v == Vary::Lambda ? "lambda" : "alpha"; }

inline Vary parse_vary(std::string_view s) {
  if (s == "lambda") return Vary::Lambda;
  if (s == "alpha") return Vary::Alpha;
  throw Error(ErrorCode::InvalidSpec, "vary must be lambda or alpha, got '" + std::string(s) + "'");
}

inline Geometry parse_geometry(std::string_view s) {
  if (s == "cylinder") return Geometry::Cylinder;
  if (s == "torus") return Geometry::Torus;
  throw Error(ErrorCode::InvalidSpec, "geometry must be cylinder or torus, got '" + std::string(s) + "'");
}

inline constexpr std::string_view kSeedScheme = "splitmix64(base;L;grid;replica)";

struct EstimateRow {
  Vary vary = Vary::Lambda;
  double value = 0.0;
  std::uint64_t L = 0;
  std::uint64_t n = 0;
  std::uint64_t escaped = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  /// Set when the row's simulations failed; numeric fields are then void.
  std::optional<std::string> error;
};

/// Escape frequency of the band experiment on an L x L cylinder or torus;
/// replica r of grid point g uses derive_seed(base_seed, {L, g, r}).
inline EstimateRow escape_probability(const Graph& torus, const ProcessParams& p, std::uint64_t n,
                                      std::uint64_t base_seed, std::uint64_t grid_index = 0,
                                      unsigned workers = default_workers()) {
  if (n == 0) throw Error(ErrorCode::InvalidSpec, "samples per point must be >= 1");
  const std::uint64_t L = torus.rows() ? torus.rows()->width : 0;
  const auto escaped_flags = run_replicas_seeded(
      [&] {
        return [exp = std::make_shared<BandExperiment>(torus, p)](std::uint64_t, RandomStream& rng) {
          return static_cast<char>(exp->run(rng).status == RunStatus::Escaped);
        };
      },
      n, [&](std::uint64_t r) { return derive_seed(base_seed, {L, grid_index, r}); }, workers);
  EstimateRow row;
  row.L = L;
  row.n = n;
  for (char e : escaped_flags) row.escaped += static_cast<std::uint64_t>(e);
  row.p_hat = static_cast<double>(row.escaped) / static_cast<double>(n);
  const Interval ci = wilson_interval(row.escaped, n);
  row.ci_low = ci.low;
  row.ci_high = ci.high;
  return row;
}

inline EstimateRow escape_probability(std::uint64_t L, const ProcessParams& p, std::uint64_t n,
                                      std::uint64_t base_seed, Geometry geometry,
                                      unsigned workers = default_workers()) {
  return escape_probability(build_torus(L, geometry), p, n, base_seed, 0, workers);
}

struct SweepSpec {
  std::string family = "torus-band";
  Vary vary = Vary::Lambda;
  double fixed_value = 1.0;
  std::vector<double> grid;
  std::vector<std::uint64_t> sizes;
  std::uint64_t samples_per_point = 1;
  std::uint64_t base_seed = 0;
  Geometry geometry = Geometry::Cylinder;

  void validate() const {
    if (family != "torus-band")
      throw Error(ErrorCode::InvalidSpec, "family must be torus-band, got '" + family + "'");
    if (grid.empty()) throw Error(ErrorCode::InvalidSpec, "grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
      if (!(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidSpec, "grid must be strictly increasing");
    if (sizes.empty()) throw Error(ErrorCode::InvalidSpec, "sizes is empty");
    for (auto L : sizes)
      if (L < 3) throw Error(ErrorCode::InvalidSpec, "size " + std::to_string(L) + " is below 3");
    if (samples_per_point < 1) throw Error(ErrorCode::InvalidSpec, "samples_per_point must be >= 1");
  }

  ProcessParams params_at(double value) const {
    return vary == Vary::Lambda ? validate_params(value, fixed_value) : validate_params(fixed_value, value);
  }
};

/// One row per (size, grid value), sizes in the given order, grid ascending.
inline std::vector<EstimateRow> sweep(const SweepSpec& spec, unsigned workers = default_workers()) {
  spec.validate();
  std::vector<EstimateRow> rows;
  for (std::uint64_t L : spec.sizes) {
    const Graph torus = build_torus(L, spec.geometry);
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
      EstimateRow row;
      try {
        row = escape_probability(torus, spec.params_at(spec.grid[g]), spec.samples_per_point,
                                 spec.base_seed, g, workers);
      } catch (const Error& e) {
        row = {};
        row.L = L;
        row.n = spec.samples_per_point;
        row.error = e.what();
      }
      row.vary = spec.vary;
      row.value = spec.grid[g];
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSweepHeader = "vary,value,L,n,escaped,p_hat,ci_low,ci_high,seed_scheme";

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string sweep_csv(const std::vector<EstimateRow>& rows) {
  std::ostringstream out;
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.vary) << ',' << format_real(r.value) << ',' << r.L << ',' << r.n << ',';
    if (r.error)
      out << "NA,NA,NA,NA";
    else
      out << r.escaped << ',' << format_real(r.p_hat) << ',' << format_real(r.ci_low) << ','
          << format_real(r.ci_high);
    out << ',' << kSeedScheme << '\n';
  }
  return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_real(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseFailure(ErrorCode::ParseError, line, "not a number: '" + s + "'");
  }
}

}  // namespace detail

/// Reads a sweep table; rows marked NA come back with `error` set.
inline std::vector<EstimateRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<EstimateRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != kSweepHeader) throw ParseFailure(ErrorCode::ParseError, 1, "unexpected header");
      continue;
    }
    const auto cells = detail::split_csv(line);
    if (cells.size() != 9) throw ParseFailure(ErrorCode::ParseError, lineno, "expected 9 columns");
    EstimateRow r;
    try {
      r.vary = parse_vary(cells[0]);
    } catch (const Error& e) {
      throw ParseFailure(ErrorCode::ParseError, lineno, e.what());
    }
    r.value = detail::parse_real(cells[1], lineno);
    r.L = static_cast<std::uint64_t>(detail::parse_real(cells[2], lineno));
    r.n = static_cast<std::uint64_t>(detail::parse_real(cells[3], lineno));
    if (cells[4] == "NA") {
      r.error = "NA";
    } else {
      r.escaped = static_cast<std::uint64_t>(detail::parse_real(cells[4], lineno));
      r.p_hat = detail::parse_real(cells[5], lineno);
      r.ci_low = detail::parse_real(cells[6], lineno);
      r.ci_high = detail::parse_real(cells[7], lineno);
    }
    rows.push_back(r);
  }
  if (lineno == 0) throw ParseFailure(ErrorCode::ParseError, 1, "empty table");
  return rows;
}

// ---------------------------------------------------------------------------
// Curve crossing
// ---------------------------------------------------------------------------

struct PairCrossing {
  std::uint64_t L1 = 0;
  std::uint64_t L2 = 0;
  double crossing = 0.0;
};

struct CrossingEstimate {
  std::vector<PairCrossing> pairs;
  double point_estimate = 0.0;  // median of pairwise crossings
  double spread = 0.0;          // max - min
};

struct Curve {
  std::vector<double> x;
  std::vector<double> y;

  /// Piecewise-linear value at t, t within [x.front(), x.back()].
  double at(double t) const {
    auto it = std::lower_bound(x.begin(), x.end(), t);
    if (it == x.end()) return y.back();
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    if (x[j] == t || j == 0) return y[j];
    const double w = (t - x[j - 1]) / (x[j] - x[j - 1]);
    return y[j - 1] + w * (y[j] - y[j - 1]);
  }
};

/// Location of the single sign change of d over xs. Zeros between the two
/// opposite-signed entries give the crossing directly (the middle of a run of
/// zeros); otherwise the adjacent pair is interpolated linearly.
inline double single_crossing(const std::vector<double>& xs, const std::vector<double>& d) {
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) nonzero.push_back(i);
  std::size_t changes = 0;
  std::size_t at = 0;
  for (std::size_t k = 1; k < nonzero.size(); ++k)
    if ((d[nonzero[k]] > 0.0) != (d[nonzero[k - 1]] > 0.0)) {
      ++changes;
      at = k;
    }
  if (changes == 0) throw Error(ErrorCode::NoCrossing, "difference curve never changes sign");
  if (changes > 1)
    throw Error(ErrorCode::MultipleCrossings,
                std::to_string(changes) + " sign changes; grid too coarse or estimates too noisy");
  const std::size_t i = nonzero[at - 1];
  const std::size_t j = nonzero[at];
  if (j == i + 1) return xs[i] - d[i] * (xs[j] - xs[i]) / (d[j] - d[i]);
  return 0.5 * (xs[i + 1] + xs[j - 1]);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Crossings of p_hat curves for consecutive sizes (ascending L).
inline CrossingEstimate estimate_crossing(const std::vector<EstimateRow>& table) {
  std::map<std::uint64_t, std::map<double, double>> by_size;
  for (const auto& r : table) {
    if (r.error) continue;
    by_size[r.L][r.value] = r.p_hat;
  }
  if (by_size.size() < 2) throw Error(ErrorCode::InvalidSpec, "crossing needs at least two sizes");
  std::vector<std::pair<std::uint64_t, Curve>> curves;
  for (const auto& [L, points] : by_size) {
    if (points.size() < 2)
      throw Error(ErrorCode::InvalidSpec, "size " + std::to_string(L) + " has fewer than two grid points");
    Curve c;
    for (auto [x, y] : points) {
      c.x.push_back(x);
      c.y.push_back(y);
    }
    curves.emplace_back(L, std::move(c));
  }
  CrossingEstimate est;
  for (std::size_t k = 1; k < curves.size(); ++k) {
    const Curve& a = curves[k - 1].second;
    const Curve& b = curves[k].second;
    const double lo = std::max(a.x.front(), b.x.front());
    const double hi = std::min(a.x.back(), b.x.back());
    std::vector<double> xs;
    for (const Curve* c : {&a, &b})
      for (double x : c->x)
        if (x >= lo && x <= hi) xs.push_back(x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    if (xs.size() < 2)
      throw Error(ErrorCode::InvalidSpec, "curves for consecutive sizes do not overlap");
    std::vector<double> d;
    for (double x : xs) d.push_back(a.at(x) - b.at(x));
    est.pairs.push_back({curves[k - 1].first, curves[k].first, single_crossing(xs, d)});
  }
  std::vector<double> values;
  for (const auto& p : est.pairs) values.push_back(p.crossing);
  est.point_estimate = median(values);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  est.spread = *mx - *mn;
  return est;
}

}  // namespace chasesim
