#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "chasesim/bounds.hpp"
#include "chasesim/couplings.hpp"
#include "chasesim/harness.hpp"
#include "chasesim/process.hpp"
#include "chasesim/stats.hpp"

// JSON views of the result types.

namespace chasesim {

using json = nlohmann::ordered_json;

inline json to_json(const RunOutcome& r) {
  json j;
  j["damage"] = r.damage;
  j["status"] = std::string(to_string(r.status));
  j["fixation_time"] = r.fixation_time ? json(*r.fixation_time) : json(nullptr);
  j["n_conversions"] = r.n_conversions;
  j["n_predations"] = r.n_predations;
  j["n_red_spreads"] = r.n_red_spreads;
  j["seed"] = r.seed;
  return j;
}

inline json to_json(const ChiSquareResult& r) {
  return {{"chi2", r.chi2}, {"dof", r.dof}, {"p_value", r.p_value}, {"pass", r.pass}};
}

inline json to_json(const DominanceReport& r) {
  return {{"n_pairs", r.n_pairs}, {"n_violations", r.n_violations}, {"pass", r.pass}};
}

inline json to_json(const BoundReport& r) {
  return {{"lambda_lower", r.lambda_lower}, {"lambda_upper", r.lambda_upper}};
}

inline json to_json(const ExtendedReal& x) {
  return x.infinite ? json("Infinite") : json(x.value);
}

inline json to_json(const CrossingEstimate& c) {
  json pairs = json::array();
  for (const auto& p : c.pairs) pairs.push_back({{"L1", p.L1}, {"L2", p.L2}, {"crossing", p.crossing}});
  return {{"pairs", pairs}, {"estimate", c.point_estimate}, {"spread", c.spread}};
}

inline json to_json(const SweepSpec& s) {
  return {{"family", s.family},
          {"vary", std::string(to_string(s.vary))},
          {"fixed_value", s.fixed_value},
          {"grid", s.grid},
          {"sizes", s.sizes},
          {"samples_per_point", s.samples_per_point},
          {"base_seed", s.base_seed},
          {"geometry", std::string(to_string(s.geometry))}};
}

/// Reads the fields present in `j` over `s`; unknown keys are rejected.
inline void merge_sweep_spec(const json& j, SweepSpec& s) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "sweep config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "family") s.family = value.get<std::string>();
      else if (key == "vary") s.vary = parse_vary(value.get<std::string>());
      else if (key == "fixed_value") s.fixed_value = value.get<double>();
      else if (key == "grid") s.grid = value.get<std::vector<double>>();
      else if (key == "sizes") s.sizes = value.get<std::vector<std::uint64_t>>();
      else if (key == "samples_per_point") s.samples_per_point = value.get<std::uint64_t>();
      else if (key == "base_seed") s.base_seed = value.get<std::uint64_t>();
      else if (key == "geometry") s.geometry = parse_geometry(value.get<std::string>());
      else throw Error(ErrorCode::InvalidSpec, "unknown sweep config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("sweep config: ") + e.what());
  }
}

inline SweepSpec sweep_spec_from_json(const json& j) {
  SweepSpec s;
  merge_sweep_spec(j, s);
  return s;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, origin + ": " + e.what());
  }
}

}  // namespace chasesim
