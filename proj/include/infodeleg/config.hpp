#pragma once

// Run configuration: a JSON object validated before any computation. Every
// object level rejects keys it does not know.
//
// {
//   "prior":          {"kind": "uniform" | "beta" | "piecewise_polynomial" | "tabulated", "params": {...}},
//   "outside_option": {... same ...},
//   "objective":      {"kind": "dm_value" | "welfare_weighted" | "custom", "lambda": 0.5,
//                      "polynomial": [c0, c1, ...]},
//   "oracle":         {"n": 201, "epsilon": 1e-3},
//   "sweep":          {"points": 257},
//   "verify":         {"certificate_points": 50, "oracle_points": 12},
//   "scenario":       {"name": "uninformed_dm", "r0": 0.7} | {"name": "m_shaped", "y1": 0.3, "y2": 0.7, "depth": 0.5},
//   "output_dir":     "out"
// }

#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "infodeleg/delegation.hpp"
#include "infodeleg/distributions.hpp"
#include "infodeleg/errors.hpp"

namespace infodeleg {

struct ObjectiveSpec {
  std::string kind = "dm_value";
  double lambda = 1.0;
  std::vector<double> polynomial;  // custom: u(m) = sum c_k m^k

  DesignerObjective build() const {
    if (kind == "dm_value") return DesignerObjective::dm_value();
    if (kind == "welfare_weighted") return DesignerObjective::welfare_weighted(lambda);
    auto c = polynomial;
    auto u = [c](double m) {
      double v = 0.0;
      for (std::size_t k = c.size(); k-- > 0;) v = v * m + c[k];
      return v;
    };
    auto du = [c](double m) {
      double v = 0.0;
      for (std::size_t k = c.size(); k-- > 1;) v = v * m + static_cast<double>(k) * c[k];
      return v;
    };
    return DesignerObjective::custom(u, du);
  }
};

struct OracleSpec {
  std::size_t n = 201;
  double epsilon = 1e-3;  // virtual-value weight
};

struct ScenarioSpec {
  std::string name;  // empty: none
  double r0 = 0.7;
  double y1 = 0.3;
  double y2 = 0.7;
  double depth = 0.5;
};

struct RunConfig {
  DistributionKind prior = Uniform{};
  DistributionKind outside_option = BetaLike{2.0, 2.0};
  ObjectiveSpec objective;
  OracleSpec oracle;
  std::size_t sweep_points = 257;
  std::size_t certificate_points = 50;
  std::size_t oracle_points = 12;
  ScenarioSpec scenario;
  std::string output_dir = "out";
};

namespace config_detail {

using nlohmann::json;

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where + ": not finite");
  return v;
}

inline double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) throw ConfigError(where + ": must be positive");
  return v;
}

inline std::size_t count(const json& j, const std::string& where, std::size_t min) {
  if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(min)) {
    throw ConfigError(where + ": expected an integer >= " + std::to_string(min));
  }
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

inline DistributionKind distribution(const json& j, const std::string& where) {
  only_keys(j, where, {"kind", "params"});
  if (!j.contains("kind")) throw ConfigError(where + ": missing 'kind'");
  const auto kind = text(j["kind"], where + ".kind");
  const json params = j.value("params", json::object());
  const std::string pw = where + ".params";
  if (kind == "uniform") {
    only_keys(params, pw, {});
    return Uniform{};
  }
  if (kind == "beta") {
    only_keys(params, pw, {"a", "b"});
    BetaLike b;
    if (params.contains("a")) b.a = positive(params["a"], pw + ".a");
    if (params.contains("b")) b.b = positive(params["b"], pw + ".b");
    return b;
  }
  if (kind == "piecewise_polynomial") {
    only_keys(params, pw, {"breaks", "coeffs"});
    if (!params.contains("breaks") || !params.contains("coeffs")) {
      throw ConfigError(pw + ": needs 'breaks' and 'coeffs'");
    }
    PiecewisePolynomial p;
    p.breaks = numbers(params["breaks"], pw + ".breaks");
    if (!params["coeffs"].is_array()) throw ConfigError(pw + ".coeffs: expected an array of arrays");
    for (std::size_t i = 0; i < params["coeffs"].size(); ++i) {
      p.density_coeffs.push_back(numbers(params["coeffs"][i], pw + ".coeffs[" + std::to_string(i) + "]"));
    }
    return p;
  }
  if (kind == "tabulated") {
    only_keys(params, pw, {"states", "cdf"});
    if (!params.contains("states") || !params.contains("cdf")) {
      throw ConfigError(pw + ": needs 'states' and 'cdf'");
    }
    return Tabulated{numbers(params["states"], pw + ".states"), numbers(params["cdf"], pw + ".cdf")};
  }
  throw ConfigError(where + ".kind: unknown distribution kind '" + kind + "'");
}

inline ObjectiveSpec objective(const json& j) {
  only_keys(j, "objective", {"kind", "lambda", "polynomial"});
  ObjectiveSpec o;
  if (j.contains("kind")) o.kind = text(j["kind"], "objective.kind");
  if (o.kind == "welfare_weighted") {
    if (!j.contains("lambda")) throw ConfigError("objective: welfare_weighted needs 'lambda'");
    o.lambda = number(j["lambda"], "objective.lambda");
    if (o.lambda < 0.0 || o.lambda > 1.0) throw ConfigError("objective.lambda: must lie in [0, 1]");
  } else if (j.contains("lambda")) {
    throw ConfigError("objective.lambda: only valid for welfare_weighted");
  }
  if (o.kind == "custom") {
    if (!j.contains("polynomial")) throw ConfigError("objective: custom needs 'polynomial'");
    o.polynomial = numbers(j["polynomial"], "objective.polynomial");
  } else if (j.contains("polynomial")) {
    throw ConfigError("objective.polynomial: only valid for custom");
  }
  if (o.kind != "dm_value" && o.kind != "welfare_weighted" && o.kind != "custom") {
    throw ConfigError("objective.kind: unknown objective '" + o.kind + "'");
  }
  return o;
}

inline ScenarioSpec scenario(const json& j) {
  only_keys(j, "scenario", {"name", "r0", "y1", "y2", "depth"});
  ScenarioSpec s;
  if (!j.contains("name")) throw ConfigError("scenario: missing 'name'");
  s.name = text(j["name"], "scenario.name");
  if (j.contains("r0")) s.r0 = number(j["r0"], "scenario.r0");
  if (j.contains("y1")) s.y1 = number(j["y1"], "scenario.y1");
  if (j.contains("y2")) s.y2 = number(j["y2"], "scenario.y2");
  if (j.contains("depth")) s.depth = number(j["depth"], "scenario.depth");
  return s;
}

}  // namespace config_detail

inline void validate_scenario(const ScenarioSpec& s) {
  if (s.name.empty()) return;
  if (s.name == "uninformed_dm") {
    if (s.r0 < 0.0 || s.r0 > 1.0) throw ConfigError("scenario.r0: must lie in [0, 1]");
  } else if (s.name == "m_shaped") {
    if (!(0.0 < s.y1 && s.y1 < s.y2 && s.y2 < 1.0)) throw ConfigError("scenario: needs 0 < y1 < y2 < 1");
    if (!(s.depth > 0.0 && s.depth < 1.0)) throw ConfigError("scenario.depth: must lie in (0, 1)");
  } else {
    throw ConfigError("scenario.name: unknown scenario '" + s.name + "'");
  }
}

inline void validate_grid(std::size_t n) {
  if (n < 51 || n % 2 == 0) throw ConfigError("oracle.n: must be odd and >= 51");
}

inline RunConfig parse_config(const nlohmann::json& j) {
  using namespace config_detail;
  only_keys(j, "config", {"prior", "outside_option", "objective", "oracle", "sweep", "verify", "scenario", "output_dir"});
  RunConfig c;
  if (!j.contains("prior")) throw ConfigError("config: missing 'prior'");
  if (!j.contains("outside_option")) throw ConfigError("config: missing 'outside_option'");
  c.prior = distribution(j["prior"], "prior");
  c.outside_option = distribution(j["outside_option"], "outside_option");
  if (j.contains("objective")) c.objective = objective(j["objective"]);
  if (j.contains("oracle")) {
    only_keys(j["oracle"], "oracle", {"n", "epsilon"});
    if (j["oracle"].contains("n")) c.oracle.n = count(j["oracle"]["n"], "oracle.n", 1);
    if (j["oracle"].contains("epsilon")) c.oracle.epsilon = positive(j["oracle"]["epsilon"], "oracle.epsilon");
  }
  validate_grid(c.oracle.n);
  if (j.contains("sweep")) {
    only_keys(j["sweep"], "sweep", {"points"});
    if (j["sweep"].contains("points")) c.sweep_points = count(j["sweep"]["points"], "sweep.points", 2);
  }
  if (j.contains("verify")) {
    only_keys(j["verify"], "verify", {"certificate_points", "oracle_points"});
    const auto& v = j["verify"];
    if (v.contains("certificate_points")) c.certificate_points = count(v["certificate_points"], "verify.certificate_points", 2);
    if (v.contains("oracle_points")) c.oracle_points = count(v["oracle_points"], "verify.oracle_points", 2);
  }
  if (j.contains("scenario")) c.scenario = scenario(j["scenario"]);
  validate_scenario(c.scenario);
  if (j.contains("output_dir")) c.output_dir = text(j["output_dir"], "output_dir");

  // Build once so that distribution and objective errors surface as config errors.
  try {
    (void)PriorDistribution(Distribution(c.prior));
    (void)OutsideOption(Distribution(c.outside_option));
    (void)c.objective.build();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace infodeleg
