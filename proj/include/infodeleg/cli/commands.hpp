#pragma once

// Subcommand implementations. Each writes its files under the output
// directory, prints a summary to `out`, and returns a process exit code.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <future>
#include <thread>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "infodeleg/config.hpp"
#include "infodeleg/delegation.hpp"
#include "infodeleg/discrete_oracle.hpp"
#include "infodeleg/ic_verification.hpp"
#include "infodeleg/io.hpp"
#include "infodeleg/mic.hpp"
#include "infodeleg/persuasion.hpp"

namespace infodeleg::cli {

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kAssumptionFailure = 2, kVerificationFailure = 3 };

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::size_t> grid;
  std::optional<std::string> scenario;
};

inline RunConfig apply(RunConfig cfg, const Overrides& o) {
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  if (o.grid) {
    validate_grid(*o.grid);
    cfg.oracle.n = *o.grid;
  }
  if (o.scenario) {
    cfg.scenario.name = *o.scenario;
    validate_scenario(cfg.scenario);
  }
  return cfg;
}

struct Model {
  PriorDistribution prior;
  OutsideOption outside;
  DesignerObjective objective;

  static Model build(const RunConfig& cfg) {
    return {PriorDistribution(Distribution(cfg.prior)), OutsideOption(Distribution(cfg.outside_option)),
            cfg.objective.build()};
  }
  std::function<double(double)> experimenter() const {
    return [g = outside](double m) { return g.cdf(m); };
  }
};

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& file) {
  return std::filesystem::path(cfg.output_dir) / file;
}

inline int cmd_full_delegation(const RunConfig& cfg, std::ostream& out) {
  const auto model = Model::build(cfg);
  const auto report = check_assumptions(model.prior, model.outside);
  const auto fd = solve_full_delegation(model.prior, model.outside);
  const auto& exp = fd.censorship.experiment;
  nlohmann::ordered_json j{
      {"x_star", rounded(fd.pair.x)},
      {"y_star", rounded(fd.pair.y)},
      {"atom_mass", rounded(1.0 - model.prior.cdf(fd.pair.x))},
      {"experimenter_payoff", rounded(expected_payoff(exp, model.experimenter()))},
      {"designer_payoff", rounded(expected_payoff(exp, model.objective.bind(model.outside)))},
      {"root_brackets", fd.root_brackets},
      {"assumptions", to_json(report)},
      {"experiment", to_json(exp)},
  };
  write_file(out_path(cfg, "full_delegation.json"), dump(j));
  write_file(out_path(cfg, "icdf_full_delegation.csv"), icdf_csv(model.prior, {&exp}, {"F_star"}));
  out << dump(j);
  return kOk;
}

// fn(0..n-1) split over hardware threads; results keep index order so output
// does not depend on scheduling.
template <class Fn>
auto parallel_map(std::size_t n, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
  std::vector<std::future<std::vector<R>>> parts;
  for (std::size_t w = 0; w < workers; ++w) {
    parts.push_back(std::async(std::launch::async, [&, w] {
      std::vector<R> out;
      for (std::size_t i = w * n / workers; i < (w + 1) * n / workers; ++i) out.push_back(fn(i));
      return out;
    }));
  }
  std::vector<R> all;
  all.reserve(n);
  for (auto& f : parts) {
    for (auto& r : f.get()) all.push_back(std::move(r));
  }
  return all;
}

inline int cmd_mic_sweep(const RunConfig& cfg, std::ostream& out) {
  const auto model = Model::build(cfg);
  const auto family = MicFamily::build(model.prior, model.outside);
  const auto ud = model.objective.bind(model.outside);
  CsvTable t({"y", "s", "t", "x", "U_D", "U_E"});
  const auto ys = linspace(family.y_min(), family.y_max(), cfg.sweep_points);
  const auto rows = parallel_map(ys.size(), [&](std::size_t i) {
    const auto mic = family.member(ys[i]);
    const auto& p = mic.params;
    return std::vector<double>{ys[i], p.s, p.t, p.x, expected_payoff(mic.experiment, ud),
                               expected_payoff(mic.experiment, model.experimenter())};
  });
  for (const auto& r : rows) t.row(r);
  nlohmann::ordered_json range{{"y_min", rounded(family.y_min())},
                               {"y_max", rounded(family.y_max())},
                               {"binding_constraint", to_string(family.range().binding)},
                               {"points", cfg.sweep_points}};
  write_file(out_path(cfg, "mic_sweep.csv"), t.str());
  write_file(out_path(cfg, "mic_range.json"), dump(range));
  out << dump(range);
  return kOk;
}

inline int cmd_optimize(const RunConfig& cfg, std::ostream& out) {
  const auto model = Model::build(cfg);
  const auto family = MicFamily::build(model.prior, model.outside);
  const auto sol = optimize(model.objective, family);
  const auto mic = mic_from_top_atom(family.context(), sol.y_opt);
  const auto restriction = implementing_restriction(model.prior, sol.params);
  const auto price = canonical_price_function(model.outside, {sol.params.x, sol.params.y});
  const auto cert = verify_ic(model.outside, mic.experiment, price, &restriction);
  nlohmann::ordered_json j{
      {"objective", model.objective.name()},
      {"y_opt", rounded(sol.y_opt)},
      {"params", to_json(sol.params)},
      {"payoff", rounded(sol.payoff)},
      {"full_delegation_payoff", rounded(sol.full_delegation_payoff)},
      {"gain", rounded(sol.payoff - sol.full_delegation_payoff)},
      {"binding_at_y_max", sol.binding_at_y_max},
      {"at_y_min", sol.at_y_min},
      {"binding_constraint", to_string(sol.binding)},
      {"perturbation_derivative", rounded(perturbation_derivative(model.objective, family.context()))},
      {"assumptions", to_json(check_assumptions(model.prior, model.outside))},
      {"restriction", to_json(restriction)},
      {"certificate", to_json(cert)},
  };
  write_file(out_path(cfg, "optimize.json"), dump(j));
  write_file(out_path(cfg, "certificate.csv"), certificate_csv(price));
  write_file(out_path(cfg, "icdf_optimum.csv"),
             icdf_csv(model.prior, {&mic.experiment, &restriction}, {"F_opt", "restriction"}));
  out << dump(j);
  return kOk;
}

struct Check {
  std::string name;
  double parameter = std::nan("");
  bool passed = false;
  double value = 0.0;
};

inline std::vector<Check> scenario_checks(const RunConfig& cfg, const Model& model) {
  const auto inst = discretize(model.prior, model.outside, cfg.oracle.n);
  const auto& s = cfg.scenario;
  if (s.name == "uninformed_dm") {
    const auto rep = scenario_uninformed_dm(inst, s.r0);
    const bool high = grid_mean(inst, inst.prior_mass) > s.r0;
    return {{high ? "uninformed_dm_value_one" : "uninformed_dm_support_bound", s.r0, rep.passed,
             high ? rep.value : rep.max_support}};
  }
  const auto rep = scenario_m_shaped(inst, MShapedPayoff(s.y1, s.y2, s.depth));
  return {{"m_shaped_binary_support", s.depth, rep.passed, double(rep.support_points)}};
}

inline std::vector<Check> battery(const RunConfig& cfg, const Model& model) {
  std::vector<Check> checks;
  const auto family = MicFamily::build(model.prior, model.outside);
  const auto& ctx = family.context();
  const auto& g = model.outside;

  const double rho_res = std::abs(rho_unchecked(g, ctx.x_star(), ctx.y_star()));
  checks.push_back({"full_delegation_tangency", ctx.x_star(), rho_res <= 1e-9, rho_res});
  checks.push_back({"full_delegation_unique_bracket", ctx.x_star(), ctx.full.root_brackets == 1,
                    double(ctx.full.root_brackets)});
  const auto scan = scan_feasibility(ctx, family.y_min(), std::min(1.0 - 1e-9, family.y_max() + 0.1), 1000);
  checks.push_back({"feasible_range_is_interval", family.y_max(), scan.is_interval, scan.last_feasible});

  for (double y : linspace(family.y_min(), family.y_max(), cfg.certificate_points)) {
    const auto mic = family.member(y);
    const auto p = canonical_price_function(g, {mic.params.x, mic.params.y});
    const auto rep = verify_ic(g, mic.experiment, p);
    const double worst = std::max({rep.max_violations.convexity, rep.max_violations.domination,
                                   rep.max_violations.contact});
    checks.push_back({"certificate", y, rep.ok(), worst});
    checks.push_back({"is_mic", y, is_mic(ctx, mic.experiment), 0.0});
  }

  const double deriv = perturbation_derivative(model.objective, ctx);
  if (model.objective.kind() == DesignerObjective::Kind::kWelfareWeighted) {
    const double simplified = welfare_perturbation_derivative(model.objective.lambda(), ctx);
    checks.push_back({"perturbation_derivative_welfare_form", model.objective.lambda(),
                      std::abs(deriv - simplified) <= 1e-9, deriv});
  } else {
    checks.push_back({"perturbation_derivative_positive", ctx.y_star(), deriv > 0.0, deriv});
  }

  const auto inst = discretize(model.prior, g, cfg.oracle.n);
  const double grid_tol = 5.0 / double(inst.size());
  const auto prior_reply = lp_best_reply(inst, inst.prior_mass);
  const double fstar_value = grid_expectation(inst.payoff, discretize_experiment(inst, ctx.full.censorship.experiment));
  checks.push_back({"oracle_full_delegation_value", double(inst.size()),
                    prior_reply.value >= fstar_value - 1e-12 && prior_reply.value <= fstar_value + grid_tol,
                    prior_reply.value});
  const auto prior_structure = bipooling_structure(prior_reply.posterior, inst, g.r0());
  checks.push_back({"oracle_prior_reply_structure", double(inst.size()),
                    prior_structure.bipooling_ok && prior_structure.support_above_r0 <= 1,
                    double(prior_structure.max_support_per_pool)});
  const auto fr = ic_check_discrete(inst, inst.prior_mass);
  checks.push_back({"oracle_full_revelation_not_ic", double(inst.size()), !fr.is_ic, fr.improvement});
  for (double y : linspace(family.y_min(), family.y_max(), cfg.oracle_points)) {
    const auto mass = discretize_experiment(inst, family.member(y).experiment);
    const auto ic = ic_check_discrete(inst, mass);
    checks.push_back({"oracle_mic_ic", y, ic.is_ic, ic.improvement});
    const auto a = bipooling_structure(mass, inst, g.r0());
    const auto b = bipooling_structure(ic.best_reply.posterior, inst, g.r0());
    checks.push_back({"oracle_mic_structure", y,
                      a.bipooling_ok && b.bipooling_ok && a.support_above_r0 <= 1 && b.support_above_r0 <= 1,
                      double(std::max(a.max_support_per_pool, b.max_support_per_pool))});
  }
  return checks;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const auto model = Model::build(cfg);
  const auto checks = cfg.scenario.name.empty() ? battery(cfg, model) : scenario_checks(cfg, model);
  CsvTable t({"check", "parameter", "passed", "value"});
  std::size_t failed = 0;
  for (const auto& c : checks) {
    const std::string param = std::isnan(c.parameter) ? "" : fmt(c.parameter);
    t.raw(c.name + "," + param + "," + (c.passed ? "1" : "0") + "," + fmt(c.value));
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!param.empty()) out << " [" << param << "]";
    out << " " << fmt(c.value) << "\n";
    failed += !c.passed;
  }
  write_file(out_path(cfg, "verify.csv"), t.str());
  out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed ? kVerificationFailure : kOk;
}

inline int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const auto model = Model::build(cfg);
  auto inst = discretize(model.prior, model.outside, cfg.oracle.n);
  double r0 = model.outside.r0();
  bool has_r0 = true;
  if (cfg.scenario.name == "uninformed_dm") {
    inst.designer.clear();
    for (std::size_t j = 0; j < inst.size(); ++j) inst.payoff[j] = inst.grid[j] >= cfg.scenario.r0 - 1e-12 ? 1.0 : 0.0;
    r0 = cfg.scenario.r0;
  } else if (cfg.scenario.name == "m_shaped") {
    const MShapedPayoff u(cfg.scenario.y1, cfg.scenario.y2, cfg.scenario.depth);
    inst.designer.clear();
    for (std::size_t j = 0; j < inst.size(); ++j) inst.payoff[j] = u(inst.grid[j]);
    has_r0 = false;
  }
  const auto reply = lp_best_reply(inst, inst.prior_mass);
  const auto s = has_r0 ? bipooling_structure(reply.posterior, inst, r0)
                        : bipooling_structure(reply.posterior, inst, std::nullopt);
  nlohmann::ordered_json pools = nlohmann::ordered_json::array();
  for (const auto& p : s.pools) {
    pools.push_back({{"lo", rounded(inst.grid[p.lo])}, {"hi", rounded(inst.grid[p.hi])}, {"support_points", p.support.size()}});
  }
  nlohmann::ordered_json j{
      {"n", inst.size()},
      {"scenario", cfg.scenario.name.empty() ? "none" : cfg.scenario.name},
      {"value", rounded(reply.value)},
      {"designer_value", rounded(reply.designer_value)},
      {"iterations", reply.iterations},
      {"row_residual", rounded(reply.row_residual)},
      {"martingale_residual", rounded(reply.martingale_residual)},
      {"support_points", s.support_points},
      {"support_above_r0", s.support_above_r0},
      {"pooling_intervals", pools},
  };
  write_file(out_path(cfg, "oracle.json"), dump(j));
  write_file(out_path(cfg, "oracle_instance.csv"), instance_csv(inst));
  write_file(out_path(cfg, "oracle_posterior.csv"), posterior_csv(inst, reply.posterior));
  write_file(out_path(cfg, "oracle_plan.csv"), plan_csv(reply.plan));
  out << dump(j);
  return kOk;
}

// Loads the config, applies overrides, runs the command and maps failures to
// exit codes: 1 config, 2 assumption, 3 verification or numerical failure.
inline int dispatch(const std::string& command, const std::string& config_path, const Overrides& overrides,
                    std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = apply(load_config(config_path), overrides);
    if (command == "full-delegation") return cmd_full_delegation(cfg, out);
    if (command == "mic-sweep") return cmd_mic_sweep(cfg, out);
    if (command == "optimize") return cmd_optimize(cfg, out);
    if (command == "verify") return cmd_verify(cfg, out);
    if (command == "oracle") return cmd_oracle(cfg, out);
    err << "unknown command '" << command << "'\n";
    return kConfigFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const AssumptionError& e) {
    err << "assumption failure: " << e.what() << "\nmargin g(mu) mu - G(mu) = " << fmt(e.margin()) << "\n";
    return kAssumptionFailure;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return kVerificationFailure;
  }
}

}  // namespace infodeleg::cli
