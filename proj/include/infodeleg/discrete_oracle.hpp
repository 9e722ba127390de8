#pragma once

// Discretized persuasion. States and posterior means share one uniform grid;
// a best reply to a restriction is a transport plan q[i][j] >= 0 moving the
// restriction's mass at state i to posterior j, with row sums fixed and every
// posterior the mean of the states sent to it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "infodeleg/distributions.hpp"
#include "infodeleg/errors.hpp"
#include "infodeleg/experiments.hpp"
#include "infodeleg/numerics.hpp"
#include "infodeleg/simplex.hpp"

namespace infodeleg {

struct DiscreteInstance {
  std::vector<double> grid;
  std::vector<double> prior_mass;
  std::vector<double> payoff;    // experimenter payoff at each grid point
  std::vector<double> designer;  // tie-break payoff; empty for none
  double mu = 0.5;               // mean of the continuous prior

  std::size_t size() const noexcept { return grid.size(); }
  double step() const noexcept { return grid.size() > 1 ? grid[1] - grid[0] : 1.0; }
};

inline double grid_mean(const DiscreteInstance& inst, const std::vector<double>& mass) {
  double m = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) m += mass[i] * inst.grid[i];
  return m;
}

inline double grid_expectation(const std::vector<double>& values, const std::vector<double>& mass) {
  double v = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) v += values[i] * mass[i];
  return v;
}

// Prior mass of each grid point: H over the cell between neighbouring midpoints.
inline DiscreteInstance discretize(const PriorDistribution& prior, std::size_t n,
                                   const std::function<double(double)>& payoff,
                                   const std::function<double(double)>& designer = {}) {
  if (n < 3) throw ConfigError("discretization needs at least 3 grid points");
  DiscreteInstance inst;
  inst.grid = linspace(0.0, 1.0, n);
  inst.mu = prior.mean();
  const double h = inst.step();
  inst.prior_mass.resize(n);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = i + 1 == n ? 1.0 : inst.grid[i] + 0.5 * h;
    const double c = i + 1 == n ? 1.0 : prior.cdf(hi);
    inst.prior_mass[i] = std::max(0.0, c - prev);
    prev = c;
  }
  for (double m : inst.grid) inst.payoff.push_back(payoff(m));
  if (designer) {
    for (double m : inst.grid) inst.designer.push_back(designer(m));
  }
  return inst;
}

// Experimenter payoff G, designer tie-break I_G.
inline DiscreteInstance discretize(const PriorDistribution& prior, const OutsideOption& g, std::size_t n) {
  return discretize(
      prior, n, [&](double m) { return g.cdf(m); }, [&](double m) { return g.integrated_cdf(m); });
}

// Grid masses of a continuous experiment: prior-following pieces by CDF
// differences over grid cells, atoms at the nearest grid point.
inline std::vector<double> discretize_experiment(const DiscreteInstance& inst, const Experiment& exp) {
  const std::size_t n = inst.size();
  const double h = inst.step();
  const auto& prior = exp.prior();
  std::vector<double> mass(n, 0.0);
  for (const auto& seg : exp.segments()) {
    if (const auto* a = std::get_if<Atom>(&seg)) {
      const auto k = static_cast<std::size_t>(std::clamp(std::round(a->location / h), 0.0, double(n - 1)));
      mass[k] += a->mass;
      continue;
    }
    const auto& fp = std::get<FollowsPrior>(seg);
    for (std::size_t i = 0; i < n; ++i) {
      const double lo = std::max(fp.a, i == 0 ? 0.0 : inst.grid[i] - 0.5 * h);
      const double hi = std::min(fp.b, i + 1 == n ? 1.0 : inst.grid[i] + 0.5 * h);
      if (hi > lo) mass[i] += prior.cdf(hi) - prior.cdf(lo);
    }
  }
  return mass;
}

inline std::vector<double> point_mass_on_grid(const DiscreteInstance& inst, double m) {
  std::vector<double> mass(inst.size(), 0.0);
  const auto k = static_cast<std::size_t>(
      std::clamp(std::round(m / inst.step()), 0.0, double(inst.size() - 1)));
  mass[k] = 1.0;
  return mass;
}

struct TransportPlan {
  std::size_t n = 0;
  std::vector<double> q;  // row-major n x n

  double operator()(std::size_t i, std::size_t j) const { return q[i * n + j]; }
};

struct LpBestReply {
  TransportPlan plan;
  std::vector<double> posterior;  // mass at each grid point
  double value = 0.0;
  double designer_value = 0.0;
  std::size_t iterations = 0;
  double row_residual = 0.0;
  double martingale_residual = 0.0;
};

inline constexpr double kPlanTolerance = 1e-8;
inline constexpr double kSupportMass = 1e-9;

// max sum_j payoff[j] sum_i q[i][j] over transport plans with row sums equal
// to the restriction. With a designer vector, a second pass maximizes it over
// the optimal face.
inline LpBestReply lp_best_reply(const DiscreteInstance& inst, const std::vector<double>& restriction,
                                 const std::vector<double>& payoff,
                                 const std::vector<double>* designer = nullptr) {
  const std::size_t n = inst.size();
  if (restriction.size() != n || payoff.size() != n) throw DomainError("restriction/payoff size mismatch");
  double total = 0.0;
  for (double r : restriction) {
    if (r < 0.0) throw DomainError("restriction has negative mass");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("restriction mass does not sum to one");
  if (std::abs(grid_mean(inst, restriction) - inst.mu) > inst.step() + 1e-12) {
    throw DomainError("restriction mean differs from the prior mean by more than one grid step");
  }

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (restriction[i] > 0.0) active.push_back(i);
  }
  const std::size_t rows = active.size() + n;
  SparseColumns a;
  a.rows = rows;
  std::vector<double> c;
  std::vector<std::size_t> basis(rows);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t i = active[k];
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t col = a.add({{k, 1.0}, {active.size() + j, inst.grid[i] - inst.grid[j]}});
      c.push_back(payoff[j]);
      if (i == j) basis[k] = col;
    }
  }
  const std::size_t first_artificial = a.cols();
  for (std::size_t j = 0; j < n; ++j) {
    basis[active.size() + j] = a.add({{active.size() + j, 1.0}});
    c.push_back(0.0);
  }
  std::vector<bool> fixed(a.cols(), false);
  std::fill(fixed.begin() + static_cast<std::ptrdiff_t>(first_artificial), fixed.end(), true);
  std::vector<double> b(rows, 0.0);
  for (std::size_t k = 0; k < active.size(); ++k) b[k] = restriction[active[k]];

  RevisedSimplex lp(std::move(a), std::move(b), std::move(basis), std::move(fixed));
  LpBestReply out;
  out.iterations = lp.maximize(c);

  const std::vector<double>* tie = designer ? designer : (inst.designer.empty() ? nullptr : &inst.designer);
  if (tie) {
    std::vector<bool> optimal_face(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) optimal_face[j] = lp.reduced_cost(j) >= -1e-10;
    std::vector<double> c2(c.size(), 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) {
      for (std::size_t j = 0; j < n; ++j) c2[k * n + j] = (*tie)[j];
    }
    lp.restrict_columns(optimal_face);
    out.iterations += lp.maximize(c2);
  }

  const auto x = lp.solution();
  out.plan.n = n;
  out.plan.q.assign(n * n, 0.0);
  out.posterior.assign(n, 0.0);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t i = active[k];
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = x[k * n + j] < 1e-15 ? 0.0 : x[k * n + j];
      out.plan.q[i * n + j] = v;
      out.posterior[j] += v;
      row += v;
    }
    out.row_residual = std::max(out.row_residual, std::abs(row - restriction[i]));
  }
  for (std::size_t j = 0; j < n; ++j) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r += out.plan(i, j) * (inst.grid[i] - inst.grid[j]);
    out.martingale_residual = std::max(out.martingale_residual, std::abs(r));
  }
  if (out.row_residual > kPlanTolerance || out.martingale_residual > kPlanTolerance) {
    throw NumericError("transport plan violates its constraints",
                       std::max(out.row_residual, out.martingale_residual));
  }
  out.value = grid_expectation(payoff, out.posterior);
  if (tie) out.designer_value = grid_expectation(*tie, out.posterior);
  return out;
}

inline LpBestReply lp_best_reply(const DiscreteInstance& inst, const std::vector<double>& restriction) {
  return lp_best_reply(inst, restriction, inst.payoff);
}

struct DiscreteIcCheck {
  bool is_ic = false;
  double improvement = 0.0;  // best-reply value minus the candidate's own value
  double tolerance = 0.0;
  LpBestReply best_reply;
};

// A candidate is IC when no garbling of it gains more than 5/n.
inline DiscreteIcCheck ic_check_discrete(const DiscreteInstance& inst, const std::vector<double>& candidate) {
  DiscreteIcCheck out;
  out.best_reply = lp_best_reply(inst, candidate);
  out.improvement = std::max(0.0, out.best_reply.value - grid_expectation(inst.payoff, candidate));
  out.tolerance = 5.0 / static_cast<double>(inst.size());
  out.is_ic = out.improvement <= out.tolerance;
  return out;
}

struct DiscretePool {
  std::size_t lo = 0;  // grid indices of the first and last point with slack
  std::size_t hi = 0;
  std::vector<std::size_t> support;
};

struct StructureReport {
  std::vector<DiscretePool> pools;
  std::size_t max_support_per_pool = 0;
  std::size_t support_points = 0;
  std::size_t support_above_r0 = 0;  // only counted when r0 is given
  bool bipooling_ok = true;          // no pool holds more than two support points
};

// Discrete ICDF at the grid points.
inline std::vector<double> grid_icdf(const DiscreteInstance& inst, const std::vector<double>& mass) {
  std::vector<double> out(inst.size(), 0.0);
  double cdf = 0.0;
  for (std::size_t k = 1; k < inst.size(); ++k) {
    cdf += mass[k - 1];
    out[k] = out[k - 1] + cdf * (inst.grid[k] - inst.grid[k - 1]);
  }
  return out;
}

// Pools are maximal runs where the ICDF lies more than 2/n^2 below the prior's.
inline StructureReport bipooling_structure(const std::vector<double>& mass, const DiscreteInstance& inst,
                                           std::optional<double> r0 = std::nullopt) {
  const std::size_t n = inst.size();
  const double threshold = 2.0 / static_cast<double>(n * n);
  const auto ih = grid_icdf(inst, inst.prior_mass);
  const auto jf = grid_icdf(inst, mass);
  StructureReport rep;
  for (std::size_t k = 0; k < n; ++k) {
    if (ih[k] - jf[k] <= threshold) continue;
    if (rep.pools.empty() || rep.pools.back().hi + 1 != k) rep.pools.push_back({k, k, {}});
    rep.pools.back().hi = k;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (mass[j] <= kSupportMass) continue;
    ++rep.support_points;
    if (r0 && inst.grid[j] > *r0 + 1e-12) ++rep.support_above_r0;
    for (auto& p : rep.pools) {
      if (j >= p.lo && j <= p.hi) p.support.push_back(j);
    }
  }
  for (const auto& p : rep.pools) rep.max_support_per_pool = std::max(rep.max_support_per_pool, p.support.size());
  rep.bipooling_ok = rep.max_support_per_pool <= 2;
  return rep;
}

struct ScenarioReport {
  std::string name;
  double value = 0.0;
  double max_support = 0.0;
  std::size_t support_points = 0;
  bool passed = false;
  std::string detail;
  LpBestReply best_reply;
};

// Outside option degenerate at r0: payoff 1 at posteriors >= r0, else 0.
inline ScenarioReport scenario_uninformed_dm(const DiscreteInstance& base, double r0) {
  DiscreteInstance inst = base;
  inst.designer.clear();
  for (std::size_t j = 0; j < inst.size(); ++j) inst.payoff[j] = inst.grid[j] >= r0 - 1e-12 ? 1.0 : 0.0;
  ScenarioReport rep;
  rep.name = "uninformed_dm";
  rep.best_reply = lp_best_reply(inst, inst.prior_mass);
  rep.value = rep.best_reply.value;
  for (std::size_t j = 0; j < inst.size(); ++j) {
    if (rep.best_reply.posterior[j] > kSupportMass) {
      rep.max_support = inst.grid[j];
      ++rep.support_points;
    }
  }
  const double mu = grid_mean(inst, inst.prior_mass);
  if (mu > r0) {
    rep.passed = std::abs(rep.value - 1.0) <= 1e-9;
    rep.detail = "mean above the step: value " + std::to_string(rep.value);
  } else {
    rep.passed = rep.max_support <= r0 + inst.step() + 1e-12;
    rep.detail = "largest support point " + std::to_string(rep.max_support) + " vs step " + std::to_string(r0);
  }
  return rep;
}

// C^1 piecewise-cubic M shape with peaks (value 1, slope 0) at y1 < y2 and a
// valley of the given depth midway; concave, convex, concave. Adding b m and
// rescaling makes it increasing on [0, 1] with range [0, 1]; that transformation
// leaves the experimenter's best replies unchanged.
class MShapedPayoff {
 public:
  MShapedPayoff(double y1 = 0.3, double y2 = 0.7, double depth = 0.5) : y1_(y1), y2_(y2) {
    if (!(0.0 < y1 && y1 < y2 && y2 < 1.0 && depth > 0.0 && depth < 1.0)) {
      throw ConfigError("M-shaped payoff needs 0 < y1 < y2 < 1 and depth in (0, 1)");
    }
    const double v = 0.5 * (y1 + y2);
    raw_ = PiecewisePoly({0.0, y1, v, y2, 1.0},
                         {hermite(y1, 0.0, 2.0 / y1, 1.0, 0.0), hermite(v - y1, 1.0, 0.0, 1.0 - depth, 0.0),
                          hermite(y2 - v, 1.0 - depth, 0.0, 1.0, 0.0),
                          hermite(1.0 - y2, 1.0, 0.0, 0.0, -2.0 / (1.0 - y2))});
    const auto d = raw_.derivative();
    double steepest = 0.0;
    for (double m : linspace(0.0, 1.0, 4097)) steepest = std::max(steepest, -d(m));
    tilt_ = steepest + 1.0;
    scale_ = raw_(1.0) + tilt_ - raw_(0.0);
  }

  double operator()(double m) const { return (raw_(m) + tilt_ * m - raw_(0.0)) / scale_; }
  double raw(double m) const { return raw_(m); }
  double y1() const noexcept { return y1_; }
  double y2() const noexcept { return y2_; }

 private:
  // Local-coordinate cubic through (0, p0) and (len, p1) with end slopes m0, m1.
  static std::vector<double> hermite(double len, double p0, double m0, double p1, double m1) {
    const double secant = (p1 - p0) / len;
    return {p0, m0, (3.0 * secant - 2.0 * m0 - m1) / len, (m0 + m1 - 2.0 * secant) / (len * len)};
  }

  double y1_, y2_;
  PiecewisePoly raw_;
  double tilt_ = 0.0;
  double scale_ = 1.0;
};

// Under an M-shaped payoff whose peaks straddle a dispersed prior's mean, the
// best reply to the prior is binary on the two peaks.
inline ScenarioReport scenario_m_shaped(const DiscreteInstance& base, const MShapedPayoff& u) {
  DiscreteInstance inst = base;
  inst.designer.clear();
  for (std::size_t j = 0; j < inst.size(); ++j) inst.payoff[j] = u(inst.grid[j]);
  ScenarioReport rep;
  rep.name = "m_shaped";
  rep.best_reply = lp_best_reply(inst, inst.prior_mass);
  rep.value = rep.best_reply.value;
  const auto structure = bipooling_structure(rep.best_reply.posterior, inst);
  rep.support_points = structure.support_points;
  bool on_peaks = true;
  for (std::size_t j = 0; j < inst.size(); ++j) {
    if (rep.best_reply.posterior[j] <= kSupportMass) continue;
    rep.max_support = inst.grid[j];
    on_peaks = on_peaks && (std::abs(inst.grid[j] - u.y1()) <= inst.step() ||
                            std::abs(inst.grid[j] - u.y2()) <= inst.step());
  }
  rep.passed = structure.pools.size() == 1 && structure.pools.front().support.size() == 2 &&
               rep.support_points == 2 && on_peaks;
  rep.detail = std::to_string(rep.support_points) + " support points in " +
               std::to_string(structure.pools.size()) + " pooling interval(s)";
  return rep;
}

}  // namespace infodeleg
