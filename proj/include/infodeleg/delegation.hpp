#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "infodeleg/distributions.hpp"
#include "infodeleg/errors.hpp"
#include "infodeleg/experiments.hpp"
#include "infodeleg/mic.hpp"
#include "infodeleg/numerics.hpp"

namespace infodeleg {

inline constexpr std::size_t kConvexityGrid = 1024;
inline constexpr double kFiniteDifferenceStep = 1e-6;

// The designer's payoff u_D as a function of the posterior mean.
class DesignerObjective {
 public:
  enum class Kind { kDmValue, kWelfareWeighted, kCustom };
  using Fn = std::function<double(double)>;

  // u_D = I_G, the DM's value of information.
  static DesignerObjective dm_value() { return DesignerObjective(Kind::kDmValue, 1.0, {}, {}); }

  // u_D = lambda I_G + (1 - lambda) G.
  static DesignerObjective welfare_weighted(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    return DesignerObjective(Kind::kWelfareWeighted, lambda, {}, {});
  }

  // Arbitrary convex u_D; derivative by central differences unless given.
  static DesignerObjective custom(Fn u, std::optional<Fn> derivative = std::nullopt) {
    if (!u) throw ConfigError("custom objective needs a payoff function");
    DesignerObjective out(Kind::kCustom, 1.0, std::move(u), derivative.value_or(Fn{}));
    const auto grid = linspace(0.0, 1.0, kConvexityGrid + 1);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double d2 = out.u_(grid[i + 1]) - 2.0 * out.u_(grid[i]) + out.u_(grid[i - 1]);
      if (d2 < -1e-12) throw ConfigError("custom objective is not convex near " + std::to_string(grid[i]));
    }
    return out;
  }

  Kind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  bool has_analytic_derivative() const noexcept { return kind_ != Kind::kCustom || bool(du_); }

  double value(const OutsideOption& g, double m) const {
    switch (kind_) {
      case Kind::kDmValue: return g.integrated_cdf(m);
      case Kind::kWelfareWeighted: return lambda_ * g.integrated_cdf(m) + (1.0 - lambda_) * g.cdf(m);
      case Kind::kCustom: return u_(m);
    }
    return 0.0;
  }

  double derivative(const OutsideOption& g, double m) const {
    switch (kind_) {
      case Kind::kDmValue: return g.cdf(m);
      case Kind::kWelfareWeighted: return lambda_ * g.cdf(m) + (1.0 - lambda_) * g.pdf(m);
      case Kind::kCustom:
        if (du_) return du_(m);
        return (u_(m + kFiniteDifferenceStep) - u_(m - kFiniteDifferenceStep)) / (2.0 * kFiniteDifferenceStep);
    }
    return 0.0;
  }

  Fn bind(const OutsideOption& g) const {
    return [self = *this, g](double m) { return self.value(g, m); };
  }

  std::string name() const {
    switch (kind_) {
      case Kind::kDmValue: return "dm_value";
      case Kind::kWelfareWeighted: return "welfare_weighted";
      case Kind::kCustom: return "custom";
    }
    return "unknown";
  }

 private:
  DesignerObjective(Kind k, double lambda, Fn u, Fn du)
      : kind_(k), lambda_(lambda), u_(std::move(u)), du_(std::move(du)) {}

  Kind kind_;
  double lambda_;
  Fn u_;
  Fn du_;
};

// E_F u_D for the MIC experiment with top atom y, integrated segment by segment.
inline double designer_payoff(const DesignerObjective& obj, const MicContext& ctx, double y) {
  const auto mic = mic_from_top_atom(ctx, y);
  return expected_payoff(mic.experiment, obj.bind(ctx.outside));
}

// The same payoff from the censorship parameters alone:
// int_0^s u_D dH + (H(t) - H(s)) u_D(x) + (1 - H(t)) u_D(y).
inline double designer_payoff_closed(const DesignerObjective& obj, const MicContext& ctx,
                                     const DoubleCensorship& dc) {
  const auto& prior = ctx.prior;
  double revealed = 0.0;
  if (dc.s > 0.0) {
    std::vector<double> cuts{0.0};
    for (double k : prior.knots()) {
      if (k > 0.0 && k < dc.s) cuts.push_back(k);
    }
    cuts.push_back(dc.s);
    auto r = integrate_pieces([&](double w) { return obj.value(ctx.outside, w) * prior.pdf(w); }, cuts);
    if (!r.converged) throw NumericError("designer payoff quadrature did not converge", r.error_estimate);
    revealed = r.value;
  }
  return revealed + (prior.cdf(dc.t) - prior.cdf(dc.s)) * obj.value(ctx.outside, dc.x) +
         (1.0 - prior.cdf(dc.t)) * obj.value(ctx.outside, dc.y);
}

inline constexpr std::size_t kOptimizeGrid = 257;
inline constexpr double kOptimizeTolerance = 1e-9;
inline constexpr double kPayoffTieTolerance = 1e-12;  // gains below this count as ties

struct DelegationSolution {
  double y_opt = 0.0;
  DoubleCensorship params;
  double payoff = 0.0;
  double full_delegation_payoff = 0.0;
  bool binding_at_y_max = false;
  bool at_y_min = false;
  MicCondition binding = MicCondition::kNone;  // constraint that ends the range
};

// Grid scan over [y_min, y_max], golden-section refinement around the best grid
// point, ties toward smaller y.
inline DelegationSolution optimize(const DesignerObjective& obj, const MicFamily& family) {
  const auto& ctx = family.context();
  const double lo = family.y_min(), hi = family.y_max();
  auto value = [&](double y) { return designer_payoff(obj, ctx, y); };

  DelegationSolution out;
  out.binding = family.range().binding;
  out.full_delegation_payoff = value(lo);
  if (hi - lo <= kOptimizeTolerance) {
    out.y_opt = lo;
    out.payoff = out.full_delegation_payoff;
  } else {
    const auto grid = linspace(lo, hi, kOptimizeGrid);
    std::size_t best = 0;
    double best_value = out.full_delegation_payoff;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double v = value(grid[i]);
      if (v > best_value + kPayoffTieTolerance) {
        best = i;
        best_value = v;
      }
    }
    double y = grid[best];
    const double a = grid[best == 0 ? 0 : best - 1];
    const double b = grid[std::min(best + 1, grid.size() - 1)];
    const auto refined = golden_section_max(value, a, b, kOptimizeTolerance);
    if (refined.value > best_value + kPayoffTieTolerance) {
      y = refined.argmax;
      best_value = refined.value;
    }
    out.y_opt = y;
    out.payoff = best_value;
  }
  out.params = mic_from_top_atom(ctx, out.y_opt).params;
  out.at_y_min = out.y_opt - lo <= kOptimizeTolerance;
  out.binding_at_y_max = !out.at_y_min && hi - out.y_opt <= kOptimizeTolerance;
  return out;
}

// (u_D'(y*) - (u_D(y*) - u_D(x*)) / (y* - x*)) (1 - H(x*)): the right derivative
// of the designer payoff along the MIC family at full delegation.
inline double perturbation_derivative(const DesignerObjective& obj, const MicContext& ctx) {
  const double x = ctx.x_star(), y = ctx.y_star();
  const auto& g = ctx.outside;
  const double chord = (obj.value(g, y) - obj.value(g, x)) / (y - x);
  return (obj.derivative(g, y) - chord) * (1.0 - ctx.prior.cdf(x));
}

// Welfare-weighted form after the tangency condition cancels the G terms:
// lambda (G(y*) - (I_G(y*) - I_G(x*)) / (y* - x*)) (1 - H(x*)).
inline double welfare_perturbation_derivative(double lambda, const MicContext& ctx) {
  const double x = ctx.x_star(), y = ctx.y_star();
  const auto& g = ctx.outside;
  return lambda * (g.cdf(y) - (g.integrated_cdf(y) - g.integrated_cdf(x)) / (y - x)) *
         (1.0 - ctx.prior.cdf(x));
}

}  // namespace infodeleg
