#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "infodeleg/errors.hpp"
#include "infodeleg/numerics.hpp"

namespace infodeleg {

// Piecewise polynomial in local coordinates: on [breaks[k], breaks[k+1]] the
// value is sum_i coeffs[k][i] * (x - breaks[k])^i. Outside the breaks the
// polynomial of the nearest piece is evaluated at the clamped argument.
class PiecewisePoly {
 public:
  PiecewisePoly() = default;
  PiecewisePoly(std::vector<double> breaks, std::vector<std::vector<double>> coeffs)
      : breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
    if (breaks_.size() < 2 || coeffs_.size() + 1 != breaks_.size()) {
      throw ConfigError("piecewise polynomial needs k+1 breaks for k pieces");
    }
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
      if (!(breaks_[i + 1] > breaks_[i])) {
        throw ConfigError("piecewise polynomial breaks must be strictly increasing");
      }
    }
  }

  double operator()(double x) const {
    const std::size_t k = piece(x);
    const double dx = std::clamp(x, breaks_[k], breaks_[k + 1]) - breaks_[k];
    const auto& c = coeffs_[k];
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * dx + c[i];
    return v;
  }

  PiecewisePoly derivative() const {
    std::vector<std::vector<double>> out(coeffs_.size());
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      const auto& c = coeffs_[k];
      out[k].assign(std::max<std::size_t>(c.size(), 2) - 1, 0.0);
      for (std::size_t i = 1; i < c.size(); ++i) out[k][i - 1] = static_cast<double>(i) * c[i];
    }
    return {breaks_, std::move(out)};
  }

  // Continuous antiderivative that vanishes at breaks.front().
  PiecewisePoly antiderivative() const {
    std::vector<std::vector<double>> out(coeffs_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      const auto& c = coeffs_[k];
      out[k].assign(c.size() + 1, 0.0);
      out[k][0] = acc;
      for (std::size_t i = 0; i < c.size(); ++i) out[k][i + 1] = c[i] / static_cast<double>(i + 1);
      const double len = breaks_[k + 1] - breaks_[k];
      double v = 0.0;
      for (std::size_t i = out[k].size(); i-- > 0;) v = v * len + out[k][i];
      acc = v;
    }
    return {breaks_, std::move(out)};
  }

  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<std::vector<double>>& coeffs() const noexcept { return coeffs_; }

 private:
  std::size_t piece(double x) const {
    auto it = std::upper_bound(breaks_.begin() + 1, breaks_.end() - 1, x);
    return static_cast<std::size_t>(it - breaks_.begin()) - 1;
  }

  std::vector<double> breaks_;
  std::vector<std::vector<double>> coeffs_;
};

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes with
// the three-point shape-preserving end conditions).
inline PiecewisePoly pchip(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ConfigError("pchip needs at least two (x, y) pairs");
  std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    if (!(h[k] > 0.0)) throw ConfigError("tabulated states must be strictly increasing");
    delta[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
  } else {
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] <= 0.0) continue;
      const double w1 = 2.0 * h[k] + h[k - 1];
      const double w2 = h[k] + 2.0 * h[k - 1];
      d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    auto edge = [](double h0, double h1, double m0, double m1) {
      double dd = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
      if ((dd > 0.0) != (m0 > 0.0) || dd == 0.0) return 0.0;
      if ((m0 > 0.0) != (m1 > 0.0) && std::abs(dd) > std::abs(3.0 * m0)) return 3.0 * m0;
      return dd;
    };
    d[0] = edge(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }
  std::vector<std::vector<double>> c(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    c[k] = {y[k], d[k], (3.0 * delta[k] - 2.0 * d[k] - d[k + 1]) / h[k],
            (d[k] + d[k + 1] - 2.0 * delta[k]) / (h[k] * h[k])};
  }
  return {x, std::move(c)};
}

struct Uniform {};

// Beta(a, b) on [0, 1]; a, b >= 1 so that the density is continuous.
struct BetaLike {
  double a = 2.0;
  double b = 2.0;
};

// Density given piecewise in local coordinates (see PiecewisePoly).
struct PiecewisePolynomial {
  std::vector<double> breaks;
  std::vector<std::vector<double>> density_coeffs;
};

// CDF samples; interpolated by a monotone cubic.
struct Tabulated {
  std::vector<double> states;
  std::vector<double> cdf;
};

using DistributionKind = std::variant<Uniform, BetaLike, PiecewisePolynomial, Tabulated>;

// A distribution on [0, 1] with CDF, density, density derivative and the
// integrated CDF m -> int_0^m F. Immutable; copies share the model.
class Distribution {
 public:
  explicit Distribution(DistributionKind kind = Uniform{}) : kind_(std::move(kind)) {
    model_ = std::visit([](const auto& k) { return build(k); }, kind_);
  }

  double cdf(double m) const {
    if (m <= 0.0) return 0.0;
    if (m >= 1.0) return 1.0;
    return model_->cdf(m);
  }
  double pdf(double m) const { return model_->pdf(std::clamp(m, 0.0, 1.0)); }
  double pdf_derivative(double m) const { return model_->pdf_derivative(std::clamp(m, 0.0, 1.0)); }

  // int_0^m cdf(r) dr, extended affinely beyond 1.
  double integrated_cdf(double m) const {
    if (m <= 0.0) return 0.0;
    if (m >= 1.0) return model_->integrated_cdf(1.0) + (m - 1.0);
    return model_->integrated_cdf(m);
  }

  double mean() const { return 1.0 - model_->integrated_cdf(1.0); }

  // Smallest m with cdf(m) >= p, by bisection.
  double quantile(double p) const {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) >= p ? hi : lo) = mid;
    }
    return hi;
  }

  // Knots where derivatives of the density may jump (always includes 0 and 1).
  const std::vector<double>& knots() const noexcept { return model_->knots; }

  const DistributionKind& kind() const noexcept { return kind_; }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) return "uniform";
          if constexpr (std::is_same_v<K, BetaLike>) return "beta";
          if constexpr (std::is_same_v<K, PiecewisePolynomial>) return "piecewise_polynomial";
          if constexpr (std::is_same_v<K, Tabulated>) return "tabulated";
        },
        kind_);
  }

  // Closed-form mode for Beta, otherwise nullopt-like NaN.
  double analytic_mode() const { return model_->analytic_mode; }

 private:
  struct Model {
    virtual ~Model() = default;
    virtual double cdf(double m) const = 0;
    virtual double pdf(double m) const = 0;
    virtual double pdf_derivative(double m) const = 0;
    virtual double integrated_cdf(double m) const = 0;
    std::vector<double> knots{0.0, 1.0};
    double analytic_mode = std::nan("");
  };

  struct PolyModel final : Model {
    PiecewisePoly density, density_prime, cdf_pp, icdf_pp;
    double cdf(double m) const override { return cdf_pp(m); }
    double pdf(double m) const override { return density(m); }
    double pdf_derivative(double m) const override { return density_prime(m); }
    double integrated_cdf(double m) const override { return icdf_pp(m); }
  };

  struct BetaModel final : Model {
    double a, b, log_norm;
    BetaModel(double a_, double b_) : a(a_), b(b_) {
      log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
      if (a > 1.0 && b > 1.0) analytic_mode = (a - 1.0) / (a + b - 2.0);
    }
    double cdf(double m) const override { return boost::math::ibeta(a, b, m); }
    double pdf(double m) const override {
      if (m <= 0.0) return a == 1.0 ? std::exp(log_norm) : 0.0;
      if (m >= 1.0) return b == 1.0 ? std::exp(log_norm) : 0.0;
      return boost::math::ibeta_derivative(a, b, m);
    }
    double pdf_derivative(double m) const override {
      // x^(a-2) (1-x)^(b-2) ((a-1)(1-x) - (b-1)x) / B(a, b)
      const double lin = (a - 1.0) * (1.0 - m) - (b - 1.0) * m;
      if (lin == 0.0) return 0.0;
      const double p1 = a == 2.0 ? 1.0 : std::pow(m, a - 2.0);
      const double p2 = b == 2.0 ? 1.0 : std::pow(1.0 - m, b - 2.0);
      return std::exp(log_norm) * p1 * p2 * lin;
    }
    double integrated_cdf(double m) const override {
      return m * boost::math::ibeta(a, b, m) - a / (a + b) * boost::math::ibeta(a + 1.0, b, m);
    }
  };

  static std::shared_ptr<const Model> from_density(PiecewisePoly density) {
    auto model = std::make_shared<PolyModel>();
    model->density_prime = density.derivative();
    model->cdf_pp = density.antiderivative();
    model->icdf_pp = model->cdf_pp.antiderivative();
    model->knots = density.breaks();
    model->density = std::move(density);
    return model;
  }

  static std::shared_ptr<const Model> build(const Uniform&) {
    return from_density(PiecewisePoly({0.0, 1.0}, {{1.0}}));
  }

  static std::shared_ptr<const Model> build(const BetaLike& k) {
    if (!(k.a >= 1.0 && k.b >= 1.0)) throw ConfigError("beta shape parameters must be >= 1");
    return std::make_shared<BetaModel>(k.a, k.b);
  }

  static std::shared_ptr<const Model> build(const PiecewisePolynomial& k) {
    if (k.breaks.empty() || k.breaks.front() != 0.0 || k.breaks.back() != 1.0) {
      throw ConfigError("piecewise polynomial breaks must span [0, 1]");
    }
    PiecewisePoly density(k.breaks, k.density_coeffs);
    const double total = density.antiderivative()(1.0);
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("piecewise polynomial density integrates to " + std::to_string(total));
    }
    return from_density(std::move(density));
  }

  static std::shared_ptr<const Model> build(const Tabulated& k) {
    if (k.states.size() < 3 || k.states.size() != k.cdf.size()) {
      throw ConfigError("tabulated distribution needs at least three (state, cdf) pairs");
    }
    if (k.states.front() != 0.0 || k.states.back() != 1.0 || k.cdf.front() != 0.0 ||
        k.cdf.back() != 1.0) {
      throw ConfigError("tabulated CDF must run from (0, 0) to (1, 1)");
    }
    for (std::size_t i = 0; i + 1 < k.cdf.size(); ++i) {
      if (k.cdf[i + 1] < k.cdf[i]) throw ConfigError("tabulated CDF must be nondecreasing");
    }
    auto model = std::make_shared<PolyModel>();
    model->cdf_pp = pchip(k.states, k.cdf);
    model->density = model->cdf_pp.derivative();
    model->density_prime = model->density.derivative();
    model->icdf_pp = model->cdf_pp.antiderivative();
    model->knots = k.states;
    return model;
  }

  DistributionKind kind_;
  std::shared_ptr<const Model> model_;
};

// Validation grid used for density and CDF checks.
inline constexpr std::size_t kValidationGrid = 2048;

// Prior H over states. Construction validates the CDF and density on a grid.
class PriorDistribution {
 public:
  explicit PriorDistribution(Distribution dist = Distribution{}) : dist_(std::move(dist)) {
    const auto grid = linspace(0.0, 1.0, kValidationGrid + 1);
    if (std::abs(dist_.cdf(0.0)) > 1e-12 || std::abs(dist_.cdf(1.0) - 1.0) > 1e-12) {
      throw ConfigError("prior CDF must satisfy H(0) = 0 and H(1) = 1");
    }
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double c = dist_.cdf(grid[i]);
      if (c < prev - 1e-12) throw ConfigError("prior CDF is decreasing near " + std::to_string(grid[i]));
      prev = c;
      const double d = dist_.pdf(grid[i]);
      const bool interior = i > 0 && i + 1 < grid.size();
      if (!std::isfinite(d) || d < 0.0 || (interior && d <= 0.0)) {
        throw ConfigError("prior density must be positive on (0, 1); fails at " +
                          std::to_string(grid[i]));
      }
    }
    mean_ = dist_.mean();
  }

  double cdf(double m) const { return dist_.cdf(m); }
  double pdf(double m) const { return dist_.pdf(m); }
  double integrated_cdf(double m) const { return dist_.integrated_cdf(m); }
  double mean() const noexcept { return mean_; }
  double quantile(double p) const { return dist_.quantile(p); }
  const std::vector<double>& knots() const noexcept { return dist_.knots(); }
  const Distribution& distribution() const noexcept { return dist_; }

 private:
  Distribution dist_;
  double mean_ = 0.5;
};

struct ShapeReport {
  bool s_shaped = false;
  double r0 = 0.0;
  std::size_t curvature_sign_changes = 0;
  double curvature_change_at = 0.0;  // grid location of the observed sign change
};

// Outside-option CDF G (the experimenter's payoff) with density g and g'.
class OutsideOption {
 public:
  explicit OutsideOption(Distribution dist = Distribution{BetaLike{}},
                         std::size_t shape_grid = kValidationGrid)
      : dist_(std::move(dist)) {
    if (std::abs(dist_.cdf(0.0)) > 1e-12 || std::abs(dist_.cdf(1.0) - 1.0) > 1e-12) {
      throw ConfigError("outside-option CDF must satisfy G(0) = 0 and G(1) = 1");
    }
    r0_ = locate_mode();
    shape_ = check_shape(shape_grid);
  }

  double cdf(double m) const { return dist_.cdf(m); }
  double pdf(double m) const { return dist_.pdf(m); }
  double pdf_derivative(double m) const { return dist_.pdf_derivative(m); }
  // I_G(m) = int_0^m G, the DM's interim value at posterior mean m.
  double integrated_cdf(double m) const { return dist_.integrated_cdf(m); }
  // Maximizer of the density (inflection point of G).
  double r0() const noexcept { return r0_; }
  const ShapeReport& shape() const noexcept { return shape_; }
  const Distribution& distribution() const noexcept { return dist_; }

 private:
  double locate_mode() const {
    if (const double m = dist_.analytic_mode(); std::isfinite(m)) return m;
    const std::size_t n = 4096;
    const auto grid = linspace(0.0, 1.0, n + 1);
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (dist_.pdf(grid[i]) > dist_.pdf(grid[best])) best = i;
    }
    if (best == 0 || best == n) return grid[best];
    auto r = golden_section_max([this](double m) { return dist_.pdf(m); }, grid[best - 1],
                                grid[best + 1], 1e-12);
    return r.argmax;
  }

  // Advisory grid check: the second difference of G changes sign exactly once,
  // from positive to negative, within one grid step of r0.
  ShapeReport check_shape(std::size_t n) const {
    ShapeReport rep;
    rep.r0 = r0_;
    const auto grid = linspace(0.0, 1.0, n + 1);
    const double step = 1.0 / static_cast<double>(n);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = dist_.cdf(grid[i]);
    const double noise = 1e-13;
    int last_sign = 0;
    bool first_positive = false;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double d2 = values[i + 1] - 2.0 * values[i] + values[i - 1];
      const int sign = d2 > noise ? 1 : (d2 < -noise ? -1 : 0);
      if (sign == 0) continue;
      if (last_sign == 0) first_positive = sign > 0;
      if (last_sign != 0 && sign != last_sign) {
        ++rep.curvature_sign_changes;
        rep.curvature_change_at = grid[i];
      }
      last_sign = sign;
    }
    rep.s_shaped = r0_ > 0.0 && r0_ < 1.0 && first_positive && rep.curvature_sign_changes == 1 &&
                   std::abs(rep.curvature_change_at - r0_) <= 2.0 * step;
    return rep;
  }

  Distribution dist_;
  double r0_ = 0.5;
  ShapeReport shape_;
};

// E_H[w | w in [a, b]] by adaptive Simpson on both moments.
inline double conditional_mean(const PriorDistribution& prior, double a, double b) {
  if (!(a >= -1e-15 && b <= 1.0 + 1e-15 && a <= b)) {
    throw DomainError("conditional_mean requires 0 <= a <= b <= 1");
  }
  a = std::clamp(a, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  if (a == b) return a;
  std::vector<double> cuts{a};
  for (double k : prior.knots()) {
    if (k > a && k < b) cuts.push_back(k);
  }
  cuts.push_back(b);
  const double tol = 1e-12 * (b - a);
  auto mass = integrate_pieces([&](double w) { return prior.pdf(w); }, cuts, tol);
  auto moment = integrate_pieces([&](double w) { return (w - a) * prior.pdf(w); }, cuts, tol);
  if (!mass.converged || !moment.converged) {
    throw NumericError("conditional_mean quadrature did not converge",
                       std::max(mass.error_estimate, moment.error_estimate));
  }
  if (!(mass.value > 0.0)) return 0.5 * (a + b);
  return std::clamp(a + moment.value / mass.value, a, b);
}

// t with E_H[w | w >= t] = y, for mu <= y <= 1.
inline double inverse_upper_conditional_mean(const PriorDistribution& prior, double y) {
  const double mu = prior.mean();
  if (y < mu - 1e-12 || y > 1.0 + 1e-12) {
    throw DomainError("inverse_upper_conditional_mean requires mu <= y <= 1");
  }
  if (y <= mu) return 0.0;
  if (y >= 1.0) return 1.0;
  auto f = [&](double t) { return conditional_mean(prior, t, 1.0) - y; };
  const double t = bisect(f, 0.0, 1.0, 1e-13);
  if (const double r = std::abs(f(t)); r > 1e-10) {
    throw NumericError("inverse_upper_conditional_mean residual too large", r);
  }
  return t;
}

// s in [0, x] with E_H[w | w in [s, t]] = x.
inline double inverse_interval_conditional_mean(const PriorDistribution& prior, double t, double x) {
  if (!(x >= 0.0 && x <= t + 1e-12 && t <= 1.0)) {
    throw DomainError("inverse_interval_conditional_mean requires 0 <= x <= t <= 1");
  }
  if (x >= t) return t;
  const double boundary = conditional_mean(prior, 0.0, t);
  if (boundary > x + 1e-12) {
    throw InfeasibleError("no s in [0, x] pools [s, t] to x; E[w | w <= t] exceeds x", boundary);
  }
  if (boundary >= x) return 0.0;
  auto f = [&](double s) { return conditional_mean(prior, s, t) - x; };
  const double s = bisect(f, 0.0, x, 1e-13);
  if (const double r = std::abs(f(s)); r > 1e-10) {
    throw NumericError("inverse_interval_conditional_mean residual too large", r);
  }
  return s;
}

struct AssumptionReport {
  bool s_shape_ok = false;
  bool informativeness_ok = false;
  double r0 = 0.0;
  double mu = 0.0;
  double margin = 0.0;  // g(mu) mu - G(mu)
};

inline AssumptionReport check_assumptions(const PriorDistribution& prior, const OutsideOption& g) {
  AssumptionReport rep;
  rep.mu = prior.mean();
  rep.r0 = g.r0();
  rep.s_shape_ok = g.shape().s_shaped;
  rep.margin = g.pdf(rep.mu) * rep.mu - g.cdf(rep.mu);
  rep.informativeness_ok = rep.margin > 0.0;
  return rep;
}

}  // namespace infodeleg
