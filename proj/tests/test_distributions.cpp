#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "infodeleg/distributions.hpp"

using namespace infodeleg;
namespace closed = fixtures::closed;

TEST(Distribution, UniformClosedForms) {
  Distribution d(Uniform{});
  EXPECT_DOUBLE_EQ(d.cdf(0.3), 0.3);
  EXPECT_DOUBLE_EQ(d.pdf(0.3), 1.0);
  EXPECT_NEAR(d.integrated_cdf(0.5), 0.125, 1e-15);
  EXPECT_NEAR(d.mean(), 0.5, 1e-15);
  EXPECT_EQ(d.name(), "uniform");
}

TEST(Distribution, Beta22MatchesPolynomial) {
  Distribution d(BetaLike{2.0, 2.0});
  for (double r : {0.0, 0.1, 0.37, 0.5, 0.81, 1.0}) {
    EXPECT_NEAR(d.cdf(r), closed::G(r), 1e-14) << r;
    EXPECT_NEAR(d.pdf(r), closed::g(r), 1e-13) << r;
    EXPECT_NEAR(d.pdf_derivative(r), 6 - 12 * r, 1e-10) << r;
    EXPECT_NEAR(d.integrated_cdf(r), closed::IG(r), 1e-14) << r;
  }
  EXPECT_NEAR(d.analytic_mode(), 0.5, 1e-15);
}

TEST(Distribution, PiecewisePolynomialAgreesWithBeta) {
  Distribution poly(PiecewisePolynomial{{0.0, 0.4, 1.0}, {{0.0, 2.0}, {0.8, 2.0}}});
  Distribution beta(BetaLike{2.0, 1.0});
  for (double r : {0.0, 0.2, 0.4, 0.55, 0.9, 1.0}) {
    EXPECT_NEAR(poly.cdf(r), beta.cdf(r), 1e-14);
    EXPECT_NEAR(poly.integrated_cdf(r), beta.integrated_cdf(r), 1e-14);
  }
  EXPECT_NEAR(poly.mean(), 2.0 / 3.0, 1e-14);
}

TEST(Distribution, PiecewisePolynomialRejectsBadTables) {
  EXPECT_THROW(Distribution(PiecewisePolynomial{{0.0, 1.0}, {{1.5}}}), ConfigError);
  EXPECT_THROW(Distribution(PiecewisePolynomial{{0.0, 0.5}, {{2.0}}}), ConfigError);
}

TEST(Distribution, TabulatedIsMonotoneAndInterpolates) {
  std::vector<double> xs, cs;
  for (int i = 0; i <= 20; ++i) {
    xs.push_back(i / 20.0);
    cs.push_back(closed::G(i / 20.0));
  }
  Distribution d(Tabulated{xs, cs});
  double prev = -1;
  for (double r = 0; r <= 1.0; r += 0.001) {
    const double c = d.cdf(r);
    EXPECT_GE(c, prev - 1e-15);
    prev = c;
  }
  EXPECT_NEAR(d.cdf(0.33), closed::G(0.33), 2e-4);
  EXPECT_NEAR(d.pdf(0.5), 1.5, 2e-2);
  EXPECT_NEAR(d.mean(), 0.5, 1e-4);
}

TEST(Distribution, TabulatedRejectsNonMonotone) {
  EXPECT_THROW(Distribution(Tabulated{{0.0, 0.5, 1.0}, {0.0, 0.7, 0.6}}), ConfigError);
  EXPECT_THROW(Distribution(Tabulated{{0.0, 1.0}, {0.0, 1.0}}), ConfigError);
}

TEST(PriorDistribution, DensityIntegratesToCdfDifferences) {
  const auto prior = fixtures::linear_prior();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    auto r = adaptive_simpson([&](double w) { return prior.pdf(w); }, a, b);
    EXPECT_NEAR(r.value, prior.cdf(b) - prior.cdf(a), 1e-10);
  }
}

TEST(PriorDistribution, MeanFromIntegratedCdf) {
  EXPECT_NEAR(fixtures::uniform_prior().mean(), 0.5, 1e-12);
  EXPECT_NEAR(fixtures::linear_prior().mean(), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(fixtures::linear_prior_polynomial().mean(), 2.0 / 3.0, 1e-12);
}

TEST(ConditionalMean, KnownValues) {
  const auto u = fixtures::uniform_prior();
  EXPECT_NEAR(conditional_mean(u, 0.25, 1.0), 0.625, 1e-12);
  EXPECT_NEAR(conditional_mean(u, 0.0, 1.0), 0.5, 1e-12);
  EXPECT_EQ(conditional_mean(u, 0.3, 0.3), 0.3);
  const auto lin = fixtures::linear_prior();
  for (auto [a, b] : {std::pair{0.0, 1.0}, {0.2, 0.7}, {0.9, 0.95}}) {
    EXPECT_NEAR(conditional_mean(lin, a, b), closed::cm_linear(a, b), 1e-11);
  }
}

TEST(InverseUpperConditionalMean, UniformAndLinear) {
  const auto u = fixtures::uniform_prior();
  EXPECT_NEAR(inverse_upper_conditional_mean(u, 2.0 / 3.0), 1.0 / 3.0, 1e-11);
  EXPECT_EQ(inverse_upper_conditional_mean(u, 0.5), 0.0);
  EXPECT_THROW(inverse_upper_conditional_mean(u, 0.4), DomainError);

  // Oracle: plain bisection on the closed-form conditional mean, frozen.
  const double t = inverse_upper_conditional_mean(fixtures::linear_prior(), 0.9);
  EXPECT_NEAR(t, 0.791948133962653, 1e-10);
  EXPECT_NEAR(closed::cm_linear(t, 1.0), 0.9, 1e-10);
}

TEST(InverseUpperConditionalMean, RoundTrip) {
  const auto lin = fixtures::linear_prior();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(lin.mean(), 1.0);
  for (int i = 0; i < 50; ++i) {
    const double y = u(rng);
    const double t = inverse_upper_conditional_mean(lin, y);
    EXPECT_NEAR(conditional_mean(lin, t, 1.0), y, 1e-9);
  }
}

TEST(InverseIntervalConditionalMean, KnownValues) {
  const auto u = fixtures::uniform_prior();
  EXPECT_NEAR(inverse_interval_conditional_mean(u, 1.0 / 3.0, 1.0 / 6.0), 0.0, 1e-11);
  EXPECT_NEAR(inverse_interval_conditional_mean(u, 0.3, 0.2), 0.1, 1e-11);
  const auto lin = fixtures::linear_prior();
  const double x = conditional_mean(lin, 0.0, 0.6);
  EXPECT_NEAR(inverse_interval_conditional_mean(lin, 0.6, x), 0.0, 1e-10);
}

TEST(InverseIntervalConditionalMean, InfeasibleCarriesBoundary) {
  const auto u = fixtures::uniform_prior();
  try {
    inverse_interval_conditional_mean(u, 0.4, 0.1);
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_NEAR(e.boundary_value(), 0.2, 1e-12);
  }
}

TEST(OutsideOption, Beta22ShapeAndMode) {
  const auto g = fixtures::beta22();
  EXPECT_NEAR(g.r0(), 0.5, 1e-12);
  EXPECT_TRUE(g.shape().s_shaped);
  EXPECT_EQ(g.shape().curvature_sign_changes, 1u);
}

TEST(OutsideOption, SecondDifferenceChangesSignOnceNearMode) {
  const auto g = fixtures::beta22();
  const int n = 1000;
  int changes = 0;
  double at = -1, prev = 0;
  for (int i = 1; i < n; ++i) {
    const double h = 1.0 / n;
    const double d2 = g.cdf((i + 1) * h) - 2 * g.cdf(i * h) + g.cdf((i - 1) * h);
    if (std::abs(d2) < 1e-13) continue;
    if (prev != 0 && (d2 > 0) != (prev > 0)) {
      ++changes;
      at = i * h;
    }
    prev = d2;
  }
  EXPECT_EQ(changes, 1);
  EXPECT_NEAR(at, g.r0(), 2.0 / n);
}

TEST(OutsideOption, GridModeForTabulated) {
  std::vector<double> xs, cs;
  for (int i = 0; i <= 40; ++i) {
    const double r = i / 40.0;
    xs.push_back(r);
    cs.push_back(std::pow(r, 3) * (10 - 15 * r + 6 * r * r));  // Beta(3,3) CDF
  }
  OutsideOption g(Distribution(Tabulated{xs, cs}));
  EXPECT_NEAR(g.r0(), 0.5, 1e-2);
  // The interpolated density wobbles within one table cell of its peak, so
  // the advisory check sees extra curvature changes there and nowhere else.
  EXPECT_GE(g.shape().curvature_sign_changes, 1u);
  EXPECT_NEAR(g.shape().curvature_change_at, g.r0(), 1.0 / 40.0);
}

TEST(CheckAssumptions, UniformBeta22) {
  const auto rep = check_assumptions(fixtures::uniform_prior(), fixtures::beta22());
  EXPECT_TRUE(rep.informativeness_ok);
  EXPECT_TRUE(rep.s_shape_ok);
  EXPECT_NEAR(rep.margin, 0.25, 1e-12);
  EXPECT_NEAR(rep.r0, 0.5, 1e-12);
  EXPECT_NEAR(rep.mu, 0.5, 1e-12);
}

TEST(CheckAssumptions, HighMeanFails) {
  // Mixture 1/99 + (98/99) * 199 w^198 has mean 0.99.
  std::vector<double> c(199, 0.0);
  c[0] = 1.0 / 99.0;
  c[198] = 98.0 / 99.0 * 199.0;
  PriorDistribution prior(Distribution(PiecewisePolynomial{{0.0, 1.0}, {c}}));
  EXPECT_NEAR(prior.mean(), 0.99, 1e-10);
  const auto rep = check_assumptions(prior, fixtures::beta22());
  EXPECT_FALSE(rep.informativeness_ok);
  EXPECT_NEAR(rep.margin, closed::g(0.99) * 0.99 - closed::G(0.99), 1e-9);
}

TEST(CheckAssumptions, MarginDecreasesInMeanNearOne) {
  const auto g = fixtures::beta22();
  double prev = 1e9;
  for (double b : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    PriorDistribution prior(Distribution(BetaLike{b, 1.0}));
    const double m = check_assumptions(prior, g).margin;
    EXPECT_LT(m, prev);
    prev = m;
  }
  EXPECT_LT(prev, 0.0);
}
