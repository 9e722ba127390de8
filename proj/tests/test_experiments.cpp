#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "infodeleg/experiments.hpp"

using namespace infodeleg;
namespace closed = fixtures::closed;

namespace {

Experiment point_mass(const PriorDistribution& prior) { return Experiment::uninformative(prior); }

}  // namespace

TEST(Experiment, IcdfOfPointMassAndPrior) {
  const auto u = fixtures::uniform_prior();
  EXPECT_NEAR(point_mass(u).icdf(0.75), 0.25, 1e-15);
  EXPECT_NEAR(point_mass(u).icdf(0.25), 0.0, 1e-15);
  EXPECT_NEAR(Experiment::full_revelation(u).icdf(0.5), 0.125, 1e-15);
}

TEST(Experiment, IcdfOfUpperCensorship) {
  const auto u = fixtures::uniform_prior();
  const auto uc = make_upper_censorship(u, 0.25).experiment;
  EXPECT_NEAR(uc.icdf(0.625), 0.125, 1e-14);
  EXPECT_NEAR(uc.icdf(1.0), 0.5, 1e-14);
  EXPECT_NEAR(uc.icdf(0.4), 0.03125 + 0.25 * 0.15, 1e-14);
}

TEST(Experiment, CanonicalFormMergesAndDrops) {
  const auto u = fixtures::uniform_prior();
  Experiment e({Atom{0.5, 0.25}, Atom{0.5, 0.75}, Atom{0.3, 0.0}}, u);
  ASSERT_EQ(e.segments().size(), 1u);
  EXPECT_NEAR(std::get<Atom>(e.segments()[0]).mass, 1.0, 1e-15);
}

TEST(Experiment, RejectsNonMpc) {
  const auto u = fixtures::uniform_prior();
  EXPECT_THROW(Experiment({Atom{0.0, 0.5}, Atom{1.0, 0.5}}, u), DomainError);
  EXPECT_THROW(Experiment({Atom{0.4, 1.0}}, u), DomainError);
  EXPECT_THROW(Experiment({Atom{0.5, 0.9}}, u), DomainError);
}

TEST(Experiment, InvariantsOnConstructedFamily) {
  const auto lin = fixtures::linear_prior();
  for (double s : {0.0, 0.1, 0.3}) {
    for (double t : {0.3, 0.5, 0.9, 1.0}) {
      if (t < s) continue;
      const auto dc = make_double_censorship(lin, s, t);
      const auto& e = dc.experiment;
      EXPECT_NEAR(e.total_mass(), 1.0, 1e-10);
      EXPECT_NEAR(e.mean(), lin.mean(), 1e-10);
      EXPECT_NEAR(e.icdf(0.0), 0.0, 1e-14);
      EXPECT_NEAR(e.icdf(1.0), 1.0 - lin.mean(), 1e-10);
      const int n = 1024;
      for (int i = 1; i < n; ++i) {
        const double h = 1.0 / n;
        EXPECT_GE(e.icdf((i + 1) * h) - 2 * e.icdf(i * h) + e.icdf((i - 1) * h), -1e-12);
      }
      EXPECT_TRUE(is_mpc(e, Experiment::full_revelation(lin)));
      EXPECT_TRUE(is_mpc(point_mass(lin), e));
    }
  }
}

TEST(IsMpc, TrivialCases) {
  const auto u = fixtures::uniform_prior();
  const auto fr = Experiment::full_revelation(u);
  const auto pm = point_mass(u);
  const auto uc = make_upper_censorship(u, 0.25).experiment;
  EXPECT_TRUE(is_mpc(pm, uc));
  EXPECT_TRUE(is_mpc(uc, fr));
  EXPECT_FALSE(is_mpc(fr, pm));
  EXPECT_TRUE(is_mpc(uc, uc));
}

TEST(IsMpc, NestedUpperCensorships) {
  const auto lin = fixtures::linear_prior();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    double v[3] = {u(rng), u(rng), u(rng)};
    std::sort(v, v + 3);
    const auto a = make_upper_censorship(lin, v[0]).experiment;
    const auto b = make_upper_censorship(lin, v[1]).experiment;
    const auto c = make_upper_censorship(lin, v[2]).experiment;
    EXPECT_TRUE(is_mpc(a, b));
    EXPECT_TRUE(is_mpc(b, c));
    EXPECT_TRUE(is_mpc(a, c));
  }
}

TEST(ExpectedPayoff, ClosedForms) {
  const auto u = fixtures::uniform_prior();
  const auto g = fixtures::beta22();
  auto G = [&](double m) { return g.cdf(m); };
  EXPECT_NEAR(expected_payoff(point_mass(u), G), 0.5, 1e-12);
  EXPECT_NEAR(expected_payoff(Experiment::full_revelation(u), G), 0.5, 1e-12);
  EXPECT_NEAR(expected_payoff(make_upper_censorship(u, 0.25).experiment, G), 539.0 / 1024.0, 1e-12);
}

TEST(MakeDoubleCensorship, UniformOptimum) {
  const auto u = fixtures::uniform_prior();
  const auto dc = make_double_censorship(u, 0.0, 1.0 / 3.0);
  EXPECT_NEAR(dc.params.x, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(dc.params.y, 2.0 / 3.0, 1e-12);
  const auto uc = make_double_censorship(u, 0.25, 0.25);
  ASSERT_EQ(uc.experiment.segments().size(), 2u);
  const auto& top = std::get<Atom>(uc.experiment.segments()[1]);
  EXPECT_NEAR(top.location, 0.625, 1e-12);
  EXPECT_NEAR(top.mass, 0.75, 1e-12);
  const auto fr = make_double_censorship(u, 1.0, 1.0);
  EXPECT_TRUE(is_mpc(Experiment::full_revelation(u), fr.experiment));
  EXPECT_THROW(make_double_censorship(u, 0.5, 0.4), DomainError);
}

TEST(PoolingIntervals, RecoverDoubleCensorship) {
  const auto lin = fixtures::linear_prior();
  const auto dc = make_double_censorship(lin, 0.1, 0.4);
  const auto rec = recognize_double_censorship(dc.experiment);
  ASSERT_TRUE(rec);
  EXPECT_NEAR(rec->s, 0.1, 1e-8);
  EXPECT_NEAR(rec->t, 0.4, 1e-8);
  EXPECT_NEAR(rec->x, closed::cm_linear(0.1, 0.4), 1e-10);
  EXPECT_NEAR(rec->y, closed::cm_linear(0.4, 1.0), 1e-10);
  EXPECT_FALSE(recognize_double_censorship(Experiment::full_revelation(lin)));
}
