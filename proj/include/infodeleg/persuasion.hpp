#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "infodeleg/distributions.hpp"
#include "infodeleg/errors.hpp"
#include "infodeleg/experiments.hpp"
#include "infodeleg/numerics.hpp"

namespace infodeleg {

// (x, y) in the tangency set: the tangent to G at y passes through (x, G(x)).
struct TangencyPair {
  double x = 0.0;
  double y = 0.0;
};

// G(x) + g(y)(y - x) - G(y), with no domain check.
inline double rho_unchecked(const OutsideOption& g, double x, double y) {
  return g.cdf(x) + g.pdf(y) * (y - x) - g.cdf(y);
}

inline double rho(const OutsideOption& g, double x, double y) {
  constexpr double slack = 1e-12;
  if (!(x >= -slack && x <= g.r0() + slack && y >= g.r0() - slack && y <= 1.0 + slack)) {
    throw DomainError("rho requires 0 <= x <= r0 <= y <= 1");
  }
  return rho_unchecked(g, x, y);
}

// The x in [0, r0] with rho(x, y) = 0. x -> rho(x, y) crosses zero once, from
// above, on [0, r0]; throws InfeasibleError carrying rho(0, y) when it is
// already negative at 0.
inline double solve_x_given_y(const OutsideOption& g, double y) {
  const double r0 = g.r0();
  if (y < r0 - 1e-12 || y > 1.0 + 1e-12) {
    throw DomainError("solve_x_given_y requires r0 <= y <= 1");
  }
  if (y <= r0) return r0;
  const double at_zero = rho_unchecked(g, 0.0, y);
  if (at_zero < 0.0) {
    throw InfeasibleError("tangent to G at y passes above G(0); no x in [0, r0]", at_zero);
  }
  if (at_zero == 0.0) return 0.0;
  const double at_r0 = rho_unchecked(g, r0, y);
  if (at_r0 >= 0.0) return r0;
  return bisect([&](double x) { return rho_unchecked(g, x, y); }, 0.0, r0, 1e-14);
}

struct FullDelegation {
  TangencyPair pair;
  CensorshipExperiment censorship;
  // Sign changes of x -> rho(x, E[w | w >= x]) seen on the diagnostic grid;
  // 1 when the root is unique at that resolution.
  std::size_t root_brackets = 0;
};

inline constexpr std::size_t kFullDelegationScan = 256;

// The experimenter's unique best reply to the prior: upper censorship at x*
// with atom y* = E[w | w >= x*] and rho(x*, y*) = 0.
inline FullDelegation solve_full_delegation(const PriorDistribution& prior, const OutsideOption& g) {
  const auto report = check_assumptions(prior, g);
  if (!report.informativeness_ok) {
    throw AssumptionError("informativeness fails: g(mu) mu - G(mu) = " +
                              std::to_string(report.margin) + " <= 0",
                          report.margin);
  }
  const double r0 = g.r0();
  auto phi = [&](double x) { return rho_unchecked(g, x, conditional_mean(prior, x, 1.0)); };
  constexpr double eps = 1e-9;

  // Diagnostic scan; the smallest bracket wins.
  const auto grid = linspace(eps, r0 - eps, kFullDelegationScan + 1);
  std::size_t brackets = 0;
  double lo = grid.front(), hi = grid.back();
  bool have = false;
  double prev = phi(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = phi(grid[i]);
    if ((prev > 0.0) != (cur > 0.0) || cur == 0.0) {
      ++brackets;
      if (!have) {
        lo = grid[i - 1];
        hi = grid[i];
        have = true;
      }
    }
    prev = cur;
  }
  if (!have) {
    throw InfeasibleError("x -> rho(x, E[w | w >= x]) has no sign change on (0, r0)",
                          phi(grid.back()));
  }
  const double x = bisect(phi, lo, hi, 1e-14);
  const double y = conditional_mean(prior, x, 1.0);
  return {{x, y}, make_upper_censorship(prior, x), brackets};
}

}  // namespace infodeleg
