#pragma once

// Shared model fixtures and closed-form oracles for the test suites. The
// oracles use only textbook formulas for the uniform / h(w) = 2w priors and the
// Beta(2,2) outside option, never the library's solvers.

#include <cmath>
#include <functional>

#include "infodeleg/distributions.hpp"

namespace fixtures {

inline infodeleg::PriorDistribution uniform_prior() {
  return infodeleg::PriorDistribution(infodeleg::Distribution(infodeleg::Uniform{}));
}

// h(w) = 2w, i.e. Beta(2, 1).
inline infodeleg::PriorDistribution linear_prior() {
  return infodeleg::PriorDistribution(infodeleg::Distribution(infodeleg::BetaLike{2.0, 1.0}));
}

inline infodeleg::PriorDistribution linear_prior_polynomial() {
  return infodeleg::PriorDistribution(
      infodeleg::Distribution(infodeleg::PiecewisePolynomial{{0.0, 1.0}, {{0.0, 2.0}}}));
}

inline infodeleg::OutsideOption beta22() {
  return infodeleg::OutsideOption(infodeleg::Distribution(infodeleg::BetaLike{2.0, 2.0}));
}

namespace closed {

inline double G(double r) { return 3 * r * r - 2 * r * r * r; }
inline double g(double r) { return 6 * r * (1 - r); }
inline double IG(double m) { return m * m * m - m * m * m * m / 2; }

// E[w | w in [a, b]] under h(w) = 2w.
inline double cm_linear(double a, double b) {
  if (a == b) return a;
  return 2.0 / 3.0 * (b * b * b - a * a * a) / (b * b - a * a);
}

// Plain bisection on a sign change; independent of the library's root finder.
inline double root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace closed
}  // namespace fixtures
