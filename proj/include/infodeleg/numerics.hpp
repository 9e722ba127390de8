#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "infodeleg/errors.hpp"

namespace infodeleg {

using RealFn = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = true;
};

// Panels are never accepted above this depth; guards against the coincidental
// agreement of coarse estimates across an interior kink.
inline constexpr int kSimpsonMinDepth = 4;

namespace detail {

template <class F>
double simpson_leaf(F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth, int max_depth,
                    QuadratureResult& out) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= kSimpsonMinDepth && std::abs(delta) <= 15.0 * tol) {
    out.error_estimate += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth >= max_depth) {
    out.error_estimate += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_leaf(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1, max_depth, out) +
         simpson_leaf(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1, max_depth, out);
}

}  // namespace detail

// Adaptive Simpson quadrature of f on [a, b].
// The tolerance is halved at every split; leaves hitting max_depth are accepted
// and their error estimates are accumulated, so `converged` reports whether the
// summed estimate stayed within abs_tol.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-12,
                                  int max_depth = 40) {
  QuadratureResult out;
  if (!(b > a)) return out;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  out.value = detail::simpson_leaf(f, a, fa, m, fm, b, fb, whole, abs_tol, 0, max_depth, out);
  out.converged = out.error_estimate <= abs_tol;
  return out;
}

// Integrates over consecutive pieces [cuts[i], cuts[i+1]] so that known kinks of
// the integrand never fall inside a Simpson panel.
template <class F>
QuadratureResult integrate_pieces(F&& f, std::span<const double> cuts, double abs_tol = 1e-12) {
  QuadratureResult total;
  if (cuts.size() < 2) return total;
  const double span_len = cuts.back() - cuts.front();
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double len = cuts[i + 1] - cuts[i];
    if (!(len > 0.0)) continue;
    const double share = span_len > 0.0 ? abs_tol * len / span_len : abs_tol;
    auto r = adaptive_simpson(f, cuts[i], cuts[i + 1], share);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.converged = total.converged && r.converged;
  }
  return total;
}

// Bisection for a root of f on [lo, hi]. Requires f(lo) and f(hi) to have
// opposite signs (zero counts as either); throws InfeasibleError otherwise,
// carrying f(hi).
template <class F>
double bisect(F&& f, double lo, double hi, double arg_tol = 1e-12, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw InfeasibleError("bisection bracket has no sign change", fhi);
  }
  for (int it = 0; it < max_iter && hi - lo > arg_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct GoldenResult {
  double argmax;
  double value;
};

// Golden-section search for a maximum of f on [a, b].
template <class F>
GoldenResult golden_section_max(F&& f, double a, double b, double tol = 1e-9) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// n equally spaced points on [lo, hi], endpoints included.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

}  // namespace infodeleg
