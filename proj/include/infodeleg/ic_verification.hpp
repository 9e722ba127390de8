#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "infodeleg/distributions.hpp"
#include "infodeleg/errors.hpp"
#include "infodeleg/experiments.hpp"
#include "infodeleg/numerics.hpp"
#include "infodeleg/persuasion.hpp"

namespace infodeleg {

inline constexpr std::size_t kCertificateGrid = 2048;
inline constexpr double kCertificateTolerance = 1e-8;
inline constexpr std::size_t kContactInteriorPoints = 64;

struct PricePiece {
  enum class Kind { kTracksG, kAffine };
  double lo = 0.0;
  double hi = 1.0;
  Kind kind = Kind::kAffine;
  double value_at_lo = 0.0;  // affine pieces only
  double slope = 0.0;        // affine pieces only
};

// Continuous piecewise function on [0, 1] whose pieces either equal G or are
// affine.
class PriceFunction {
 public:
  PriceFunction(OutsideOption g, std::vector<PricePiece> pieces)
      : g_(std::move(g)), pieces_(std::move(pieces)) {
    if (pieces_.empty() || pieces_.front().lo != 0.0 || pieces_.back().hi != 1.0) {
      throw CertificateError("price function pieces must cover [0, 1]", 1.0);
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (!(pieces_[i].lo <= pieces_[i].hi)) throw CertificateError("inverted price piece", 1.0);
      if (i > 0) {
        if (pieces_[i].lo != pieces_[i - 1].hi) throw CertificateError("price pieces not contiguous", 1.0);
        const double jump = std::abs(eval(pieces_[i - 1], pieces_[i].lo) - eval(pieces_[i], pieces_[i].lo));
        if (jump > 1e-10) throw CertificateError("price function discontinuous", jump);
      }
    }
  }

  double operator()(double m) const { return eval(piece_at(m), m); }

  // One-sided slopes; at a breakpoint these differ.
  double left_slope(double m) const {
    for (const auto& p : pieces_) {
      if (m > p.lo && m <= p.hi) return slope(p, m);
    }
    return slope(pieces_.front(), m);
  }
  double right_slope(double m) const {
    for (const auto& p : pieces_) {
      if (m >= p.lo && m < p.hi) return slope(p, m);
    }
    return slope(pieces_.back(), m);
  }

  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].lo);
    return out;
  }
  const std::vector<PricePiece>& pieces() const noexcept { return pieces_; }
  const OutsideOption& outside() const noexcept { return g_; }

 private:
  const PricePiece& piece_at(double m) const {
    for (const auto& p : pieces_) {
      if (m <= p.hi) return p;
    }
    return pieces_.back();
  }
  double eval(const PricePiece& p, double m) const {
    return p.kind == PricePiece::Kind::kTracksG ? g_.cdf(m) : p.value_at_lo + p.slope * (m - p.lo);
  }
  double slope(const PricePiece& p, double m) const {
    return p.kind == PricePiece::Kind::kTracksG ? g_.pdf(m) : p.slope;
  }

  OutsideOption g_;
  std::vector<PricePiece> pieces_;
};

struct CertificateViolations {
  double convexity = 0.0;    // largest decrease of slope
  double domination = 0.0;   // largest G - p
  double contact = 0.0;      // largest |p - G| on the support
  double integral = 0.0;     // |E_F p - E_restriction p|
};

struct CertificateReport {
  bool convex_ok = false;
  bool dominates_ok = false;
  bool support_contact_ok = false;
  bool integral_ok = true;  // only checked when a restriction is given
  CertificateViolations max_violations;

  bool ok() const noexcept { return convex_ok && dominates_ok && support_contact_ok && integral_ok; }
};

namespace detail {

// Uniform grid plus extra points, sorted, with near-duplicates removed so that
// chord slopes stay well conditioned.
inline std::vector<double> certificate_grid(std::vector<double> extra) {
  constexpr double gap = 1e-6;
  auto grid = linspace(0.0, 1.0, kCertificateGrid + 1);
  for (double e : extra) {
    if (e > gap && e < 1.0 - gap) grid.push_back(e);
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double m : grid) {
    if (out.empty() || m - out.back() > gap) out.push_back(m);
  }
  return out;
}

// Largest decrease between consecutive chord slopes of f on the grid.
template <class F>
double convexity_violation(const F& f, const std::vector<double>& grid) {
  double worst = 0.0;
  double prev_slope = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double s = (f(grid[i]) - f(grid[i - 1])) / (grid[i] - grid[i - 1]);
    if (i > 1) worst = std::max(worst, prev_slope - s);
    prev_slope = s;
  }
  return worst;
}

inline void check_shape(const PriceFunction& p, const std::vector<double>& grid, CertificateReport& rep) {
  const auto& g = p.outside();
  double conv = convexity_violation(p, grid);
  for (double b : p.breakpoints()) conv = std::max(conv, p.left_slope(b) - p.right_slope(b));
  double dom = 0.0;
  for (double m : grid) dom = std::max(dom, g.cdf(m) - p(m));
  rep.max_violations.convexity = conv;
  rep.max_violations.domination = dom;
  rep.convex_ok = conv <= kCertificateTolerance;
  rep.dominates_ok = dom <= kCertificateTolerance;
}

}  // namespace detail

// Checks the price-function conditions for exp: p convex, p >= G, and p = G on
// supp(exp). With a restriction, also E_exp p = E_restriction p.
inline CertificateReport verify_ic(const OutsideOption& g, const Experiment& exp, const PriceFunction& p,
                                   const Experiment* restriction = nullptr) {
  CertificateReport rep;
  auto extra = p.breakpoints();
  const auto bp = exp.breakpoints();
  extra.insert(extra.end(), bp.begin(), bp.end());
  detail::check_shape(p, detail::certificate_grid(std::move(extra)), rep);

  double contact = 0.0;
  auto touch = [&](double m) { contact = std::max(contact, std::abs(p(m) - g.cdf(m))); };
  for (const auto& seg : exp.segments()) {
    if (const auto* a = std::get_if<Atom>(&seg)) {
      touch(a->location);
    } else {
      const auto& fp = std::get<FollowsPrior>(seg);
      for (double m : linspace(fp.a, fp.b, kContactInteriorPoints + 2)) touch(m);
    }
  }
  rep.max_violations.contact = contact;
  rep.support_contact_ok = contact <= kCertificateTolerance;

  if (restriction) {
    auto pf = [&](double m) { return p(m); };
    const double gap = std::abs(expected_payoff(exp, pf) - expected_payoff(*restriction, pf));
    rep.max_violations.integral = gap;
    rep.integral_ok = gap <= kCertificateTolerance;
  }
  return rep;
}

// G on [0, x], then the tangent to G at y continued from (x, G(x)).
inline PriceFunction canonical_price_function(const OutsideOption& g, const TangencyPair& pair) {
  const double residual = std::abs(rho_unchecked(g, pair.x, pair.y));
  if (residual > kCertificateTolerance) {
    throw CertificateError("pair is not in the tangency set", residual);
  }
  std::vector<PricePiece> pieces;
  if (pair.x > 0.0) pieces.push_back({0.0, pair.x, PricePiece::Kind::kTracksG, 0.0, 0.0});
  if (pair.x < 1.0) {
    pieces.push_back({pair.x, 1.0, PricePiece::Kind::kAffine, g.cdf(pair.x), g.pdf(pair.y)});
  }
  PriceFunction p(g, std::move(pieces));
  CertificateReport rep;
  detail::check_shape(p, detail::certificate_grid(p.breakpoints()), rep);
  if (!rep.convex_ok) throw CertificateError("canonical price function not convex", rep.max_violations.convexity);
  if (!rep.dominates_ok) throw CertificateError("canonical price function below G", rep.max_violations.domination);
  return p;
}

// Certificate for the point mass at m: the canonical function of the tangency
// pair with top y = m, or of (r0, r0) when m <= r0.
inline PriceFunction point_mass_price_function(const OutsideOption& g, double m) {
  if (m <= g.r0()) return canonical_price_function(g, {g.r0(), g.r0()});
  return canonical_price_function(g, {solve_x_given_y(g, m), m});
}

// Reveals [0, s) and [t, 1], pools [s, t] to x. The double censorship with the
// same (s, t) is an MPC of it.
inline Experiment implementing_restriction(const PriorDistribution& prior, const DoubleCensorship& dc) {
  std::vector<Segment> segs{FollowsPrior{0.0, dc.s}};
  if (dc.t > dc.s) segs.emplace_back(Atom{dc.x, prior.cdf(dc.t) - prior.cdf(dc.s)});
  segs.emplace_back(FollowsPrior{dc.t, 1.0});
  Experiment restriction(std::move(segs), prior);
  const auto censored = make_double_censorship(prior, dc.s, dc.t);
  if (!is_mpc(censored.experiment, restriction)) {
    throw NumericError("double censorship is not an MPC of its implementing restriction", 0.0);
  }
  return restriction;
}

// u_D off the pooling intervals of an experiment, its chord across each.
class DesignerEnvelope {
 public:
  DesignerEnvelope(std::function<double(double)> u, std::vector<PoolingInterval> pools)
      : u_(std::move(u)), pools_(std::move(pools)) {}

  double operator()(double m) const {
    for (const auto& p : pools_) {
      if (m >= p.lo && m <= p.hi && p.hi > p.lo) {
        const double ul = u_(p.lo), uh = u_(p.hi);
        return ul + (uh - ul) * (m - p.lo) / (p.hi - p.lo);
      }
    }
    return u_(m);
  }
  const std::vector<PoolingInterval>& pools() const noexcept { return pools_; }

 private:
  std::function<double(double)> u_;
  std::vector<PoolingInterval> pools_;
};

inline constexpr double kDefaultEpsilon = 1e-3;

// v_F = p_F - eps (p* - G), with its samples on the certificate grid.
struct VirtualValue {
  DesignerEnvelope envelope;
  PriceFunction price;
  double epsilon = kDefaultEpsilon;
  std::vector<double> grid;
  std::vector<double> p_f;
  std::vector<double> v_f;

  double operator()(double m) const {
    return envelope(m) - epsilon * (price(m) - price.outside().cdf(m));
  }
};

inline VirtualValue virtual_value(const OutsideOption& g, std::function<double(double)> u_d,
                                  const Experiment& exp, const PriceFunction& p_star,
                                  double epsilon = kDefaultEpsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("virtual value needs epsilon > 0");
  auto pools = pooling_intervals(exp);
  if (!pools) throw DomainError("experiment is not a monotone partition of the prior");
  std::vector<double> extra;
  for (const auto& p : *pools) {
    extra.push_back(p.lo);
    extra.push_back(p.hi);
    extra.push_back(p.atom.location);
  }
  VirtualValue vv{DesignerEnvelope(std::move(u_d), std::move(*pools)), p_star, epsilon,
                  detail::certificate_grid(std::move(extra)), {}, {}};
  const double conv = detail::convexity_violation(vv.envelope, vv.grid);
  if (conv > kCertificateTolerance) throw CertificateError("designer envelope not convex", conv);
  vv.p_f.reserve(vv.grid.size());
  vv.v_f.reserve(vv.grid.size());
  for (double m : vv.grid) {
    vv.p_f.push_back(vv.envelope(m));
    vv.v_f.push_back(vv.p_f.back() - epsilon * (p_star(m) - g.cdf(m)));
  }
  return vv;
}

}  // namespace infodeleg
