#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "infodeleg/distributions.hpp"
#include "infodeleg/errors.hpp"
#include "infodeleg/numerics.hpp"

namespace infodeleg {

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

// Reveals the state on [a, b]: contributes H(b) - H(a) spread like the prior.
struct FollowsPrior {
  double a = 0.0;
  double b = 1.0;
};

using Segment = std::variant<Atom, FollowsPrior>;

inline double segment_position(const Segment& s) {
  return std::visit(
      [](const auto& v) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Atom>) {
          return v.location;
        } else {
          return v.a;
        }
      },
      s);
}

// Thresholds (s, t) and atoms (x, y) of a double censorship experiment.
struct DoubleCensorship {
  double s = 0.0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kMassTolerance = 1e-10;
inline constexpr double kMpcTolerance = 1e-9;
inline constexpr std::size_t kIcdfGrid = 1024;

// A distribution of posterior means that is a mean-preserving contraction of
// the reference prior, stored as atoms and prior-following intervals.
//
// Segments are kept in canonical form: sorted by position, atoms at identical
// locations merged, zero-mass atoms and empty intervals dropped, contiguous
// intervals joined. Construction throws DomainError if the segments do not
// describe an MPC of the prior.
class Experiment {
 public:
  Experiment(std::vector<Segment> segments, PriorDistribution prior)
      : prior_(std::move(prior)), segments_(canonicalize(std::move(segments))) {
    validate();
  }

  static Experiment uninformative(const PriorDistribution& prior) {
    return Experiment({Atom{prior.mean(), 1.0}}, prior);
  }
  static Experiment full_revelation(const PriorDistribution& prior) {
    return Experiment({FollowsPrior{0.0, 1.0}}, prior);
  }

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const PriorDistribution& prior() const noexcept { return prior_; }

  double cdf(double m) const {
    double out = 0.0;
    for (const auto& seg : segments_) {
      if (const auto* a = std::get_if<Atom>(&seg)) {
        if (a->location <= m) out += a->mass;
      } else {
        const auto& fp = std::get<FollowsPrior>(seg);
        if (m > fp.a) out += prior_.cdf(std::min(m, fp.b)) - prior_.cdf(fp.a);
      }
    }
    return std::min(out, 1.0);
  }

  // I_F(m) = int_0^m F, evaluated piecewise in closed form.
  double icdf(double m) const {
    double out = 0.0;
    for (const auto& seg : segments_) {
      if (const auto* a = std::get_if<Atom>(&seg)) {
        if (m > a->location) out += a->mass * (m - a->location);
      } else {
        const auto& fp = std::get<FollowsPrior>(seg);
        if (m <= fp.a) continue;
        const double c = std::min(m, fp.b);
        const double ha = prior_.cdf(fp.a);
        out += prior_.integrated_cdf(c) - prior_.integrated_cdf(fp.a) - ha * (c - fp.a);
        if (m > fp.b) out += (prior_.cdf(fp.b) - ha) * (m - fp.b);
      }
    }
    return out;
  }

  double total_mass() const {
    double out = 0.0;
    for (const auto& seg : segments_) out += segment_mass(seg);
    return out;
  }

  double mean() const {
    double out = 0.0;
    for (const auto& seg : segments_) {
      if (const auto* a = std::get_if<Atom>(&seg)) {
        out += a->location * a->mass;
      } else {
        const auto& fp = std::get<FollowsPrior>(seg);
        // int_a^b w dH = b H(b) - a H(a) - (I_H(b) - I_H(a))
        out += fp.b * prior_.cdf(fp.b) - fp.a * prior_.cdf(fp.a) -
               (prior_.integrated_cdf(fp.b) - prior_.integrated_cdf(fp.a));
      }
    }
    return out;
  }

  // Atom locations and interval endpoints, sorted and deduplicated.
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (const auto& seg : segments_) {
      if (const auto* a = std::get_if<Atom>(&seg)) {
        out.push_back(a->location);
      } else {
        out.push_back(std::get<FollowsPrior>(seg).a);
        out.push_back(std::get<FollowsPrior>(seg).b);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  double segment_mass(const Segment& seg) const {
    if (const auto* a = std::get_if<Atom>(&seg)) return a->mass;
    const auto& fp = std::get<FollowsPrior>(seg);
    return prior_.cdf(fp.b) - prior_.cdf(fp.a);
  }

 private:
  static std::vector<Segment> canonicalize(std::vector<Segment> in) {
    std::stable_sort(in.begin(), in.end(), [](const Segment& l, const Segment& r) {
      const double pl = segment_position(l), pr = segment_position(r);
      if (pl != pr) return pl < pr;
      return l.index() > r.index();  // intervals before atoms at equal position
    });
    std::vector<Segment> out;
    for (auto& seg : in) {
      if (auto* a = std::get_if<Atom>(&seg)) {
        if (!(a->mass > 1e-15)) {
          if (a->mass < -1e-15) throw DomainError("atom with negative mass");
          continue;
        }
        if (!out.empty()) {
          if (auto* prev = std::get_if<Atom>(&out.back());
              prev && std::abs(prev->location - a->location) <= 1e-12) {
            prev->location = (prev->location * prev->mass + a->location * a->mass) /
                             (prev->mass + a->mass);
            prev->mass += a->mass;
            continue;
          }
        }
        out.push_back(*a);
      } else {
        auto fp = std::get<FollowsPrior>(seg);
        if (fp.a < -1e-15 || fp.b > 1.0 + 1e-15) throw DomainError("interval outside [0, 1]");
        fp.a = std::clamp(fp.a, 0.0, 1.0);
        fp.b = std::clamp(fp.b, 0.0, 1.0);
        if (!(fp.b > fp.a)) continue;
        if (!out.empty()) {
          if (auto* prev = std::get_if<FollowsPrior>(&out.back()); prev && prev->b >= fp.a) {
            if (prev->b > fp.a + 1e-12) throw DomainError("overlapping prior-following intervals");
            prev->b = std::max(prev->b, fp.b);
            continue;
          }
        }
        out.push_back(fp);
      }
    }
    return out;
  }

  void validate() const {
    for (const auto& seg : segments_) {
      if (const auto* a = std::get_if<Atom>(&seg)) {
        if (!(a->location >= 0.0 && a->location <= 1.0)) {
          throw DomainError("atom location outside [0, 1]");
        }
      }
    }
    if (const double m = total_mass(); std::abs(m - 1.0) > kMassTolerance) {
      throw DomainError("experiment mass " + std::to_string(m) + " differs from 1");
    }
    if (const double mu = mean(); std::abs(mu - prior_.mean()) > kMassTolerance) {
      throw DomainError("experiment mean " + std::to_string(mu) + " differs from prior mean");
    }
    auto check = [&](double m) {
      if (icdf(m) > prior_.integrated_cdf(m) + kMpcTolerance) {
        throw DomainError("experiment is not a mean-preserving contraction of the prior at m = " +
                          std::to_string(m));
      }
    };
    for (double m : linspace(0.0, 1.0, kIcdfGrid)) check(m);
    for (double m : breakpoints()) check(m);
  }

  PriorDistribution prior_;
  std::vector<Segment> segments_;
};

// sum_atoms u(loc) mass + sum_intervals int_a^b u(w) h(w) dw.
template <class U>
double expected_payoff(const Experiment& exp, U&& u) {
  const auto& prior = exp.prior();
  double out = 0.0;
  double err = 0.0;
  bool ok = true;
  for (const auto& seg : exp.segments()) {
    if (const auto* a = std::get_if<Atom>(&seg)) {
      out += u(a->location) * a->mass;
    } else {
      const auto& fp = std::get<FollowsPrior>(seg);
      std::vector<double> cuts{fp.a};
      for (double k : prior.knots()) {
        if (k > fp.a && k < fp.b) cuts.push_back(k);
      }
      cuts.push_back(fp.b);
      auto r = integrate_pieces([&](double w) { return u(w) * prior.pdf(w); }, cuts,
                                1e-12 * (fp.b - fp.a));
      out += r.value;
      err += r.error_estimate;
      ok = ok && r.converged;
    }
  }
  if (!ok) throw NumericError("expected_payoff quadrature did not converge", err);
  return out;
}

// F is an MPC of Fbar iff I_F <= I_Fbar with equal means; checked on a
// 1024-point grid plus both experiments' breakpoints.
inline bool is_mpc(const Experiment& f, const Experiment& fbar, double tol = kMpcTolerance) {
  if (std::abs(f.mean() - fbar.mean()) > tol) return false;
  auto below = [&](double m) { return f.icdf(m) <= fbar.icdf(m) + tol; };
  const auto grid = linspace(0.0, 1.0, kIcdfGrid);
  const auto bf = f.breakpoints(), bb = fbar.breakpoints();
  return std::all_of(grid.begin(), grid.end(), below) && std::all_of(bf.begin(), bf.end(), below) &&
         std::all_of(bb.begin(), bb.end(), below);
}

struct CensorshipExperiment {
  DoubleCensorship params;
  Experiment experiment;
};

// Reveals [0, s), pools [s, t] to x and [t, 1] to y. With s = t the middle
// atom has zero mass and the result is upper censorship at s.
inline CensorshipExperiment make_double_censorship(const PriorDistribution& prior, double s,
                                                   double t) {
  if (!(s >= 0.0 && t <= 1.0 && s <= t)) {
    throw DomainError("make_double_censorship requires 0 <= s <= t <= 1");
  }
  DoubleCensorship dc{s, t, conditional_mean(prior, s, t), conditional_mean(prior, t, 1.0)};
  std::vector<Segment> segs{FollowsPrior{0.0, s}};
  if (t > s) segs.emplace_back(Atom{dc.x, prior.cdf(t) - prior.cdf(s)});
  if (t < 1.0) segs.emplace_back(Atom{dc.y, 1.0 - prior.cdf(t)});
  return {dc, Experiment(std::move(segs), prior)};
}

inline CensorshipExperiment make_upper_censorship(const PriorDistribution& prior, double x) {
  return make_double_censorship(prior, x, x);
}

// State interval [lo, hi] that an atom pools in a monotone partition.
struct PoolingInterval {
  double lo = 0.0;
  double hi = 0.0;
  Atom atom;
};

// Reads the experiment as a monotone partition of the state space: walking the
// segments left to right, each interval reveals [a, b] and each atom pools the
// next block of prior mass to its conditional mean. Returns nullopt if the
// experiment does not have that structure.
inline std::optional<std::vector<PoolingInterval>> pooling_intervals(const Experiment& exp,
                                                                     double tol = 1e-8) {
  const auto& prior = exp.prior();
  std::vector<PoolingInterval> out;
  double pos = 0.0;
  for (const auto& seg : exp.segments()) {
    if (const auto* fp = std::get_if<FollowsPrior>(&seg)) {
      if (std::abs(fp->a - pos) > tol) return std::nullopt;
      pos = fp->b;
      continue;
    }
    const auto& a = std::get<Atom>(seg);
    const double target = prior.cdf(pos) + a.mass;
    const double hi = target >= 1.0 - 1e-14 ? 1.0 : prior.quantile(target);
    if (std::abs(conditional_mean(prior, pos, hi) - a.location) > tol) return std::nullopt;
    out.push_back({pos, hi, a});
    pos = hi;
  }
  if (std::abs(pos - 1.0) > tol) return std::nullopt;
  return out;
}

// Recovers (s, t, x, y) if the experiment is, in canonical form, a double
// censorship (upper censorship included, with s = t = x).
inline std::optional<DoubleCensorship> recognize_double_censorship(const Experiment& exp) {
  const auto& segs = exp.segments();
  auto pools = pooling_intervals(exp);
  if (!pools || pools->empty() || pools->size() > 2) return std::nullopt;
  double s = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (const auto* fp = std::get_if<FollowsPrior>(&segs[i])) {
      if (i != 0) return std::nullopt;
      s = fp->b;
    }
  }
  const auto& top = pools->back();
  if (std::abs(top.hi - 1.0) > 1e-8) return std::nullopt;
  if (pools->size() == 1) return DoubleCensorship{s, s, s, top.atom.location};
  const auto& mid = pools->front();
  return DoubleCensorship{s, mid.hi, mid.atom.location, top.atom.location};
}

}  // namespace infodeleg
