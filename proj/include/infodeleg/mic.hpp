#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "infodeleg/distributions.hpp"
#include "infodeleg/errors.hpp"
#include "infodeleg/experiments.hpp"
#include "infodeleg/persuasion.hpp"

namespace infodeleg {

// Conditions of the MIC characterization, in the order mic_from_top_atom
// checks them.
enum class MicCondition {
  kNone,
  kTopAtomBelowFullDelegation,  // y >= y*
  kTopAtomBelowOne,             // y < 1
  kLowAtomPositive,             // x > 0 (tangent at y meets G on [0, r0])
  kLowAtomBelowThreshold,       // x <= x*
  kUpperThresholdAbove,         // t >= x*
  kAtomOrder,                   // x <= t
  kLowerThresholdNonnegative,   // s >= 0
  kLowerThresholdBelow,         // s <= x*
};

inline std::string to_string(MicCondition c) {
  switch (c) {
    case MicCondition::kNone: return "none";
    case MicCondition::kTopAtomBelowFullDelegation: return "y >= y*";
    case MicCondition::kTopAtomBelowOne: return "y < 1";
    case MicCondition::kLowAtomPositive: return "x > 0";
    case MicCondition::kLowAtomBelowThreshold: return "x <= x*";
    case MicCondition::kUpperThresholdAbove: return "t >= x*";
    case MicCondition::kAtomOrder: return "x <= t";
    case MicCondition::kLowerThresholdNonnegative: return "s >= 0";
    case MicCondition::kLowerThresholdBelow: return "s <= x*";
  }
  return "unknown";
}

class MicInfeasible : public std::runtime_error {
 public:
  MicInfeasible(MicCondition c, double y)
      : std::runtime_error("no MIC experiment with top atom " + std::to_string(y) +
                           ": violates " + to_string(c)),
        condition_(c) {}
  MicCondition condition() const noexcept { return condition_; }

 private:
  MicCondition condition_;
};

// Everything the MIC construction needs: the model primitives and the
// full-delegation solution.
struct MicContext {
  PriorDistribution prior;
  OutsideOption outside;
  FullDelegation full;

  static MicContext build(PriorDistribution prior, OutsideOption outside) {
    auto full = solve_full_delegation(prior, outside);
    return {std::move(prior), std::move(outside), std::move(full)};
  }

  double x_star() const noexcept { return full.pair.x; }
  double y_star() const noexcept { return full.pair.y; }
};

inline constexpr double kMicSlack = 1e-10;

// The MIC double censorship whose top atom is y: x from the tangency condition,
// t from E[w | w >= t] = y, s from E[w | w in [s, t]] = x.
inline CensorshipExperiment mic_from_top_atom(const MicContext& ctx, double y) {
  const double xs = ctx.x_star();
  if (y < ctx.y_star() - kMicSlack) throw MicInfeasible(MicCondition::kTopAtomBelowFullDelegation, y);
  if (y >= 1.0) throw MicInfeasible(MicCondition::kTopAtomBelowOne, y);
  if (y <= ctx.y_star() + 1e-13) {
    auto out = ctx.full.censorship;
    out.params = {xs, xs, xs, ctx.y_star()};
    return out;
  }
  double x = 0.0;
  try {
    x = solve_x_given_y(ctx.outside, y);
  } catch (const InfeasibleError&) {
    throw MicInfeasible(MicCondition::kLowAtomPositive, y);
  }
  if (!(x > 0.0)) throw MicInfeasible(MicCondition::kLowAtomPositive, y);
  if (x > xs + kMicSlack) throw MicInfeasible(MicCondition::kLowAtomBelowThreshold, y);
  const double t = inverse_upper_conditional_mean(ctx.prior, y);
  if (t < xs - kMicSlack) throw MicInfeasible(MicCondition::kUpperThresholdAbove, y);
  if (x > t + kMicSlack) throw MicInfeasible(MicCondition::kAtomOrder, y);
  x = std::min(x, t);
  double s = 0.0;
  try {
    s = inverse_interval_conditional_mean(ctx.prior, t, x);
  } catch (const InfeasibleError&) {
    throw MicInfeasible(MicCondition::kLowerThresholdNonnegative, y);
  }
  if (s > xs + kMicSlack) throw MicInfeasible(MicCondition::kLowerThresholdBelow, y);

  const auto& prior = ctx.prior;
  std::vector<Segment> segs{FollowsPrior{0.0, s}, Atom{x, prior.cdf(t) - prior.cdf(s)},
                            Atom{y, 1.0 - prior.cdf(t)}};
  return {DoubleCensorship{s, t, x, y}, Experiment(std::move(segs), prior)};
}

// nullopt-returning form for predicates and scans.
inline std::optional<CensorshipExperiment> try_mic_from_top_atom(const MicContext& ctx, double y,
                                                                 MicCondition* failed = nullptr) {
  try {
    return mic_from_top_atom(ctx, y);
  } catch (const MicInfeasible& e) {
    if (failed) *failed = e.condition();
    return std::nullopt;
  }
}

struct FeasibleRange {
  double y_min = 0.0;
  double y_max = 0.0;
  MicCondition binding = MicCondition::kNone;  // first condition violated above y_max
};

// [y*, sup{y : mic_from_top_atom(y) succeeds}], the supremum located by
// bisection on feasibility. Assumes the feasible set is an interval; see
// scan_feasibility for the check.
inline FeasibleRange feasible_y_range(const MicContext& ctx, double tol = 1e-12) {
  FeasibleRange out;
  out.y_min = ctx.y_star();
  double lo = out.y_min;
  double hi = 1.0 - 1e-9;
  MicCondition failed = MicCondition::kNone;
  if (try_mic_from_top_atom(ctx, hi, &failed)) {
    out.y_max = hi;
    out.binding = MicCondition::kTopAtomBelowOne;
    return out;
  }
  MicCondition at_hi = failed;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (try_mic_from_top_atom(ctx, mid, &failed)) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = failed;
    }
  }
  out.y_max = lo;
  out.binding = at_hi;
  return out;
}

struct FeasibilityScan {
  std::vector<double> ys;
  std::vector<bool> feasible;
  double last_feasible = 0.0;
  bool is_interval = true;  // feasible points form one contiguous run
};

// Dense feasibility scan over [lo, hi]; diagnostic for the interval assumption
// behind feasible_y_range.
inline FeasibilityScan scan_feasibility(const MicContext& ctx, double lo, double hi, std::size_t n) {
  FeasibilityScan out;
  out.ys = linspace(lo, hi, n);
  out.feasible.reserve(n);
  std::size_t runs = 0;
  bool prev = false;
  for (double y : out.ys) {
    const bool ok = try_mic_from_top_atom(ctx, y).has_value();
    if (ok) out.last_feasible = y;
    if (ok && !prev) ++runs;
    prev = ok;
    out.feasible.push_back(ok);
  }
  out.is_interval = runs <= 1;
  return out;
}

// The one-parameter family of MIC experiments indexed by the top atom.
class MicFamily {
 public:
  static MicFamily build(PriorDistribution prior, OutsideOption outside) {
    return MicFamily(MicContext::build(std::move(prior), std::move(outside)));
  }
  explicit MicFamily(MicContext ctx) : ctx_(std::move(ctx)), range_(feasible_y_range(ctx_)) {}

  const MicContext& context() const noexcept { return ctx_; }
  const FeasibleRange& range() const noexcept { return range_; }
  double y_min() const noexcept { return range_.y_min; }
  double y_max() const noexcept { return range_.y_max; }

  CensorshipExperiment member(double y) const {
    if (y < range_.y_min - kMicSlack || y > range_.y_max + kMicSlack) {
      throw DomainError("top atom " + std::to_string(y) + " outside the feasible MIC range");
    }
    return mic_from_top_atom(ctx_, std::clamp(y, range_.y_min, range_.y_max));
  }

 private:
  MicContext ctx_;
  FeasibleRange range_;
};

inline constexpr double kRhoTolerance = 1e-8;

// True iff exp is, in canonical form, a double censorship with (x, y) in the
// tangency set, s <= x* <= t and 0 < x < y < 1.
inline bool is_mic(const MicContext& ctx, const Experiment& exp) {
  const auto dc = recognize_double_censorship(exp);
  if (!dc) return false;
  const double xs = ctx.x_star();
  const double r0 = ctx.outside.r0();
  if (!(dc->x > 0.0 && dc->x < dc->y && dc->y < 1.0)) return false;
  if (dc->s > xs + 1e-9 || dc->t < xs - 1e-9) return false;
  if (dc->x > r0 + 1e-12 || dc->y < r0 - 1e-12) return false;
  return std::abs(rho_unchecked(ctx.outside, dc->x, dc->y)) <= kRhoTolerance;
}

}  // namespace infodeleg
