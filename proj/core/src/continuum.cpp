// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#include "cascade/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cascade::continuum {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHalfLogPi = 0.57236494292470008707;

// Below this x, ln Gamma(2x) is used directly; above it the Stirling terms are
// cancelled analytically against the power term.
constexpr double kExpandedFormThreshold = 7.5;

// Decay rates below this are treated as the critical power-law tail.
constexpr double kCriticalDecay = 1e-14;

void require_x(double x, double lower, bool inclusive, const char* op) {
  const bool ok = std::isfinite(x) && (inclusive ? x >= lower : x > lower);
  if (!ok) {
    throw DomainError(std::string(op) + ": x out of domain, got " + std::to_string(x));
  }
}

double decay_rate(double p) { return (1.0 - 2.0 * p) / p + 2.0 * std::log(2.0 * p); }

}  // namespace

double log_density(const ModelParams& params, double x) {
  require_x(x, 1.0, true, "log_density");
  if (x == 1.0) return kNegInf;
  const double p = params.p();
  if (x < kExpandedFormThreshold) {
    return (2.0 * x - 1.0) * std::log(x - 1.0) - (1.0 / p + 2.0 * std::log(p)) * x + 1.0 / p -
           std::log(x) - numerics::log_gamma(2.0 * x);
  }
  // Same expression with ln Gamma(2x) expanded by Stirling's series; the
  // O(x ln x) pieces cancel exactly, leaving
  //   -a x - 3/2 ln x + 1/p - ln(pi)/2 + (2x - 1) ln(1 - 1/x) - R(2x).
  return -decay_rate(p) * x - 1.5 * std::log(x) + 1.0 / p - kHalfLogPi +
         (2.0 * x - 1.0) * std::log1p(-1.0 / x) - numerics::stirling_remainder(2.0 * x);
}

double density(const ModelParams& params, double x) { return std::exp(log_density(params, x)); }

AsymptoticTail asymptotic_tail(const ModelParams& params) {
  const double p = params.p();
  // ln[e^{1/p - 2 + ln 2} / (2 sqrt(pi))]
  const double log_c = 1.0 / p - 2.0 + std::numbers::ln2 - std::log(2.0 * std::sqrt(std::numbers::pi));
  return AsymptoticTail{log_c, decay_rate(p)};
}

double asymptotic_log_density(const ModelParams& params, double x) {
  require_x(x, 0.0, false, "asymptotic_log_density");
  const auto tail = asymptotic_tail(params);
  return tail.log_prefactor - tail.decay_rate * x - 1.5 * std::log(x);
}

Moments moments(const ModelParams& params) {
  const double p = params.p();
  if (!params.subcritical()) {
    throw DomainError("moments: defined only for p < 1/2, got p = " + std::to_string(p));
  }
  const double gap = 1.0 - 2.0 * p;
  return Moments{1.0 / gap, 2.0 * p * p / (gap * gap * gap)};
}

ExtinctionReport extinction(const ModelParams& params) {
  const double p = params.p();
  ExtinctionReport report;
  report.p = p;
  if (p <= 0.5) return report;

  // The argument sits at or just above -1/e; rounding may push it a hair
  // below the branch point.
  const double branch_point = -std::exp(-1.0);
  const double arg = std::max(branch_point, -std::exp(-1.0 / (2.0 * p)) / (2.0 * p));
  const double w = numerics::lambert_w_m1(arg);
  report.x_of_p = std::max(0.0, -2.0 * w - 1.0 / p);
  report.chi = -report.x_of_p;
  report.prob_finite = std::exp(report.chi);
  return report;
}

double extinction_exponent_by_root(const ModelParams& params, double tol) {
  const double p = params.p();
  if (p <= 0.5) return 0.0;
  const auto f = [p](double x) { return 2.0 * std::log1p(p * x) - x; };

  // f(x) ~ (2p - 1) x - p^2 x^2 near 0, so half the quadratic's root is
  // inside the positive lobe.
  double lo = 0.5 * (2.0 * p - 1.0) / (p * p);
  for (int i = 0; i < 200 && !(f(lo) > 0.0); ++i) lo *= 0.5;
  double hi = 2.0 * lo;
  for (int i = 0; i < 200 && !(f(hi) < 0.0); ++i) hi *= 2.0;
  return numerics::solve_bracketed(f, numerics::Interval(lo, hi), tol);
}

double tail_estimate(const ModelParams& params, double upper, int power) {
  require_x(upper, 1.0, false, "tail_estimate");
  const auto tail = asymptotic_tail(params);
  const double s = power - 1.5;
  const double c = std::exp(tail.log_prefactor);
  if (tail.decay_rate < kCriticalDecay) {
    if (power != 0) {
      throw DomainError("tail_estimate: moments diverge at criticality");
    }
    // C x^{-3/2} (1 - 1/(24 x)) integrated from `upper` to infinity.
    return 2.0 * c / std::sqrt(upper) - c / (36.0 * upper * std::sqrt(upper));
  }
  const double rate = tail.decay_rate - std::max(0.0, s) / upper;
  if (!(rate > 0.0)) {
    throw DomainError("tail_estimate: upper limit inside the rising part of the tail");
  }
  return std::exp(tail.log_prefactor - tail.decay_rate * upper + s * std::log(upper)) / rate;
}

double truncation_point(const ModelParams& params, double tail_tol, int power) {
  if (!(tail_tol > 0.0)) throw DomainError("truncation_point: tail_tol must be > 0");
  if (power < 0) throw DomainError("truncation_point: power must be >= 0");
  const auto tail = asymptotic_tail(params);
  const double s = power - 1.5;

  if (tail.decay_rate < kCriticalDecay) {
    if (power != 0) throw DomainError("truncation_point: moments diverge at criticality");
    // The neglected O(x^{-5/2}) term of the power tail sets the cutoff.
    return std::max(16.0, std::pow(std::exp(tail.log_prefactor) / tail_tol, 0.4));
  }

  auto bound = [&](double x) {
    const double rate = tail.decay_rate - std::max(0.0, s) / x;
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return std::exp(tail.log_prefactor - tail.decay_rate * x + s * std::log(x)) / rate;
  };
  double hi = 2.0;
  while (bound(hi) > tail_tol) {
    hi *= 2.0;
    if (hi > 1e12) throw NumericalError("truncation_point: tail decays too slowly");
  }
  double lo = std::max(1.0 + 1e-9, 0.5 * hi);
  if (bound(lo) <= tail_tol) return lo;
  for (int i = 0; i < 60 && hi - lo > 1e-6 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (bound(mid) > tail_tol ? lo : hi) = mid;
  }
  return hi;
}

numerics::QuadratureResult density_moment(const ModelParams& params, int power, double abs_tol) {
  if (!(abs_tol > 0.0)) throw DomainError("density_moment: abs_tol must be > 0");
  const double upper = truncation_point(params, abs_tol / 10.0, power);

  // Geometric breakpoints keep panels near the mode from starving the tail.
  std::vector<double> breakpoints{1.0};
  for (double b = 2.0; b < upper; b *= 2.0) breakpoints.push_back(b);
  breakpoints.push_back(upper);

  const auto integrand = [&params, power](double x) {
    if (x <= 1.0) return 0.0;
    return std::pow(x, power) * density(params, x);
  };
  auto result = numerics::integrate_piecewise(integrand, breakpoints, 0.5 * abs_tol);
  const double tail = tail_estimate(params, upper, power);
  result.value += tail;
  return result;
}

NormalizationCheck verify_normalization(const ModelParams& params, double abs_tol) {
  NormalizationCheck check;
  check.upper_limit = truncation_point(params, abs_tol / 10.0, 0);
  check.quadrature = density_moment(params, 0, abs_tol);
  check.tail = tail_estimate(params, check.upper_limit, 0);
  check.integral = check.quadrature.value;
  check.target = extinction(params).prob_finite;
  check.residual = std::abs(check.integral - check.target);
  return check;
}

Moments quadrature_moments(const ModelParams& params, double abs_tol) {
  if (!params.subcritical()) {
    throw DomainError("quadrature_moments: defined only for p < 1/2");
  }
  const double first = density_moment(params, 1, abs_tol).value;
  const double second = density_moment(params, 2, abs_tol).value;
  return Moments{first, second - first * first};
}

std::vector<double> cumulative_distribution(const ModelParams& params,
                                            std::span<const double> xs, double abs_tol) {
  std::vector<double> cdf;
  cdf.reserve(xs.size());
  const auto g = [&params](double x) { return x <= 1.0 ? 0.0 : density(params, x); };
  numerics::CompensatedSum running;
  double previous = 1.0;
  for (const double x : xs) {
    require_x(x, 1.0, true, "cumulative_distribution");
    if (x < previous) throw DomainError("cumulative_distribution: points must ascend");
    if (x > previous) {
      running.add(numerics::integrate_adaptive(g, numerics::Interval(previous, x), abs_tol).value);
      previous = x;
    }
    cdf.push_back(running.value());
  }
  return cdf;
}

DensityTable tabulate_density(const ModelParams& params, std::span<const double> xs) {
  DensityTable table{params, {}};
  table.points.reserve(xs.size());
  double previous = -std::numeric_limits<double>::infinity();
  for (const double x : xs) {
    if (!(x > previous)) throw DomainError("tabulate_density: x must be strictly increasing");
    table.points.push_back({x, density(params, x)});
    previous = x;
  }
  return table;
}

}  // namespace cascade::continuum
