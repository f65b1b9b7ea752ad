// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "cascade/error.hpp"

/// Special functions and the small set of numerical routines the rest of
/// the library is built on. Everything here is pure and re-entrant.
namespace cascade::numerics {

using RealFunction = std::function<double(double)>;

/// Closed interval [lo, hi] with lo < hi, both finite.
class Interval {
 public:
  Interval(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }
  double midpoint() const { return lo_ + 0.5 * (hi_ - lo_); }
  bool contains(double x) const { return x >= lo_ && x <= hi_; }

 private:
  double lo_;
  double hi_;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr double kDefaultRootTolerance = 1e-12;
inline constexpr double kDefaultQuadratureTolerance = 1e-10;

/// ln Gamma(z) for z > 0.
///
/// Relative error is below 1e-13 on [1e-6, 1e8], including near the zeros
/// at z = 1 and z = 2 where a power series about 1 is used.
double log_gamma(double z);

/// Remainder of Stirling's series,
///   ln Gamma(z) - [(z - 1/2) ln z - z + ln(2 pi)/2],
/// valid (to double precision) for z >= 15.
double stirling_remainder(double z);

/// Lower real branch W_{-1}(x) of the Lambert W function, x in [-1/e, 0).
/// Returns w <= -1 with w e^w = x.
double lambert_w_m1(double x);

/// Thrown by solve_bracketed when the iteration budget runs out. Carries the
/// tightest sign-changing bracket found.
class RootNotConverged : public NumericalError {
 public:
  RootNotConverged(const std::string& what, Interval best)
      : NumericalError(what), best_(best) {}
  const Interval& best_bracket() const { return best_; }

 private:
  Interval best_;
};

/// Root of f inside `bracket` by Brent's method. Requires a sign change
/// across the bracket (a zero at an endpoint is returned as is). The result
/// lies inside the initial bracket and the final bracket is no wider than
/// `tol` (plus a few ulps of the root).
double solve_bracketed(const RealFunction& f, Interval bracket,
                       double tol = kDefaultRootTolerance);

/// Thrown by integrate_adaptive when the panel budget is exhausted before the
/// error estimate drops below the requested tolerance.
class QuadratureToleranceNotMet : public NumericalError {
 public:
  QuadratureToleranceNotMet(const std::string& what, QuadratureResult best)
      : NumericalError(what), best_(best) {}
  const QuadratureResult& best_estimate() const { return best_; }

 private:
  QuadratureResult best_;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature. The worst panel is
/// bisected until the summed |K15 - G7| estimate is below abs_tol.
QuadratureResult integrate_adaptive(const RealFunction& f, Interval interval,
                                    double abs_tol = kDefaultQuadratureTolerance,
                                    std::size_t max_panels = 20000);

/// Integrates f over consecutive pieces [b0, b1], [b1, b2], ... and sums the
/// results. Tolerance is split evenly across pieces.
QuadratureResult integrate_piecewise(const RealFunction& f,
                                     std::span<const double> breakpoints,
                                     double abs_tol = kDefaultQuadratureTolerance);

/// Compensated (Neumaier) running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace cascade::numerics
