// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#include "cascade/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace cascade::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kHalfLogTwoPi = 0.9189385332046728;
constexpr double kEulerGamma = 0.57721566490153286061;

// 1/e split into a double and its residual so that x + 1/e is accurate near
// the branch point.
constexpr double kInvEHi = 0.36787944117144233;
constexpr double kInvELo = -1.2428753672788363e-17;

// (-1)^k (zeta(k) - 1) / k for k = 2..30, used in the expansion of
// ln Gamma(1 + e) about e = 0.
constexpr std::array<double, 29> kZetaMinusOne = {
    0.64493406684822643647, 0.2020569031595942854,    0.082323233711138191516,
    0.036927755143369926331, 0.017343061984449139715, 0.0083492773819228268398,
    0.0040773561979443393787, 0.0020083928260822144179, 0.00099457512781808533715,
    0.0004941886041194645587, 0.00024608655330804829864, 0.00012271334757848914675,
    6.1248135058704829259e-5, 3.0588236307020493552e-5, 1.5282259408651871733e-5,
    7.6371976378997622736e-6, 3.8172932649998398565e-6, 1.9082127165539389257e-6,
    9.5396203387279611315e-7, 4.7693298678780646312e-7, 2.3845050272773299e-7,
    1.1921992596531107307e-7, 5.9608189051259479612e-8, 2.9803503514652280186e-8,
    1.4901554828365041235e-8, 7.450711789835429492e-9,  3.7253340247884570548e-9,
    1.8626597235130490064e-9, 9.3132743241966818287e-10,
};

// sum_{k>=2} (-1)^k (zeta(k) - 1) e^k / k, for |e| <= 1/2.
double zeta_tail_series(double e) {
  double acc = 0.0;
  for (std::size_t i = kZetaMinusOne.size(); i-- > 0;) {
    const int k = static_cast<int>(i) + 2;
    const double coeff = ((k % 2 == 0) ? 1.0 : -1.0) * kZetaMinusOne[i] / k;
    acc = acc * e + coeff;
  }
  return acc * e * e;
}

// ln Gamma(1 + e) for |e| <= 1/2.
double log_gamma_one_plus(double e) {
  return -std::log1p(e) + e * (1.0 - kEulerGamma) + zeta_tail_series(e);
}

// ln Gamma(2 + e) = ln Gamma(1 + e) + ln(1 + e); the log1p terms cancel.
double log_gamma_two_plus(double e) {
  return e * (1.0 - kEulerGamma) + zeta_tail_series(e);
}

}  // namespace

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw DomainError("Interval requires finite lo < hi, got [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

double stirling_remainder(double z) {
  // B_{2k} / (2k (2k - 1)) for k = 1..8
  constexpr std::array<double, 8> c = {
      1.0 / 12.0,     -1.0 / 360.0,  1.0 / 1260.0,         -1.0 / 1680.0,
      1.0 / 1188.0,   -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0,
  };
  const double y = 1.0 / (z * z);
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * y + c[i];
  return acc / z;
}

double log_gamma(double z) {
  if (!std::isfinite(z) || !(z > 0.0)) {
    throw DomainError("log_gamma requires finite z > 0, got " + std::to_string(z));
  }
  if (z == 1.0 || z == 2.0) return 0.0;
  if (z < 0.5) return log_gamma_one_plus(z) - std::log(z);
  if (z < 1.5) return log_gamma_one_plus(z - 1.0);
  if (z < 2.5) return log_gamma_two_plus(z - 2.0);
  if (z < 15.0) {
    // Shift down into [1.5, 2.5); z - n is exact here.
    const double n = std::floor(z - 1.5);
    const double base = z - n;
    double product = 1.0;
    for (double t = base; t < z; t += 1.0) product *= t;
    return log_gamma_two_plus(base - 2.0) + std::log(product);
  }
  return (z - 0.5) * std::log(z) - z + kHalfLogTwoPi + stirling_remainder(z);
}

double lambert_w_m1(double x) {
  if (!std::isfinite(x) || x < -kInvEHi || x >= 0.0) {
    throw DomainError("lambert_w_m1 requires x in [-1/e, 0), got " + std::to_string(x));
  }
  if (x == -kInvEHi) return -1.0;

  // 1 + e x, evaluated through x + 1/e to keep digits near the branch point.
  const double branch_gap =
      std::max(0.0, std::numbers::e * ((x + kInvEHi) + kInvELo));

  // The log starter lands too close to -1 (and can slide onto W_0) for
  // moderate gaps, so the branch-point series covers gap < 1/2.
  double w;
  if (branch_gap < 0.5) {
    const double p = -std::sqrt(2.0 * branch_gap);
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  if (w > -1.0) w = -1.0;

  // Halley refinement on f(w) = w e^w - x.
  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (f == 0.0 || wp1 == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    double next = w - step;
    if (next > -1.0) next = 0.5 * (w - 1.0);
    const bool done = std::abs(next - w) <= 4.0 * kEps * std::abs(w);
    w = next;
    if (done) break;
  }
  return w;
}

double solve_bracketed(const RealFunction& f, Interval bracket, double tol) {
  if (!(tol > 0.0)) throw DomainError("solve_bracketed requires tol > 0");

  double a = bracket.lo();
  double b = bracket.hi();
  double fa = f(a);
  double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb)) {
    throw NumericalError("solve_bracketed: non-finite function value at bracket end");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw NumericalError("solve_bracketed: no sign change on [" + std::to_string(a) +
                         ", " + std::to_string(b) + "]");
  }

  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  constexpr int kMaxIterations = 500;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol;
    const double half = 0.5 * (c - b);
    if (std::abs(half) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // Inverse quadratic interpolation, or secant when only two points.
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * half * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * half * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, half);
    fb = f(b);
    if (!std::isfinite(fb)) {
      throw NumericalError("solve_bracketed: non-finite function value inside bracket");
    }
  }
  throw RootNotConverged("solve_bracketed: iteration budget exhausted",
                         Interval(std::min(b, c), std::max(b, c)));
}

namespace {

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

// Kronrod 15-point abscissae (positive half) and weights; Gauss 7-point
// weights for the odd-indexed abscissae and the centre.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

Panel gauss_kronrod(const RealFunction& f, double lo, double hi, std::size_t& evals) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(centre);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  evals += 15;
  kronrod *= half;
  gauss *= half;
  if (!std::isfinite(kronrod)) {
    throw NumericalError("integrate_adaptive: integrand not finite on [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return Panel{lo, hi, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_adaptive(const RealFunction& f, Interval interval,
                                    double abs_tol, std::size_t max_panels) {
  if (!(abs_tol > 0.0)) throw DomainError("integrate_adaptive requires abs_tol > 0");

  std::size_t evals = 0;
  std::priority_queue<Panel> panels;
  panels.push(gauss_kronrod(f, interval.lo(), interval.hi(), evals));
  double total_error = panels.top().error;

  auto summarize = [&]() {
    auto copy = panels;
    CompensatedSum value;
    CompensatedSum error;
    while (!copy.empty()) {
      value.add(copy.top().value);
      error.add(copy.top().error);
      copy.pop();
    }
    return QuadratureResult{value.value(), error.value(), evals};
  };

  for (;;) {
    while (total_error > abs_tol) {
      if (panels.size() >= max_panels) {
        throw QuadratureToleranceNotMet("integrate_adaptive: panel budget exhausted",
                                        summarize());
      }
      const Panel worst = panels.top();
      const double mid = 0.5 * (worst.lo + worst.hi);
      if (!(mid > worst.lo && mid < worst.hi) ||
          worst.hi - worst.lo < 64.0 * kEps * std::max(1.0, std::abs(mid))) {
        throw QuadratureToleranceNotMet("integrate_adaptive: panel width at roundoff limit",
                                        summarize());
      }
      panels.pop();
      const Panel left = gauss_kronrod(f, worst.lo, mid, evals);
      const Panel right = gauss_kronrod(f, mid, worst.hi, evals);
      total_error += left.error + right.error - worst.error;
      panels.push(left);
      panels.push(right);
    }
    // The running error total can drift; trust only the recomputed sum.
    QuadratureResult result = summarize();
    if (result.abs_error_estimate <= abs_tol) return result;
    total_error = result.abs_error_estimate;
  }
}

QuadratureResult integrate_piecewise(const RealFunction& f,
                                     std::span<const double> breakpoints,
                                     double abs_tol) {
  if (breakpoints.size() < 2) {
    throw DomainError("integrate_piecewise needs at least two breakpoints");
  }
  const double piece_tol = abs_tol / static_cast<double>(breakpoints.size() - 1);
  CompensatedSum value;
  double error = 0.0;
  std::size_t evals = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const auto r = integrate_adaptive(f, Interval(breakpoints[i], breakpoints[i + 1]),
                                      piece_tol);
    value.add(r.value);
    error += r.abs_error_estimate;
    evals += r.evaluations;
  }
  return QuadratureResult{value.value(), error, evals};
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

}  // namespace cascade::numerics
