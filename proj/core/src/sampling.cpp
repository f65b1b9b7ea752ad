// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#include "cascade/sampling.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cascade/error.hpp"
#include "cascade/numerics.hpp"

namespace cascade::sim {

namespace {

double marsaglia_tsang(RngStream& stream, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = stream.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t poisson_ptrs(RngStream& stream, double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - numerics::log_gamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

double gamma_sample(RngStream& stream, double shape, double scale) {
  if (!std::isfinite(shape) || !(shape > 0.0) || !std::isfinite(scale) || !(scale > 0.0)) {
    throw DomainError("gamma_sample: shape and scale must be finite and > 0");
  }
  if (shape >= 1.0) return scale * marsaglia_tsang(stream, shape);
  // Gamma(a) = Gamma(a + 1) U^{1/a}, combined in log space.
  const double log_x = std::log(marsaglia_tsang(stream, shape + 1.0)) + std::log(stream.uniform()) / shape;
  const double x = scale * std::exp(log_x);
  return x > 0.0 ? x : std::numeric_limits<double>::denorm_min();
}

std::uint64_t poisson_sample(RngStream& stream, double mean) {
  if (!std::isfinite(mean) || mean < 0.0) {
    throw DomainError("poisson_sample: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  if (mean >= 10.0) return poisson_ptrs(stream, mean);
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double product = stream.uniform();
  while (product > limit) {
    ++k;
    product *= stream.uniform();
  }
  return k;
}

std::uint64_t nb_sample(RngStream& stream, double r, double q) {
  if (!std::isfinite(r) || !(r > 0.0) || !(q > 0.0 && q < 1.0)) {
    throw DomainError("nb_sample: need r > 0 and q in (0, 1)");
  }
  return poisson_sample(stream, gamma_sample(stream, r, q / (1.0 - q)));
}

}  // namespace cascade::sim
