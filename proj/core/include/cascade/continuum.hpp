// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cascade/model.hpp"
#include "cascade/numerics.hpp"

/// Closed-form results for the total size Z of the Gamma(2, p) cascade:
/// its density on [1, inf), the large-x asymptotic form, subcritical
/// moments and the probability that the cascade is finite.
namespace cascade::continuum {

struct DensityPoint {
  double x = 0.0;
  double density = 0.0;
};

struct DensityTable {
  ModelParams params;
  std::vector<DensityPoint> points;
};

/// P{Z < inf} and the exponent that produces it.
struct ExtinctionReport {
  double p = 0.0;
  double x_of_p = 0.0;      ///< decay exponent, >= 0
  double chi = 0.0;         ///< -x_of_p
  double prob_finite = 1.0; ///< exp(chi)
};

/// Parameters of the large-x form g(x) ~ C exp(-a x) x^{-3/2}.
struct AsymptoticTail {
  double log_prefactor = 0.0;  ///< ln C
  double decay_rate = 0.0;     ///< a, zero exactly at p = 1/2
};

/// ln g(x) for x >= 1; -inf at x = 1.
double log_density(const ModelParams& params, double x);

/// g(x) = (x-1)^{2x-1} exp(-(1/p + 2 ln p) x + 1/p) / (x Gamma(2x)).
double density(const ModelParams& params, double x);

AsymptoticTail asymptotic_tail(const ModelParams& params);

/// ln of C exp(-a x) x^{-3/2}; requires x > 0.
double asymptotic_log_density(const ModelParams& params, double x);

/// E(Z) = 1/(1-2p) and Var(Z) = 2p^2/(1-2p)^3. Throws DomainError for
/// p >= 1/2, where the moments do not exist.
Moments moments(const ModelParams& params);

/// Extinction exponent through the lower Lambert branch.
ExtinctionReport extinction(const ModelParams& params);

/// Positive root of x = 2 ln(1 + p x) by bracketed root finding; 0 for
/// p <= 1/2. An independent route to ExtinctionReport::x_of_p.
double extinction_exponent_by_root(const ModelParams& params,
                                   double tol = numerics::kDefaultRootTolerance);

/// Upper integration limit X such that the analytic bound on the tail mass
/// of x^power g(x) beyond X is below `tail_tol`.
double truncation_point(const ModelParams& params, double tail_tol, int power = 0);

/// Estimate of the integral of x^power g(x) over [X, inf) from the
/// asymptotic form.
double tail_estimate(const ModelParams& params, double upper, int power = 0);

/// Integral of x^power g(x) over [1, inf): quadrature to the truncation
/// point plus the analytic tail.
numerics::QuadratureResult density_moment(const ModelParams& params, int power,
                                          double abs_tol = numerics::kDefaultQuadratureTolerance);

struct NormalizationCheck {
  double integral = 0.0;
  double target = 0.0;
  double residual = 0.0;
  double upper_limit = 0.0;
  double tail = 0.0;
  numerics::QuadratureResult quadrature;
};

/// Total mass of g against P{Z < inf}. The residual is reported, not
/// asserted.
NormalizationCheck verify_normalization(const ModelParams& params,
                                        double abs_tol = numerics::kDefaultQuadratureTolerance);

/// Quadrature moments: mean and variance computed from the density itself.
Moments quadrature_moments(const ModelParams& params,
                           double abs_tol = numerics::kDefaultQuadratureTolerance);

/// CDF of Z at each of the ascending points in `xs` (all >= 1).
std::vector<double> cumulative_distribution(const ModelParams& params,
                                            std::span<const double> xs,
                                            double abs_tol = 1e-11);

DensityTable tabulate_density(const ModelParams& params, std::span<const double> xs);

}  // namespace cascade::continuum
