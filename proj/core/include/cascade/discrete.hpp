// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cascade/model.hpp"

/// Lattice approximation of the Gamma cascade. Mass is quantised in units of
/// delta = 1/m; each unit has NB(r*, q*) offspring units (the atomic law), so
/// m units together have NB(m r*, q*) offspring, which approaches
/// Gamma(2, p) / delta as delta -> 0.
namespace cascade::discrete {

using Count = std::uint64_t;

class DiscretizationParams {
 public:
  /// Requires m > 1/p (equivalently delta < p).
  DiscretizationParams(double p, Count m);

  double p() const { return p_; }
  Count m() const { return m_; }
  double delta() const { return delta_; }
  double r_star() const { return r_star_; }
  double q_star() const { return q_star_; }
  /// 1 - q*, which equals delta / p.
  double one_minus_q() const { return delta_ / p_; }
  ModelParams model() const { return ModelParams(p_); }

 private:
  double p_;
  Count m_;
  double delta_;
  double r_star_;
  double q_star_;
};

/// NB(r, q) moment-matched to Gamma(shape, theta) on a lattice of spacing
/// delta: r = shape theta / (theta - delta), q = (theta - delta) / theta.
struct LatticeNegativeBinomial {
  double r = 0.0;
  double q = 0.0;
};
LatticeNegativeBinomial match_gamma(double shape, double theta, double delta);

/// Mean of the atomic offspring count, r* q* / (1 - q*). Equals 2p.
double atomic_mean(const DiscretizationParams& params);

/// ln b(n, r, q) with b(n, r, q) = Gamma(n + r) / (n! Gamma(r)) (1-q)^r q^n.
double nb_log_pmf(Count n, double r, double q);

struct LimitPair {
  double discrete = 0.0;   ///< b(floor(x/delta), r, q) / delta
  double continuum = 0.0;  ///< Gamma(2, theta) density at x
};

/// Both sides of the lattice-to-Gamma(2, theta) limit at x.
LimitPair gamma_density_limit_check(double theta, double delta, double x);

/// ln P{Z_delta(m_start) = n}: total progeny, counted in units, of a cascade
/// started from m_start units. -inf for n < m_start.
double cascade_log_pmf(const DiscretizationParams& params, Count m_start, Count n);

struct CascadePmf {
  DiscretizationParams params;
  Count m_start = 0;
  /// probabilities[i] = P{Z_delta(m_start) = m_start + i}
  std::vector<double> probabilities;
  /// Set when the table stopped at a hard cap before the tail bound was met.
  bool truncated = false;
  /// Upper bound on the mass beyond the last tabulated n (infinite when no
  /// geometric bound applies).
  double tail_bound = 0.0;

  Count n_max() const { return m_start + probabilities.size() - 1; }
  double probability(Count n) const;
  double total_mass() const;
};

/// Tabulates n = m_start..n_max.
CascadePmf cascade_pmf_table(const DiscretizationParams& params, Count m_start, Count n_max);

inline constexpr double kDefaultTailTolerance = 1e-10;
inline constexpr Count kDefaultHardCap = 50'000'000;

/// Extends the table until the geometric tail bound drops below tail_tol, or
/// until hard_cap entries (then `truncated` is set).
CascadePmf cascade_pmf_auto(const DiscretizationParams& params, Count m_start,
                            double tail_tol = kDefaultTailTolerance,
                            Count hard_cap = kDefaultHardCap);

/// Limiting ratio P{n+1}/P{n} as n -> infinity.
double asymptotic_pmf_ratio(const DiscretizationParams& params);

struct DiscreteMoments {
  Moments per_individual;  ///< of delta Z_delta(1)
  Moments aggregate;       ///< of delta Z_delta(m), m = 1/delta
};

/// Throws DomainError unless p < 1/2.
DiscreteMoments discrete_moments(const DiscretizationParams& params);

/// ln E(alpha^Q) = ln F(alpha) - ln alpha with Q = V - 1, V atomic, written
/// in eps = 1 - alpha. Zero at the martingale roots.
double martingale_residual(const DiscretizationParams& params, double eps);

/// Non-trivial root alpha_2 in (0, 1) of E(alpha^Q) = 1. Throws
/// NumericalError when there is none in the bracket (p <= 1/2).
double martingale_alpha(const DiscretizationParams& params);

/// 1 - alpha_2, solved for directly so that no digits are lost as
/// alpha_2 -> 1. (1 - alpha_2) / delta tends to x(p).
double martingale_gap(const DiscretizationParams& params);

/// P{Z_delta(1/delta) < inf} = alpha_2^{1/delta}; 1 for p <= 1/2.
double discrete_prob_finite(const DiscretizationParams& params);

}  // namespace cascade::discrete
