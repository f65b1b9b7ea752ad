// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#include "cascade/discrete.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cascade/numerics.hpp"

namespace cascade::discrete {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_nb(double r, double q, const char* op) {
  if (!std::isfinite(r) || !(r > 0.0)) {
    throw DomainError(std::string(op) + ": r must be finite and > 0");
  }
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError(std::string(op) + ": q must lie in (0, 1)");
  }
}

}  // namespace

DiscretizationParams::DiscretizationParams(double p, Count m) : p_(p), m_(m) {
  if (!std::isfinite(p) || !(p > 0.0)) {
    throw DomainError("DiscretizationParams: p must be finite and > 0");
  }
  if (m == 0) throw DomainError("DiscretizationParams: m must be positive");
  delta_ = 1.0 / static_cast<double>(m);
  if (!(delta_ < p)) {
    throw DomainError("DiscretizationParams: need m > 1/p (delta < p), got p = " +
                      std::to_string(p) + ", m = " + std::to_string(m));
  }
  r_star_ = 2.0 * delta_ * p / (p - delta_);
  q_star_ = (p - delta_) / p;
}

LatticeNegativeBinomial match_gamma(double shape, double theta, double delta) {
  if (!(shape > 0.0) || !(theta > 0.0) || !(delta > 0.0) || !(delta < theta)) {
    throw DomainError("match_gamma: need shape > 0 and 0 < delta < theta");
  }
  return {shape * theta / (theta - delta), (theta - delta) / theta};
}

double atomic_mean(const DiscretizationParams& params) {
  return params.r_star() * params.q_star() / params.one_minus_q();
}

double nb_log_pmf(Count n, double r, double q) {
  require_nb(r, q, "nb_log_pmf");
  const double base = r * std::log1p(-q);
  if (n == 0) return base;
  const double nd = static_cast<double>(n);
  return numerics::log_gamma(nd + r) - numerics::log_gamma(nd + 1.0) - numerics::log_gamma(r) +
         base + nd * std::log(q);
}

LimitPair gamma_density_limit_check(double theta, double delta, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("gamma_density_limit_check: x must be > 0");
  const auto nb = match_gamma(ModelParams::kShape, theta, delta);
  const auto n = static_cast<Count>(std::floor(x / delta));
  LimitPair pair;
  pair.discrete = std::exp(nb_log_pmf(n, nb.r, nb.q)) / delta;
  pair.continuum = x * std::exp(-x / theta) / (theta * theta);
  return pair;
}

double cascade_log_pmf(const DiscretizationParams& params, Count m_start, Count n) {
  if (m_start == 0 || n == 0) {
    throw DomainError("cascade_log_pmf: m_start and n must be positive");
  }
  if (n < m_start) return kNegInf;
  const double r = params.r_star();
  const double log_one_minus_q = std::log1p(-params.q_star());
  const double md = static_cast<double>(m_start);
  if (n == m_start) return md * (r * log_one_minus_q);

  const double nd = static_cast<double>(n);
  const double excess = static_cast<double>(n - m_start);
  // (m/n) Gamma(n(1+r) - m) / (Gamma(n r) Gamma(n - m + 1)) (1-q)^{r n} q^{n-m}
  return std::log(md / nd) + numerics::log_gamma(excess + nd * r) -
         numerics::log_gamma(nd * r) - numerics::log_gamma(excess + 1.0) +
         r * nd * log_one_minus_q + excess * std::log(params.q_star());
}

double CascadePmf::probability(Count n) const {
  if (n < m_start || n > n_max()) return 0.0;
  return probabilities[n - m_start];
}

double CascadePmf::total_mass() const {
  numerics::CompensatedSum sum;
  for (const double v : probabilities) sum.add(v);
  return sum.value();
}

double asymptotic_pmf_ratio(const DiscretizationParams& params) {
  const double r = params.r_star();
  return std::exp((1.0 + r) * std::log1p(r) - r * std::log(r) + r * std::log1p(-params.q_star()) +
                  std::log(params.q_star()));
}

namespace {

// Geometric bound on the mass beyond the last entry, using the larger of the
// observed and limiting successive ratios.
double geometric_tail_bound(const std::vector<double>& probs, double limit_ratio) {
  if (probs.size() < 2) return std::numeric_limits<double>::infinity();
  const double last = probs.back();
  const double prev = probs[probs.size() - 2];
  if (last == 0.0) return 0.0;
  if (!(last < prev)) return std::numeric_limits<double>::infinity();
  const double ratio = std::max(last / prev, limit_ratio);
  if (!(ratio < 1.0)) return std::numeric_limits<double>::infinity();
  return last * ratio / (1.0 - ratio);
}

}  // namespace

CascadePmf cascade_pmf_table(const DiscretizationParams& params, Count m_start, Count n_max) {
  if (m_start == 0) throw DomainError("cascade_pmf_table: m_start must be positive");
  if (n_max < m_start) throw DomainError("cascade_pmf_table: n_max must be >= m_start");
  CascadePmf pmf{params, m_start, {}, false, 0.0};
  pmf.probabilities.reserve(n_max - m_start + 1);
  for (Count n = m_start; n <= n_max; ++n) {
    pmf.probabilities.push_back(std::exp(cascade_log_pmf(params, m_start, n)));
  }
  pmf.tail_bound = geometric_tail_bound(pmf.probabilities, asymptotic_pmf_ratio(params));
  return pmf;
}

CascadePmf cascade_pmf_auto(const DiscretizationParams& params, Count m_start, double tail_tol,
                            Count hard_cap) {
  if (m_start == 0) throw DomainError("cascade_pmf_auto: m_start must be positive");
  if (!(tail_tol > 0.0)) throw DomainError("cascade_pmf_auto: tail_tol must be > 0");
  if (hard_cap == 0) throw DomainError("cascade_pmf_auto: hard_cap must be positive");
  const double limit_ratio = asymptotic_pmf_ratio(params);
  CascadePmf pmf{params, m_start, {}, false, std::numeric_limits<double>::infinity()};
  for (Count n = m_start;; ++n) {
    pmf.probabilities.push_back(std::exp(cascade_log_pmf(params, m_start, n)));
    // The bound only becomes meaningful once the tail is reached.
    if (pmf.probabilities.size() % 16 == 0 || pmf.probabilities.back() == 0.0) {
      pmf.tail_bound = geometric_tail_bound(pmf.probabilities, limit_ratio);
      if (pmf.tail_bound < tail_tol) break;
    }
    if (pmf.probabilities.size() >= hard_cap) {
      pmf.tail_bound = geometric_tail_bound(pmf.probabilities, limit_ratio);
      pmf.truncated = !(pmf.tail_bound < tail_tol);
      break;
    }
  }
  return pmf;
}

DiscreteMoments discrete_moments(const DiscretizationParams& params) {
  const double p = params.p();
  if (!(p < 0.5)) {
    throw DomainError("discrete_moments: defined only for p < 1/2, got p = " + std::to_string(p));
  }
  const double gap = 1.0 - 2.0 * p;
  const double delta = params.delta();
  DiscreteMoments out;
  // delta H'(1) and delta^2 (H''(1) + H'(1) - H'(1)^2) in reduced form.
  out.per_individual = Moments{delta / gap, 2.0 * delta * p * p / (gap * gap * gap)};
  // Z_delta(m) is a sum of m = 1/delta independent copies, so m * delta = 1
  // cancels from both expressions.
  out.aggregate = Moments{1.0 / gap, 2.0 * p * p / (gap * gap * gap)};
  return out;
}

double martingale_residual(const DiscretizationParams& params, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("martingale_residual: eps must lie in (0, 1)");
  // ln F(1 - eps) - ln(1 - eps), F(s) = ((1-q)/(1-q s))^r and
  // 1 - q (1 - eps) = (1 - q) (1 + q eps / (1 - q)).
  return -params.r_star() * std::log1p(params.q_star() * eps / params.one_minus_q()) -
         std::log1p(-eps);
}

double martingale_gap(const DiscretizationParams& params) {
  const double delta = params.delta();
  // alpha_2 -> 1 like 1 - x(p) delta, so the bracket scales with delta.
  const numerics::Interval bracket(delta * 1e-6, 1.0 - delta * 1e-6);
  const auto f = [&params](double eps) { return martingale_residual(params, eps); };
  const double f_lo = f(bracket.lo());
  const double f_hi = f(bracket.hi());
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NumericalError("martingale_alpha: no non-trivial root in (0, 1) for p = " +
                         std::to_string(params.p()) + ", delta = " + std::to_string(delta));
  }
  return numerics::solve_bracketed(f, bracket, delta * 1e-13);
}

double martingale_alpha(const DiscretizationParams& params) { return 1.0 - martingale_gap(params); }

double discrete_prob_finite(const DiscretizationParams& params) {
  if (params.p() <= 0.5) return 1.0;
  return std::exp(static_cast<double>(params.m()) * std::log1p(-martingale_gap(params)));
}

}  // namespace cascade::discrete
