// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#include "cascade/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "cascade/error.hpp"
#include "cascade/sampling.hpp"

namespace cascade::sim {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::continuous:
      return "continuous";
    case Mode::discrete:
      return "discrete";
    case Mode::walk:
      return "walk";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "continuous") return Mode::continuous;
  if (text == "discrete") return Mode::discrete;
  if (text == "walk") return Mode::walk;
  return std::nullopt;
}

void SimConfig::validate() const {
  if (!std::isfinite(p) || !(p > 0.0)) throw ConfigError("p must be finite and > 0");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (trials > 1'000'000'000'000ull) throw ConfigError("trials must be <= 1e12");
  if (!std::isfinite(cap) || !(cap > 1.0) || cap > 1e8) {
    throw ConfigError("cap must lie in (1, 1e8]");
  }
  if (!(epsilon > 0.0 && epsilon < 1e-3)) throw ConfigError("epsilon must lie in (0, 1e-3)");
  if (workers < 1 || workers > 1024) throw ConfigError("workers must lie in [1, 1024]");
  if (mode != Mode::continuous) {
    if (m < 1) throw ConfigError("discrete and walk modes need m >= 1");
    if (!(1.0 / static_cast<double>(m) < p)) {
      throw ConfigError("discrete and walk modes need delta = 1/m < p");
    }
  }
}

TrialOutcome run_continuous_trial(RngStream& stream, double p, double cap, double epsilon) {
  double generation = 1.0;
  double total = 1.0;
  for (;;) {
    if (total > cap) return {total, true};
    if (generation <= epsilon) {
      // E(sum of later generations | X_n) = X_n sum_{j>=1} (2p)^j.
      if (p < 0.5) total += generation * 2.0 * p / (1.0 - 2.0 * p);
      return {total, false};
    }
    generation = gamma_sample(stream, 2.0 * generation, p);
    total += generation;
  }
}

CountOutcome run_discrete_trial(RngStream& stream, const DiscretizationParams& params, double cap) {
  const double limit = cap * static_cast<double>(params.m());
  Count generation = params.m();
  Count total = generation;
  while (generation > 0) {
    // m units with NB(r*, q*) offspring each: NB(m r*, q*) in total.
    generation = nb_sample(stream, static_cast<double>(generation) * params.r_star(), params.q_star());
    total += generation;
    if (static_cast<double>(total) > limit) return {total, true};
  }
  return {total, false};
}

CountOutcome run_walk_trial(RngStream& stream, const DiscretizationParams& params, double cap) {
  const double limit = cap * static_cast<double>(params.m());
  const double r = params.r_star();
  const double q = params.q_star();
  auto position = static_cast<std::int64_t>(params.m());
  Count steps = 0;
  while (position > 0) {
    ++steps;
    position += static_cast<std::int64_t>(nb_sample(stream, r, q)) - 1;
    if (static_cast<double>(steps) > limit) return {steps, true};
  }
  return {steps, false};
}

Histogram::Histogram(std::uint32_t lo, std::uint32_t upper, std::uint32_t bins_per_unit)
    : lo_(lo), upper_(upper), bins_per_unit_(bins_per_unit) {
  if (!(upper > lo) || bins_per_unit == 0) {
    throw ConfigError("Histogram: need upper > lo and bins_per_unit > 0");
  }
  counts_.assign(static_cast<std::size_t>(upper - lo) * bins_per_unit + 1, 0);
}

double Histogram::edge(std::size_t k) const {
  return lo_ + static_cast<double>(k) / bins_per_unit_;
}

std::size_t Histogram::index_of(double z) const {
  if (!(z >= lo_)) throw DomainError("Histogram: value below the first edge");
  if (z >= upper_) return bin_count();
  const auto k = static_cast<std::size_t>(std::floor((z - lo_) * bins_per_unit_));
  return std::min(k, bin_count() - 1);
}

std::size_t Histogram::index_of_lattice(Count n, Count m) const {
  if (m == 0) throw DomainError("Histogram: lattice needs m > 0");
  if (n < static_cast<Count>(lo_) * m) throw DomainError("Histogram: value below the first edge");
  if (n >= static_cast<Count>(upper_) * m) return bin_count();
  return static_cast<std::size_t>((n - static_cast<Count>(lo_) * m) * bins_per_unit_ / m);
}

std::uint64_t Histogram::total() const {
  std::uint64_t sum = 0;
  for (const auto c : counts_) sum += c;
  return sum;
}

bool Histogram::same_edges(const Histogram& other) const {
  return lo_ == other.lo_ && upper_ == other.upper_ && bins_per_unit_ == other.bins_per_unit_;
}

void Histogram::merge(const Histogram& other) {
  if (!same_edges(other)) throw ConfigError("Histogram: cannot merge different bin edges");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

namespace {

constexpr double kFixedScale = 4294967296.0;  // 2^32

}  // namespace

SimSummary::SimSummary(const SimConfig& config, Histogram histogram)
    : config_(config), histogram_(std::move(histogram)) {}

void SimSummary::record_finite(double z, std::size_t bin) {
  ++n_finite_;
  sum_ += static_cast<Fixed>(std::nearbyint(z * kFixedScale));
  sum_sq_ += static_cast<Fixed>(std::nearbyint(z * z * kFixedScale));
  histogram_.add_index(bin);
}

void SimSummary::record_censored() { ++n_censored_; }

SimSummary& SimSummary::merge(const SimSummary& other) {
  histogram_.merge(other.histogram_);
  n_finite_ += other.n_finite_;
  n_censored_ += other.n_censored_;
  sum_ += other.sum_;
  sum_sq_ += other.sum_sq_;
  config_.trials = n_finite_ + n_censored_;
  return *this;
}

double SimSummary::sum() const { return static_cast<double>(static_cast<long double>(sum_) / kFixedScale); }

double SimSummary::sum_sq() const {
  return static_cast<double>(static_cast<long double>(sum_sq_) / kFixedScale);
}

double SimSummary::mean() const {
  if (n_finite_ == 0) return std::nan("");
  return static_cast<double>(static_cast<long double>(sum_) / kFixedScale / n_finite_);
}

double SimSummary::variance() const {
  if (n_finite_ < 2) return std::nan("");
  const long double n = n_finite_;
  const long double s = static_cast<long double>(sum_) / kFixedScale;
  const long double ss = static_cast<long double>(sum_sq_) / kFixedScale;
  const long double v = (ss - s * s / n) / (n - 1);
  return static_cast<double>(std::max(0.0L, v));
}

double SimSummary::mean_standard_error() const {
  if (n_finite_ < 2) return std::nan("");
  return std::sqrt(variance() / static_cast<double>(n_finite_));
}

double SimSummary::finite_fraction() const {
  return static_cast<double>(n_finite_) / static_cast<double>(trials());
}

double SimSummary::finite_fraction_standard_error() const {
  const double f = finite_fraction();
  return std::sqrt(f * (1.0 - f) / static_cast<double>(trials()));
}

bool SimSummary::operator==(const SimSummary& other) const {
  return config_ == other.config_ && histogram_ == other.histogram_ &&
         n_finite_ == other.n_finite_ && n_censored_ == other.n_censored_ &&
         sum_ == other.sum_ && sum_sq_ == other.sum_sq_;
}

SimSummary run_chunk(const SimConfig& config, std::uint64_t chunk) {
  const std::uint64_t first = chunk * kTrialsPerStream;
  if (first >= config.trials) throw DomainError("run_chunk: chunk index beyond the campaign");
  const std::uint64_t last = std::min(config.trials, first + kTrialsPerStream);

  SimConfig echo = config;
  echo.trials = last - first;
  SimSummary summary(echo);
  RngStream stream(config.seed, chunk);

  if (config.mode == Mode::continuous) {
    for (std::uint64_t i = first; i < last; ++i) {
      const auto outcome = run_continuous_trial(stream, config.p, config.cap, config.epsilon);
      if (outcome.censored) {
        summary.record_censored();
      } else {
        summary.record_finite(outcome.z, summary.histogram().index_of(outcome.z));
      }
    }
    return summary;
  }

  const DiscretizationParams params(config.p, config.m);
  const double delta = params.delta();
  for (std::uint64_t i = first; i < last; ++i) {
    const auto outcome = config.mode == Mode::discrete
                             ? run_discrete_trial(stream, params, config.cap)
                             : run_walk_trial(stream, params, config.cap);
    if (outcome.censored) {
      summary.record_censored();
    } else {
      const double z = static_cast<double>(outcome.steps) * delta;
      summary.record_finite(z, summary.histogram().index_of_lattice(outcome.steps, config.m));
    }
  }
  return summary;
}

SimSummary run_campaign(const SimConfig& config) {
  config.validate();
  const std::uint64_t chunks = (config.trials + kTrialsPerStream - 1) / kTrialsPerStream;
  const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(config.workers, chunks));

  std::vector<std::optional<SimSummary>> results(chunks);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::uint64_t c = w; c < chunks; c += workers) results[c] = run_chunk(config, c);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SimConfig echo = config;
  echo.trials = 0;
  SimSummary total(echo);
  for (const auto& r : results) total.merge(*r);
  return total;
}

double ks_distance(const Histogram& histogram, std::span<const double> cdf_at_upper_edges) {
  if (cdf_at_upper_edges.size() != histogram.bin_count()) {
    throw DomainError("ks_distance: need one CDF value per bin upper edge");
  }
  const double n = static_cast<double>(histogram.total());
  if (n == 0.0) throw DomainError("ks_distance: empty histogram");
  double running = 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < histogram.bin_count(); ++k) {
    running += static_cast<double>(histogram.counts()[k]);
    worst = std::max(worst, std::abs(running / n - cdf_at_upper_edges[k]));
  }
  return worst;
}

double total_variation(const Histogram& a, const Histogram& b) {
  if (!a.same_edges(b)) throw DomainError("total_variation: bin edges differ");
  const double na = static_cast<double>(a.total());
  const double nb = static_cast<double>(b.total());
  if (na == 0.0 || nb == 0.0) throw DomainError("total_variation: empty histogram");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.counts().size(); ++i) {
    sum += std::abs(static_cast<double>(a.counts()[i]) / na - static_cast<double>(b.counts()[i]) / nb);
  }
  return 0.5 * sum;
}

double total_variation(const Histogram& a, std::span<const double> bin_probabilities) {
  if (bin_probabilities.size() != a.counts().size()) {
    throw DomainError("total_variation: need bin_count() + 1 probabilities");
  }
  const double na = static_cast<double>(a.total());
  if (na == 0.0) throw DomainError("total_variation: empty histogram");
  double sum = 0.0;
  for (std::size_t i = 0; i < bin_probabilities.size(); ++i) {
    sum += std::abs(static_cast<double>(a.counts()[i]) / na - bin_probabilities[i]);
  }
  return 0.5 * sum;
}

}  // namespace cascade::sim
