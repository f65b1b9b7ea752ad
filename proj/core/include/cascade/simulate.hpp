// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/discrete.hpp"
#include "cascade/rng.hpp"

/// Monte Carlo engines for the cascade size: the continuous Gamma branching
/// process, its lattice (atomic) approximation, and the equivalent
/// first-passage walk, plus reproducible multi-worker campaigns.
namespace cascade::sim {

using discrete::Count;
using discrete::DiscretizationParams;

enum class Mode { continuous, discrete, walk };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

struct SimConfig {
  Mode mode = Mode::continuous;
  double p = 0.3;
  Count m = 0;  ///< lattice units per unit mass (discrete and walk modes)
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  double cap = 1e6;
  double epsilon = 1e-9;
  unsigned workers = 1;

  /// Throws ConfigError on any invalid field.
  void validate() const;
  bool operator==(const SimConfig&) const = default;
};

/// Trials per RNG stream. Stream k covers trials [k*K, (k+1)*K), which makes
/// campaign output independent of the worker count.
inline constexpr std::uint64_t kTrialsPerStream = 4096;

struct TrialOutcome {
  double z = 0.0;
  bool censored = false;
};

struct CountOutcome {
  Count steps = 0;
  bool censored = false;
};

/// One realisation of X_0 = 1, X_{n+1} ~ Gamma(2 X_n, p), Z = sum X_n.
/// Finishes once X_n <= epsilon (adding the expected remainder
/// X_n 2p/(1-2p) when p < 1/2) and is censored once Z > cap.
TrialOutcome run_continuous_trial(RngStream& stream, double p, double cap, double epsilon);

/// Generation-by-generation atomic branching from m units. Returns the total
/// number of units; censored once it exceeds cap * m.
CountOutcome run_discrete_trial(RngStream& stream, const DiscretizationParams& params, double cap);

/// Walk from S_0 = m with steps V - 1, V atomic, one step at a time. Returns
/// the first n with S_n = 0; censored once n exceeds cap * m.
CountOutcome run_walk_trial(RngStream& stream, const DiscretizationParams& params, double cap);

/// Histogram of Z on [lo, upper) with width 1/bins_per_unit, plus one
/// overflow bin. Lattice values n/m are binned with exact integer arithmetic.
class Histogram {
 public:
  Histogram(std::uint32_t lo = 1, std::uint32_t upper = 50, std::uint32_t bins_per_unit = 20);

  std::size_t bin_count() const { return counts_.size() - 1; }
  double edge(std::size_t k) const;
  double bin_width() const { return 1.0 / bins_per_unit_; }
  std::uint32_t lo() const { return lo_; }
  std::uint32_t upper() const { return upper_; }

  /// Index of the bin that holds z; bin_count() for the overflow bin.
  std::size_t index_of(double z) const;
  std::size_t index_of_lattice(Count n, Count m) const;

  void add_index(std::size_t index) { ++counts_[index]; }
  void add(double z) { add_index(index_of(z)); }

  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t overflow() const { return counts_.back(); }
  std::uint64_t total() const;

  bool same_edges(const Histogram& other) const;
  void merge(const Histogram& other);
  bool operator==(const Histogram&) const = default;

 private:
  std::uint32_t lo_;
  std::uint32_t upper_;
  std::uint32_t bins_per_unit_;
  std::vector<std::uint64_t> counts_;
};

/// Mergeable result of a batch of trials. Sums are held in 2^-32 fixed point
/// so that merging is exactly associative and commutative.
class SimSummary {
 public:
  explicit SimSummary(const SimConfig& config, Histogram histogram = Histogram());

  void record_finite(double z, std::size_t bin);
  void record_censored();

  /// Field-wise sum. Throws ConfigError when bin edges differ. The config
  /// echo is taken from *this with `trials` set to the merged total.
  SimSummary& merge(const SimSummary& other);

  const SimConfig& config() const { return config_; }
  const Histogram& histogram() const { return histogram_; }
  std::uint64_t n_finite() const { return n_finite_; }
  std::uint64_t n_censored() const { return n_censored_; }
  std::uint64_t trials() const { return n_finite_ + n_censored_; }

  double sum() const;
  double sum_sq() const;
  double mean() const;
  double variance() const;  ///< unbiased, over finite trials
  double mean_standard_error() const;
  double finite_fraction() const;
  double finite_fraction_standard_error() const;

  bool operator==(const SimSummary& other) const;

 private:
  __extension__ using Fixed = __int128;

  SimConfig config_;
  Histogram histogram_;
  std::uint64_t n_finite_ = 0;
  std::uint64_t n_censored_ = 0;
  Fixed sum_ = 0;
  Fixed sum_sq_ = 0;
};

/// Runs the trials of one stream (chunk) of a campaign.
SimSummary run_chunk(const SimConfig& config, std::uint64_t chunk);

/// Partitions trials into streams of kTrialsPerStream, runs them on
/// config.workers threads and merges in stream order.
SimSummary run_campaign(const SimConfig& config);

/// max_k |ECDF(edge_k) - cdf[k]| over the upper bin edges k = 1..bins; the
/// ECDF counts every finite trial (overflow included in the denominator).
double ks_distance(const Histogram& histogram, std::span<const double> cdf_at_upper_edges);

/// Total-variation distance between two binned empirical distributions.
double total_variation(const Histogram& a, const Histogram& b);

/// Total-variation distance between a histogram and bin probabilities
/// (bin_count() + 1 entries, the last being overflow).
double total_variation(const Histogram& a, std::span<const double> bin_probabilities);

}  // namespace cascade::sim
