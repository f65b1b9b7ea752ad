// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "cascade/rng.hpp"

namespace cascade::sim {

/// Exact Gamma(shape, scale) variate for any shape > 0 (Marsaglia-Tsang,
/// with the U^{1/shape} boost below shape 1). Results that underflow are
/// returned as the smallest positive double.
double gamma_sample(RngStream& stream, double shape, double scale);

/// Exact Poisson(mean) variate: multiplication method below mean 10,
/// Hoermann's transformed rejection (PTRS) above.
std::uint64_t poisson_sample(RngStream& stream, double mean);

/// NB(r, q) count with P(n) = Gamma(n+r)/(n! Gamma(r)) (1-q)^r q^n, drawn as
/// a Gamma(r, q/(1-q))-mixed Poisson so that r need not be an integer.
std::uint64_t nb_sample(RngStream& stream, double r, double q);

}  // namespace cascade::sim
