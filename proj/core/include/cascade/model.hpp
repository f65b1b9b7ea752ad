// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>

#include "cascade/error.hpp"

namespace cascade {

/// Gamma branching model: every unit of mass in generation n begets a
/// Gamma(2, p) amount of mass in generation n + 1, so the offspring mean is
/// 2p and the process is critical at p = 1/2.
class ModelParams {
 public:
  static constexpr double kShape = 2.0;

  explicit ModelParams(double p) : p_(p) {
    if (!std::isfinite(p) || !(p > 0.0)) {
      throw DomainError("ModelParams: p must be finite and > 0, got " + std::to_string(p));
    }
  }

  double p() const { return p_; }
  double shape() const { return kShape; }
  double offspring_mean() const { return kShape * p_; }
  bool subcritical() const { return p_ < 0.5; }
  bool supercritical() const { return p_ > 0.5; }

 private:
  double p_;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

}  // namespace cascade
