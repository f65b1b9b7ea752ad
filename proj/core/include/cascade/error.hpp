// Copyright 2026 The cascade-gamma Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A configuration or option set failed validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine could not deliver its contract (no root, tolerance
/// not met, iteration budget exhausted).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cascade
