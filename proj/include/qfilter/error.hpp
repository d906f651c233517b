// Copyright 2026 The qfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace qfilter {

/// Seeded generator used everywhere a random draw is made. Every trajectory
/// owns one; nothing in the library touches a global generator.
using Rng = std::mt19937_64;

/// Base class of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A state violates a physical constraint (Bloch norm > 1, negative
/// eigenvalue, non-unit trace...).
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A caller-side precondition that is cheap to check was violated
/// (non-unitary evolution, incomplete projector set, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Post-measurement state requested for an outcome of (numerically) zero
/// probability.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

class InvalidModelError : public Error {
 public:
  using Error::Error;
};

/// Transition or observation density is a point mass.
class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

/// Conditional kernel estimate has no sample near the conditioning window.
class NoNeighborError : public Error {
 public:
  using Error::Error;
};

/// Posterior normalizer vanished on the grid.
class ZeroNormalizerError : public Error {
 public:
  using Error::Error;
};

/// T'(x) vanishes, so the optimal filtering equation cannot be solved at x.
class NoninformativePointError : public Error {
 public:
  using Error::Error;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

/// Invalid scenario configuration. `field()` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

inline constexpr const char* kVersion = "0.3.0";

}  // namespace qfilter
