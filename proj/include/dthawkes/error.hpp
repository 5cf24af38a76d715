/* Copyright 2026 The dthawkes Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <stdexcept>
#include <string>

namespace dthawkes {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its domain (negative weight, ratio >= 1, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Branching ratio ||alpha||_1 * E[mark] is not below one.
class UnstableModel : public Error {
 public:
  explicit UnstableModel(double rho)
      : Error("unstable model: branching ratio " + std::to_string(rho) +
              " is not below 1"),
        rho_(rho) {}

  double branching_ratio() const noexcept { return rho_; }

 private:
  double rho_;
};

/// A moment needed by the requested computation is not available.
class MissingMoment : public Error {
 public:
  using Error::Error;
};

/// Paths with different horizons were passed to one reduction.
class MixedHorizons : public Error {
 public:
  using Error::Error;
};

/// Goodness-of-fit target variance is not strictly positive.
class DegenerateVariance : public Error {
 public:
  using Error::Error;
};

/// A path was recorded without the sum-of-intensity accumulator, or the
/// ensemble is too small for a cross-path variance.
class MissingLambdaAccumulator : public Error {
 public:
  using Error::Error;
};

/// A diagnostic needs per-step series but the path recorded terminals only.
class MissingSeries : public Error {
 public:
  using Error::Error;
};

/// Enumeration dropped too much Poisson tail mass.
class TruncationTooCoarse : public Error {
 public:
  using Error::Error;
};

/// A 0-1 baseline step produced a success probability above one.
class ProbabilityOverflow : public Error {
 public:
  using Error::Error;
};

}  // namespace dthawkes
