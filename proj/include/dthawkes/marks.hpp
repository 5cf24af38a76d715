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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dthawkes/error.hpp"

namespace dthawkes {

struct ConstantMarks {
  double value = 1.0;
};

/// Exponential law with the given rate (mean 1/rate).
struct ExponentialMarks {
  double rate = 1.0;
};

struct MarkAtom {
  double value = 0.0;
  double probability = 0.0;
};

struct DiscreteMarks {
  std::vector<MarkAtom> atoms;
};

/// Exact moments of the mark law. kurtosis is the raw (non-excess) ratio
/// centered_fourth / variance^2 and is absent for degenerate marks.
struct MarkMoments {
  double mean = 0.0;
  double variance = 0.0;
  double second_raw = 0.0;
  double centered_fourth = 0.0;
  std::optional<double> kurtosis;
};

/// Law of the i.i.d. positive marks attached to events.
class MarkDistribution {
 public:
  using Spec = std::variant<ConstantMarks, ExponentialMarks, DiscreteMarks>;

  explicit MarkDistribution(Spec spec) : spec_(std::move(spec)) { validate_and_prepare(); }

  static MarkDistribution constant(double value) { return MarkDistribution(ConstantMarks{value}); }
  static MarkDistribution exponential(double rate) {
    return MarkDistribution(ExponentialMarks{rate});
  }
  static MarkDistribution discrete(std::vector<MarkAtom> atoms) {
    return MarkDistribution(DiscreteMarks{std::move(atoms)});
  }

  const Spec& spec() const noexcept { return spec_; }
  const MarkMoments& moments() const noexcept { return moments_; }
  double mean() const noexcept { return moments_.mean; }

  /// True for laws with finitely many atoms (constant or table).
  bool is_discrete() const noexcept { return !std::holds_alternative<ExponentialMarks>(spec_); }

  /// Atoms of a discrete law; empty for continuous laws.
  std::vector<MarkAtom> atoms() const {
    if (const auto* c = std::get_if<ConstantMarks>(&spec_)) return {{c->value, 1.0}};
    if (const auto* d = std::get_if<DiscreteMarks>(&spec_)) return d->atoms;
    return {};
  }

  /// One mark. Stream must provide uniform() in the open interval (0, 1).
  template <class Stream>
  double sample(Stream& stream) const {
    return std::visit(
        [this, &stream](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ConstantMarks>) {
            return m.value;
          } else if constexpr (std::is_same_v<M, ExponentialMarks>) {
            return -std::log(stream.uniform()) / m.rate;
          } else {
            const double u = stream.uniform();
            const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            const auto i = std::min<std::size_t>(
                static_cast<std::size_t>(it - cumulative_.begin()), m.atoms.size() - 1);
            return m.atoms[i].value;
          }
        },
        spec_);
  }

  /// Sum of `count` i.i.d. marks.
  template <class Stream>
  double sample_total(Stream& stream, std::uint64_t count) const {
    if (count == 0) return 0.0;
    if (const auto* c = std::get_if<ConstantMarks>(&spec_)) {
      return static_cast<double>(count) * c->value;
    }
    double total = 0.0;
    for (std::uint64_t i = 0; i < count; ++i) total += sample(stream);
    return total;
  }

  std::string describe() const {
    return std::visit(
        [](const auto& m) -> std::string {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ConstantMarks>) {
            return "constant(" + std::to_string(m.value) + ")";
          } else if constexpr (std::is_same_v<M, ExponentialMarks>) {
            return "exponential(rate=" + std::to_string(m.rate) + ")";
          } else {
            return "discrete(" + std::to_string(m.atoms.size()) + " atoms)";
          }
        },
        spec_);
  }

 private:
  void validate_and_prepare() {
    std::visit(
        [this](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, ConstantMarks>) {
            if (!(m.value > 0.0) || !std::isfinite(m.value)) {
              throw InvalidParameter("constant marks: value must be finite and > 0");
            }
            const double v = m.value;
            moments_ = MarkMoments{v, 0.0, v * v, 0.0, std::nullopt};
          } else if constexpr (std::is_same_v<M, ExponentialMarks>) {
            if (!(m.rate > 0.0) || !std::isfinite(m.rate)) {
              throw InvalidParameter("exponential marks: rate must be finite and > 0");
            }
            const double mu = 1.0 / m.rate;
            const double var = mu * mu;
            moments_ = MarkMoments{mu, var, 2.0 * var, 9.0 * var * var, 9.0};
          } else {
            if (m.atoms.empty()) throw InvalidParameter("discrete marks: no atoms");
            double total = 0.0;
            cumulative_.clear();
            for (const auto& a : m.atoms) {
              if (!(a.value > 0.0) || !std::isfinite(a.value)) {
                throw InvalidParameter("discrete marks: atom values must be finite and > 0");
              }
              if (!(a.probability > 0.0) || a.probability > 1.0) {
                throw InvalidParameter("discrete marks: probabilities must lie in (0, 1]");
              }
              total += a.probability;
              cumulative_.push_back(total);
            }
            if (std::fabs(total - 1.0) > 1e-9) {
              throw InvalidParameter("discrete marks: probabilities must sum to 1");
            }
            double mean = 0.0;
            double m2 = 0.0;
            for (const auto& a : m.atoms) {
              mean += a.probability * a.value;
              m2 += a.probability * a.value * a.value;
            }
            double var = 0.0;
            double c4 = 0.0;
            for (const auto& a : m.atoms) {
              const double d = a.value - mean;
              var += a.probability * d * d;
              c4 += a.probability * d * d * d * d;
            }
            std::optional<double> kurt;
            if (var > 0.0) kurt = c4 / (var * var);
            moments_ = MarkMoments{mean, var, m2, c4, kurt};
          }
        },
        spec_);
  }

  Spec spec_;
  MarkMoments moments_;
  std::vector<double> cumulative_;
};

inline MarkMoments mark_moments(const MarkDistribution& marks) { return marks.moments(); }

}  // namespace dthawkes
