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

#include "dthawkes/detail/summation.hpp"
#include "dthawkes/error.hpp"

namespace dthawkes {

/// alpha(s) = weight * ratio^(s-1), s >= 1.
struct GeometricKernel {
  double weight = 0.0;
  double ratio = 0.0;
};

/// alpha(s) = scale * s^(-exponent), s >= 1.
struct PowerLawKernel {
  double scale = 0.0;
  double exponent = 2.0;
};

/// alpha(s) = values[s-1] for s <= values.size(), zero afterwards.
struct TableKernel {
  std::vector<double> values;
};

/// Excitation kernel alpha on the positive lags, with exact l1 norm and
/// tail sums. Immutable after construction.
class ExcitationKernel {
 public:
  using Spec = std::variant<GeometricKernel, PowerLawKernel, TableKernel>;

  /// Below this lag power-law tails are summed term by term; from it on an
  /// Euler-Maclaurin remainder is used.
  static constexpr std::int64_t kPowerLawDirectLags = 64;

  explicit ExcitationKernel(Spec spec) : spec_(std::move(spec)) { validate_and_prepare(); }

  static ExcitationKernel geometric(double weight, double ratio) {
    return ExcitationKernel(GeometricKernel{weight, ratio});
  }
  static ExcitationKernel power_law(double scale, double exponent) {
    return ExcitationKernel(PowerLawKernel{scale, exponent});
  }
  static ExcitationKernel table(std::vector<double> values) {
    return ExcitationKernel(TableKernel{std::move(values)});
  }
  /// alpha == 0: the process reduces to homogeneous Poisson.
  static ExcitationKernel zero() { return table({}); }

  const Spec& spec() const noexcept { return spec_; }

  bool is_geometric() const noexcept { return std::holds_alternative<GeometricKernel>(spec_); }

  /// alpha(lag); zero for lag < 1.
  double operator()(std::int64_t lag) const {
    if (lag < 1) return 0.0;
    return std::visit(
        [lag](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GeometricKernel>) {
            return k.weight * std::pow(k.ratio, static_cast<double>(lag - 1));
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            return k.scale * std::pow(static_cast<double>(lag), -k.exponent);
          } else {
            const auto i = static_cast<std::size_t>(lag - 1);
            return i < k.values.size() ? k.values[i] : 0.0;
          }
        },
        spec_);
  }

  /// sum_{s>=1} alpha(s). Same code path as tail_sum(1).
  double l1_norm() const { return tail_sum(1); }

  /// sum_{s>=t} alpha(s) for t >= 1.
  double tail_sum(std::int64_t t) const {
    if (t < 1) throw InvalidParameter("tail_sum: lag must be >= 1");
    return std::visit(
        [this, t](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GeometricKernel>) {
            return k.weight * std::pow(k.ratio, static_cast<double>(t - 1)) / (1.0 - k.ratio);
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            return power_law_tail(k, t);
          } else {
            const auto i = static_cast<std::size_t>(t - 1);
            return i < suffix_.size() ? suffix_[i] : 0.0;
          }
        },
        spec_);
  }

  /// Last lag with nonzero weight, or nullopt when the support is infinite.
  std::optional<std::int64_t> support() const {
    return std::visit(
        [](const auto& k) -> std::optional<std::int64_t> {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GeometricKernel>) {
            if (k.weight == 0.0) return 0;
            if (k.ratio == 0.0) return 1;
            return std::nullopt;
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            if (k.scale == 0.0) return 0;
            return std::nullopt;
          } else {
            std::int64_t last = 0;
            for (std::size_t i = 0; i < k.values.size(); ++i) {
              if (k.values[i] != 0.0) last = static_cast<std::int64_t>(i + 1);
            }
            return last;
          }
        },
        spec_);
  }

  /// Smallest window W such that lags beyond W carry less than `mass`,
  /// capped at `cap`.
  std::int64_t effective_support(double mass, std::int64_t cap) const {
    if (auto s = support()) return std::min(*s, cap);
    std::int64_t w = 1;
    while (w < cap && tail_sum(w + 1) >= mass) {
      w = (w < 1024) ? w + 1 : std::min(cap, w * 2);
    }
    return std::min(w, cap);
  }

  /// Every alpha(s) multiplied by factor (> 0).
  ExcitationKernel scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
      throw InvalidParameter("kernel scale factor must be positive");
    }
    return std::visit(
        [factor](const auto& k) -> ExcitationKernel {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GeometricKernel>) {
            return geometric(k.weight * factor, k.ratio);
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            return power_law(k.scale * factor, k.exponent);
          } else {
            std::vector<double> v = k.values;
            for (double& x : v) x *= factor;
            return table(std::move(v));
          }
        },
        spec_);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GeometricKernel>) {
            return "geometric(weight=" + std::to_string(k.weight) +
                   ", ratio=" + std::to_string(k.ratio) + ")";
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            return "power_law(scale=" + std::to_string(k.scale) +
                   ", exponent=" + std::to_string(k.exponent) + ")";
          } else {
            return "table(" + std::to_string(k.values.size()) + " lags)";
          }
        },
        spec_);
  }

 private:
  void validate_and_prepare() {
    std::visit(
        [this](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, GeometricKernel>) {
            if (!(k.weight >= 0.0) || !std::isfinite(k.weight)) {
              throw InvalidParameter("geometric kernel: weight must be finite and >= 0");
            }
            if (!(k.ratio >= 0.0 && k.ratio < 1.0)) {
              throw InvalidParameter("geometric kernel: ratio must lie in [0, 1)");
            }
          } else if constexpr (std::is_same_v<K, PowerLawKernel>) {
            if (!(k.scale >= 0.0) || !std::isfinite(k.scale)) {
              throw InvalidParameter("power-law kernel: scale must be finite and >= 0");
            }
            if (!(k.exponent > 1.0) || !std::isfinite(k.exponent)) {
              throw InvalidParameter("power-law kernel: exponent must be > 1");
            }
          } else {
            suffix_.assign(k.values.size(), 0.0);
            double acc = 0.0;
            for (std::size_t i = k.values.size(); i-- > 0;) {
              const double v = k.values[i];
              if (!(v >= 0.0) || !std::isfinite(v)) {
                throw InvalidParameter("table kernel: values must be finite and >= 0");
              }
              acc += v;
              suffix_[i] = acc;
            }
          }
        },
        spec_);
  }

  // sum_{s>=t} s^-p: direct terms below kPowerLawDirectLags, then
  // Euler-Maclaurin through the B6 term. For completely monotone s^-p the
  // remainder is bounded by the first omitted term, which at s=64 is far
  // below 1e-16 for every p > 1.
  static double power_law_tail(const PowerLawKernel& k, std::int64_t t) {
    if (k.scale == 0.0) return 0.0;
    const double p = k.exponent;
    const std::int64_t m = std::max(t, kPowerLawDirectLags);
    detail::CompensatedSum acc;
    for (std::int64_t s = t; s < m; ++s) acc.add(std::pow(static_cast<double>(s), -p));
    const double x = static_cast<double>(m);
    const double fx = std::pow(x, -p);
    const double integral = x * fx / (p - 1.0);
    const double d1 = p * fx / x;                                        // -f'(x)
    const double d3 = p * (p + 1.0) * (p + 2.0) * fx / (x * x * x);    // -f'''(x)
    const double d5 = d3 * (p + 3.0) * (p + 4.0) / (x * x);            // -f^(5)(x)
    acc.add(integral);
    acc.add(0.5 * fx);
    acc.add(d1 / 12.0);
    acc.add(-d3 / 720.0);
    acc.add(d5 / 30240.0);
    return k.scale * acc.value();
  }

  Spec spec_;
  std::vector<double> suffix_;
};

/// ||alpha||_1.
inline double kernel_l1_norm(const ExcitationKernel& kernel) { return kernel.l1_norm(); }

/// sum_{s>=t} alpha(s).
inline double kernel_tail_sum(const ExcitationKernel& kernel, std::int64_t t) {
  return kernel.tail_sum(t);
}

}  // namespace dthawkes
