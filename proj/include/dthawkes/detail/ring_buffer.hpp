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
#include <cstddef>
#include <vector>

namespace dthawkes::detail {

// Fixed-capacity history of the most recent values; lag 1 is the newest.
template <class T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : data_(capacity) {}

  std::size_t capacity() const noexcept { return data_.size(); }
  std::size_t size() const noexcept { return size_; }

  void push(const T& value) {
    if (data_.empty()) return;
    data_[head_] = value;
    head_ = (head_ + 1 == data_.size()) ? 0 : head_ + 1;
    if (size_ < data_.size()) ++size_;
  }

  // Requires 1 <= lag <= size().
  const T& at_lag(std::size_t lag) const {
    const std::size_t n = data_.size();
    return data_[(head_ + n - lag) % n];
  }

  // sum_{lag=1}^{min(size, weights.size())} weights[lag-1] * at_lag(lag),
  // accumulated newest lag first.
  template <class Weights>
  T convolve(const Weights& weights) const {
    T acc{};
    const std::size_t n = std::min(size_, static_cast<std::size_t>(weights.size()));
    std::size_t idx = head_;
    for (std::size_t lag = 1; lag <= n; ++lag) {
      idx = (idx == 0) ? data_.size() - 1 : idx - 1;
      acc += weights[lag - 1] * data_[idx];
    }
    return acc;
  }

 private:
  std::vector<T> data_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

}  // namespace dthawkes::detail
