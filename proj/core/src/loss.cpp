// Copyright 2026 The Hypnospec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hypnospec/error.hpp"
#include "hypnospec/train.hpp"

namespace hypnospec::train {

template <typename T>
LossResult<T> sparse_ce_loss(const nn::Tensor4<T>& probs, std::span<const int> labels) {
  const nn::Shape s = probs.shape();
  const int n = s.n;
  const int k = s.h * s.w * s.c;
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw Error(Errc::kShapeMismatch,
                fmt::format("ShapeMismatch: {} probability rows for {} labels", n, labels.size()));
  }
  LossResult<T> out{0.0, nn::Tensor4<T>(s)};
  if (n == 0) return out;
  const T* p = probs.data();
  T* g = out.grad_logits.data();
  const double inv_n = 1.0 / n;
  // Keeps log() finite when a probability underflows to zero.
  constexpr double kFloor = 1e-7;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= k) {
      throw Error(Errc::kLabelOutOfRange, fmt::format("LabelOutOfRange: label {} outside [0, {})", y, k));
    }
    const T* row = p + static_cast<std::size_t>(i) * k;
    total -= std::log(std::clamp(static_cast<double>(row[y]), kFloor, 1.0));
    T* grow = g + static_cast<std::size_t>(i) * k;
    for (int c = 0; c < k; ++c) {
      const double target = c == y ? 1.0 : 0.0;
      grow[c] = static_cast<T>((static_cast<double>(row[c]) - target) * inv_n);
    }
  }
  out.loss = total * inv_n;
  return out;
}

template LossResult<float> sparse_ce_loss(const nn::Tensor4<float>&, std::span<const int>);
template LossResult<double> sparse_ce_loss(const nn::Tensor4<double>&, std::span<const int>);

}  // namespace hypnospec::train
