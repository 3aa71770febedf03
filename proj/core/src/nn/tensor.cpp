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

#include "hypnospec/nn/tensor.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "hypnospec/error.hpp"

namespace hypnospec::nn {

std::string Shape::str() const { return fmt::format("({}, {}, {}, {})", n, h, w, c); }

template <typename T>
Tensor4<T>::Tensor4(Shape shape, T fill) : shape_(shape) {
  if (!shape.valid()) throw Error(Errc::kShapeMismatch, fmt::format("invalid tensor shape {}", shape.str()));
  values_.assign(shape.size(), fill);
}

template <typename T>
Tensor4<T>::Tensor4(Shape shape, std::vector<T> values) : shape_(shape), values_(std::move(values)) {
  if (!shape.valid() || values_.size() != shape.size()) {
    throw Error(Errc::kShapeMismatch,
                fmt::format("{} values do not fill shape {}", values_.size(), shape.str()));
  }
}

template <typename T>
void Tensor4<T>::fill(T v) {
  std::fill(values_.begin(), values_.end(), v);
}

template class Tensor4<float>;
template class Tensor4<double>;

}  // namespace hypnospec::nn
