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

#ifndef HYPNOSPEC_NN_TENSOR_HPP_
#define HYPNOSPEC_NN_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hypnospec::nn {

// NHWC dimensions.
struct Shape {
  int n = 1;
  int h = 1;
  int w = 1;
  int c = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
           static_cast<std::size_t>(c);
  }
  bool valid() const { return n >= 1 && h >= 1 && w >= 1 && c >= 1; }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense 4-D tensor, batch x height x width x channels, row-major.
template <typename T>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape shape, T fill = T{0});
  Tensor4(Shape shape, std::vector<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  std::size_t offset(int n, int y, int x, int c) const {
    return ((static_cast<std::size_t>(n) * shape_.h + static_cast<std::size_t>(y)) * shape_.w +
            static_cast<std::size_t>(x)) * shape_.c + static_cast<std::size_t>(c);
  }
  T& at(int n, int y, int x, int c) { return values_[offset(n, y, x, c)]; }
  const T& at(int n, int y, int x, int c) const { return values_[offset(n, y, x, c)]; }

  void fill(T v);

 private:
  Shape shape_{};
  std::vector<T> values_;
};

extern template class Tensor4<float>;
extern template class Tensor4<double>;

}  // namespace hypnospec::nn

#endif  // HYPNOSPEC_NN_TENSOR_HPP_
