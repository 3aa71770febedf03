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

#ifndef HYPNOSPEC_NN_MICRONET_HPP_
#define HYPNOSPEC_NN_MICRONET_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "hypnospec/nn/layers.hpp"

namespace hypnospec::nn {

inline constexpr int kNumClasses = 5;
inline constexpr int kHeadWidth = 224;

// Stem 16ch/s2 with h-swish, then 16->24 (x4, relu), 24->40 (x3, SE,
// h-swish, s2) and 40->40 (x3, SE, h-swish, residual).
std::vector<InvertedResidualSpec> default_blocks();

struct MicroNetConfig {
  int height = 64;
  int width = 64;
  int channels = 3;
  int stem_channels = 16;
  int stem_kernel = 3;
  int stem_stride = 2;
  Activation stem_act = Activation::kHSwish;
  std::vector<InvertedResidualSpec> blocks = default_blocks();
  int se_ratio = 4;
  int head_width = kHeadWidth;
  int classes = kNumClasses;

  // Throws Error{kInvalidConfig}.
  void validate() const;
};

// Sequential network: stem conv, BN, activation, inverted-residual blocks,
// global average pool, dense(224, relu), dense(classes), softmax.
template <typename T>
class MicroNet {
 public:
  MicroNet(const MicroNetConfig& config, std::uint64_t seed);

  MicroNet(MicroNet&&) noexcept = default;
  MicroNet& operator=(MicroNet&&) noexcept = default;

  const MicroNetConfig& config() const { return config_; }
  Shape input_shape(int batch) const { return {batch, config_.height, config_.width, config_.channels}; }

  std::size_t num_layers() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& layer(std::size_t i) const { return *layers_.at(i); }
  // Index of the first head layer (global average pool).
  std::size_t head_begin() const { return head_begin_; }

  // Class probabilities, shape (N, 1, 1, classes).
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode);
  const Tensor4<T>& logits() const { return logits_; }

  // Backpropagates a gradient taken with respect to the logits (the fused
  // softmax + cross-entropy path) and returns the input gradient.
  Tensor4<T> backward_from_logits(const Tensor4<T>& grad_logits);
  // Backpropagates a gradient with respect to the probabilities.
  Tensor4<T> backward(const Tensor4<T>& grad_probs);

  std::vector<ParamView<T>> params(bool trainable_only = false);
  std::vector<std::span<T>> state();

 private:
  MicroNetConfig config_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::size_t head_begin_ = 0;
  Tensor4<T> logits_;
};

template <typename T>
std::size_t count_params(Layer<T>& layer, bool trainable_only);
template <typename T>
std::size_t count_params(MicroNet<T>& model, bool trainable_only);

// CRC32 over the parameter and state bytes of the selected layers.
template <typename T>
std::uint32_t parameter_hash(MicroNet<T>& model, std::span<const std::size_t> layers);

// Versioned binary checkpoint: "EGMW", u16 version, u8 scalar width,
// u32 layer count, per layer {u8 kind, u8 trainable, u16 description length,
// description, u32 array count, u64 element count per array}, followed by
// every array's raw little-endian values in the same order.
template <typename T>
void save_checkpoint(MicroNet<T>& model, const std::filesystem::path& path);
// Loads into a model built from the same config. Throws
// Error{kCheckpointFormat} when structures disagree.
template <typename T>
void load_checkpoint(MicroNet<T>& model, const std::filesystem::path& path);

extern template class MicroNet<float>;
extern template class MicroNet<double>;

}  // namespace hypnospec::nn

#endif  // HYPNOSPEC_NN_MICRONET_HPP_
