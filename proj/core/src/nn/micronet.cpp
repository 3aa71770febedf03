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

#include "hypnospec/nn/micronet.hpp"

#include <fmt/format.h>

#include "hypnospec/cache.hpp"
#include "hypnospec/error.hpp"

namespace hypnospec::nn {

std::vector<InvertedResidualSpec> default_blocks() {
  return {
      {24, 3, 2, 4, false, Activation::kRelu},
      {40, 5, 2, 3, true, Activation::kHSwish},
      {40, 5, 1, 3, true, Activation::kHSwish},
  };
}

void MicroNetConfig::validate() const {
  if (height < 1 || width < 1 || channels < 1 || stem_channels < 1 || stem_kernel < 1 || stem_stride < 1) {
    throw Error(Errc::kInvalidConfig, "micro-net input and stem dimensions must be positive");
  }
  if (classes != kNumClasses) {
    throw Error(Errc::kInvalidConfig, fmt::format("output width must be {} classes, got {}", kNumClasses, classes));
  }
  if (head_width != kHeadWidth) {
    throw Error(Errc::kInvalidConfig, fmt::format("head dense width must be {}, got {}", kHeadWidth, head_width));
  }
  for (const auto& b : blocks) {
    if (b.out_channels < 1 || b.kernel < 1 || b.stride < 1 || b.expansion < 1) {
      throw Error(Errc::kInvalidConfig, "inverted residual spec has a non-positive field");
    }
  }
}

template <typename T>
MicroNet<T>::MicroNet(const MicroNetConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  layers_.push_back(std::make_unique<Conv2d<T>>(config_.channels, config_.stem_channels, config_.stem_kernel,
                                                config_.stem_stride, Padding::kSame));
  layers_.push_back(std::make_unique<BatchNorm<T>>(config_.stem_channels));
  layers_.push_back(std::make_unique<ActivationLayer<T>>(config_.stem_act));
  int channels = config_.stem_channels;
  for (const auto& spec : config_.blocks) {
    layers_.push_back(std::make_unique<InvertedResidual<T>>(channels, spec, config_.se_ratio));
    channels = spec.out_channels;
  }
  head_begin_ = layers_.size();
  layers_.push_back(std::make_unique<GlobalAvgPool<T>>());
  layers_.push_back(std::make_unique<Dense<T>>(channels, config_.head_width, Activation::kRelu));
  layers_.push_back(std::make_unique<Dense<T>>(config_.head_width, config_.classes));
  layers_.push_back(std::make_unique<Softmax<T>>());

  // Surface plumbing errors at construction rather than on the first batch.
  Shape s = input_shape(1);
  for (const auto& layer : layers_) s = layer->output_shape(s);

  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) layer->init(rng);
}

template <typename T>
Tensor4<T> MicroNet<T>::forward(const Tensor4<T>& x, Mode mode) {
  const Shape& s = x.shape();
  if (s.h != config_.height || s.w != config_.width || s.c != config_.channels) {
    throw Error(Errc::kShapeMismatch, fmt::format("model expects (N, {}, {}, {}), got {}", config_.height,
                                                  config_.width, config_.channels, s.str()));
  }
  Tensor4<T> h = x;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = layers_[i]->forward(h, mode);
  logits_ = h;
  return layers_.back()->forward(h, mode);
}

template <typename T>
Tensor4<T> MicroNet<T>::backward_from_logits(const Tensor4<T>& grad_logits) {
  Tensor4<T> d = grad_logits;
  for (std::size_t i = layers_.size() - 1; i-- > 0;) d = layers_[i]->backward(d);
  return d;
}

template <typename T>
Tensor4<T> MicroNet<T>::backward(const Tensor4<T>& grad_probs) {
  return backward_from_logits(layers_.back()->backward(grad_probs));
}

template <typename T>
std::vector<ParamView<T>> MicroNet<T>::params(bool trainable_only) {
  std::vector<ParamView<T>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (trainable_only && !layers_[i]->trainable()) continue;
    for (auto& p : layers_[i]->params()) {
      p.name = fmt::format("{}.{}", i, p.name);
      out.push_back(std::move(p));
    }
  }
  return out;
}

template <typename T>
std::vector<std::span<T>> MicroNet<T>::state() {
  std::vector<std::span<T>> out;
  for (auto& layer : layers_) {
    for (auto s : layer->state()) out.push_back(s);
  }
  return out;
}

template <typename T>
std::size_t count_params(Layer<T>& layer, bool trainable_only) {
  if (trainable_only && !layer.trainable()) return 0;
  std::size_t total = 0;
  for (const auto& p : layer.params()) total += p.value.size();
  return total;
}

template <typename T>
std::size_t count_params(MicroNet<T>& model, bool trainable_only) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < model.num_layers(); ++i) total += count_params(model.layer(i), trainable_only);
  return total;
}

template <typename T>
std::uint32_t parameter_hash(MicroNet<T>& model, std::span<const std::size_t> layers) {
  std::uint32_t crc = 0;
  const auto feed = [&crc](std::span<const T> values) {
    crc = cache::crc32({reinterpret_cast<const std::uint8_t*>(values.data()), values.size_bytes()}, crc);
  };
  for (const auto i : layers) {
    auto& layer = model.layer(i);
    for (const auto& p : layer.params()) feed(p.value);
    for (const auto s : layer.state()) feed(s);
  }
  return crc;
}

template class MicroNet<float>;
template class MicroNet<double>;
template std::size_t count_params<float>(Layer<float>&, bool);
template std::size_t count_params<double>(Layer<double>&, bool);
template std::size_t count_params<float>(MicroNet<float>&, bool);
template std::size_t count_params<double>(MicroNet<double>&, bool);
template std::uint32_t parameter_hash<float>(MicroNet<float>&, std::span<const std::size_t>);
template std::uint32_t parameter_hash<double>(MicroNet<double>&, std::span<const std::size_t>);

}  // namespace hypnospec::nn
