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

#ifndef HYPNOSPEC_NN_LAYERS_HPP_
#define HYPNOSPEC_NN_LAYERS_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hypnospec/nn/tensor.hpp"

namespace hypnospec::nn {

enum class LayerKind : std::uint8_t {
  kConv2d = 1,
  kDepthwiseConv = 2,
  kBatchNorm = 3,
  kActivation = 4,
  kSeBlock = 5,
  kInvertedResidual = 6,
  kGlobalAvgPool = 7,
  kDense = 8,
  kSoftmax = 9,
};

enum class Activation : std::uint8_t { kLinear, kRelu, kRelu6, kHSwish, kHardSigmoid };
enum class Padding : std::uint8_t { kSame, kValid };
enum class Mode { kTrain, kInfer };

std::string_view layer_kind_name(LayerKind kind);
std::string_view activation_name(Activation act);

template <typename T>
T activate(Activation act, T x);
// Derivative of activate() with respect to its input, evaluated at x.
template <typename T>
T activate_grad(Activation act, T x);

// Output extent and leading pad along one spatial axis.
struct AxisGeometry {
  int out = 0;
  int pad_before = 0;
};
AxisGeometry axis_geometry(int in, int kernel, int stride, Padding padding);

// Rounds v up to a multiple of `divisor` (never below `divisor`).
int round_up_multiple(double v, int divisor);

template <typename T>
struct ParamView {
  std::string name;
  std::span<T> value;
  std::span<T> grad;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerKind kind() const = 0;
  virtual std::string describe() const = 0;
  virtual Shape output_shape(const Shape& in) const = 0;

  // Caches whatever backward() needs.
  virtual Tensor4<T> forward(const Tensor4<T>& x, Mode mode) = 0;
  // Returns the input gradient and overwrites parameter gradients (left
  // untouched while the layer is frozen).
  virtual Tensor4<T> backward(const Tensor4<T>& grad_out) = 0;

  // Learnable arrays.
  virtual std::vector<ParamView<T>> params() { return {}; }
  // Non-learnable persistent buffers (batch-norm running statistics).
  virtual std::vector<std::span<T>> state() { return {}; }
  virtual void init(std::mt19937_64& /*rng*/) {}

  bool trainable() const { return trainable_; }
  virtual void set_trainable(bool on) { trainable_ = on; }

 protected:
  bool trainable_ = true;
};

template <typename T>
class Conv2d final : public Layer<T> {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride, Padding padding, bool bias = false);

  LayerKind kind() const override { return LayerKind::kConv2d; }
  std::string describe() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  std::vector<ParamView<T>> params() override;
  void init(std::mt19937_64& rng) override;

  // Layout: [ky][kx][in][out].
  std::vector<T>& weights() { return w_; }
  std::vector<T>& bias() { return b_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

 private:
  int in_, out_, k_, stride_;
  Padding padding_;
  bool has_bias_;
  std::vector<T> w_, b_, dw_, db_;
  Tensor4<T> x_;
};

template <typename T>
class DepthwiseConv2d final : public Layer<T> {
 public:
  DepthwiseConv2d(int channels, int kernel, int stride, Padding padding);

  LayerKind kind() const override { return LayerKind::kDepthwiseConv; }
  std::string describe() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  std::vector<ParamView<T>> params() override;
  void init(std::mt19937_64& rng) override;

  // Layout: [ky][kx][channel].
  std::vector<T>& weights() { return w_; }

 private:
  int c_, k_, stride_;
  Padding padding_;
  std::vector<T> w_, dw_;
  Tensor4<T> x_;
};

template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  explicit BatchNorm(int channels, double momentum = 0.99, double epsilon = 1e-3);

  LayerKind kind() const override { return LayerKind::kBatchNorm; }
  std::string describe() const override;
  Shape output_shape(const Shape& in) const override { return in; }
  // Frozen layers always normalize with the running statistics.
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  std::vector<ParamView<T>> params() override;
  std::vector<std::span<T>> state() override;
  void init(std::mt19937_64& rng) override;

  std::vector<T>& gamma() { return gamma_; }
  std::vector<T>& beta() { return beta_; }
  std::vector<T>& running_mean() { return mean_; }
  std::vector<T>& running_var() { return var_; }

 private:
  int c_;
  double momentum_, eps_;
  std::vector<T> gamma_, beta_, mean_, var_, dgamma_, dbeta_;
  // Cached from forward.
  bool used_batch_stats_ = false;
  Tensor4<T> xhat_;
  std::vector<T> inv_std_;
};

template <typename T>
class ActivationLayer final : public Layer<T> {
 public:
  explicit ActivationLayer(Activation act) : act_(act) {}

  LayerKind kind() const override { return LayerKind::kActivation; }
  std::string describe() const override;
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;

  Activation activation() const { return act_; }

 private:
  Activation act_;
  Tensor4<T> x_;
};

template <typename T>
class GlobalAvgPool final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::kGlobalAvgPool; }
  std::string describe() const override { return "global_avg_pool"; }
  Shape output_shape(const Shape& in) const override { return {in.n, 1, 1, in.c}; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;

 private:
  Shape in_shape_{};
};

// Fully connected layer over the flattened H*W*C features of each sample;
// output shape (N, 1, 1, units).
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(int in_features, int units, Activation act = Activation::kLinear);

  LayerKind kind() const override { return LayerKind::kDense; }
  std::string describe() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  std::vector<ParamView<T>> params() override;
  void init(std::mt19937_64& rng) override;

  // Layout: [in][out].
  std::vector<T>& weights() { return w_; }
  std::vector<T>& bias() { return b_; }

 private:
  int in_, out_;
  Activation act_;
  std::vector<T> w_, b_, dw_, db_;
  Tensor4<T> x_, pre_;
};

// Row-wise softmax over the channel axis, computed with max subtraction.
template <typename T>
class Softmax final : public Layer<T> {
 public:
  LayerKind kind() const override { return LayerKind::kSoftmax; }
  std::string describe() const override { return "softmax"; }
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;

 private:
  Tensor4<T> y_;
};

// Squeeze-and-excitation: per-channel mean -> dense -> relu -> dense ->
// hard sigmoid, used to rescale the input channels.
template <typename T>
class SeBlock final : public Layer<T> {
 public:
  SeBlock(int channels, int se_ratio = 4);

  LayerKind kind() const override { return LayerKind::kSeBlock; }
  std::string describe() const override;
  Shape output_shape(const Shape& in) const override { return in; }
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  std::vector<ParamView<T>> params() override;
  void init(std::mt19937_64& rng) override;

  int reduced() const { return r_; }
  // Layouts: reduce [C][R], expand [R][C].
  std::vector<T>& reduce_weights() { return w1_; }
  std::vector<T>& reduce_bias() { return b1_; }
  std::vector<T>& expand_weights() { return w2_; }
  std::vector<T>& expand_bias() { return b2_; }
  // Gate of the last forward pass, [N][C].
  const std::vector<T>& last_gate() const { return gate_; }

 private:
  int c_, r_;
  std::vector<T> w1_, b1_, w2_, b2_, dw1_, db1_, dw2_, db2_;
  Tensor4<T> x_;
  std::vector<T> squeeze_, hidden_pre_, excite_pre_, gate_;
};

struct InvertedResidualSpec {
  int out_channels = 16;
  int kernel = 3;
  int stride = 1;
  int expansion = 1;
  bool se = false;
  Activation act = Activation::kRelu;
};

// expand 1x1 -> BN -> act -> depthwise -> BN -> act -> [SE] -> project 1x1
// -> BN, plus the identity shortcut when stride is 1 and widths match.
template <typename T>
class InvertedResidual final : public Layer<T> {
 public:
  InvertedResidual(int in_channels, const InvertedResidualSpec& spec, int se_ratio = 4);

  LayerKind kind() const override { return LayerKind::kInvertedResidual; }
  std::string describe() const override;
  Shape output_shape(const Shape& in) const override;
  Tensor4<T> forward(const Tensor4<T>& x, Mode mode) override;
  Tensor4<T> backward(const Tensor4<T>& grad_out) override;
  std::vector<ParamView<T>> params() override;
  std::vector<std::span<T>> state() override;
  void init(std::mt19937_64& rng) override;
  void set_trainable(bool on) override;

  bool has_residual() const { return residual_; }
  int internal_width() const { return hidden_; }
  const InvertedResidualSpec& spec() const { return spec_; }
  std::vector<std::unique_ptr<Layer<T>>>& children() { return children_; }

 private:
  int in_;
  InvertedResidualSpec spec_;
  int hidden_;
  bool residual_;
  std::vector<std::unique_ptr<Layer<T>>> children_;
};

}  // namespace hypnospec::nn

#endif  // HYPNOSPEC_NN_LAYERS_HPP_
