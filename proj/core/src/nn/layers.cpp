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

#include "hypnospec/nn/layers.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hypnospec/error.hpp"

namespace hypnospec::nn {

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kDepthwiseConv: return "depthwise_conv";
    case LayerKind::kBatchNorm: return "batch_norm";
    case LayerKind::kActivation: return "activation";
    case LayerKind::kSeBlock: return "se_block";
    case LayerKind::kInvertedResidual: return "inverted_residual";
    case LayerKind::kGlobalAvgPool: return "global_avg_pool";
    case LayerKind::kDense: return "dense";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "unknown";
}

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kRelu6: return "relu6";
    case Activation::kHSwish: return "h_swish";
    case Activation::kHardSigmoid: return "hard_sigmoid";
  }
  return "unknown";
}

template <typename T>
T activate(Activation act, T x) {
  const auto relu6 = [](T v) { return std::min<T>(std::max<T>(v, T{0}), T{6}); };
  switch (act) {
    case Activation::kLinear: return x;
    case Activation::kRelu: return std::max<T>(x, T{0});
    case Activation::kRelu6: return relu6(x);
    case Activation::kHSwish: return x * relu6(x + T{3}) / T{6};
    case Activation::kHardSigmoid: return relu6(x + T{3}) / T{6};
  }
  return x;
}

template <typename T>
T activate_grad(Activation act, T x) {
  switch (act) {
    case Activation::kLinear: return T{1};
    case Activation::kRelu: return x > T{0} ? T{1} : T{0};
    case Activation::kRelu6: return (x > T{0} && x < T{6}) ? T{1} : T{0};
    case Activation::kHSwish:
      if (x <= T{-3}) return T{0};
      if (x >= T{3}) return T{1};
      return (T{2} * x + T{3}) / T{6};
    case Activation::kHardSigmoid: return (x > T{-3} && x < T{3}) ? T{1} / T{6} : T{0};
  }
  return T{1};
}

template float activate<float>(Activation, float);
template double activate<double>(Activation, double);
template float activate_grad<float>(Activation, float);
template double activate_grad<double>(Activation, double);

AxisGeometry axis_geometry(int in, int kernel, int stride, Padding padding) {
  if (padding == Padding::kSame) {
    const int out = (in + stride - 1) / stride;
    const int total = std::max((out - 1) * stride + kernel - in, 0);
    return {out, total / 2};
  }
  if (in < kernel) {
    throw Error(Errc::kShapeMismatch, fmt::format("valid convolution: input {} smaller than kernel {}", in, kernel));
  }
  return {(in - kernel) / stride + 1, 0};
}

int round_up_multiple(double v, int divisor) {
  const int up = static_cast<int>(std::ceil(v / divisor)) * divisor;
  return std::max(divisor, up);
}

namespace {

template <typename T>
void he_uniform(std::vector<T>& w, int fan_in, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& v : w) v = static_cast<T>(dist(rng));
}

void expect_channels(const Shape& s, int c, std::string_view who) {
  if (s.c != c) {
    throw Error(Errc::kShapeMismatch, fmt::format("{} expects {} channels, got input {}", who, c, s.str()));
  }
}

void expect_same(const Shape& a, const Shape& b, std::string_view who) {
  if (!(a == b)) {
    throw Error(Errc::kShapeMismatch, fmt::format("{}: gradient shape {} != expected {}", who, a.str(), b.str()));
  }
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride, Padding padding, bool bias)
    : in_(in_channels), out_(out_channels), k_(kernel), stride_(stride), padding_(padding), has_bias_(bias) {
  if (in_ < 1 || out_ < 1 || k_ < 1 || stride_ < 1) throw Error(Errc::kShapeMismatch, "bad conv2d geometry");
  w_.assign(static_cast<std::size_t>(k_ * k_ * in_ * out_), T{0});
  dw_.assign(w_.size(), T{0});
  if (has_bias_) {
    b_.assign(static_cast<std::size_t>(out_), T{0});
    db_.assign(b_.size(), T{0});
  }
}

template <typename T>
std::string Conv2d<T>::describe() const {
  return fmt::format("conv2d k={} s={} {} {}->{}{}", k_, stride_, padding_ == Padding::kSame ? "same" : "valid", in_,
                     out_, has_bias_ ? " +bias" : "");
}

template <typename T>
Shape Conv2d<T>::output_shape(const Shape& in) const {
  expect_channels(in, in_, "conv2d");
  return {in.n, axis_geometry(in.h, k_, stride_, padding_).out, axis_geometry(in.w, k_, stride_, padding_).out, out_};
}

template <typename T>
Tensor4<T> Conv2d<T>::forward(const Tensor4<T>& x, Mode) {
  const Shape os = output_shape(x.shape());
  const auto gy = axis_geometry(x.shape().h, k_, stride_, padding_);
  const auto gx = axis_geometry(x.shape().w, k_, stride_, padding_);
  x_ = x;
  Tensor4<T> y(os);
  const auto cout = static_cast<std::size_t>(out_);
  for (int n = 0; n < os.n; ++n) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        T* out = &y.at(n, oy, ox, 0);
        if (has_bias_) std::copy(b_.begin(), b_.end(), out);
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ - gy.pad_before + ky;
          if (iy < 0 || iy >= x.shape().h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ - gx.pad_before + kx;
            if (ix < 0 || ix >= x.shape().w) continue;
            const T* in = &x.at(n, iy, ix, 0);
            const T* wk = &w_[static_cast<std::size_t>((ky * k_ + kx) * in_) * cout];
            for (int ci = 0; ci < in_; ++ci) {
              const T v = in[ci];
              const T* wrow = wk + static_cast<std::size_t>(ci) * cout;
              for (std::size_t co = 0; co < cout; ++co) out[co] += v * wrow[co];
            }
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor4<T> Conv2d<T>::backward(const Tensor4<T>& g) {
  const Shape& is = x_.shape();
  expect_same(g.shape(), output_shape(is), "conv2d backward");
  const auto gy = axis_geometry(is.h, k_, stride_, padding_);
  const auto gx = axis_geometry(is.w, k_, stride_, padding_);
  const bool learn = this->trainable_;
  if (learn) {
    std::fill(dw_.begin(), dw_.end(), T{0});
    std::fill(db_.begin(), db_.end(), T{0});
  }
  Tensor4<T> dx(is);
  const auto cout = static_cast<std::size_t>(out_);
  const Shape& os = g.shape();
  for (int n = 0; n < os.n; ++n) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        const T* go = &g.at(n, oy, ox, 0);
        if (learn && has_bias_) {
          for (std::size_t co = 0; co < cout; ++co) db_[co] += go[co];
        }
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ - gy.pad_before + ky;
          if (iy < 0 || iy >= is.h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ - gx.pad_before + kx;
            if (ix < 0 || ix >= is.w) continue;
            const T* in = &x_.at(n, iy, ix, 0);
            T* din = &dx.at(n, iy, ix, 0);
            const std::size_t base = static_cast<std::size_t>((ky * k_ + kx) * in_) * cout;
            for (int ci = 0; ci < in_; ++ci) {
              const T* wrow = &w_[base + static_cast<std::size_t>(ci) * cout];
              T acc{0};
              for (std::size_t co = 0; co < cout; ++co) acc += wrow[co] * go[co];
              din[ci] += acc;
              if (learn) {
                T* dwrow = &dw_[base + static_cast<std::size_t>(ci) * cout];
                const T v = in[ci];
                for (std::size_t co = 0; co < cout; ++co) dwrow[co] += v * go[co];
              }
            }
          }
        }
      }
    }
  }
  return dx;
}

template <typename T>
std::vector<ParamView<T>> Conv2d<T>::params() {
  std::vector<ParamView<T>> out{{"kernel", w_, dw_}};
  if (has_bias_) out.push_back({"bias", b_, db_});
  return out;
}

template <typename T>
void Conv2d<T>::init(std::mt19937_64& rng) {
  he_uniform(w_, k_ * k_ * in_, rng);
  std::fill(b_.begin(), b_.end(), T{0});
}

// ------------------------------------------------------- DepthwiseConv2d

template <typename T>
DepthwiseConv2d<T>::DepthwiseConv2d(int channels, int kernel, int stride, Padding padding)
    : c_(channels), k_(kernel), stride_(stride), padding_(padding) {
  if (c_ < 1 || k_ < 1 || stride_ < 1) throw Error(Errc::kShapeMismatch, "bad depthwise geometry");
  w_.assign(static_cast<std::size_t>(k_ * k_ * c_), T{0});
  dw_.assign(w_.size(), T{0});
}

template <typename T>
std::string DepthwiseConv2d<T>::describe() const {
  return fmt::format("depthwise_conv k={} s={} {} c={}", k_, stride_, padding_ == Padding::kSame ? "same" : "valid", c_);
}

template <typename T>
Shape DepthwiseConv2d<T>::output_shape(const Shape& in) const {
  expect_channels(in, c_, "depthwise_conv");
  return {in.n, axis_geometry(in.h, k_, stride_, padding_).out, axis_geometry(in.w, k_, stride_, padding_).out, c_};
}

template <typename T>
Tensor4<T> DepthwiseConv2d<T>::forward(const Tensor4<T>& x, Mode) {
  const Shape os = output_shape(x.shape());
  const auto gy = axis_geometry(x.shape().h, k_, stride_, padding_);
  const auto gx = axis_geometry(x.shape().w, k_, stride_, padding_);
  x_ = x;
  Tensor4<T> y(os);
  const auto c = static_cast<std::size_t>(c_);
  for (int n = 0; n < os.n; ++n) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        T* out = &y.at(n, oy, ox, 0);
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ - gy.pad_before + ky;
          if (iy < 0 || iy >= x.shape().h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ - gx.pad_before + kx;
            if (ix < 0 || ix >= x.shape().w) continue;
            const T* in = &x.at(n, iy, ix, 0);
            const T* wk = &w_[static_cast<std::size_t>(ky * k_ + kx) * c];
            for (std::size_t ch = 0; ch < c; ++ch) out[ch] += in[ch] * wk[ch];
          }
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor4<T> DepthwiseConv2d<T>::backward(const Tensor4<T>& g) {
  const Shape& is = x_.shape();
  expect_same(g.shape(), output_shape(is), "depthwise backward");
  const auto gy = axis_geometry(is.h, k_, stride_, padding_);
  const auto gx = axis_geometry(is.w, k_, stride_, padding_);
  const bool learn = this->trainable_;
  if (learn) std::fill(dw_.begin(), dw_.end(), T{0});
  Tensor4<T> dx(is);
  const auto c = static_cast<std::size_t>(c_);
  const Shape& os = g.shape();
  for (int n = 0; n < os.n; ++n) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        const T* go = &g.at(n, oy, ox, 0);
        for (int ky = 0; ky < k_; ++ky) {
          const int iy = oy * stride_ - gy.pad_before + ky;
          if (iy < 0 || iy >= is.h) continue;
          for (int kx = 0; kx < k_; ++kx) {
            const int ix = ox * stride_ - gx.pad_before + kx;
            if (ix < 0 || ix >= is.w) continue;
            const std::size_t base = static_cast<std::size_t>(ky * k_ + kx) * c;
            const T* in = &x_.at(n, iy, ix, 0);
            T* din = &dx.at(n, iy, ix, 0);
            for (std::size_t ch = 0; ch < c; ++ch) din[ch] += w_[base + ch] * go[ch];
            if (learn) {
              for (std::size_t ch = 0; ch < c; ++ch) dw_[base + ch] += in[ch] * go[ch];
            }
          }
        }
      }
    }
  }
  return dx;
}

template <typename T>
std::vector<ParamView<T>> DepthwiseConv2d<T>::params() {
  return {{"depthwise_kernel", w_, dw_}};
}

template <typename T>
void DepthwiseConv2d<T>::init(std::mt19937_64& rng) {
  he_uniform(w_, k_ * k_, rng);
}

// ------------------------------------------------------------- BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(int channels, double momentum, double epsilon)
    : c_(channels), momentum_(momentum), eps_(epsilon) {
  if (c_ < 1) throw Error(Errc::kShapeMismatch, "batch_norm needs at least one channel");
  const auto c = static_cast<std::size_t>(c_);
  gamma_.assign(c, T{1});
  beta_.assign(c, T{0});
  mean_.assign(c, T{0});
  var_.assign(c, T{1});
  dgamma_.assign(c, T{0});
  dbeta_.assign(c, T{0});
}

template <typename T>
std::string BatchNorm<T>::describe() const {
  return fmt::format("batch_norm c={} momentum={} eps={}", c_, momentum_, eps_);
}

template <typename T>
Tensor4<T> BatchNorm<T>::forward(const Tensor4<T>& x, Mode mode) {
  expect_channels(x.shape(), c_, "batch_norm");
  const auto c = static_cast<std::size_t>(c_);
  const std::size_t rows = x.size() / c;
  used_batch_stats_ = mode == Mode::kTrain && this->trainable_;

  std::vector<double> mean(c, 0.0), var(c, 0.0);
  if (used_batch_stats_) {
    const T* px = x.data();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t ch = 0; ch < c; ++ch) mean[ch] += px[r * c + ch];
    }
    for (auto& m : mean) m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double d = px[r * c + ch] - mean[ch];
        var[ch] += d * d;
      }
    }
    for (auto& v : var) v /= static_cast<double>(rows);
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean_[ch] = static_cast<T>(momentum_ * mean_[ch] + (1.0 - momentum_) * mean[ch]);
      var_[ch] = static_cast<T>(momentum_ * var_[ch] + (1.0 - momentum_) * var[ch]);
    }
  } else {
    for (std::size_t ch = 0; ch < c; ++ch) {
      mean[ch] = mean_[ch];
      var[ch] = var_[ch];
    }
  }

  inv_std_.resize(c);
  for (std::size_t ch = 0; ch < c; ++ch) inv_std_[ch] = static_cast<T>(1.0 / std::sqrt(var[ch] + eps_));
  xhat_ = Tensor4<T>(x.shape());
  Tensor4<T> y(x.shape());
  const T* px = x.data();
  T* ph = xhat_.data();
  T* py = y.data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const std::size_t i = r * c + ch;
      ph[i] = static_cast<T>((px[i] - mean[ch]) * inv_std_[ch]);
      py[i] = gamma_[ch] * ph[i] + beta_[ch];
    }
  }
  return y;
}

template <typename T>
Tensor4<T> BatchNorm<T>::backward(const Tensor4<T>& g) {
  expect_same(g.shape(), xhat_.shape(), "batch_norm backward");
  const auto c = static_cast<std::size_t>(c_);
  const std::size_t rows = g.size() / c;
  const T* pg = g.data();
  const T* ph = xhat_.data();

  std::vector<double> sum_g(c, 0.0), sum_gh(c, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      sum_g[ch] += pg[r * c + ch];
      sum_gh[ch] += pg[r * c + ch] * ph[r * c + ch];
    }
  }
  if (this->trainable_) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      dgamma_[ch] = static_cast<T>(sum_gh[ch]);
      dbeta_[ch] = static_cast<T>(sum_g[ch]);
    }
  }

  Tensor4<T> dx(g.shape());
  T* pd = dx.data();
  if (used_batch_stats_) {
    const double m = static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t i = r * c + ch;
        const double scale = gamma_[ch] * inv_std_[ch] / m;
        pd[i] = static_cast<T>(scale * (m * pg[i] - sum_g[ch] - ph[i] * sum_gh[ch]));
      }
    }
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t ch = 0; ch < c; ++ch) pd[r * c + ch] = pg[r * c + ch] * gamma_[ch] * inv_std_[ch];
    }
  }
  return dx;
}

template <typename T>
std::vector<ParamView<T>> BatchNorm<T>::params() {
  return {{"gamma", gamma_, dgamma_}, {"beta", beta_, dbeta_}};
}

template <typename T>
std::vector<std::span<T>> BatchNorm<T>::state() {
  return {mean_, var_};
}

template <typename T>
void BatchNorm<T>::init(std::mt19937_64&) {
  std::fill(gamma_.begin(), gamma_.end(), T{1});
  std::fill(beta_.begin(), beta_.end(), T{0});
  std::fill(mean_.begin(), mean_.end(), T{0});
  std::fill(var_.begin(), var_.end(), T{1});
}

// ------------------------------------------------------- ActivationLayer

template <typename T>
std::string ActivationLayer<T>::describe() const {
  return fmt::format("activation {}", activation_name(act_));
}

template <typename T>
Tensor4<T> ActivationLayer<T>::forward(const Tensor4<T>& x, Mode) {
  x_ = x;
  Tensor4<T> y(x.shape());
  std::transform(x.data(), x.data() + x.size(), y.data(), [this](T v) { return activate(act_, v); });
  return y;
}

template <typename T>
Tensor4<T> ActivationLayer<T>::backward(const Tensor4<T>& g) {
  expect_same(g.shape(), x_.shape(), "activation backward");
  Tensor4<T> dx(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) dx.data()[i] = g.data()[i] * activate_grad(act_, x_.data()[i]);
  return dx;
}

// --------------------------------------------------------- GlobalAvgPool

template <typename T>
Tensor4<T> GlobalAvgPool<T>::forward(const Tensor4<T>& x, Mode) {
  in_shape_ = x.shape();
  const Shape& s = x.shape();
  Tensor4<T> y({s.n, 1, 1, s.c});
  const auto plane = static_cast<double>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n) {
    std::vector<double> acc(static_cast<std::size_t>(s.c), 0.0);
    for (int yy = 0; yy < s.h; ++yy) {
      for (int xx = 0; xx < s.w; ++xx) {
        const T* p = &x.at(n, yy, xx, 0);
        for (int c = 0; c < s.c; ++c) acc[static_cast<std::size_t>(c)] += p[c];
      }
    }
    for (int c = 0; c < s.c; ++c) y.at(n, 0, 0, c) = static_cast<T>(acc[static_cast<std::size_t>(c)] / plane);
  }
  return y;
}

template <typename T>
Tensor4<T> GlobalAvgPool<T>::backward(const Tensor4<T>& g) {
  const Shape& s = in_shape_;
  expect_same(g.shape(), Shape{s.n, 1, 1, s.c}, "global_avg_pool backward");
  Tensor4<T> dx(s);
  const T inv = static_cast<T>(1.0 / (static_cast<double>(s.h) * s.w));
  for (int n = 0; n < s.n; ++n) {
    for (int yy = 0; yy < s.h; ++yy) {
      for (int xx = 0; xx < s.w; ++xx) {
        T* p = &dx.at(n, yy, xx, 0);
        for (int c = 0; c < s.c; ++c) p[c] = g.at(n, 0, 0, c) * inv;
      }
    }
  }
  return dx;
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(int in_features, int units, Activation act) : in_(in_features), out_(units), act_(act) {
  if (in_ < 1 || out_ < 1) throw Error(Errc::kShapeMismatch, "bad dense geometry");
  w_.assign(static_cast<std::size_t>(in_) * static_cast<std::size_t>(out_), T{0});
  dw_.assign(w_.size(), T{0});
  b_.assign(static_cast<std::size_t>(out_), T{0});
  db_.assign(b_.size(), T{0});
}

template <typename T>
std::string Dense<T>::describe() const {
  return fmt::format("dense {}->{} {}", in_, out_, activation_name(act_));
}

template <typename T>
Shape Dense<T>::output_shape(const Shape& in) const {
  if (in.h * in.w * in.c != in_) {
    throw Error(Errc::kShapeMismatch, fmt::format("dense expects {} features, got input {}", in_, in.str()));
  }
  return {in.n, 1, 1, out_};
}

template <typename T>
Tensor4<T> Dense<T>::forward(const Tensor4<T>& x, Mode) {
  const Shape os = output_shape(x.shape());
  x_ = x;
  pre_ = Tensor4<T>(os);
  Tensor4<T> y(os);
  const auto out = static_cast<std::size_t>(out_);
  for (int n = 0; n < os.n; ++n) {
    const T* in = x.data() + static_cast<std::size_t>(n) * static_cast<std::size_t>(in_);
    T* pre = pre_.data() + static_cast<std::size_t>(n) * out;
    std::copy(b_.begin(), b_.end(), pre);
    for (int i = 0; i < in_; ++i) {
      const T v = in[i];
      const T* wrow = &w_[static_cast<std::size_t>(i) * out];
      for (std::size_t o = 0; o < out; ++o) pre[o] += v * wrow[o];
    }
    T* py = y.data() + static_cast<std::size_t>(n) * out;
    for (std::size_t o = 0; o < out; ++o) py[o] = activate(act_, pre[o]);
  }
  return y;
}

template <typename T>
Tensor4<T> Dense<T>::backward(const Tensor4<T>& g) {
  expect_same(g.shape(), pre_.shape(), "dense backward");
  const bool learn = this->trainable_;
  if (learn) {
    std::fill(dw_.begin(), dw_.end(), T{0});
    std::fill(db_.begin(), db_.end(), T{0});
  }
  const auto out = static_cast<std::size_t>(out_);
  Tensor4<T> dx(x_.shape());
  std::vector<T> gpre(out);
  for (int n = 0; n < g.shape().n; ++n) {
    const T* go = g.data() + static_cast<std::size_t>(n) * out;
    const T* pre = pre_.data() + static_cast<std::size_t>(n) * out;
    for (std::size_t o = 0; o < out; ++o) gpre[o] = go[o] * activate_grad(act_, pre[o]);
    const T* in = x_.data() + static_cast<std::size_t>(n) * static_cast<std::size_t>(in_);
    T* din = dx.data() + static_cast<std::size_t>(n) * static_cast<std::size_t>(in_);
    for (int i = 0; i < in_; ++i) {
      const T* wrow = &w_[static_cast<std::size_t>(i) * out];
      T acc{0};
      for (std::size_t o = 0; o < out; ++o) acc += wrow[o] * gpre[o];
      din[i] = acc;
      if (learn) {
        T* dwrow = &dw_[static_cast<std::size_t>(i) * out];
        for (std::size_t o = 0; o < out; ++o) dwrow[o] += in[i] * gpre[o];
      }
    }
    if (learn) {
      for (std::size_t o = 0; o < out; ++o) db_[o] += gpre[o];
    }
  }
  return dx;
}

template <typename T>
std::vector<ParamView<T>> Dense<T>::params() {
  return {{"kernel", w_, dw_}, {"bias", b_, db_}};
}

template <typename T>
void Dense<T>::init(std::mt19937_64& rng) {
  he_uniform(w_, in_, rng);
  std::fill(b_.begin(), b_.end(), T{0});
}

// --------------------------------------------------------------- Softmax

template <typename T>
Tensor4<T> Softmax<T>::forward(const Tensor4<T>& x, Mode) {
  y_ = Tensor4<T>(x.shape());
  const auto c = static_cast<std::size_t>(x.shape().c);
  const std::size_t rows = x.size() / c;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = x.data() + r * c;
    T* out = y_.data() + r * c;
    const T peak = *std::max_element(in, in + c);
    T sum{0};
    for (std::size_t i = 0; i < c; ++i) sum += out[i] = std::exp(in[i] - peak);
    for (std::size_t i = 0; i < c; ++i) out[i] /= sum;
  }
  return y_;
}

template <typename T>
Tensor4<T> Softmax<T>::backward(const Tensor4<T>& g) {
  expect_same(g.shape(), y_.shape(), "softmax backward");
  Tensor4<T> dx(g.shape());
  const auto c = static_cast<std::size_t>(g.shape().c);
  const std::size_t rows = g.size() / c;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* y = y_.data() + r * c;
    const T* go = g.data() + r * c;
    T dot{0};
    for (std::size_t i = 0; i < c; ++i) dot += go[i] * y[i];
    for (std::size_t i = 0; i < c; ++i) dx.data()[r * c + i] = y[i] * (go[i] - dot);
  }
  return dx;
}

#define HYPNOSPEC_INSTANTIATE(T)       \
  template class Conv2d<T>;            \
  template class DepthwiseConv2d<T>;   \
  template class BatchNorm<T>;         \
  template class ActivationLayer<T>;   \
  template class GlobalAvgPool<T>;     \
  template class Dense<T>;             \
  template class Softmax<T>;

HYPNOSPEC_INSTANTIATE(float)
HYPNOSPEC_INSTANTIATE(double)
#undef HYPNOSPEC_INSTANTIATE

}  // namespace hypnospec::nn
