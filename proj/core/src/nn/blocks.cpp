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
#include "hypnospec/nn/layers.hpp"

namespace hypnospec::nn {

// ---------------------------------------------------------------- SeBlock

template <typename T>
SeBlock<T>::SeBlock(int channels, int se_ratio) : c_(channels) {
  if (c_ < 1 || se_ratio < 1) throw Error(Errc::kShapeMismatch, "bad squeeze-excite geometry");
  r_ = round_up_multiple(static_cast<double>(c_) / se_ratio, 8);
  const auto cr = static_cast<std::size_t>(c_) * static_cast<std::size_t>(r_);
  w1_.assign(cr, T{0});
  w2_.assign(cr, T{0});
  dw1_.assign(cr, T{0});
  dw2_.assign(cr, T{0});
  b1_.assign(static_cast<std::size_t>(r_), T{0});
  db1_.assign(b1_.size(), T{0});
  b2_.assign(static_cast<std::size_t>(c_), T{0});
  db2_.assign(b2_.size(), T{0});
}

template <typename T>
std::string SeBlock<T>::describe() const {
  return fmt::format("se_block c={} reduce={}", c_, r_);
}

template <typename T>
Tensor4<T> SeBlock<T>::forward(const Tensor4<T>& x, Mode) {
  const Shape& s = x.shape();
  if (s.c != c_) throw Error(Errc::kShapeMismatch, fmt::format("se_block expects {} channels, got {}", c_, s.str()));
  x_ = x;
  const auto c = static_cast<std::size_t>(c_);
  const auto r = static_cast<std::size_t>(r_);
  const auto batch = static_cast<std::size_t>(s.n);
  const double plane = static_cast<double>(s.h) * s.w;

  squeeze_.assign(batch * c, T{0});
  hidden_pre_.assign(batch * r, T{0});
  excite_pre_.assign(batch * c, T{0});
  gate_.assign(batch * c, T{0});
  Tensor4<T> y(s);
  for (int n = 0; n < s.n; ++n) {
    const auto bn = static_cast<std::size_t>(n);
    std::vector<double> acc(c, 0.0);
    for (int yy = 0; yy < s.h; ++yy) {
      for (int xx = 0; xx < s.w; ++xx) {
        const T* p = &x.at(n, yy, xx, 0);
        for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += p[ch];
      }
    }
    T* sq = &squeeze_[bn * c];
    for (std::size_t ch = 0; ch < c; ++ch) sq[ch] = static_cast<T>(acc[ch] / plane);

    T* hp = &hidden_pre_[bn * r];
    std::copy(b1_.begin(), b1_.end(), hp);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t j = 0; j < r; ++j) hp[j] += sq[ch] * w1_[ch * r + j];
    }
    T* ep = &excite_pre_[bn * c];
    std::copy(b2_.begin(), b2_.end(), ep);
    for (std::size_t j = 0; j < r; ++j) {
      const T h = activate(Activation::kRelu, hp[j]);
      for (std::size_t ch = 0; ch < c; ++ch) ep[ch] += h * w2_[j * c + ch];
    }
    T* gt = &gate_[bn * c];
    for (std::size_t ch = 0; ch < c; ++ch) gt[ch] = activate(Activation::kHardSigmoid, ep[ch]);

    for (int yy = 0; yy < s.h; ++yy) {
      for (int xx = 0; xx < s.w; ++xx) {
        const T* p = &x.at(n, yy, xx, 0);
        T* q = &y.at(n, yy, xx, 0);
        for (std::size_t ch = 0; ch < c; ++ch) q[ch] = p[ch] * gt[ch];
      }
    }
  }
  return y;
}

template <typename T>
Tensor4<T> SeBlock<T>::backward(const Tensor4<T>& g) {
  const Shape& s = x_.shape();
  if (!(g.shape() == s)) throw Error(Errc::kShapeMismatch, "se_block backward shape mismatch");
  const auto c = static_cast<std::size_t>(c_);
  const auto r = static_cast<std::size_t>(r_);
  const double plane = static_cast<double>(s.h) * s.w;
  const bool learn = this->trainable_;
  if (learn) {
    for (auto* v : {&dw1_, &db1_, &dw2_, &db2_}) std::fill(v->begin(), v->end(), T{0});
  }

  Tensor4<T> dx(s);
  std::vector<T> dexcite(c), dhidden(r), dsqueeze(c);
  for (int n = 0; n < s.n; ++n) {
    const auto bn = static_cast<std::size_t>(n);
    const T* gt = &gate_[bn * c];
    // d loss / d gate, then through the hard sigmoid.
    std::vector<double> dgate(c, 0.0);
    for (int yy = 0; yy < s.h; ++yy) {
      for (int xx = 0; xx < s.w; ++xx) {
        const T* p = &x_.at(n, yy, xx, 0);
        const T* go = &g.at(n, yy, xx, 0);
        T* d = &dx.at(n, yy, xx, 0);
        for (std::size_t ch = 0; ch < c; ++ch) {
          dgate[ch] += static_cast<double>(go[ch]) * p[ch];
          d[ch] = go[ch] * gt[ch];
        }
      }
    }
    const T* ep = &excite_pre_[bn * c];
    for (std::size_t ch = 0; ch < c; ++ch) {
      dexcite[ch] = static_cast<T>(dgate[ch]) * activate_grad(Activation::kHardSigmoid, ep[ch]);
    }
    const T* hp = &hidden_pre_[bn * r];
    for (std::size_t j = 0; j < r; ++j) {
      const T h = activate(Activation::kRelu, hp[j]);
      T acc{0};
      for (std::size_t ch = 0; ch < c; ++ch) {
        acc += w2_[j * c + ch] * dexcite[ch];
        if (learn) dw2_[j * c + ch] += h * dexcite[ch];
      }
      dhidden[j] = acc * activate_grad(Activation::kRelu, hp[j]);
    }
    if (learn) {
      for (std::size_t ch = 0; ch < c; ++ch) db2_[ch] += dexcite[ch];
      for (std::size_t j = 0; j < r; ++j) db1_[j] += dhidden[j];
    }
    const T* sq = &squeeze_[bn * c];
    for (std::size_t ch = 0; ch < c; ++ch) {
      T acc{0};
      for (std::size_t j = 0; j < r; ++j) {
        acc += w1_[ch * r + j] * dhidden[j];
        if (learn) dw1_[ch * r + j] += sq[ch] * dhidden[j];
      }
      dsqueeze[ch] = static_cast<T>(acc / plane);
    }
    for (int yy = 0; yy < s.h; ++yy) {
      for (int xx = 0; xx < s.w; ++xx) {
        T* d = &dx.at(n, yy, xx, 0);
        for (std::size_t ch = 0; ch < c; ++ch) d[ch] += dsqueeze[ch];
      }
    }
  }
  return dx;
}

template <typename T>
std::vector<ParamView<T>> SeBlock<T>::params() {
  return {{"reduce_kernel", w1_, dw1_}, {"reduce_bias", b1_, db1_}, {"expand_kernel", w2_, dw2_}, {"expand_bias", b2_, db2_}};
}

template <typename T>
void SeBlock<T>::init(std::mt19937_64& rng) {
  const auto fill = [&rng](std::vector<T>& w, int fan_in) {
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
    for (auto& v : w) v = static_cast<T>(dist(rng));
  };
  fill(w1_, c_);
  fill(w2_, r_);
  std::fill(b1_.begin(), b1_.end(), T{0});
  std::fill(b2_.begin(), b2_.end(), T{0});
}

// ------------------------------------------------------ InvertedResidual

template <typename T>
InvertedResidual<T>::InvertedResidual(int in_channels, const InvertedResidualSpec& spec, int se_ratio)
    : in_(in_channels), spec_(spec), hidden_(in_channels * spec.expansion),
      residual_(spec.stride == 1 && in_channels == spec.out_channels) {
  if (in_ < 1 || spec.expansion < 1 || spec.out_channels < 1) {
    throw Error(Errc::kShapeMismatch, "bad inverted residual geometry");
  }
  if (spec.expansion != 1) {
    children_.push_back(std::make_unique<Conv2d<T>>(in_, hidden_, 1, 1, Padding::kSame));
    children_.push_back(std::make_unique<BatchNorm<T>>(hidden_));
    children_.push_back(std::make_unique<ActivationLayer<T>>(spec.act));
  }
  children_.push_back(std::make_unique<DepthwiseConv2d<T>>(hidden_, spec.kernel, spec.stride, Padding::kSame));
  children_.push_back(std::make_unique<BatchNorm<T>>(hidden_));
  children_.push_back(std::make_unique<ActivationLayer<T>>(spec.act));
  if (spec.se) children_.push_back(std::make_unique<SeBlock<T>>(hidden_, se_ratio));
  children_.push_back(std::make_unique<Conv2d<T>>(hidden_, spec.out_channels, 1, 1, Padding::kSame));
  children_.push_back(std::make_unique<BatchNorm<T>>(spec.out_channels));
}

template <typename T>
std::string InvertedResidual<T>::describe() const {
  return fmt::format("inverted_residual {}->{} k={} s={} x{} {}{}{}", in_, spec_.out_channels, spec_.kernel,
                     spec_.stride, spec_.expansion, activation_name(spec_.act), spec_.se ? " se" : "",
                     residual_ ? " residual" : "");
}

template <typename T>
Shape InvertedResidual<T>::output_shape(const Shape& in) const {
  Shape s = in;
  for (const auto& child : children_) s = child->output_shape(s);
  return s;
}

template <typename T>
Tensor4<T> InvertedResidual<T>::forward(const Tensor4<T>& x, Mode mode) {
  Tensor4<T> h = x;
  for (auto& child : children_) h = child->forward(h, mode);
  if (residual_) {
    for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] += x.data()[i];
  }
  return h;
}

template <typename T>
Tensor4<T> InvertedResidual<T>::backward(const Tensor4<T>& g) {
  Tensor4<T> d = g;
  for (auto it = children_.rbegin(); it != children_.rend(); ++it) d = (*it)->backward(d);
  if (residual_) {
    for (std::size_t i = 0; i < d.size(); ++i) d.data()[i] += g.data()[i];
  }
  return d;
}

template <typename T>
std::vector<ParamView<T>> InvertedResidual<T>::params() {
  std::vector<ParamView<T>> out;
  for (std::size_t i = 0; i < children_.size(); ++i) {
    for (auto& p : children_[i]->params()) {
      p.name = fmt::format("{}.{}", i, p.name);
      out.push_back(std::move(p));
    }
  }
  return out;
}

template <typename T>
std::vector<std::span<T>> InvertedResidual<T>::state() {
  std::vector<std::span<T>> out;
  for (auto& child : children_) {
    for (auto s : child->state()) out.push_back(s);
  }
  return out;
}

template <typename T>
void InvertedResidual<T>::init(std::mt19937_64& rng) {
  for (auto& child : children_) child->init(rng);
}

template <typename T>
void InvertedResidual<T>::set_trainable(bool on) {
  this->trainable_ = on;
  for (auto& child : children_) child->set_trainable(on);
}

template class SeBlock<float>;
template class SeBlock<double>;
template class InvertedResidual<float>;
template class InvertedResidual<double>;

}  // namespace hypnospec::nn
