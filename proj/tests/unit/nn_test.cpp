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

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "hypnospec/error.hpp"
#include "hypnospec/nn/layers.hpp"
#include "hypnospec/nn/micronet.hpp"
#include "oracles.hpp"

namespace hypnospec {
namespace {

using namespace nn;  // NOLINT: test-local brevity
using T4 = Tensor4<double>;

constexpr int kCases = 20;
constexpr double kTol = 1e-4;

T4 random_tensor(Shape s, std::mt19937_64& rng, double sd = 1.0) {
  T4 t(s);
  testing::fill_normal(t.values(), rng, sd);
  return t;
}

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void randomize_params(Layer<double>& layer, std::mt19937_64& rng) {
  for (auto& p : layer.params()) testing::fill_normal(p.value, rng, 0.5);
}

void expect_gradients(Layer<double>& layer, const T4& x, std::mt19937_64& rng, const std::string& what) {
  const auto g = testing::check_layer_gradients(layer, x, rng, 1e-5, 24, kTol);
  EXPECT_GT(g.checked, 0u);
  EXPECT_LE(g.kinks * 50, g.checked + g.kinks) << what << ": too many probes landed on kinks";
  EXPECT_LT(g.max_rel, kTol) << what << " " << layer.describe() << " in " << x.shape().str();
}

TEST(GradCheck, Conv2d) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < kCases; ++i) {
    const int cin = pick(rng, 1, 4);
    const int cout = pick(rng, 1, 5);
    const int k = pick(rng, 1, 3);
    const int stride = pick(rng, 1, 2);
    const Padding pad = i % 2 ? Padding::kSame : Padding::kValid;
    Conv2d<double> conv(cin, cout, k, stride, pad, i % 3 == 0);
    conv.init(rng);
    const T4 x = random_tensor({pick(rng, 1, 3), pick(rng, k, 7), pick(rng, k, 7), cin}, rng);
    expect_gradients(conv, x, rng, "case " + std::to_string(i));
  }
}

TEST(GradCheck, DepthwiseConv) {
  std::mt19937_64 rng(102);
  for (int i = 0; i < kCases; ++i) {
    const int c = pick(rng, 1, 5);
    const int k = 2 * pick(rng, 0, 2) + 1;
    DepthwiseConv2d<double> dw(c, k, pick(rng, 1, 2), i % 2 ? Padding::kSame : Padding::kValid);
    dw.init(rng);
    const T4 x = random_tensor({pick(rng, 1, 3), pick(rng, k, 8), pick(rng, k, 8), c}, rng);
    expect_gradients(dw, x, rng, "case " + std::to_string(i));
  }
}

TEST(GradCheck, BatchNormTrainMode) {
  std::mt19937_64 rng(103);
  for (int i = 0; i < kCases; ++i) {
    const int c = pick(rng, 1, 6);
    BatchNorm<double> bn(c);
    bn.init(rng);
    randomize_params(bn, rng);
    const T4 x = random_tensor({pick(rng, 2, 4), pick(rng, 1, 4), pick(rng, 1, 4), c}, rng, 2.0);
    expect_gradients(bn, x, rng, "case " + std::to_string(i));
  }
}

// Samples away from the activation kinks so central differences never
// straddle one.
T4 kink_free(Shape s, std::mt19937_64& rng) {
  T4 t(s);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (double& v : t.values()) {
    do {
      v = u(rng);
    } while (std::abs(v) < 1e-3 || std::abs(v - 3) < 1e-3 || std::abs(v + 3) < 1e-3 || std::abs(v - 6) < 1e-3);
  }
  return t;
}

TEST(GradCheck, Activations) {
  std::mt19937_64 rng(104);
  for (auto act : {Activation::kLinear, Activation::kRelu, Activation::kRelu6, Activation::kHSwish,
                   Activation::kHardSigmoid}) {
    for (int i = 0; i < kCases; ++i) {
      ActivationLayer<double> a(act);
      expect_gradients(a, kink_free({pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 4), pick(rng, 1, 4)}, rng), rng,
                       "case " + std::to_string(i));
    }
  }
}

TEST(GradCheck, SqueezeExcite) {
  std::mt19937_64 rng(105);
  for (int i = 0; i < kCases; ++i) {
    const int c = pick(rng, 1, 12);
    SeBlock<double> se(c, pick(rng, 1, 4));
    se.init(rng);
    randomize_params(se, rng);
    const T4 x = random_tensor({pick(rng, 1, 3), pick(rng, 1, 4), pick(rng, 1, 4), c}, rng);
    expect_gradients(se, x, rng, "case " + std::to_string(i));
  }
}

TEST(GradCheck, InvertedResidual) {
  std::mt19937_64 rng(106);
  for (int i = 0; i < kCases; ++i) {
    const int cin = pick(rng, 1, 6);
    InvertedResidualSpec spec;
    spec.stride = pick(rng, 1, 2);
    spec.out_channels = i % 2 ? cin : pick(rng, 1, 6);
    spec.kernel = i % 3 == 0 ? 5 : 3;
    spec.expansion = pick(rng, 1, 3);
    spec.se = i % 2 == 0;
    spec.act = i % 2 ? Activation::kHSwish : Activation::kRelu;
    InvertedResidual<double> block(cin, spec);
    block.init(rng);
    randomize_params(block, rng);
    const T4 x = random_tensor({pick(rng, 2, 3), pick(rng, 2, 5), pick(rng, 2, 5), cin}, rng);
    expect_gradients(block, x, rng, "case " + std::to_string(i));
  }
}

TEST(GradCheck, GlobalAvgPool) {
  std::mt19937_64 rng(107);
  for (int i = 0; i < kCases; ++i) {
    GlobalAvgPool<double> gap;
    expect_gradients(gap, random_tensor({pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 5), pick(rng, 1, 5)}, rng),
                     rng, "case " + std::to_string(i));
  }
}

TEST(GradCheck, Dense) {
  std::mt19937_64 rng(108);
  for (int i = 0; i < kCases; ++i) {
    const Shape s{pick(rng, 1, 4), pick(rng, 1, 2), pick(rng, 1, 2), pick(rng, 1, 6)};
    Dense<double> d(s.h * s.w * s.c, pick(rng, 1, 7), i % 2 ? Activation::kRelu : Activation::kLinear);
    d.init(rng);
    randomize_params(d, rng);
    expect_gradients(d, random_tensor(s, rng), rng, "case " + std::to_string(i));
  }
}

TEST(GradCheck, Softmax) {
  std::mt19937_64 rng(109);
  for (int i = 0; i < kCases; ++i) {
    Softmax<double> sm;
    expect_gradients(sm, random_tensor({pick(rng, 1, 4), 1, 1, pick(rng, 2, 7)}, rng, 2.0), rng,
                     "case " + std::to_string(i));
  }
}

TEST(GradCheck, WholeNetworkInDoublePrecision) {
  std::mt19937_64 rng(110);
  MicroNetConfig cfg;
  cfg.height = 16;
  cfg.width = 16;
  MicroNet<double> net(cfg, 3);
  const T4 x = random_tensor(net.input_shape(2), rng);
  T4 r(Shape{2, 1, 1, 5});
  testing::fill_normal(r.values(), rng);
  net.forward(x, Mode::kTrain);
  const T4 dx = net.backward(r);
  const double h = 1e-5;
  T4 xp = x;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); i += 37) {
    xp.data()[i] = x.data()[i] + h;
    const double up = testing::weighted_sum(net.forward(xp, Mode::kTrain), r);
    xp.data()[i] = x.data()[i] - h;
    const double down = testing::weighted_sum(net.forward(xp, Mode::kTrain), r);
    xp.data()[i] = x.data()[i];
    worst = std::max(worst, testing::rel_err(dx.data()[i], (up - down) / (2 * h)));
  }
  EXPECT_LT(worst, kTol);
}

TEST(Conv2d, TwoByTwoOnesKernelSumsTheInput) {
  Conv2d<double> conv(1, 1, 2, 1, Padding::kValid);
  std::fill(conv.weights().begin(), conv.weights().end(), 1.0);
  const T4 y = conv.forward(T4({1, 2, 2, 1}, {1, 2, 3, 4}), Mode::kInfer);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(y.data()[0], 10.0);
}

TEST(Conv2d, IdentityPointwiseKernel) {
  std::mt19937_64 rng(1);
  Conv2d<double> conv(3, 3, 1, 1, Padding::kSame);
  std::fill(conv.weights().begin(), conv.weights().end(), 0.0);
  for (int c = 0; c < 3; ++c) conv.weights()[c * 3 + c] = 1.0;
  const T4 x = random_tensor({2, 5, 4, 3}, rng);
  EXPECT_EQ(conv.forward(x, Mode::kInfer).values().size(), x.size());
  const T4 y = conv.forward(x, Mode::kInfer);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], x.data()[i]);
}

TEST(Conv2d, ZeroInputZeroGradient) {
  std::mt19937_64 rng(2);
  Conv2d<double> conv(2, 3, 3, 2, Padding::kSame);
  conv.init(rng);
  const T4 y = conv.forward(T4({1, 6, 6, 2}), Mode::kTrain);
  EXPECT_TRUE(std::all_of(y.values().begin(), y.values().end(), [](double v) { return v == 0.0; }));
  conv.backward(T4(y.shape()));
  for (auto& p : conv.params()) {
    EXPECT_TRUE(std::all_of(p.grad.begin(), p.grad.end(), [](double v) { return v == 0.0; }));
  }
}

TEST(Conv2d, OutputGeometry) {
  Conv2d<double> same(1, 1, 3, 2, Padding::kSame);
  Conv2d<double> valid(1, 1, 3, 2, Padding::kValid);
  EXPECT_EQ(same.output_shape({1, 7, 8, 1}), (Shape{1, 4, 4, 1}));
  EXPECT_EQ(valid.output_shape({1, 7, 8, 1}), (Shape{1, 3, 3, 1}));
}

TEST(Depthwise, ChannelIsolation) {
  std::mt19937_64 rng(3);
  DepthwiseConv2d<double> dw(2, 3, 1, Padding::kSame);
  dw.init(rng);
  for (int k = 0; k < 9; ++k) dw.weights()[k * 2 + 1] = 0.0;
  T4 x = random_tensor({1, 4, 4, 2}, rng);
  const T4 y0 = dw.forward(x, Mode::kInfer);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(y0.data()[i * 2 + 1], 0.0);
  x.at(0, 1, 1, 1) += 5.0;  // perturb channel 1 only
  const T4 y1 = dw.forward(x, Mode::kInfer);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(y1.data()[i * 2], y0.data()[i * 2]);
}

TEST(Depthwise, EqualsBlockDiagonalConv) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int stride = 1 + trial % 2;
    const Padding pad = trial % 3 ? Padding::kSame : Padding::kValid;
    DepthwiseConv2d<double> dw(2, 3, stride, pad);
    dw.init(rng);
    Conv2d<double> conv(2, 2, 3, stride, pad);
    std::fill(conv.weights().begin(), conv.weights().end(), 0.0);
    for (int k = 0; k < 9; ++k) {
      for (int c = 0; c < 2; ++c) conv.weights()[(k * 2 + c) * 2 + c] = dw.weights()[k * 2 + c];
    }
    const T4 x = random_tensor({1, 4, 4, 2}, rng);
    const T4 a = dw.forward(x, Mode::kInfer);
    const T4 b = conv.forward(x, Mode::kInfer);
    ASSERT_EQ(a.shape(), b.shape());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data()[i], b.data()[i], 1e-12);
  }
}

TEST(Depthwise, PointwiseIdentity) {
  std::mt19937_64 rng(5);
  DepthwiseConv2d<double> dw(3, 1, 1, Padding::kSame);
  std::fill(dw.weights().begin(), dw.weights().end(), 1.0);
  const T4 x = random_tensor({2, 3, 3, 3}, rng);
  const T4 y = dw.forward(x, Mode::kInfer);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], x.data()[i]);
}

TEST(Activation, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(activate(Activation::kHSwish, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(activate(Activation::kHSwish, -3.0), 0.0);
  EXPECT_DOUBLE_EQ(activate(Activation::kHSwish, 3.0), 3.0);
  EXPECT_NEAR(activate(Activation::kHSwish, 1.0), 4.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(activate(Activation::kHardSigmoid, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(activate(Activation::kRelu6, 9.0), 6.0);
  EXPECT_DOUBLE_EQ(activate(Activation::kRelu, -1.0), 0.0);
}

TEST(Activation, HSwishIsContinuous) {
  for (double knot : {-3.0, 3.0}) {
    EXPECT_NEAR(activate(Activation::kHSwish, knot - 1e-9), activate(Activation::kHSwish, knot + 1e-9), 1e-8);
  }
}

TEST(BatchNorm, StandardizedBatchIsAFixedPoint) {
  BatchNorm<double> bn(1);
  std::mt19937_64 rng(6);
  bn.init(rng);
  const T4 x({4, 1, 1, 1}, {-1.5, -0.5, 0.5, 1.5});  // mean 0, var 1.25
  T4 xs = x;
  for (double& v : xs.values()) v /= std::sqrt(1.25);
  const T4 y = bn.forward(xs, Mode::kTrain);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(y.data()[i], xs.data()[i], 1e-3);
}

TEST(BatchNorm, ZeroGammaGivesBeta) {
  std::mt19937_64 rng(7);
  BatchNorm<double> bn(3);
  bn.init(rng);
  std::fill(bn.gamma().begin(), bn.gamma().end(), 0.0);
  bn.beta() = {0.25, -1.0, 3.0};
  const T4 y = bn.forward(random_tensor({3, 2, 2, 3}, rng), Mode::kTrain);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], bn.beta()[i % 3]);
}

TEST(BatchNorm, TrainModeStandardizesEachChannel) {
  std::mt19937_64 rng(8);
  BatchNorm<double> bn(4, 0.99, 0.0);
  bn.init(rng);
  T4 x = random_tensor({8, 3, 3, 4}, rng, 5.0);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] += static_cast<double>(i % 4) * 10.0;
  const T4 y = bn.forward(x, Mode::kTrain);
  for (int c = 0; c < 4; ++c) {
    double m = 0.0;
    double v = 0.0;
    for (std::size_t i = c; i < y.size(); i += 4) m += y.data()[i];
    m /= 72.0;
    for (std::size_t i = c; i < y.size(); i += 4) v += (y.data()[i] - m) * (y.data()[i] - m);
    v /= 72.0;
    EXPECT_NEAR(m, 0.0, 1e-6);
    EXPECT_NEAR(v, 1.0, 1e-6);
  }
}

TEST(BatchNorm, RunningStatsUseMomentumAndDriveInference) {
  BatchNorm<double> bn(1);
  std::mt19937_64 rng(9);
  bn.init(rng);
  const T4 x({2, 1, 1, 1}, {1.0, 3.0});  // mean 2, population var 1
  bn.forward(x, Mode::kTrain);
  EXPECT_NEAR(bn.running_mean()[0], 0.01 * 2.0, 1e-15);
  const double var = bn.running_var()[0];
  EXPECT_TRUE(std::abs(var - (0.99 + 0.01 * 1.0)) < 1e-12 || std::abs(var - (0.99 + 0.01 * 2.0)) < 1e-12);
  const T4 y = bn.forward(T4({1, 1, 1, 1}, {5.0}), Mode::kInfer);
  EXPECT_NEAR(y.data()[0], (5.0 - bn.running_mean()[0]) / std::sqrt(var + 1e-3), 1e-12);
}

TEST(SqueezeExcite, ZeroExpandGivesHalfGate) {
  std::mt19937_64 rng(10);
  SeBlock<double> se(16);
  se.init(rng);
  std::fill(se.expand_weights().begin(), se.expand_weights().end(), 0.0);
  std::fill(se.expand_bias().begin(), se.expand_bias().end(), 0.0);
  const T4 x = random_tensor({2, 3, 3, 16}, rng);
  const T4 y = se.forward(x, Mode::kInfer);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], 0.5 * x.data()[i]);
}

TEST(SqueezeExcite, GateBoundsAndZeroInput) {
  std::mt19937_64 rng(11);
  SeBlock<double> se(24);
  se.init(rng);
  randomize_params(se, rng);
  for (auto& v : se.expand_weights()) v *= 20.0;
  const T4 x = random_tensor({3, 2, 2, 24}, rng, 4.0);
  const T4 y = se.forward(x, Mode::kInfer);
  for (double g : se.last_gate()) {
    EXPECT_GE(g, 0.0);
    EXPECT_LE(g, 1.0);
  }
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::abs(y.data()[i]), std::abs(x.data()[i]));
  const T4 z = se.forward(T4({1, 2, 2, 24}), Mode::kInfer);
  EXPECT_TRUE(std::all_of(z.values().begin(), z.values().end(), [](double v) { return v == 0.0; }));
}

TEST(SqueezeExcite, ReduceWidthRoundsUpToEight) {
  EXPECT_EQ(SeBlock<double>(72, 4).reduced(), 24);
  EXPECT_EQ(SeBlock<double>(120, 4).reduced(), 32);
  EXPECT_EQ(SeBlock<double>(8, 4).reduced(), 8);
}

TEST(InvertedResidual, ResidualRule) {
  EXPECT_TRUE(InvertedResidual<double>(8, {8, 3, 1, 2, false, Activation::kRelu}).has_residual());
  EXPECT_FALSE(InvertedResidual<double>(8, {8, 3, 2, 2, false, Activation::kRelu}).has_residual());
  EXPECT_FALSE(InvertedResidual<double>(8, {12, 3, 1, 2, false, Activation::kRelu}).has_residual());
  EXPECT_EQ(InvertedResidual<double>(8, {8, 3, 1, 4, false, Activation::kRelu}).internal_width(), 32);
}

TEST(InvertedResidual, ZeroBranchIsIdentity) {
  std::mt19937_64 rng(12);
  InvertedResidual<double> block(6, {6, 3, 1, 3, true, Activation::kHSwish});
  block.init(rng);
  for (auto& p : block.params()) std::fill(p.value.begin(), p.value.end(), 0.0);
  const T4 x = random_tensor({2, 4, 4, 6}, rng);
  const T4 y = block.forward(x, Mode::kTrain);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(y.data()[i], x.data()[i]);
}

TEST(GlobalAvgPool, Examples) {
  GlobalAvgPool<double> gap;
  EXPECT_DOUBLE_EQ(gap.forward(T4({1, 2, 2, 1}, {1, 2, 3, 4}), Mode::kInfer).data()[0], 2.5);
  EXPECT_DOUBLE_EQ(gap.forward(T4({1, 3, 5, 1}, 7.0), Mode::kInfer).data()[0], 7.0);
  gap.forward(T4({1, 2, 3, 1}), Mode::kTrain);
  const T4 g = gap.backward(T4({1, 1, 1, 1}, {6.0}));
  for (double v : g.values()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Softmax, UniformShiftAndNormalization) {
  Softmax<double> sm;
  const T4 u = sm.forward(T4({1, 1, 1, 5}, 0.3), Mode::kInfer);
  for (double v : u.values()) EXPECT_DOUBLE_EQ(v, 0.2);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const T4 x = random_tensor({3, 1, 1, 5}, rng, 10.0);
    T4 shifted = x;
    for (double& v : shifted.values()) v += 1234.5;
    const T4 a = sm.forward(x, Mode::kInfer);
    const T4 b = sm.forward(shifted, Mode::kInfer);
    for (int n = 0; n < 3; ++n) {
      double s = 0.0;
      for (int c = 0; c < 5; ++c) {
        EXPECT_GT(a.at(n, 0, 0, c), 0.0);
        EXPECT_NEAR(a.at(n, 0, 0, c), b.at(n, 0, 0, c), 1e-12);
        s += a.at(n, 0, 0, c);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
      const auto row = x.values().subspan(static_cast<std::size_t>(n) * 5, 5);
      const auto prow = a.values().subspan(static_cast<std::size_t>(n) * 5, 5);
      EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(),
                std::max_element(prow.begin(), prow.end()) - prow.begin());
    }
  }
}

TEST(Dense, IdentityWeights) {
  Dense<double> d(4, 4);
  std::fill(d.weights().begin(), d.weights().end(), 0.0);
  for (int i = 0; i < 4; ++i) d.weights()[i * 4 + i] = 1.0;
  const T4 x({2, 1, 1, 4}, {1, -2, 3, -4, 5, 6, 7, 8});
  const T4 y = d.forward(x, Mode::kInfer);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_DOUBLE_EQ(y.data()[i], x.data()[i]);
}

TEST(CountParams, DenseHeadAndFreezing) {
  Dense<double> d(224, 5);
  EXPECT_EQ(count_params(static_cast<Layer<double>&>(d), false), 1125u);
  d.set_trainable(false);
  EXPECT_EQ(count_params(static_cast<Layer<double>&>(d), true), 0u);
}

// Per-layer arithmetic for the default 64x64x3 network.
std::size_t hand_count_default_micronet() {
  const auto bn = [](std::size_t c) { return 2 * c; };
  const auto se = [](std::size_t c, std::size_t r) { return c * r + r + r * c + c; };
  const auto block = [&](std::size_t in, std::size_t out, std::size_t k, std::size_t e, std::size_t r) {
    const std::size_t h = in * e;
    std::size_t n = in * h + bn(h) + k * k * h + bn(h) + h * out + bn(out);
    if (r) n += se(h, r);
    return n;
  };
  const std::size_t stem = 3 * 3 * 3 * 16 + bn(16);
  const std::size_t b1 = block(16, 24, 3, 4, 0);
  const std::size_t b2 = block(24, 40, 5, 3, 24);   // ceil(72 / 4 / 8) * 8
  const std::size_t b3 = block(40, 40, 5, 3, 32);   // ceil(120 / 4 / 8) * 8
  const std::size_t head = (40 * 224 + 224) + (224 * 5 + 5);
  return stem + b1 + b2 + b3 + head;
}

TEST(MicroNet, ParameterCountMatchesHandCount) {
  MicroNet<float> net(MicroNetConfig{}, 1);
  EXPECT_EQ(hand_count_default_micronet(), 45533u);
  EXPECT_EQ(count_params(net, false), hand_count_default_micronet());
  EXPECT_EQ(count_params(net, true), count_params(net, false));
  for (std::size_t i = 0; i < net.num_layers(); ++i) net.layer(i).set_trainable(false);
  EXPECT_EQ(count_params(net, true), 0u);
}

TEST(MicroNet, ForwardShapeAndProbabilities) {
  MicroNet<float> net(MicroNetConfig{}, 2);
  std::mt19937_64 rng(3);
  Tensor4<float> x(net.input_shape(3));
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (float& v : x.values()) v = u(rng);
  const auto p = net.forward(x, Mode::kInfer);
  EXPECT_EQ(p.shape(), (Shape{3, 1, 1, 5}));
  for (int n = 0; n < 3; ++n) {
    float s = 0.0f;
    for (int c = 0; c < 5; ++c) s += p.at(n, 0, 0, c);
    EXPECT_NEAR(s, 1.0f, 1e-5f);
  }
  EXPECT_EQ(net.num_layers(), 10u);
  EXPECT_EQ(net.head_begin(), 6u);
}

TEST(MicroNet, ConfigInvariants) {
  MicroNetConfig cfg;
  cfg.classes = 4;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.head_width = 100;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(MicroNet, SameSeedSameWeights) {
  MicroNet<float> a(MicroNetConfig{}, 77);
  MicroNet<float> b(MicroNetConfig{}, 77);
  MicroNet<float> c(MicroNetConfig{}, 78);
  std::vector<std::size_t> all(a.num_layers());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(parameter_hash(a, all), parameter_hash(b, all));
  EXPECT_NE(parameter_hash(a, all), parameter_hash(c, all));
}

TEST(Checkpoint, RoundTripRestoresWeightsStateAndFlags) {
  testing::TempDir dir;
  MicroNet<float> a(MicroNetConfig{}, 5);
  std::mt19937_64 rng(6);
  Tensor4<float> x(a.input_shape(2));
  for (float& v : x.values()) v = std::uniform_real_distribution<float>(0, 1)(rng);
  a.forward(x, Mode::kTrain);  // moves the BN running statistics
  a.layer(0).set_trainable(false);
  save_checkpoint(a, dir / "m.egmw");

  MicroNet<float> b(MicroNetConfig{}, 9);
  load_checkpoint(b, dir / "m.egmw");
  std::vector<std::size_t> all(a.num_layers());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(parameter_hash(a, all), parameter_hash(b, all));
  EXPECT_FALSE(b.layer(0).trainable());
  const auto pa = a.forward(x, Mode::kInfer);
  const auto pb = b.forward(x, Mode::kInfer);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa.data()[i], pb.data()[i]);
}

TEST(Checkpoint, StructureMismatchRejected) {
  testing::TempDir dir;
  MicroNet<float> a(MicroNetConfig{}, 5);
  save_checkpoint(a, dir / "m.egmw");
  MicroNetConfig other;
  other.blocks.pop_back();
  MicroNet<float> b(other, 5);
  try {
    load_checkpoint(b, dir / "m.egmw");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kCheckpointFormat);
  }
}

}  // namespace
}  // namespace hypnospec
