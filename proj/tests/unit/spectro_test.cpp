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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hypnospec/error.hpp"
#include "hypnospec/image.hpp"
#include "hypnospec/spectro.hpp"
#include "oracles.hpp"

namespace hypnospec {
namespace {

using spectro::RenderConfig;
using spectro::SpectrogramConfig;
using spectro::SpectrogramMatrix;

std::vector<double> random_signal(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> x(n);
  testing::fill_normal(x, rng, 30.0);
  return x;
}

double max_rel_vs_oracle(std::span<const double> x, const SpectrogramConfig& cfg) {
  const SpectrogramMatrix s = spectro::stft_spectrogram(x, cfg);
  const auto o = testing::oracle_psd(x, cfg.fs, cfg.nperseg, cfg.noverlap, cfg.nfft, cfg.tukey_alpha,
                                     cfg.detrend == spectro::Detrend::kConstant);
  double peak = 0.0;
  for (const auto& row : o) {
    for (double v : row) peak = std::max(peak, v);
  }
  double worst = 0.0;
  for (std::size_t f = 0; f < s.n_freqs(); ++f) {
    for (std::size_t t = 0; t < s.n_times(); ++t) {
      // Bins sitting at the numerical noise floor are compared against the
      // matrix peak rather than their own vanishing magnitude.
      worst = std::max(worst, testing::rel_err(s.at(f, t), o[f][t], peak * 1e-12));
    }
  }
  return worst;
}

TEST(Tukey, MatchesPiecewiseDefinitionAndReference) {
  const auto w = spectro::tukey_window(30, 0.25);
  const auto o = testing::oracle_tukey(30, 0.25);
  ASSERT_EQ(w.size(), 30u);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], o[i], 1e-15);
  // Tabulated periodic Tukey(30, 0.25) leading samples.
  const double ref[] = {0.0, 0.16543469682057088, 0.5522642316338268, 0.9045084971874737, 1.0};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], ref[i], 1e-15);
}

TEST(Stft, DefaultEpochShape) {
  const std::vector<double> x(3000, 0.0);
  const SpectrogramMatrix s = spectro::stft_spectrogram(x);
  EXPECT_EQ(s.n_freqs(), 513u);
  EXPECT_EQ(s.n_times(), 213u);
  EXPECT_NEAR(s.times.front(), 0.15, 1e-12);
  EXPECT_NEAR(s.times.back(), 29.83, 1e-12);
  EXPECT_NEAR(s.freqs[1], 100.0 / 1024.0, 1e-15);
}

TEST(Stft, ZeroInputZeroPower) {
  const std::vector<double> x(3000, 0.0);
  const SpectrogramMatrix s = spectro::stft_spectrogram(x);
  EXPECT_TRUE(std::all_of(s.power.begin(), s.power.end(), [](double v) { return v == 0.0; }));
}

TEST(Stft, MatchesTabulatedReferenceValues) {
  std::vector<double> x(3000);
  for (int i = 0; i < 3000; ++i) x[i] = std::sin(0.37 * i) + 0.01 * i + 0.5 * std::cos(0.05 * i * i / 3000.0);
  const SpectrogramMatrix s = spectro::stft_spectrogram(x);
  struct Ref {
    std::size_t f, t;
    double v;
  };
  const Ref refs[] = {{0, 0, 0.0004117256525221302},    {1, 5, 0.00021771732408752407},
                      {102, 100, 0.00010564036353089136}, {300, 212, 2.8177481174875116e-05},
                      {512, 7, 1.5433770602259054e-08},  {60, 33, 0.12964392021013266}};
  for (const auto& r : refs) EXPECT_LT(testing::rel_err(s.at(r.f, r.t), r.v, 1e-15), 1e-9) << r.f << "," << r.t;
}

TEST(Stft, AgreesWithDirectDftOnRandomSignals) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_signal(3000, rng);
    EXPECT_LT(max_rel_vs_oracle(x, {}), 1e-9);
  }
}

TEST(Stft, AgreesWithDirectDftAcrossConfigs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    SpectrogramConfig cfg;
    cfg.nperseg = std::uniform_int_distribution<int>(4, 64)(rng);
    cfg.noverlap = std::uniform_int_distribution<int>(0, cfg.nperseg - 1)(rng);
    cfg.nfft = cfg.nperseg + std::uniform_int_distribution<int>(0, 200)(rng);
    cfg.fs = 50.0 + trial;
    cfg.detrend = trial % 2 ? spectro::Detrend::kNone : spectro::Detrend::kConstant;
    const auto x = random_signal(std::uniform_int_distribution<std::size_t>(cfg.nperseg, 700)(rng), rng);
    EXPECT_LT(max_rel_vs_oracle(x, cfg), 1e-9) << "nperseg=" << cfg.nperseg << " nfft=" << cfg.nfft;
  }
}

TEST(Stft, ShapeLawOverRandomConfigs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    SpectrogramConfig cfg;
    cfg.nperseg = std::uniform_int_distribution<int>(2, 128)(rng);
    cfg.noverlap = std::uniform_int_distribution<int>(0, cfg.nperseg - 1)(rng);
    cfg.nfft = cfg.nperseg + std::uniform_int_distribution<int>(0, 1024)(rng);
    const std::size_t len = std::uniform_int_distribution<std::size_t>(cfg.nperseg, 4000)(rng);
    const std::vector<double> x(len, 1.0);
    const auto s = spectro::stft_spectrogram(x, cfg);
    ASSERT_EQ(s.n_freqs(), static_cast<std::size_t>(cfg.nfft / 2 + 1));
    ASSERT_EQ(s.n_times(), (len - cfg.noverlap) / static_cast<std::size_t>(cfg.nperseg - cfg.noverlap));
    ASSERT_TRUE(std::is_sorted(s.times.begin(), s.times.end()));
    ASSERT_TRUE(std::all_of(s.power.begin(), s.power.end(), [](double v) { return v >= 0.0; }));
  }
}

TEST(Stft, TenHertzSinePeaksAtNearestBin) {
  std::vector<double> x(3000);
  for (int i = 0; i < 3000; ++i) x[i] = std::sin(2.0 * std::numbers::pi * 10.0 * i / 100.0);
  const auto s = spectro::stft_spectrogram(x);
  std::vector<double> mean(s.n_freqs(), 0.0);
  for (std::size_t f = 0; f < s.n_freqs(); ++f) {
    for (std::size_t t = 0; t < s.n_times(); ++t) mean[f] += s.at(f, t);
  }
  const auto peak = std::max_element(mean.begin(), mean.end()) - mean.begin();
  EXPECT_TRUE(peak == 102 || peak == 103) << peak;
}

TEST(Stft, PsdMassApproximatesVariance) {
  for (double hz : {3.0, 10.0, 21.5}) {
    std::vector<double> x(3000);
    for (int i = 0; i < 3000; ++i) x[i] = 2.0 * std::sin(2.0 * std::numbers::pi * hz * i / 100.0);
    const auto s = spectro::stft_spectrogram(x);
    const double df = s.freqs[1];
    double mass = 0.0;
    for (std::size_t t = 0; t < s.n_times(); ++t) {
      for (std::size_t f = 0; f < s.n_freqs(); ++f) mass += s.at(f, t) * df;
    }
    mass /= static_cast<double>(s.n_times());
    EXPECT_NEAR(mass, 2.0, 0.1) << hz << " Hz";  // variance of a 2-amplitude sine
  }
}

TEST(Stft, RejectsBadInput) {
  const std::vector<double> tiny(10, 0.0);
  try {
    spectro::stft_spectrogram(tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSignalTooShort);
  }
  SpectrogramConfig bad;
  bad.noverlap = 30;
  try {
    spectro::stft_spectrogram(std::vector<double>(3000, 0.0), bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidConfig);
  }
  bad = {};
  bad.nfft = 16;
  EXPECT_THROW(bad.validate(), Error);
  bad = {};
  bad.fs = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

SpectrogramMatrix matrix(std::size_t nf, std::size_t nt, std::vector<double> power) {
  SpectrogramMatrix m;
  m.freqs.resize(nf);
  m.times.resize(nt);
  for (std::size_t i = 0; i < nf; ++i) m.freqs[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < nt; ++i) m.times[i] = static_cast<double>(i);
  m.power = std::move(power);
  return m;
}

TEST(Render, ConstantPowerIsDegenerateAndUniform) {
  const auto r = spectro::render_image(matrix(4, 5, std::vector<double>(20, 3.0)));
  EXPECT_TRUE(r.degenerate_range);
  const auto* first = r.image.pixel(0, 0);
  for (int y = 0; y < r.image.height; ++y) {
    for (int x = 0; x < r.image.width; ++x) {
      ASSERT_TRUE(std::equal(first, first + 3, r.image.pixel(x, y)));
    }
  }
}

TEST(Render, CornersHitColormapEndpoints) {
  RenderConfig cfg;
  cfg.resize = false;
  cfg.log_power = false;
  // power[f][t]: f0 = {0, 1}, f1 = {1, 0}; the top image row is f1.
  const auto r = spectro::render_image(matrix(2, 2, {0, 1, 1, 0}), cfg);
  ASSERT_EQ(r.image.width, 2);
  ASSERT_EQ(r.image.height, 2);
  EXPECT_FALSE(r.degenerate_range);
  const auto lo = colormap()[0];
  const auto hi = colormap()[255];
  EXPECT_TRUE(std::equal(hi.begin(), hi.end(), r.image.pixel(0, 0)));
  EXPECT_TRUE(std::equal(lo.begin(), lo.end(), r.image.pixel(1, 0)));
  EXPECT_TRUE(std::equal(lo.begin(), lo.end(), r.image.pixel(0, 1)));
  EXPECT_TRUE(std::equal(hi.begin(), hi.end(), r.image.pixel(1, 1)));
}

TEST(Render, DefaultEpochRendersTo224Square) {
  std::mt19937_64 rng(3);
  const auto x = random_signal(3000, rng);
  const auto r = spectro::render_image(spectro::stft_spectrogram(x));
  EXPECT_EQ(r.image.width, 224);
  EXPECT_EQ(r.image.height, 224);
  EXPECT_EQ(r.image.pixels.size(), 224u * 224u * 3u);
}

TEST(Render, LinearScaleInvariance) {
  std::mt19937_64 rng(8);
  RenderConfig cfg;
  cfg.log_power = false;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(30 * 17);
    for (double& v : p) v = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
    auto scaled = p;
    const double c = std::ldexp(1.0, std::uniform_int_distribution<int>(-20, 20)(rng));
    for (double& v : scaled) v *= c;
    EXPECT_EQ(spectro::render_image(matrix(30, 17, p), cfg).image,
              spectro::render_image(matrix(30, 17, scaled), cfg).image);
  }
}

TEST(Colormap, DarkBlueToYellow) {
  const auto& cm = colormap();
  EXPECT_GT(cm[0][2], cm[0][0]);    // blue dominates at the low end
  EXPECT_GT(cm[255][0], cm[255][2]);  // red+green (yellow) at the high end
  EXPECT_GT(cm[255][1], cm[255][2]);
  EXPECT_EQ(colormap_lookup(0.0), cm[0]);
  EXPECT_EQ(colormap_lookup(1.0), cm[255]);
  EXPECT_EQ(colormap_lookup(2.0), cm[255]);
}

TEST(Resize, IdentityDimensionsAreByteIdentical) {
  std::mt19937_64 rng(1);
  RgbImage img(7, 5);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
  EXPECT_EQ(resize_bilinear(img, 7, 5), img);
}

TEST(Resize, TwoPixelRampInterpolatesMonotonically) {
  RgbImage img(2, 1);
  std::fill(img.pixel(1, 0), img.pixel(1, 0) + 3, 255);
  const RgbImage out = resize_bilinear(img, 4, 1);
  // Half-pixel centres: x_src = (x + 0.5) / 2 - 0.5 -> -0.25, 0.25, 0.75, 1.25.
  const int expect[] = {0, 64, 191, 255};
  for (int x = 0; x < 4; ++x) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(out.pixel(x, 0)[c], expect[x]);
  }
}

TEST(Resize, UniformStaysUniform) {
  RgbImage img(9, 4);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = 12;
    img.pixels[i + 1] = 200;
    img.pixels[i + 2] = 77;
  }
  for (auto [w, h] : {std::pair{1, 1}, {3, 17}, {224, 224}, {5, 2}}) {
    const RgbImage out = resize_bilinear(img, w, h);
    for (std::size_t i = 0; i < out.pixels.size(); i += 3) {
      ASSERT_EQ(out.pixels[i], 12);
      ASSERT_EQ(out.pixels[i + 1], 200);
      ASSERT_EQ(out.pixels[i + 2], 77);
    }
  }
}

TEST(Resize, ZeroTargetRejected) {
  RgbImage img(2, 2);
  try {
    resize_bilinear(img, 0, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidTarget);
  }
}

TEST(Png, RoundTrip) {
  testing::TempDir dir;
  std::mt19937_64 rng(4);
  RgbImage img(13, 9);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
  write_png(dir / "x.png", img);
  EXPECT_EQ(read_png(dir / "x.png"), img);
}

}  // namespace
}  // namespace hypnospec
