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

#include "hypnospec/spectro.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

#include <fftw3.h>
#include <fmt/format.h>

#include "hypnospec/error.hpp"

namespace hypnospec::spectro {

namespace {

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T, FftwDeleter>;

// FFTW planning is not thread-safe; execution with new-array calls is.
// Plans are created once per transform length and kept for the process.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan r2c(int n) {
    std::lock_guard lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    FftwBuffer<double> in(fftw_alloc_real(static_cast<std::size_t>(n)));
    FftwBuffer<fftw_complex> out(fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1)));
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
    plans_.emplace(n, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<int, fftw_plan> plans_;
};

std::vector<double> symmetric_tukey(int m, double alpha) {
  std::vector<double> w(static_cast<std::size_t>(m), 1.0);
  if (m == 1 || alpha <= 0.0) return w;
  const double denom = static_cast<double>(m - 1);
  if (alpha >= 1.0) {
    for (int i = 0; i < m; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / denom);
    return w;
  }
  const int width = static_cast<int>(std::floor(alpha * denom / 2.0));
  for (int i = 0; i <= width; ++i) {
    w[i] = 0.5 * (1.0 + std::cos(std::numbers::pi * (-1.0 + 2.0 * i / alpha / denom)));
  }
  for (int i = m - width - 1; i < m; ++i) {
    w[i] = 0.5 * (1.0 + std::cos(std::numbers::pi * (-2.0 / alpha + 1.0 + 2.0 * i / alpha / denom)));
  }
  return w;
}

}  // namespace

void SpectrogramConfig::validate() const {
  if (!(fs > 0.0)) throw Error(Errc::kInvalidConfig, "fs must be positive");
  if (nperseg < 1) throw Error(Errc::kInvalidConfig, "nperseg must be positive");
  if (noverlap < 0 || noverlap >= nperseg) {
    throw Error(Errc::kInvalidConfig, fmt::format("noverlap {} must lie in [0, nperseg={})", noverlap, nperseg));
  }
  if (nfft < nperseg) {
    throw Error(Errc::kInvalidConfig, fmt::format("nfft {} is smaller than nperseg {}", nfft, nperseg));
  }
  if (tukey_alpha < 0.0 || tukey_alpha > 1.0) throw Error(Errc::kInvalidConfig, "tukey alpha outside [0,1]");
}

std::vector<double> tukey_window(int n, double alpha) {
  auto w = symmetric_tukey(n + 1, alpha);
  w.pop_back();
  return w;
}

std::size_t segment_count(std::size_t length, const SpectrogramConfig& cfg) {
  if (length < static_cast<std::size_t>(cfg.nperseg)) return 0;
  return (length - static_cast<std::size_t>(cfg.noverlap)) / static_cast<std::size_t>(cfg.hop());
}

SpectrogramMatrix stft_spectrogram(std::span<const double> samples, const SpectrogramConfig& cfg) {
  cfg.validate();
  if (samples.size() < static_cast<std::size_t>(cfg.nperseg)) {
    throw Error(Errc::kSignalTooShort,
                fmt::format("{} samples is shorter than nperseg {}", samples.size(), cfg.nperseg));
  }
  const auto nperseg = static_cast<std::size_t>(cfg.nperseg);
  const auto nfft = static_cast<std::size_t>(cfg.nfft);
  const auto hop = static_cast<std::size_t>(cfg.hop());
  const std::size_t n_bins = nfft / 2 + 1;
  const std::size_t n_seg = segment_count(samples.size(), cfg);

  const auto window = tukey_window(cfg.nperseg, cfg.tukey_alpha);
  const double window_power = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);
  const double scale = 1.0 / (cfg.fs * window_power);

  SpectrogramMatrix out;
  out.freqs.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) out.freqs[k] = static_cast<double>(k) * cfg.fs / cfg.nfft;
  out.times.resize(n_seg);
  for (std::size_t j = 0; j < n_seg; ++j) {
    out.times[j] = (static_cast<double>(j * hop) + static_cast<double>(nperseg) / 2.0) / cfg.fs;
  }
  out.power.assign(n_bins * n_seg, 0.0);

  fftw_plan plan = PlanCache::instance().r2c(cfg.nfft);
  FftwBuffer<double> in(fftw_alloc_real(nfft));
  FftwBuffer<fftw_complex> spectrum(fftw_alloc_complex(n_bins));

  for (std::size_t j = 0; j < n_seg; ++j) {
    const auto seg = samples.subspan(j * hop, nperseg);
    double mean = 0.0;
    if (cfg.detrend == Detrend::kConstant) {
      mean = std::accumulate(seg.begin(), seg.end(), 0.0) / static_cast<double>(nperseg);
    }
    for (std::size_t i = 0; i < nperseg; ++i) in.get()[i] = (seg[i] - mean) * window[i];
    std::fill(in.get() + nperseg, in.get() + nfft, 0.0);
    fftw_execute_dft_r2c(plan, in.get(), spectrum.get());

    for (std::size_t k = 0; k < n_bins; ++k) {
      const double re = spectrum.get()[k][0];
      const double im = spectrum.get()[k][1];
      double p = (re * re + im * im) * scale;
      // One-sided: every bin except DC (and Nyquist for even nfft) folds in
      // its negative-frequency twin.
      const bool nyquist = nfft % 2 == 0 && k == n_bins - 1;
      if (k != 0 && !nyquist) p *= 2.0;
      out.at(k, j) = p;
    }
  }
  return out;
}

RenderResult render_image(const SpectrogramMatrix& spec, const RenderConfig& cfg) {
  if (spec.power.empty() || spec.n_freqs() == 0 || spec.n_times() == 0) {
    throw Error(Errc::kInvalidConfig, "cannot render an empty spectrogram");
  }
  if (cfg.resize && (cfg.out_width <= 0 || cfg.out_height <= 0)) {
    throw Error(Errc::kInvalidTarget, "render target dimensions must be positive");
  }

  std::vector<double> values(spec.power.size());
  if (cfg.log_power) {
    std::transform(spec.power.begin(), spec.power.end(), values.begin(),
                   [&](double p) { return 10.0 * std::log10(p + cfg.log_floor); });
  } else {
    values = spec.power;
  }
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  RenderResult result;
  result.degenerate_range = !(hi > lo);

  const int w = static_cast<int>(spec.n_times());
  const int h = static_cast<int>(spec.n_freqs());
  RgbImage native(w, h);
  for (int y = 0; y < h; ++y) {
    const auto f = static_cast<std::size_t>(h - 1 - y);  // row 0 = highest frequency
    for (int x = 0; x < w; ++x) {
      const double v = result.degenerate_range ? 0.5 : (values[f * spec.n_times() + static_cast<std::size_t>(x)] - lo) / (hi - lo);
      const auto rgb = colormap_lookup(v);
      std::copy(rgb.begin(), rgb.end(), native.pixel(x, y));
    }
  }
  result.image = cfg.resize ? resize_bilinear(native, cfg.out_width, cfg.out_height) : std::move(native);
  return result;
}

}  // namespace hypnospec::spectro
