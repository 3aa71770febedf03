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

#ifndef HYPNOSPEC_SPECTRO_HPP_
#define HYPNOSPEC_SPECTRO_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "hypnospec/image.hpp"

namespace hypnospec::spectro {

enum class Detrend { kConstant, kNone };

struct SpectrogramConfig {
  double fs = 100.0;
  int nperseg = 30;
  int noverlap = 16;
  int nfft = 1024;
  double tukey_alpha = 0.25;
  Detrend detrend = Detrend::kConstant;

  int hop() const { return nperseg - noverlap; }
  // Throws Error{kInvalidConfig}.
  void validate() const;
};

// Power spectral density on a frequency x time grid, stored frequency-major:
// power[f * n_times() + t].
struct SpectrogramMatrix {
  std::vector<double> freqs;
  std::vector<double> times;
  std::vector<double> power;

  std::size_t n_freqs() const { return freqs.size(); }
  std::size_t n_times() const { return times.size(); }
  double at(std::size_t f, std::size_t t) const { return power[f * times.size() + t]; }
  double& at(std::size_t f, std::size_t t) { return power[f * times.size() + t]; }
};

// Periodic Tukey taper (the FFT-bin convention: a symmetric window of
// length n + 1 with its last sample dropped).
std::vector<double> tukey_window(int n, double alpha);

// Number of segments for a signal of `length` samples.
std::size_t segment_count(std::size_t length, const SpectrogramConfig& cfg);

// One-sided, density-scaled STFT power. Throws Error{kSignalTooShort,
// kInvalidConfig}.
SpectrogramMatrix stft_spectrogram(std::span<const double> samples, const SpectrogramConfig& cfg = {});

struct RenderConfig {
  bool log_power = true;
  double log_floor = 1e-12;
  int out_width = 224;
  int out_height = 224;
  bool resize = true;  // false keeps the native (n_times x n_freqs) grid
};

struct RenderResult {
  RgbImage image;
  bool degenerate_range = false;  // max == min; image is uniform mid-colour
};

// Matrix -> colour image: optional dB scaling, per-image min-max
// normalization, colormap lookup, vertical flip (low frequencies at the
// bottom), bilinear resize.
RenderResult render_image(const SpectrogramMatrix& spec, const RenderConfig& cfg = {});

}  // namespace hypnospec::spectro

#endif  // HYPNOSPEC_SPECTRO_HPP_
