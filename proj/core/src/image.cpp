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

#include "hypnospec/error.hpp"
#include "hypnospec/image.hpp"

namespace hypnospec {

namespace {

struct Tap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
};

// Source taps for each destination coordinate, half-pixel-centre convention.
std::vector<Tap> taps(int src, int dst) {
  std::vector<Tap> out(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    out[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, src - 1), s - lo};
  }
  return out;
}

}  // namespace

RgbImage resize_bilinear(const RgbImage& img, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(Errc::kInvalidTarget, "resize target dimensions must be positive");
  }
  if (img.width <= 0 || img.height <= 0) {
    throw Error(Errc::kInvalidTarget, "cannot resize an empty image");
  }
  if (width == img.width && height == img.height) return img;

  const auto xs = taps(img.width, width);
  const auto ys = taps(img.height, height);
  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const auto& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < width; ++x) {
      const auto& tx = xs[static_cast<std::size_t>(x)];
      const auto* p00 = img.pixel(tx.lo, ty.lo);
      const auto* p01 = img.pixel(tx.hi, ty.lo);
      const auto* p10 = img.pixel(tx.lo, ty.hi);
      const auto* p11 = img.pixel(tx.hi, ty.hi);
      auto* dst = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = p00[c] + (p01[c] - p00[c]) * tx.frac;
        const double bottom = p10[c] + (p11[c] - p10[c]) * tx.frac;
        const double v = top + (bottom - top) * ty.frac;
        dst[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace hypnospec
