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

#ifndef HYPNOSPEC_IMAGE_HPP_
#define HYPNOSPEC_IMAGE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace hypnospec {

// 8-bit RGB, row-major, 3 bytes per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3) {}

  std::uint8_t* pixel(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* pixel(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Bilinear interpolation with half-pixel centres, each channel independent,
// rounded to nearest. Throws Error{kInvalidTarget} for zero targets.
RgbImage resize_bilinear(const RgbImage& img, int width, int height);

// 256-entry dark-blue -> green -> yellow perceptual ramp (viridis).
const std::array<std::array<std::uint8_t, 3>, 256>& colormap();

// Maps v in [0,1] to a colormap entry (0 -> first, 1 -> last).
std::array<std::uint8_t, 3> colormap_lookup(double v);

void write_png(const std::filesystem::path& path, const RgbImage& img);
RgbImage read_png(const std::filesystem::path& path);

}  // namespace hypnospec

#endif  // HYPNOSPEC_IMAGE_HPP_
