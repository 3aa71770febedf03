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

#ifndef HYPNOSPEC_CACHE_HPP_
#define HYPNOSPEC_CACHE_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hypnospec/edf.hpp"
#include "hypnospec/image.hpp"

// Spectrogram image cache.
//
// File layout, little-endian throughout:
//   "EGMC" u16 version
//   repeated records:
//     u16 subject-id byte length, subject-id (UTF-8)
//     u8 night, u32 epoch_index, u8 label
//     u16 width, u16 height, width*height*3 RGB bytes
//     u32 CRC32 over every preceding byte of the record
namespace hypnospec::cache {

inline constexpr char kMagic[4] = {'E', 'G', 'M', 'C'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kFileHeaderBytes = 6;

enum class Tier { kDisk, kMemory };

struct CacheKey {
  std::string subject_id;
  int night = 1;
  std::uint32_t epoch_index = 0;
  auto operator<=>(const CacheKey&) const = default;
};

struct CacheEntry {
  std::uint64_t offset = 0;  // record start within the file
  std::uint64_t size = 0;    // record bytes including the CRC
  std::uint32_t crc = 0;
};

struct CacheIndex {
  Tier tier = Tier::kDisk;
  std::map<CacheKey, CacheEntry> entries;
  std::uint32_t file_crc = 0;  // CRC32 of the whole file
};

struct CachedImage {
  RgbImage image;
  edf::StageLabel label = edf::StageLabel::kExcluded;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes, std::uint32_t seed = 0);

// Serialized record bytes for one entry (exposed for fault-injection tests).
std::vector<std::uint8_t> encode_record(const CacheKey& key, edf::StageLabel label, const RgbImage& image);

// Single writer; records land in call order. Throws
// Error{kCacheWriteFailure}.
class CacheWriter {
 public:
  explicit CacheWriter(const std::filesystem::path& path);
  CacheWriter(const CacheWriter&) = delete;
  CacheWriter& operator=(const CacheWriter&) = delete;

  const CacheEntry& append(const CacheKey& key, edf::StageLabel label, const RgbImage& image);
  // Flushes and returns the index of everything written.
  CacheIndex finish();

 private:
  void write(std::span<const std::uint8_t> bytes);

  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t offset_ = 0;
  CacheIndex index_;
  bool finished_ = false;
};

// Read side. The disk tier reads records on demand with positional reads;
// the memory tier loads the file once (in parallel chunks) and serves from
// the resident buffer. Both are safe for concurrent get() calls.
class SpectrogramCache {
 public:
  static SpectrogramCache open(const std::filesystem::path& path, Tier tier, int preload_workers = 1);

  SpectrogramCache(SpectrogramCache&&) noexcept;
  SpectrogramCache& operator=(SpectrogramCache&&) noexcept;
  ~SpectrogramCache();

  const CacheIndex& index() const { return index_; }
  Tier tier() const { return index_.tier; }
  std::size_t size() const { return index_.entries.size(); }
  std::vector<CacheKey> keys() const;

  // Throws Error{kMissingKey, kChecksumMismatch}.
  CachedImage get(const CacheKey& key) const;

 private:
  SpectrogramCache() = default;

  CacheIndex index_;
  int fd_ = -1;
  std::vector<std::uint8_t> resident_;
};

}  // namespace hypnospec::cache

#endif  // HYPNOSPEC_CACHE_HPP_
