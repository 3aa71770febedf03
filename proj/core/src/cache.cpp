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

#include "hypnospec/cache.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cstring>
#include <functional>

#include <fmt/format.h>
#include <zlib.h>

#include "hypnospec/error.hpp"
#include "hypnospec/parallel.hpp"

namespace hypnospec::cache {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | p[1] << 8); }

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

// Fixed part of a record following the subject id.
constexpr std::size_t kFixedAfterId = 1 + 4 + 1 + 2 + 2;

bool valid_label(std::uint8_t v) { return v < edf::kNumStages; }

void read_exact(int fd, std::uint8_t* dst, std::size_t n, std::uint64_t offset) {
  while (n > 0) {
    const auto got = ::pread(fd, dst, n, static_cast<off_t>(offset));
    if (got <= 0) throw Error(Errc::kCacheFormat, fmt::format("short read at offset {}", offset));
    dst += got;
    n -= static_cast<std::size_t>(got);
    offset += static_cast<std::uint64_t>(got);
  }
}

using ReadAt = std::function<void(std::uint8_t*, std::size_t, std::uint64_t)>;

// Walks record headers and builds the offset index; payloads are skipped.
CacheIndex scan(const ReadAt& read_at, std::uint64_t file_size) {
  if (file_size < kFileHeaderBytes) throw Error(Errc::kCacheFormat, "cache file too short for its header");
  std::uint8_t head[kFileHeaderBytes];
  read_at(head, sizeof(head), 0);
  if (std::memcmp(head, kMagic, 4) != 0) throw Error(Errc::kCacheFormat, "bad cache magic");
  if (get_u16(head + 4) != kVersion) {
    throw Error(Errc::kCacheFormat, fmt::format("unsupported cache version {}", get_u16(head + 4)));
  }

  CacheIndex index;
  std::uint64_t pos = kFileHeaderBytes;
  std::vector<std::uint8_t> buf;
  while (pos < file_size) {
    if (pos + 2 > file_size) throw Error(Errc::kCacheFormat, "truncated record header");
    std::uint8_t len_bytes[2];
    read_at(len_bytes, 2, pos);
    const std::size_t id_len = get_u16(len_bytes);
    const std::size_t head_len = 2 + id_len + kFixedAfterId;
    if (pos + head_len > file_size) throw Error(Errc::kCacheFormat, "truncated record header");
    buf.resize(head_len);
    read_at(buf.data(), head_len, pos);
    const std::uint8_t* p = buf.data() + 2;
    CacheKey key;
    key.subject_id.assign(reinterpret_cast<const char*>(p), id_len);
    p += id_len;
    key.night = p[0];
    key.epoch_index = get_u32(p + 1);
    const std::size_t w = get_u16(p + 6);
    const std::size_t h = get_u16(p + 8);
    const std::uint64_t size = head_len + w * h * 3 + 4;
    if (pos + size > file_size) throw Error(Errc::kCacheFormat, "truncated record payload");
    std::uint8_t crc_bytes[4];
    read_at(crc_bytes, 4, pos + size - 4);
    if (!index.entries.emplace(key, CacheEntry{pos, size, get_u32(crc_bytes)}).second) {
      throw Error(Errc::kCacheFormat,
                  fmt::format("duplicate record for {}/{}/{}", key.subject_id, key.night, key.epoch_index));
    }
    pos += size;
  }
  return index;
}

CachedImage decode(std::span<const std::uint8_t> record, const CacheKey& key) {
  const auto stored = get_u32(record.data() + record.size() - 4);
  if (crc32(record.first(record.size() - 4)) != stored) {
    throw Error(Errc::kChecksumMismatch,
                fmt::format("record {}/{}/{} failed its CRC check; re-ingest the cache", key.subject_id,
                            key.night, key.epoch_index));
  }
  const std::size_t id_len = get_u16(record.data());
  const std::uint8_t* p = record.data() + 2 + id_len;
  if (!valid_label(p[5])) throw Error(Errc::kCacheFormat, fmt::format("bad label byte {}", p[5]));
  CachedImage out;
  out.label = static_cast<edf::StageLabel>(p[5]);
  out.image = RgbImage(get_u16(p + 6), get_u16(p + 8));
  std::memcpy(out.image.pixels.data(), p + kFixedAfterId, out.image.pixels.size());
  return out;
}

}  // namespace

std::uint32_t crc32(std::span<const std::uint8_t> bytes, std::uint32_t seed) {
  uLong crc = seed;
  // zlib takes uInt lengths; feed large buffers in slices.
  constexpr std::size_t kSlice = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kSlice) {
    const auto n = std::min(kSlice, bytes.size() - off);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_record(const CacheKey& key, edf::StageLabel label, const RgbImage& image) {
  if (key.subject_id.size() > 0xffff || image.width > 0xffff || image.height > 0xffff ||
      key.night < 0 || key.night > 0xff) {
    throw Error(Errc::kCacheWriteFailure, "record field exceeds its on-disk width");
  }
  if (!valid_label(static_cast<std::uint8_t>(label))) {
    throw Error(Errc::kCacheWriteFailure, "excluded epochs are never cached");
  }
  std::vector<std::uint8_t> out;
  out.reserve(2 + key.subject_id.size() + kFixedAfterId + image.pixels.size() + 4);
  put_u16(out, static_cast<std::uint16_t>(key.subject_id.size()));
  out.insert(out.end(), key.subject_id.begin(), key.subject_id.end());
  out.push_back(static_cast<std::uint8_t>(key.night));
  put_u32(out, key.epoch_index);
  out.push_back(static_cast<std::uint8_t>(label));
  put_u16(out, static_cast<std::uint16_t>(image.width));
  put_u16(out, static_cast<std::uint16_t>(image.height));
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  put_u32(out, crc32(out));
  return out;
}

CacheWriter::CacheWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(Errc::kCacheWriteFailure, fmt::format("cannot create '{}'", path.string()));
  std::vector<std::uint8_t> head(kMagic, kMagic + 4);
  put_u16(head, kVersion);
  write(head);
}

void CacheWriter::write(std::span<const std::uint8_t> bytes) {
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out_) throw Error(Errc::kCacheWriteFailure, fmt::format("write to '{}' failed", path_.string()));
  index_.file_crc = crc32(bytes, index_.file_crc);
  offset_ += bytes.size();
}

const CacheEntry& CacheWriter::append(const CacheKey& key, edf::StageLabel label, const RgbImage& image) {
  if (finished_) throw Error(Errc::kCacheWriteFailure, "append after finish");
  const auto record = encode_record(key, label, image);
  CacheEntry entry{offset_, record.size(), get_u32(record.data() + record.size() - 4)};
  auto [it, inserted] = index_.entries.emplace(key, entry);
  if (!inserted) {
    throw Error(Errc::kCacheWriteFailure,
                fmt::format("record {}/{}/{} stored twice", key.subject_id, key.night, key.epoch_index));
  }
  write(record);
  return it->second;
}

CacheIndex CacheWriter::finish() {
  if (!finished_) {
    out_.flush();
    if (!out_) throw Error(Errc::kCacheWriteFailure, fmt::format("flush of '{}' failed", path_.string()));
    out_.close();
    finished_ = true;
  }
  return index_;
}

SpectrogramCache SpectrogramCache::open(const std::filesystem::path& path, Tier tier, int preload_workers) {
  SpectrogramCache cache;
  cache.fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (cache.fd_ < 0) throw Error(Errc::kIo, fmt::format("cannot open cache '{}'", path.string()));
  struct stat st {};
  if (::fstat(cache.fd_, &st) != 0) throw Error(Errc::kIo, "fstat failed");
  const auto file_size = static_cast<std::uint64_t>(st.st_size);

  if (tier == Tier::kMemory) {
    cache.resident_.resize(file_size);
    const int workers = std::max(1, preload_workers);
    const std::uint64_t chunk = (file_size + static_cast<std::uint64_t>(workers) - 1) / static_cast<std::uint64_t>(workers);
    parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t i) {
      const std::uint64_t begin = i * chunk;
      if (begin >= file_size) return;
      const std::uint64_t n = std::min(chunk, file_size - begin);
      read_exact(cache.fd_, cache.resident_.data() + begin, n, begin);
    });
    ::close(cache.fd_);
    cache.fd_ = -1;
    const auto& bytes = cache.resident_;
    cache.index_ = scan([&](std::uint8_t* dst, std::size_t n, std::uint64_t off) {
      std::memcpy(dst, bytes.data() + off, n);
    }, file_size);
    cache.index_.file_crc = crc32(bytes);
  } else {
    const int fd = cache.fd_;
    cache.index_ = scan([fd](std::uint8_t* dst, std::size_t n, std::uint64_t off) { read_exact(fd, dst, n, off); },
                        file_size);
  }
  cache.index_.tier = tier;
  return cache;
}

SpectrogramCache::SpectrogramCache(SpectrogramCache&& other) noexcept
    : index_(std::move(other.index_)), fd_(std::exchange(other.fd_, -1)), resident_(std::move(other.resident_)) {}

SpectrogramCache& SpectrogramCache::operator=(SpectrogramCache&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    index_ = std::move(other.index_);
    fd_ = std::exchange(other.fd_, -1);
    resident_ = std::move(other.resident_);
  }
  return *this;
}

SpectrogramCache::~SpectrogramCache() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<CacheKey> SpectrogramCache::keys() const {
  std::vector<CacheKey> out;
  out.reserve(index_.entries.size());
  for (const auto& [k, _] : index_.entries) out.push_back(k);
  return out;
}

CachedImage SpectrogramCache::get(const CacheKey& key) const {
  const auto it = index_.entries.find(key);
  if (it == index_.entries.end()) {
    throw Error(Errc::kMissingKey,
                fmt::format("no cached epoch {}/{}/{}", key.subject_id, key.night, key.epoch_index));
  }
  const auto& entry = it->second;
  if (index_.tier == Tier::kMemory) {
    return decode(std::span(resident_).subspan(entry.offset, entry.size), key);
  }
  std::vector<std::uint8_t> record(entry.size);
  read_exact(fd_, record.data(), record.size(), entry.offset);
  return decode(record, key);
}

}  // namespace hypnospec::cache
