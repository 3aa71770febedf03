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

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "hypnospec/edf.hpp"
#include "hypnospec/error.hpp"

namespace hypnospec::edf {

namespace {

constexpr std::uint8_t kTalEnd = 0x00;
constexpr std::uint8_t kAnnotationEnd = 0x14;
constexpr std::uint8_t kDurationStart = 0x15;

double parse_seconds(std::string_view s, bool signed_field, std::size_t at) {
  if (signed_field) {
    if (s.empty() || (s.front() != '+' && s.front() != '-')) {
      throw Error(Errc::kMalformedTal, fmt::format("onset at byte {} lacks a +/- sign", at));
    }
    if (s.front() == '-') {
      throw Error(Errc::kMalformedTal, fmt::format("negative onset at byte {}", at));
    }
    s.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, std::chars_format::fixed);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || value < 0.0) {
    throw Error(Errc::kMalformedTal, fmt::format("bad number '{}' at byte {}", s, at));
  }
  return value;
}

void append_number(std::vector<std::uint8_t>& out, double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  (void)ec;
  out.insert(out.end(), buf, ptr);
}

}  // namespace

std::vector<SleepAnnotation> parse_tal_stream(std::span<const std::uint8_t> bytes) {
  std::vector<SleepAnnotation> out;
  const auto as_view = [&](std::size_t b, std::size_t e) {
    return std::string_view(reinterpret_cast<const char*>(bytes.data()) + b, e - b);
  };

  double last_onset = -1.0;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes[pos] == kTalEnd) {  // padding
      ++pos;
      continue;
    }
    const std::size_t tal_start = pos;
    // Timestamp: onset [0x15 duration] 0x14
    std::size_t p = pos;
    while (p < bytes.size() && bytes[p] != kAnnotationEnd && bytes[p] != kDurationStart && bytes[p] != kTalEnd) ++p;
    if (p >= bytes.size() || bytes[p] == kTalEnd) {
      throw Error(Errc::kMalformedTal, fmt::format("TAL at byte {} has no timestamp terminator", tal_start));
    }
    const double onset = parse_seconds(as_view(pos, p), true, tal_start);
    double duration = 0.0;
    if (bytes[p] == kDurationStart) {
      const std::size_t d = p + 1;
      p = d;
      while (p < bytes.size() && bytes[p] != kAnnotationEnd && bytes[p] != kTalEnd && bytes[p] != kDurationStart) ++p;
      if (p >= bytes.size() || bytes[p] != kAnnotationEnd) {
        throw Error(Errc::kMalformedTal, fmt::format("TAL at byte {} has an unterminated duration", tal_start));
      }
      duration = parse_seconds(as_view(d, p), false, d);
    }
    ++p;  // past the 0x14 closing the timestamp

    // Annotation texts, each closed by 0x14; the TAL is closed by a 0x00
    // directly after a 0x14.
    bool closed = false;
    while (p < bytes.size()) {
      if (bytes[p] == kTalEnd) {
        closed = true;
        ++p;
        break;
      }
      const std::size_t text_start = p;
      while (p < bytes.size() && bytes[p] != kAnnotationEnd && bytes[p] != kTalEnd) ++p;
      if (p >= bytes.size() || bytes[p] != kAnnotationEnd) {
        throw Error(Errc::kMalformedTal, fmt::format("annotation at byte {} is not closed by 0x14", text_start));
      }
      // Empty text marks a time-keeping TAL; it carries no annotation.
      if (p > text_start) {
        if (onset < last_onset) {
          throw Error(Errc::kNonMonotonicOnsets,
                      fmt::format("onset {} at byte {} precedes previous onset {}", onset, tal_start, last_onset));
        }
        last_onset = onset;
        out.push_back({onset, duration, std::string(as_view(text_start, p))});
      }
      ++p;
    }
    if (!closed) {
      throw Error(Errc::kMalformedTal, fmt::format("TAL at byte {} is missing its trailing 0x00", tal_start));
    }
    pos = p;
  }
  return out;
}

std::vector<SleepAnnotation> parse_annotations(const EdfFile& file) {
  std::vector<std::uint8_t> stream;
  const auto& signals = file.header().signals;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (!signals[i].is_annotation()) continue;
    const auto raw = file.raw_signal_bytes(i);
    stream.insert(stream.end(), raw.begin(), raw.end());
  }
  return parse_tal_stream(stream);
}

std::vector<std::uint8_t> serialize_tals(std::span<const SleepAnnotation> annotations) {
  std::vector<std::uint8_t> out;
  for (const auto& a : annotations) {
    out.push_back('+');
    append_number(out, a.onset_s);
    if (a.duration_s != 0.0) {
      out.push_back(kDurationStart);
      append_number(out, a.duration_s);
    }
    out.push_back(kAnnotationEnd);
    out.insert(out.end(), a.raw_label.begin(), a.raw_label.end());
    out.push_back(kAnnotationEnd);
    out.push_back(kTalEnd);
  }
  return out;
}

}  // namespace hypnospec::edf
