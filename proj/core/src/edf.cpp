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

#include "hypnospec/edf.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>

#include <fmt/format.h>

#include "hypnospec/error.hpp"

namespace hypnospec::edf {

namespace {

constexpr int kBytesPerSample = 2;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(' ');
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(' ');
  return s.substr(first, last - first + 1);
}

// Sequential reader over the fixed-width ASCII header fields.
class FieldReader {
 public:
  explicit FieldReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string_view raw(std::size_t width, std::string_view name) {
    if (pos_ + width > bytes_.size()) {
      throw Error(Errc::kTruncatedHeader,
                  fmt::format("header ends inside field '{}'", name));
    }
    const auto* begin = reinterpret_cast<const char*>(bytes_.data() + pos_);
    for (std::size_t i = 0; i < width; ++i) {
      const auto c = static_cast<unsigned char>(begin[i]);
      if (c < 0x20 || c > 0x7e) {
        throw Error(Errc::kMalformedField,
                    fmt::format("non-ASCII byte 0x{:02x} in field '{}' at offset {}",
                                c, name, pos_ + i));
      }
    }
    pos_ += width;
    return {begin, width};
  }

  std::string text(std::size_t width, std::string_view name) {
    auto s = raw(width, name);
    const auto last = s.find_last_not_of(' ');
    return std::string(last == std::string_view::npos ? std::string_view{} : s.substr(0, last + 1));
  }

  template <typename Int>
  Int integer(std::size_t width, std::string_view name) {
    const auto s = trim(raw(width, name));
    Int value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(Errc::kMalformedField,
                  fmt::format("field '{}' is not an integer: '{}'", name, s));
    }
    return value;
  }

  double decimal(std::size_t width, std::string_view name) {
    auto s = trim(raw(width, name));
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
      throw Error(Errc::kMalformedField,
                  fmt::format("field '{}' is not a number: '{}'", name, s));
    }
    return value;
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// "dd.mm.yy" / "hh.mm.ss" triplets.
std::array<int, 3> parse_triplet(std::string_view s, std::string_view name) {
  std::array<int, 3> out{};
  if (s.size() != 8 || s[2] != '.' || s[5] != '.') {
    throw Error(Errc::kMalformedField, fmt::format("field '{}' is not dd.dd.dd: '{}'", name, s));
  }
  for (int i = 0; i < 3; ++i) {
    const auto part = s.substr(static_cast<std::size_t>(i) * 3, 2);
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + 2, out[i]);
    if (ec != std::errc{} || ptr != part.data() + 2) {
      throw Error(Errc::kMalformedField, fmt::format("field '{}' is not dd.dd.dd: '{}'", name, s));
    }
  }
  return out;
}

}  // namespace

std::size_t EdfHeader::record_bytes() const {
  std::size_t total = 0;
  for (const auto& s : signals) total += static_cast<std::size_t>(s.samples_per_record) * kBytesPerSample;
  return total;
}

int EdfHeader::find_signal(std::string_view label) const {
  const auto wanted = trim(label);
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (trim(signals[i].label) == wanted) return static_cast<int>(i);
  }
  return -1;
}

double EdfHeader::sample_rate(std::size_t signal) const {
  if (record_duration_s <= 0.0) {
    throw Error(Errc::kInvariantViolation, "record duration is zero; sample rate undefined");
  }
  return signals.at(signal).samples_per_record / record_duration_s;
}

EdfHeader parse_edf_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kGlobalHeaderBytes) {
    throw Error(Errc::kTruncatedHeader,
                fmt::format("{} bytes is shorter than the 256-byte global header", bytes.size()));
  }
  FieldReader in(bytes);
  EdfHeader h;
  h.version = in.text(8, "version");
  h.patient_id = in.text(80, "patient_id");
  h.recording_id = in.text(80, "recording_id");
  const auto d = parse_triplet(in.raw(8, "start_date"), "start_date");
  h.start_date = {d[0], d[1], d[2] >= 85 ? 1900 + d[2] : 2000 + d[2]};
  const auto t = parse_triplet(in.raw(8, "start_time"), "start_time");
  h.start_time = {t[0], t[1], t[2]};
  h.header_bytes = in.integer<std::int64_t>(8, "header_bytes");
  h.reserved = in.text(44, "reserved");
  h.n_records = in.integer<std::int64_t>(8, "n_records");
  h.record_duration_s = in.decimal(8, "record_duration");
  const auto ns = in.integer<int>(4, "n_signals");

  if (ns < 1) {
    throw Error(Errc::kInvariantViolation, fmt::format("n_signals must be positive, got {}", ns));
  }
  const auto expected = static_cast<std::int64_t>(kGlobalHeaderBytes + kSignalHeaderBytes * ns);
  if (h.header_bytes != expected) {
    throw Error(Errc::kInvariantViolation,
                fmt::format("header_bytes {} != 256 + 256 x {}", h.header_bytes, ns));
  }
  if (bytes.size() < static_cast<std::size_t>(expected)) {
    throw Error(Errc::kTruncatedHeader,
                fmt::format("{} bytes is shorter than the declared header of {}", bytes.size(), expected));
  }
  if (h.n_records < -1) {
    throw Error(Errc::kInvariantViolation, fmt::format("n_records {} is negative", h.n_records));
  }
  if (h.record_duration_s < 0.0) {
    throw Error(Errc::kInvariantViolation, "record duration is negative");
  }

  // Signal fields are stored field-major: all labels, then all transducers...
  h.signals.resize(static_cast<std::size_t>(ns));
  for (auto& s : h.signals) s.label = in.text(16, "label");
  for (auto& s : h.signals) s.transducer = in.text(80, "transducer");
  for (auto& s : h.signals) s.physical_dim = in.text(8, "physical_dim");
  for (auto& s : h.signals) s.physical_min = in.decimal(8, "physical_min");
  for (auto& s : h.signals) s.physical_max = in.decimal(8, "physical_max");
  for (auto& s : h.signals) s.digital_min = in.integer<std::int32_t>(8, "digital_min");
  for (auto& s : h.signals) s.digital_max = in.integer<std::int32_t>(8, "digital_max");
  for (auto& s : h.signals) s.prefiltering = in.text(80, "prefiltering");
  for (auto& s : h.signals) s.samples_per_record = in.integer<std::int32_t>(8, "samples_per_record");
  for (auto& s : h.signals) s.reserved = in.text(32, "signal_reserved");

  for (const auto& s : h.signals) {
    if (s.digital_min >= s.digital_max) {
      throw Error(Errc::kInvariantViolation,
                  fmt::format("signal '{}': digital_min {} >= digital_max {}", s.label,
                              s.digital_min, s.digital_max));
    }
    if (s.physical_min == s.physical_max) {
      throw Error(Errc::kInvariantViolation,
                  fmt::format("signal '{}': physical_min == physical_max", s.label));
    }
    if (s.samples_per_record <= 0) {
      throw Error(Errc::kInvariantViolation,
                  fmt::format("signal '{}': samples_per_record must be positive", s.label));
    }
  }
  return h;
}

double digital_to_physical(const SignalSpec& spec, std::int32_t digital) {
  const auto d = std::clamp(digital, spec.digital_min, spec.digital_max);
  const double gain = (spec.physical_max - spec.physical_min) /
                      static_cast<double>(spec.digital_max - spec.digital_min);
  return static_cast<double>(d - spec.digital_min) * gain + spec.physical_min;
}

EdfFile::EdfFile(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  header_ = parse_edf_header(bytes_);
  const auto data_bytes = bytes_.size() - static_cast<std::size_t>(header_.header_bytes);
  const auto rec = header_.record_bytes();
  if (header_.n_records == -1) {
    if (data_bytes % rec != 0) {
      throw Error(Errc::kTruncatedData,
                  fmt::format("file ends mid-record ({} trailing bytes)", data_bytes % rec));
    }
    record_count_ = static_cast<std::int64_t>(data_bytes / rec);
  } else {
    record_count_ = header_.n_records;
    if (data_bytes < static_cast<std::size_t>(record_count_) * rec) {
      throw Error(Errc::kTruncatedData,
                  fmt::format("expected {} records of {} bytes, file holds {} data bytes",
                              record_count_, rec, data_bytes));
    }
  }
}

EdfFile EdfFile::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, fmt::format("cannot open '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return EdfFile(std::move(bytes));
}

EdfFile EdfFile::from_bytes(std::vector<std::uint8_t> bytes) { return EdfFile(std::move(bytes)); }

std::vector<std::uint8_t> EdfFile::raw_signal_bytes(std::size_t signal) const {
  const auto& signals = header_.signals;
  std::size_t offset_in_record = 0;
  for (std::size_t i = 0; i < signal; ++i) offset_in_record += static_cast<std::size_t>(signals[i].samples_per_record) * kBytesPerSample;
  const auto width = static_cast<std::size_t>(signals.at(signal).samples_per_record) * kBytesPerSample;
  const auto rec = header_.record_bytes();

  std::vector<std::uint8_t> out;
  out.reserve(width * static_cast<std::size_t>(record_count_));
  const auto* data = bytes_.data() + header_.header_bytes;
  for (std::int64_t r = 0; r < record_count_; ++r) {
    const auto* src = data + static_cast<std::size_t>(r) * rec + offset_in_record;
    out.insert(out.end(), src, src + width);
  }
  return out;
}

ChannelData EdfFile::read_channel(std::string_view label) const {
  const int index = header_.find_signal(label);
  if (index < 0) {
    throw Error(Errc::kUnknownChannel, fmt::format("no signal labelled '{}'", trim(label)));
  }
  const auto& spec = header_.signals[static_cast<std::size_t>(index)];
  const auto raw = raw_signal_bytes(static_cast<std::size_t>(index));

  ChannelData out;
  out.sample_rate = header_.sample_rate(static_cast<std::size_t>(index));
  out.samples.resize(raw.size() / kBytesPerSample);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const auto digital = static_cast<std::int16_t>(
        static_cast<std::uint16_t>(raw[2 * i]) | static_cast<std::uint16_t>(raw[2 * i + 1]) << 8);
    if (digital < spec.digital_min || digital > spec.digital_max) ++out.clamped;
    out.samples[i] = digital_to_physical(spec, digital);
  }
  return out;
}

EdfRecording read_recording(const EdfFile& file, std::span<const std::string> labels) {
  EdfRecording rec;
  rec.header = file.header();
  std::vector<std::string> wanted(labels.begin(), labels.end());
  if (wanted.empty()) {
    for (const auto& s : rec.header.signals) {
      if (!s.is_annotation()) wanted.push_back(s.label);
    }
  }
  for (const auto& label : wanted) {
    auto data = file.read_channel(label);
    const std::string key(trim(label));
    rec.sample_rates[key] = data.sample_rate;
    rec.channels[key] = std::move(data.samples);
  }
  return rec;
}

}  // namespace hypnospec::edf
