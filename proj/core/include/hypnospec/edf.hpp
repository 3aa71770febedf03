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

#ifndef HYPNOSPEC_EDF_HPP_
#define HYPNOSPEC_EDF_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hypnospec::edf {

inline constexpr std::size_t kGlobalHeaderBytes = 256;
inline constexpr std::size_t kSignalHeaderBytes = 256;
inline constexpr std::string_view kAnnotationsLabel = "EDF Annotations";

struct Date {
  int day = 1;
  int month = 1;
  int year = 1985;  // four-digit; the two-digit field maps 85..99 -> 19xx
  friend bool operator==(const Date&, const Date&) = default;
};

struct TimeOfDay {
  int hour = 0;
  int minute = 0;
  int second = 0;
  friend bool operator==(const TimeOfDay&, const TimeOfDay&) = default;
};

struct SignalSpec {
  std::string label;
  std::string transducer;
  std::string physical_dim;
  double physical_min = 0.0;
  double physical_max = 0.0;
  std::int32_t digital_min = 0;
  std::int32_t digital_max = 0;
  std::string prefiltering;
  std::int32_t samples_per_record = 0;
  std::string reserved;

  bool is_annotation() const { return label == kAnnotationsLabel; }
  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
};

struct EdfHeader {
  std::string version;
  std::string patient_id;
  std::string recording_id;
  Date start_date;
  TimeOfDay start_time;
  std::int64_t header_bytes = 0;
  std::string reserved;        // "EDF+C" / "EDF+D" for EDF+ files
  std::int64_t n_records = 0;  // -1 when the writer did not know
  double record_duration_s = 0.0;
  std::vector<SignalSpec> signals;

  std::size_t n_signals() const { return signals.size(); }
  // Bytes occupied by one data record (2 bytes per sample across all signals).
  std::size_t record_bytes() const;
  // Index of the signal whose trimmed label equals `label`, or -1.
  int find_signal(std::string_view label) const;
  double sample_rate(std::size_t signal) const;

  friend bool operator==(const EdfHeader&, const EdfHeader&) = default;
};

// Decodes the fixed-width ASCII header. Throws Error{kTruncatedHeader,
// kMalformedField, kInvariantViolation}.
EdfHeader parse_edf_header(std::span<const std::uint8_t> bytes);

// Physical value for a digital sample, after clamping it into the signal's
// digital range.
double digital_to_physical(const SignalSpec& spec, std::int32_t digital);

struct ChannelData {
  std::vector<double> samples;  // physical units
  double sample_rate = 0.0;
  std::size_t clamped = 0;  // out-of-range digital samples pulled to the rails
};

// Read-only view over one EDF/EDF+ file. Immutable after construction and
// safe to share across threads.
class EdfFile {
 public:
  static EdfFile open(const std::filesystem::path& path);
  static EdfFile from_bytes(std::vector<std::uint8_t> bytes);

  const EdfHeader& header() const { return header_; }
  // Number of data records, with n_records == -1 resolved from file size.
  std::int64_t record_count() const { return record_count_; }

  ChannelData read_channel(std::string_view label) const;
  // Raw bytes of one signal, concatenated across all records.
  std::vector<std::uint8_t> raw_signal_bytes(std::size_t signal) const;

  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  EdfFile(std::vector<std::uint8_t> bytes);

  std::vector<std::uint8_t> bytes_;
  EdfHeader header_;
  std::int64_t record_count_ = 0;
};

struct EdfRecording {
  EdfHeader header;
  std::map<std::string, std::vector<double>> channels;
  std::map<std::string, double> sample_rates;
};

// Loads the requested channels (all non-annotation channels when empty).
EdfRecording read_recording(const EdfFile& file,
                            std::span<const std::string> labels = {});

struct SleepAnnotation {
  double onset_s = 0.0;
  double duration_s = 0.0;
  std::string raw_label;
  friend bool operator==(const SleepAnnotation&, const SleepAnnotation&) = default;
};

// Parses a stream of Time-stamped Annotation Lists. Zero padding between
// TALs is skipped; TALs with no annotation text (time-keeping TALs) produce
// no entries. Throws Error{kMalformedTal, kNonMonotonicOnsets}.
std::vector<SleepAnnotation> parse_tal_stream(std::span<const std::uint8_t> bytes);

// Collects annotations from every "EDF Annotations" signal in the file.
// Works for Sleep-EDF style hypnogram files and for embedded annotation
// channels alike.
std::vector<SleepAnnotation> parse_annotations(const EdfFile& file);

// Inverse of parse_tal_stream for annotation lists: one TAL per entry,
// durations omitted when zero, numbers in shortest round-trip form.
std::vector<std::uint8_t> serialize_tals(std::span<const SleepAnnotation> annotations);

enum class StageLabel : std::uint8_t { kW = 0, kN1 = 1, kN2 = 2, kN3 = 3, kRem = 4, kExcluded = 255 };

inline constexpr int kNumStages = 5;

StageLabel remap_stage(std::string_view raw_label);
std::string_view stage_name(StageLabel label);

}  // namespace hypnospec::edf

#endif  // HYPNOSPEC_EDF_HPP_
