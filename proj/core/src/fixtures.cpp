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

#include "hypnospec/fixtures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "hypnospec/error.hpp"

namespace hypnospec::fixtures {

namespace {

void put(std::vector<std::uint8_t>& out, std::string_view text, std::size_t width) {
  if (text.size() > width) {
    throw Error(Errc::kMalformedField, fmt::format("'{}' does not fit in {} bytes", text, width));
  }
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), width - text.size(), ' ');
}

std::string number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIo, fmt::format("cannot write '{}'", path.string()));
}

edf::SignalSpec eeg_spec(std::string label) {
  edf::SignalSpec s;
  s.label = std::move(label);
  s.transducer = "Ag-AgCl electrodes";
  s.physical_dim = "uV";
  s.physical_min = -200.0;
  s.physical_max = 200.0;
  s.digital_min = -2048;
  s.digital_max = 2047;
  s.prefiltering = "HP:0.5Hz LP:100Hz";
  s.samples_per_record = 3000;
  return s;
}

}  // namespace

std::vector<std::uint8_t> write_edf(const edf::EdfHeader& header,
                                    const std::vector<std::vector<std::int16_t>>& digital) {
  const auto& sig = header.signals;
  if (digital.size() != sig.size()) {
    throw Error(Errc::kInvalidConfig, "one sample vector per signal required");
  }
  std::size_t records = 0;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const auto spr = static_cast<std::size_t>(sig[i].samples_per_record);
    if (spr == 0 || digital[i].size() % spr != 0) {
      throw Error(Errc::kInvalidConfig, fmt::format("signal {} does not hold whole records", i));
    }
    const auto r = digital[i].size() / spr;
    if (i > 0 && r != records) throw Error(Errc::kInvalidConfig, "signals disagree on record count");
    records = r;
  }

  std::vector<std::uint8_t> out;
  out.reserve(256 * (sig.size() + 1) + records * header.record_bytes());
  put(out, header.version, 8);
  put(out, header.patient_id, 80);
  put(out, header.recording_id, 80);
  put(out, fmt::format("{:02}.{:02}.{:02}", header.start_date.day, header.start_date.month,
                       header.start_date.year % 100), 8);
  put(out, fmt::format("{:02}.{:02}.{:02}", header.start_time.hour, header.start_time.minute,
                       header.start_time.second), 8);
  put(out, std::to_string(256 + 256 * sig.size()), 8);
  put(out, header.reserved, 44);
  put(out, std::to_string(header.n_records), 8);
  put(out, number(header.record_duration_s), 8);
  put(out, std::to_string(sig.size()), 4);
  for (const auto& s : sig) put(out, s.label, 16);
  for (const auto& s : sig) put(out, s.transducer, 80);
  for (const auto& s : sig) put(out, s.physical_dim, 8);
  for (const auto& s : sig) put(out, number(s.physical_min), 8);
  for (const auto& s : sig) put(out, number(s.physical_max), 8);
  for (const auto& s : sig) put(out, std::to_string(s.digital_min), 8);
  for (const auto& s : sig) put(out, std::to_string(s.digital_max), 8);
  for (const auto& s : sig) put(out, s.prefiltering, 80);
  for (const auto& s : sig) put(out, std::to_string(s.samples_per_record), 8);
  for (const auto& s : sig) put(out, s.reserved, 32);

  for (std::size_t r = 0; r < records; ++r) {
    for (std::size_t i = 0; i < sig.size(); ++i) {
      const auto spr = static_cast<std::size_t>(sig[i].samples_per_record);
      for (std::size_t k = 0; k < spr; ++k) {
        const auto v = static_cast<std::uint16_t>(digital[i][r * spr + k]);
        out.push_back(static_cast<std::uint8_t>(v & 0xff));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> write_hypnogram(std::span<const edf::SleepAnnotation> annotations) {
  std::vector<std::uint8_t> tal = {'+', '0', 0x14, 0x14, 0x00};
  const auto body = edf::serialize_tals(annotations);
  tal.insert(tal.end(), body.begin(), body.end());
  if (tal.size() % 2 != 0) tal.push_back(0x00);

  edf::EdfHeader h;
  h.version = "0";
  h.patient_id = "X X X X";
  h.recording_id = "Startdate X X X X";
  h.start_date = {1, 1, 1989};
  h.reserved = "EDF+C";
  h.n_records = 1;
  h.record_duration_s = 0.0;
  edf::SignalSpec s;
  s.label = std::string(edf::kAnnotationsLabel);
  s.physical_min = -1.0;
  s.physical_max = 1.0;
  s.digital_min = -32768;
  s.digital_max = 32767;
  s.samples_per_record = static_cast<std::int32_t>(tal.size() / 2);
  h.signals.push_back(s);

  std::vector<std::int16_t> words(tal.size() / 2);
  for (std::size_t i = 0; i < words.size(); ++i) {
    words[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(tal[2 * i]) |
                                         static_cast<std::uint16_t>(tal[2 * i + 1]) << 8);
  }
  return write_edf(h, {words});
}

std::int16_t physical_to_digital(const edf::SignalSpec& spec, double physical) {
  const double scale = static_cast<double>(spec.digital_max - spec.digital_min) /
                       (spec.physical_max - spec.physical_min);
  const double d = std::round((physical - spec.physical_min) * scale + spec.digital_min);
  return static_cast<std::int16_t>(std::clamp<double>(d, spec.digital_min, spec.digital_max));
}

double stage_frequency_hz(edf::StageLabel label) {
  switch (label) {
    case edf::StageLabel::kW: return 20.0;
    case edf::StageLabel::kN1: return 6.0;
    case edf::StageLabel::kN2: return 13.0;
    case edf::StageLabel::kN3: return 2.0;
    case edf::StageLabel::kRem: return 9.0;
    case edf::StageLabel::kExcluded: return 35.0;
  }
  return 0.0;
}

std::vector<double> synthetic_epoch(edf::StageLabel label, double fs, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(std::lround(30.0 * fs));
  const double f = stage_frequency_hz(label);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 4.0);
  const double phi = phase(rng);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 60.0 * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs + phi) + noise(rng);
  }
  return x;
}

std::vector<RecordingPair> write_corpus(const std::filesystem::path& dir, const CorpusOptions& options) {
  if (options.subjects < 1 || options.subjects > 99 || options.nights < 1 || options.nights > 2 ||
      options.epochs_per_night < 1 || options.excluded_epochs < 0) {
    throw Error(Errc::kInvalidConfig, "fixture corpus options out of range");
  }
  std::filesystem::create_directories(dir);
  constexpr double kFs = 100.0;
  std::mt19937_64 rng(options.seed);
  std::vector<RecordingPair> pairs;

  for (int subject = 0; subject < options.subjects; ++subject) {
    for (int night = 1; night <= options.nights; ++night) {
      // Stage runs of 1..4 epochs cycling through the five classes.
      std::vector<edf::SleepAnnotation> hyp;
      std::vector<edf::StageLabel> labels;
      std::uniform_int_distribution<int> run_len(1, 4);
      static constexpr const char* kRaw[] = {"Sleep stage W", "Sleep stage 1", "Sleep stage 2",
                                              "Sleep stage 3", "Sleep stage 4", "Sleep stage R"};
      int stage_cursor = (subject + night) % 6;
      int epoch = 0;
      while (epoch < options.epochs_per_night) {
        const int len = std::min(run_len(rng), options.epochs_per_night - epoch);
        const char* raw = kRaw[stage_cursor % 6];
        hyp.push_back({epoch * 30.0, len * 30.0, raw});
        for (int i = 0; i < len; ++i) labels.push_back(edf::remap_stage(raw));
        epoch += len;
        ++stage_cursor;
      }
      if (options.excluded_epochs > 0) {
        hyp.push_back({epoch * 30.0, options.excluded_epochs * 30.0, "Sleep stage ?"});
        for (int i = 0; i < options.excluded_epochs; ++i) labels.push_back(edf::StageLabel::kExcluded);
      }

      edf::EdfHeader h;
      h.version = "0";
      const auto subject_id = fmt::format("SC4{:02}", subject);
      h.patient_id = fmt::format("X F X {}", subject_id);
      h.recording_id = "Startdate 01-JAN-1989 X X X";
      h.start_date = {1, 1, 1989};
      h.start_time = {22, 30, 0};
      h.n_records = static_cast<std::int64_t>(labels.size());
      h.record_duration_s = 30.0;
      h.signals = {eeg_spec("EEG Fpz-Cz"), eeg_spec("EEG Pz-Oz")};

      std::vector<std::vector<std::int16_t>> digital(2);
      for (auto label : labels) {
        for (auto& channel : digital) {
          const auto x = synthetic_epoch(label, kFs, rng);
          for (double v : x) channel.push_back(physical_to_digital(h.signals[0], v));
        }
      }

      RecordingPair pair;
      pair.subject_id = subject_id;
      pair.night = night;
      pair.psg = dir / fmt::format("{}{}E0-PSG.edf", subject_id, night);
      pair.hypnogram = dir / fmt::format("{}{}EC-Hypnogram.edf", subject_id, night);
      write_file(pair.psg, write_edf(h, digital));
      write_file(pair.hypnogram, write_hypnogram(hyp));
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

}  // namespace hypnospec::fixtures
