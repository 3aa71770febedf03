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

#ifndef HYPNOSPEC_FIXTURES_HPP_
#define HYPNOSPEC_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hypnospec/edf.hpp"

// Synthetic EDF/EDF+ corpus generator. This is the only EDF writer in the
// project and exists to produce test fixtures and demo corpora that follow
// the Sleep-EDF file naming convention.
namespace hypnospec::fixtures {

// Serializes a header plus per-signal digital samples. Each signal's sample
// vector must hold a whole number of records; header_bytes is recomputed.
// `header.n_records` is written verbatim so -1 can be exercised.
std::vector<std::uint8_t> write_edf(const edf::EdfHeader& header,
                                    const std::vector<std::vector<std::int16_t>>& digital);

// EDF+ file holding a single "EDF Annotations" signal in one data record,
// led by a time-keeping TAL.
std::vector<std::uint8_t> write_hypnogram(std::span<const edf::SleepAnnotation> annotations);

// Digital value whose physical image is closest to `physical`.
std::int16_t physical_to_digital(const edf::SignalSpec& spec, double physical);

// Dominant frequency of the synthetic rhythm emitted for a stage.
double stage_frequency_hz(edf::StageLabel label);

// One 30 s epoch: stage-specific sinusoid plus low-level Gaussian noise.
std::vector<double> synthetic_epoch(edf::StageLabel label, double fs, std::mt19937_64& rng);

struct CorpusOptions {
  int subjects = 2;
  int nights = 1;
  int epochs_per_night = 10;  // scored epochs emitted per night
  int excluded_epochs = 2;    // trailing "Sleep stage ?" slots per night
  std::uint64_t seed = 1;
};

struct RecordingPair {
  std::string subject_id;
  int night = 1;
  std::filesystem::path psg;
  std::filesystem::path hypnogram;
};

// Writes <dir>/SC4<ss><n>E0-PSG.edf and SC4<ss><n>EC-Hypnogram.edf pairs.
std::vector<RecordingPair> write_corpus(const std::filesystem::path& dir, const CorpusOptions& options);

// Sleep-EDF channel carrying the signal the classifier consumes.
inline constexpr std::string_view kPrimaryChannel = "EEG Fpz-Cz";

}  // namespace hypnospec::fixtures

#endif  // HYPNOSPEC_FIXTURES_HPP_
