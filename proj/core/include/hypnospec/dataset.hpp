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

#ifndef HYPNOSPEC_DATASET_HPP_
#define HYPNOSPEC_DATASET_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hypnospec/edf.hpp"

namespace hypnospec::dataset {

// One scoring window of the primary EEG channel.
struct LabeledEpoch {
  std::string subject_id;
  int night = 1;
  std::uint32_t epoch_index = 0;  // 30 s slot counted from recording start
  std::vector<double> samples;
  edf::StageLabel label = edf::StageLabel::kExcluded;
};

struct EpochOptions {
  double epoch_seconds = 30.0;
  // Keep at most this many minutes of wake before the first and after the
  // last sleep epoch; nullopt disables trimming.
  std::optional<double> trim_wake_minutes = 30.0;
};

struct EpochSummary {
  std::size_t total_slots = 0;  // annotated 30 s slots
  std::size_t emitted = 0;
  std::size_t excluded = 0;   // non-stage labels (movement, unscored)
  std::size_t trimmed = 0;    // wake dropped by the trimming rule
  std::size_t truncated = 0;  // slots lying past the end of the signal
  std::array<std::size_t, edf::kNumStages> per_stage{};
  std::vector<std::string> warnings;
};

struct EpochResult {
  std::vector<LabeledEpoch> epochs;
  EpochSummary summary;
};

// Cuts a channel into labelled epochs following the stage annotations.
// Annotations with zero duration are ignored. Throws
// Error{kMisalignedDuration} when a duration is not a whole number of epochs.
EpochResult epoch_signal(std::span<const double> samples, double fs,
                         std::span<const edf::SleepAnnotation> annotations,
                         const std::string& subject_id, int night, const EpochOptions& options = {});

struct Fold {
  std::set<std::string> validation;
  std::set<std::string> training;
};

struct FoldPlan {
  int k = 0;
  std::vector<Fold> folds;
};

// Subjects sorted by id and dealt round-robin into k validation groups.
// Throws Error{kTooFewSubjects} when fewer than k distinct subjects exist.
FoldPlan build_folds(std::span<const std::string> subject_ids, int k);
FoldPlan build_folds(std::span<const LabeledEpoch> epochs, int k);

}  // namespace hypnospec::dataset

#endif  // HYPNOSPEC_DATASET_HPP_
