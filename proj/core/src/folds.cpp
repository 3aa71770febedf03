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

#include <fmt/format.h>

#include "hypnospec/dataset.hpp"
#include "hypnospec/error.hpp"

namespace hypnospec::dataset {

FoldPlan build_folds(std::span<const std::string> subject_ids, int k) {
  if (k < 1) throw Error(Errc::kInvalidConfig, fmt::format("fold count must be positive, got {}", k));
  const std::set<std::string> subjects(subject_ids.begin(), subject_ids.end());
  if (subjects.size() < static_cast<std::size_t>(k)) {
    throw Error(Errc::kTooFewSubjects,
                fmt::format("{} distinct subjects cannot fill {} folds", subjects.size(), k));
  }
  FoldPlan plan;
  plan.k = k;
  plan.folds.resize(static_cast<std::size_t>(k));
  std::size_t i = 0;
  for (const auto& s : subjects) plan.folds[i++ % plan.folds.size()].validation.insert(s);
  for (auto& fold : plan.folds) {
    for (const auto& s : subjects) {
      if (!fold.validation.contains(s)) fold.training.insert(s);
    }
  }
  return plan;
}

FoldPlan build_folds(std::span<const LabeledEpoch> epochs, int k) {
  std::vector<std::string> ids;
  ids.reserve(epochs.size());
  for (const auto& e : epochs) ids.push_back(e.subject_id);
  return build_folds(ids, k);
}

}  // namespace hypnospec::dataset
