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

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "hypnospec/dataset.hpp"
#include "hypnospec/error.hpp"

namespace hypnospec::dataset {

EpochResult epoch_signal(std::span<const double> samples, double fs,
                         std::span<const edf::SleepAnnotation> annotations,
                         const std::string& subject_id, int night, const EpochOptions& options) {
  if (!(fs > 0.0) || !(options.epoch_seconds > 0.0)) {
    throw Error(Errc::kInvalidConfig, "sample rate and epoch length must be positive");
  }
  const double epoch_s = options.epoch_seconds;
  const auto epoch_len = static_cast<std::size_t>(std::lround(epoch_s * fs));

  EpochResult result;
  auto& summary = result.summary;
  std::vector<LabeledEpoch> kept;

  double covered_until = 0.0;
  for (const auto& a : annotations) {
    if (a.duration_s == 0.0) continue;
    const double slots_exact = a.duration_s / epoch_s;
    const auto slots = static_cast<std::size_t>(std::llround(slots_exact));
    if (std::abs(slots_exact - static_cast<double>(slots)) > 1e-6) {
      throw Error(Errc::kMisalignedDuration,
                  fmt::format("{} night {}: annotation '{}' at {} s lasts {} s, not a multiple of {} s",
                              subject_id, night, a.raw_label, a.onset_s, a.duration_s, epoch_s));
    }
    if (a.onset_s + 1e-6 < covered_until) {
      throw Error(Errc::kInvalidConfig,
                  fmt::format("{} night {}: annotation at {} s overlaps the previous one", subject_id,
                              night, a.onset_s));
    }
    covered_until = a.onset_s + a.duration_s;

    const auto label = edf::remap_stage(a.raw_label);
    summary.total_slots += slots;
    std::size_t gap = 0;
    for (std::size_t i = 0; i < slots; ++i) {
      const double start_s = a.onset_s + static_cast<double>(i) * epoch_s;
      const auto start = static_cast<std::size_t>(std::llround(start_s * fs));
      if (start + epoch_len > samples.size()) {
        ++gap;
        continue;
      }
      if (label == edf::StageLabel::kExcluded) {
        ++summary.excluded;
        continue;
      }
      LabeledEpoch e;
      e.subject_id = subject_id;
      e.night = night;
      e.epoch_index = static_cast<std::uint32_t>(std::llround(start_s / epoch_s));
      e.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(start),
                       samples.begin() + static_cast<std::ptrdiff_t>(start + epoch_len));
      e.label = label;
      kept.push_back(std::move(e));
    }
    if (gap > 0) {
      summary.truncated += gap;
      summary.warnings.push_back(fmt::format(
          "CoverageGap: '{}' at {} s extends past the signal end; {} epoch(s) dropped", a.raw_label,
          a.onset_s, gap));
    }
  }

  if (options.trim_wake_minutes) {
    const auto margin = static_cast<std::int64_t>(std::llround(*options.trim_wake_minutes * 60.0 / epoch_s));
    const auto is_sleep = [](const LabeledEpoch& e) { return e.label != edf::StageLabel::kW; };
    const auto first = std::find_if(kept.begin(), kept.end(), is_sleep);
    if (first != kept.end()) {
      const auto last = std::find_if(kept.rbegin(), kept.rend(), is_sleep);
      const std::int64_t lo = static_cast<std::int64_t>(first->epoch_index) - margin;
      const std::int64_t hi = static_cast<std::int64_t>(last->epoch_index) + margin;
      std::vector<LabeledEpoch> trimmed;
      trimmed.reserve(kept.size());
      for (auto& e : kept) {
        const auto idx = static_cast<std::int64_t>(e.epoch_index);
        if (idx < lo || idx > hi) {
          ++summary.trimmed;
        } else {
          trimmed.push_back(std::move(e));
        }
      }
      kept = std::move(trimmed);
    }
  }

  for (const auto& e : kept) ++summary.per_stage[static_cast<std::size_t>(e.label)];
  summary.emitted = kept.size();
  result.epochs = std::move(kept);
  return result;
}

}  // namespace hypnospec::dataset
