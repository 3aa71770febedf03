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

#include "hypnospec/ingest.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hypnospec/error.hpp"
#include "hypnospec/parallel.hpp"

namespace hypnospec::ingest {

namespace {

constexpr std::string_view kPsgSuffix = "-PSG.edf";
constexpr std::string_view kHypnogramSuffix = "-Hypnogram.edf";

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

auto canonical(const dataset::LabeledEpoch& e) { return std::tie(e.subject_id, e.night, e.epoch_index); }

}  // namespace

Discovery discover_recordings(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(Errc::kIo, fmt::format("'{}' is not a directory", dir.string()));
  }
  std::vector<std::filesystem::path> psgs;
  std::map<std::string, std::filesystem::path> hypnograms;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (ends_with(name, kPsgSuffix) && name.size() >= 6 + kPsgSuffix.size()) psgs.push_back(entry.path());
    if (ends_with(name, kHypnogramSuffix) && name.size() >= 6 + kHypnogramSuffix.size()) {
      hypnograms.emplace(name.substr(0, 6), entry.path());
    }
  }
  std::sort(psgs.begin(), psgs.end());

  Discovery out;
  for (const auto& psg : psgs) {
    const auto name = psg.filename().string();
    const auto it = hypnograms.find(name.substr(0, 6));
    const char night = name[5];
    if (it == hypnograms.end()) {
      out.errors.push_back(fmt::format("MissingHypnogram: no hypnogram partner for '{}'", psg.string()));
      continue;
    }
    if (night < '1' || night > '9') {
      out.errors.push_back(fmt::format("BadName: cannot read night digit from '{}'", psg.string()));
      continue;
    }
    out.recordings.push_back({name.substr(0, 5), night - '0', psg, it->second});
  }
  std::sort(out.recordings.begin(), out.recordings.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subject_id, a.night) < std::tie(b.subject_id, b.night);
  });
  return out;
}

RgbImage epoch_image(std::span<const double> samples, const IngestOptions& options, bool* degenerate) {
  const auto spec = spectro::stft_spectrogram(samples, options.spectro);
  auto rendered = spectro::render_image(spec, options.render);
  if (degenerate) *degenerate = rendered.degenerate_range;
  return std::move(rendered.image);
}

IngestResult ingest_epochs(std::vector<dataset::LabeledEpoch> epochs, const std::filesystem::path& cache_path,
                           const IngestOptions& options) {
  if (options.workers < 1) throw Error(Errc::kInvalidConfig, "worker count must be at least 1");
  options.spectro.validate();
  std::sort(epochs.begin(), epochs.end(), [](const auto& a, const auto& b) { return canonical(a) < canonical(b); });
  for (const auto& e : epochs) {
    if (e.label == edf::StageLabel::kExcluded) {
      throw Error(Errc::kInvalidConfig,
                  fmt::format("excluded epoch {}/{}/{} passed to ingestion", e.subject_id, e.night, e.epoch_index));
    }
  }

  IngestResult result;
  cache::CacheWriter writer(cache_path);
  const std::size_t chunk = std::max<std::size_t>(1, options.chunk);
  std::vector<RgbImage> images;
  std::vector<char> degenerate;
  std::map<std::pair<std::string, int>, std::size_t> degenerate_counts;

  for (std::size_t begin = 0; begin < epochs.size(); begin += chunk) {
    const std::size_t n = std::min(chunk, epochs.size() - begin);
    images.assign(n, {});
    degenerate.assign(n, 0);
    parallel_for(n, options.workers, [&](std::size_t i) {
      const auto& e = epochs[begin + i];
      try {
        bool flag = false;
        images[i] = epoch_image(e.samples, options, &flag);
        degenerate[i] = flag;
      } catch (const Error& err) {
        throw Error(err.code(), fmt::format("{}/night {}/epoch {}: {}", e.subject_id, e.night, e.epoch_index, err.what()));
      }
    });
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = epochs[begin + i];
      writer.append({e.subject_id, e.night, e.epoch_index}, e.label, images[i]);
      if (degenerate[i]) ++degenerate_counts[{e.subject_id, e.night}];
    }
  }
  result.index = writer.finish();

  // Summaries for callers that pass pre-cut epochs.
  std::map<std::pair<std::string, int>, RecordingSummary> by_recording;
  for (const auto& e : epochs) {
    auto& s = by_recording[{e.subject_id, e.night}];
    s.subject_id = e.subject_id;
    s.night = e.night;
    ++s.epochs.emitted;
    ++s.epochs.total_slots;
    ++s.epochs.per_stage[static_cast<std::size_t>(e.label)];
  }
  for (auto& [key, s] : by_recording) {
    s.degenerate_images = degenerate_counts[key];
    result.recordings.push_back(std::move(s));
  }
  return result;
}

IngestResult ingest(std::span<const RecordingSource> recordings, const std::filesystem::path& cache_path,
                    const IngestOptions& options) {
  if (options.workers < 1) throw Error(Errc::kInvalidConfig, "worker count must be at least 1");
  std::vector<RecordingSource> sorted(recordings.begin(), recordings.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subject_id, a.night) < std::tie(b.subject_id, b.night);
  });

  std::vector<dataset::EpochResult> cut(sorted.size());
  std::vector<std::size_t> clamped(sorted.size());
  parallel_for(sorted.size(), options.workers, [&](std::size_t i) {
    const auto& r = sorted[i];
    try {
      const auto psg = edf::EdfFile::open(r.psg);
      const auto channel = psg.read_channel(options.channel);
      const auto hyp = edf::EdfFile::open(r.hypnogram);
      const auto annotations = edf::parse_annotations(hyp);
      cut[i] = dataset::epoch_signal(channel.samples, channel.sample_rate, annotations, r.subject_id, r.night,
                                     options.epochs);
      clamped[i] = channel.clamped;
    } catch (const Error& err) {
      throw Error(err.code(), fmt::format("{} ({} night {}): {}", r.psg.filename().string(), r.subject_id,
                                          r.night, err.what()));
    }
  });

  std::vector<dataset::LabeledEpoch> all;
  for (auto& c : cut) {
    for (auto& e : c.epochs) all.push_back(std::move(e));
    c.epochs.clear();
  }
  auto result = ingest_epochs(std::move(all), cache_path, options);

  std::map<std::pair<std::string, int>, std::size_t> degenerate;
  for (const auto& s : result.recordings) degenerate[{s.subject_id, s.night}] = s.degenerate_images;
  result.recordings.clear();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    RecordingSummary s;
    s.subject_id = sorted[i].subject_id;
    s.night = sorted[i].night;
    s.epochs = std::move(cut[i].summary);
    s.clamped_samples = clamped[i];
    s.degenerate_images = degenerate[{s.subject_id, s.night}];
    result.recordings.push_back(std::move(s));
  }
  return result;
}

void write_summary_lines(std::ostream& out, std::span<const RecordingSummary> recordings) {
  for (const auto& r : recordings) {
    nlohmann::ordered_json j;
    j["subject"] = r.subject_id;
    j["night"] = r.night;
    j["emitted"] = r.epochs.emitted;
    j["excluded"] = r.epochs.excluded;
    j["trimmed"] = r.epochs.trimmed;
    j["truncated"] = r.epochs.truncated;
    for (int s = 0; s < edf::kNumStages; ++s) {
      j["stage_" + std::string(edf::stage_name(static_cast<edf::StageLabel>(s)))] = r.epochs.per_stage[static_cast<std::size_t>(s)];
    }
    j["clamped_samples"] = r.clamped_samples;
    j["degenerate_images"] = r.degenerate_images;
    out << j.dump() << '\n';
  }
}

}  // namespace hypnospec::ingest
