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

#ifndef HYPNOSPEC_INGEST_HPP_
#define HYPNOSPEC_INGEST_HPP_

#include <array>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hypnospec/cache.hpp"
#include "hypnospec/dataset.hpp"
#include "hypnospec/spectro.hpp"

namespace hypnospec::ingest {

struct RecordingSource {
  std::string subject_id;
  int night = 1;
  std::filesystem::path psg;
  std::filesystem::path hypnogram;
};

struct Discovery {
  std::vector<RecordingSource> recordings;  // sorted by (subject, night)
  std::vector<std::string> errors;          // one line per unpaired PSG file
};

// Pairs "<prefix>...-PSG.edf" with "<prefix>...-Hypnogram.edf", where the
// prefix is the first six characters (e.g. SC4001). Subject id is the first
// five characters, night the sixth.
Discovery discover_recordings(const std::filesystem::path& dir);

struct IngestOptions {
  spectro::SpectrogramConfig spectro;
  spectro::RenderConfig render;
  dataset::EpochOptions epochs;
  std::string channel = "EEG Fpz-Cz";
  int workers = 1;
  std::size_t chunk = 256;  // epochs transformed per batch before writing
};

struct RecordingSummary {
  std::string subject_id;
  int night = 1;
  dataset::EpochSummary epochs;
  std::size_t clamped_samples = 0;
  std::size_t degenerate_images = 0;
};

struct IngestResult {
  cache::CacheIndex index;
  std::vector<RecordingSummary> recordings;
};

// STFT + render for one epoch.
RgbImage epoch_image(std::span<const double> samples, const IngestOptions& options,
                     bool* degenerate = nullptr);

// Transforms every epoch and writes the cache in canonical
// (subject, night, epoch) order, so the file is byte-identical for any
// worker count or input order. Errors are rethrown tagged with the
// subject and epoch they came from.
IngestResult ingest_epochs(std::vector<dataset::LabeledEpoch> epochs, const std::filesystem::path& cache_path,
                           const IngestOptions& options);

// Parses each PSG/hypnogram pair, epochs the configured channel, and
// ingests everything into one cache.
IngestResult ingest(std::span<const RecordingSource> recordings, const std::filesystem::path& cache_path,
                    const IngestOptions& options);

// One JSON object per line: subject, night, emitted, excluded, trimmed,
// truncated and per-stage counts.
void write_summary_lines(std::ostream& out, std::span<const RecordingSummary> recordings);

}  // namespace hypnospec::ingest

#endif  // HYPNOSPEC_INGEST_HPP_
