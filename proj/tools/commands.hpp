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

#ifndef HYPNOSPEC_TOOLS_COMMANDS_HPP_
#define HYPNOSPEC_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "common.hpp"

namespace hypnospec::tools {

struct FixturesArgs {
  std::filesystem::path out;
  int subjects = 2;
  int nights = 1;
  int epochs = 10;
  int excluded = 2;
};

struct IngestArgs {
  std::filesystem::path data;
  std::filesystem::path cache;
  std::optional<int> workers;
  std::optional<long long> expect_total;  // reference epoch count to compare against
};

struct TrainArgs {
  std::filesystem::path cache;
  std::filesystem::path out;
  std::optional<int> folds;
  std::optional<int> epochs;
  std::optional<int> phase1_epochs;
  std::optional<int> batch_size;
  std::string tier = "memory";
};

struct EvalArgs {
  std::filesystem::path cache;
  std::filesystem::path checkpoint;
  std::string subjects;  // comma-separated; empty evaluates every entry
  std::filesystem::path out;
};

struct BenchIoArgs {
  std::filesystem::path cache;
  std::string tier = "both";
  int passes = 1;
  std::filesystem::path out;
};

struct SpectrogramArgs {
  std::filesystem::path psg;
  std::string channel;
  long long epoch = 0;
  std::filesystem::path out;
};

// Each returns normally after reporting recoverable per-item failures, and
// throws hypnospec::Error for anything that stops the command outright.
void run_fixtures(const FixturesArgs& a, const CommonOptions& c, Reporter& r);
void run_ingest(const IngestArgs& a, const CommonOptions& c, Reporter& r);
void run_train(const TrainArgs& a, const CommonOptions& c, Reporter& r);
void run_eval(const EvalArgs& a, const CommonOptions& c, Reporter& r);
void run_bench_io(const BenchIoArgs& a, const CommonOptions& c, Reporter& r);
void run_spectrogram(const SpectrogramArgs& a, const CommonOptions& c, Reporter& r);

}  // namespace hypnospec::tools

#endif  // HYPNOSPEC_TOOLS_COMMANDS_HPP_
