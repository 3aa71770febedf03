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

#ifndef HYPNOSPEC_CONFIG_HPP_
#define HYPNOSPEC_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypnospec/ingest.hpp"
#include "hypnospec/nn/micronet.hpp"
#include "hypnospec/train.hpp"

namespace hypnospec::config {

using KeyValues = std::map<std::string, std::string>;

// Plain-text `key = value` lines; '#' starts a comment. Throws
// Error{kInvalidConfig} on malformed lines or repeated keys.
KeyValues parse_key_values(std::istream& in, const std::string& origin = "<config>");
KeyValues load_key_values(const std::filesystem::path& path);

struct Settings {
  ingest::IngestOptions ingest;
  train::TrainConfig train;
  int image_size = 64;  // model input edge; cached images are resized to it
  int folds = 20;
  std::string phase2_selector;  // empty selects the last block plus the head
};

// Every recognised key, in snapshot order.
std::vector<std::string> known_keys();

// Overwrites the named fields. Throws Error{kInvalidConfig} for unknown keys
// or unparsable values.
void apply(Settings& s, const KeyValues& kv);

// default < file < flags.
Settings resolve(const KeyValues& file, const KeyValues& flags);

// Every field as text, round-trippable through apply().
KeyValues snapshot(const Settings& s);

nn::MicroNetConfig model_config(const Settings& s);

// Cache location from EEGM_CACHE, if set and non-empty.
std::optional<std::filesystem::path> cache_from_env();

}  // namespace hypnospec::config

#endif  // HYPNOSPEC_CONFIG_HPP_
