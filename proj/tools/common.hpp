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

#ifndef HYPNOSPEC_TOOLS_COMMON_HPP_
#define HYPNOSPEC_TOOLS_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hypnospec/config.hpp"
#include "hypnospec/error.hpp"

namespace hypnospec::tools {

// Counts and prints `error: Category: message` lines. The process exit
// status is derived from the count.
class Reporter {
 public:
  explicit Reporter(std::ostream& err) : err_(err) {}

  void error(const std::string& line);
  void error(const Error& e);
  void error(Errc code, const std::string& message);
  int count() const { return count_; }

 private:
  std::ostream& err_;
  int count_ = 0;
};

// Options shared by every subcommand.
struct CommonOptions {
  std::optional<std::uint64_t> seed;
  std::string config_file;
  std::vector<std::string> overrides;  // raw "key=value" from --set
};

// default < --config file < --set and dedicated flags.
config::Settings resolve_settings(const CommonOptions& common, config::KeyValues flag_values);

std::string version();

std::uint32_t file_crc32(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hypnospec::tools

#endif  // HYPNOSPEC_TOOLS_COMMON_HPP_
