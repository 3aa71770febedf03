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

#include "common.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "hypnospec/cache.hpp"

namespace hypnospec::tools {

void Reporter::error(const std::string& line) {
  err_ << "error: " << line << '\n';
  ++count_;
}

void Reporter::error(Errc code, const std::string& message) {
  const std::string name(errc_name(code));
  std::string_view rest(message);
  if (rest.starts_with(name + ": ")) rest.remove_prefix(name.size() + 2);
  error(fmt::format("{}: {}", name, rest));
}

void Reporter::error(const Error& e) { error(e.code(), e.what()); }

config::Settings resolve_settings(const CommonOptions& common, config::KeyValues flag_values) {
  config::KeyValues file;
  if (!common.config_file.empty()) file = config::load_key_values(common.config_file);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(Errc::kUsage, fmt::format("--set expects key=value, got '{}'", kv));
    }
    flag_values.insert_or_assign(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed) flag_values.insert_or_assign("seed", std::to_string(*common.seed));
  return config::resolve(file, flag_values);
}

std::string version() { return HYPNOSPEC_VERSION; }

std::uint32_t file_crc32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, fmt::format("cannot read '{}'", path.string()));
  std::vector<std::uint8_t> buf(1 << 20);
  std::uint32_t crc = 0;
  while (in) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    crc = cache::crc32(std::span(buf).first(got), crc);
  }
  return crc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::kIo, fmt::format("cannot write '{}'", path.string()));
}

}  // namespace hypnospec::tools
