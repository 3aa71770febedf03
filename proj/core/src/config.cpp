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

#include "hypnospec/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "hypnospec/error.hpp"

namespace hypnospec::config {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& v) {
  throw Error(Errc::kInvalidConfig, fmt::format("InvalidConfig: bad value '{}' for '{}'", v, key));
}

template <typename N>
N parse_number(const std::string& key, const std::string& v) {
  N out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (v.empty() || ec != std::errc{} || ptr != end) bad_value(key, v);
  if constexpr (std::is_floating_point_v<N>) {
    if (!std::isfinite(out)) bad_value(key, v);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) { return fmt::format("{}", v); }

struct Field {
  std::string key;
  std::function<void(Settings&, const std::string&)> set;
  std::function<std::string(const Settings&)> get;
};

#define HS_INT(KEY, MEMBER)                                                                           \
  Field {                                                                                             \
    KEY, [](Settings& s, const std::string& v) { s.MEMBER = parse_number<int>(KEY, v); },              \
        [](const Settings& s) { return std::to_string(s.MEMBER); }                                    \
  }
#define HS_DOUBLE(KEY, MEMBER)                                                                        \
  Field {                                                                                             \
    KEY, [](Settings& s, const std::string& v) { s.MEMBER = parse_number<double>(KEY, v); },           \
        [](const Settings& s) { return fmt_double(s.MEMBER); }                                        \
  }
#define HS_BOOL(KEY, MEMBER)                                                                          \
  Field {                                                                                             \
    KEY, [](Settings& s, const std::string& v) { s.MEMBER = parse_bool(KEY, v); },                    \
        [](const Settings& s) { return std::string(s.MEMBER ? "true" : "false"); }                    \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      HS_DOUBLE("spectro.fs", ingest.spectro.fs),
      HS_INT("spectro.nperseg", ingest.spectro.nperseg),
      HS_INT("spectro.noverlap", ingest.spectro.noverlap),
      HS_INT("spectro.nfft", ingest.spectro.nfft),
      HS_DOUBLE("spectro.tukey_alpha", ingest.spectro.tukey_alpha),
      Field{"spectro.detrend",
            [](Settings& s, const std::string& v) {
              if (v == "constant") {
                s.ingest.spectro.detrend = spectro::Detrend::kConstant;
              } else if (v == "none") {
                s.ingest.spectro.detrend = spectro::Detrend::kNone;
              } else {
                bad_value("spectro.detrend", v);
              }
            },
            [](const Settings& s) {
              return std::string(s.ingest.spectro.detrend == spectro::Detrend::kConstant ? "constant" : "none");
            }},
      HS_BOOL("render.log_power", ingest.render.log_power),
      HS_DOUBLE("render.log_floor", ingest.render.log_floor),
      HS_INT("render.width", ingest.render.out_width),
      HS_INT("render.height", ingest.render.out_height),
      HS_BOOL("render.resize", ingest.render.resize),
      HS_DOUBLE("epochs.seconds", ingest.epochs.epoch_seconds),
      Field{"epochs.trim_wake_minutes",
            [](Settings& s, const std::string& v) {
              if (v == "off") {
                s.ingest.epochs.trim_wake_minutes.reset();
              } else {
                s.ingest.epochs.trim_wake_minutes = parse_number<double>("epochs.trim_wake_minutes", v);
              }
            },
            [](const Settings& s) {
              const auto& t = s.ingest.epochs.trim_wake_minutes;
              return t ? fmt_double(*t) : std::string("off");
            }},
      Field{"ingest.channel", [](Settings& s, const std::string& v) { s.ingest.channel = v; },
            [](const Settings& s) { return s.ingest.channel; }},
      HS_INT("ingest.workers", ingest.workers),
      Field{"ingest.chunk",
            [](Settings& s, const std::string& v) { s.ingest.chunk = parse_number<std::size_t>("ingest.chunk", v); },
            [](const Settings& s) { return std::to_string(s.ingest.chunk); }},
      HS_INT("train.batch_size", train.batch_size),
      HS_INT("train.epochs", train.epochs),
      HS_INT("train.phase1_epochs", train.phase1_epochs),
      Field{"train.phase2_trainable", [](Settings& s, const std::string& v) { s.phase2_selector = v; },
            [](const Settings& s) { return s.phase2_selector; }},
      HS_DOUBLE("train.lr", train.adam.lr),
      HS_DOUBLE("train.beta1", train.adam.beta1),
      HS_DOUBLE("train.beta2", train.adam.beta2),
      HS_DOUBLE("train.eps", train.adam.eps),
      HS_INT("train.prefetch_depth", train.prefetch_depth),
      HS_BOOL("train.validate_each_epoch", train.validate_each_epoch),
      HS_INT("train.folds", folds),
      HS_INT("model.image_size", image_size),
      Field{"seed", [](Settings& s, const std::string& v) { s.train.seed = parse_number<std::uint64_t>("seed", v); },
            [](const Settings& s) { return std::to_string(s.train.seed); }},
  };
  return table;
}

#undef HS_INT
#undef HS_DOUBLE
#undef HS_BOOL

}  // namespace

KeyValues parse_key_values(std::istream& in, const std::string& origin) {
  KeyValues out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::kInvalidConfig, fmt::format("InvalidConfig: {}:{}: expected key = value", origin, lineno));
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw Error(Errc::kInvalidConfig, fmt::format("InvalidConfig: {}:{}: empty key", origin, lineno));
    if (!out.emplace(key, std::move(value)).second) {
      throw Error(Errc::kInvalidConfig, fmt::format("InvalidConfig: {}:{}: repeated key '{}'", origin, lineno, key));
    }
  }
  return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, fmt::format("Io: cannot open config '{}'", path.string()));
  return parse_key_values(in, path.string());
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.push_back(f.key);
  return out;
}

void apply(Settings& s, const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    bool found = false;
    for (const auto& f : fields()) {
      if (f.key == key) {
        f.set(s, value);
        found = true;
        break;
      }
    }
    if (!found) throw Error(Errc::kInvalidConfig, fmt::format("InvalidConfig: unknown key '{}'", key));
  }
}

Settings resolve(const KeyValues& file, const KeyValues& flags) {
  Settings s;
  apply(s, file);
  apply(s, flags);
  return s;
}

KeyValues snapshot(const Settings& s) {
  KeyValues out;
  for (const auto& f : fields()) out.emplace(f.key, f.get(s));
  return out;
}

nn::MicroNetConfig model_config(const Settings& s) {
  nn::MicroNetConfig cfg;
  cfg.height = s.image_size;
  cfg.width = s.image_size;
  return cfg;
}

std::optional<std::filesystem::path> cache_from_env() {
  const char* v = std::getenv("EEGM_CACHE");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::filesystem::path(v);
}

}  // namespace hypnospec::config
