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

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hypnospec/cache.hpp"
#include "hypnospec/dataset.hpp"
#include "hypnospec/edf.hpp"
#include "hypnospec/fixtures.hpp"
#include "hypnospec/image.hpp"
#include "hypnospec/ingest.hpp"
#include "hypnospec/metrics.hpp"
#include "hypnospec/nn/micronet.hpp"
#include "hypnospec/spectro.hpp"
#include "hypnospec/train.hpp"

namespace hypnospec::tools {
namespace {

using json = nlohmann::ordered_json;

std::filesystem::path resolve_cache_path(const std::filesystem::path& flag) {
  if (!flag.empty()) return flag;
  if (auto env = config::cache_from_env()) return *env;
  throw Error(Errc::kUsage, "no cache path: pass --cache or set EEGM_CACHE");
}

std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix) {
  return p.parent_path() / (p.filename().string() + suffix);
}

json snapshot_json(const config::Settings& s) {
  json j = json::object();
  for (const auto& [k, v] : config::snapshot(s)) j[k] = v;
  return j;
}

std::string crc_hex(std::uint32_t crc) { return fmt::format("{:08x}", crc); }

json double_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json confusion_json(const metrics::ConfusionMatrix& cm) {
  json rows = json::array();
  for (int t = 0; t < cm.k; ++t) {
    json row = json::array();
    for (int p = 0; p < cm.k; ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  return rows;
}

cache::Tier parse_tier(const std::string& t) {
  if (t == "disk") return cache::Tier::kDisk;
  if (t == "memory") return cache::Tier::kMemory;
  throw Error(Errc::kUsage, fmt::format("unknown tier '{}' (disk or memory)", t));
}

std::string stage_counts(const std::array<std::size_t, edf::kNumStages>& counts) {
  std::string s;
  for (int c = 0; c < edf::kNumStages; ++c) {
    s += fmt::format("{}{}={}", c ? " " : "", edf::stage_name(static_cast<edf::StageLabel>(c)), counts[c]);
  }
  return s;
}

}  // namespace

void run_fixtures(const FixturesArgs& a, const CommonOptions& c, Reporter& /*r*/) {
  const auto s = resolve_settings(c, {});
  fixtures::CorpusOptions opt;
  opt.subjects = a.subjects;
  opt.nights = a.nights;
  opt.epochs_per_night = a.epochs;
  opt.excluded_epochs = a.excluded;
  opt.seed = s.train.seed;
  if (opt.subjects < 1 || opt.nights < 1 || opt.nights > 9 || opt.epochs_per_night < 1 || opt.excluded_epochs < 0) {
    throw Error(Errc::kUsage, "fixture counts out of range");
  }
  std::filesystem::create_directories(a.out);
  const auto pairs = fixtures::write_corpus(a.out, opt);
  std::cout << fmt::format("wrote {} recording pairs to {}\n", pairs.size(), a.out.string());
}

void run_ingest(const IngestArgs& a, const CommonOptions& c, Reporter& r) {
  config::KeyValues flags;
  if (a.workers) flags["ingest.workers"] = std::to_string(*a.workers);
  const auto s = resolve_settings(c, flags);
  const auto cache_path = resolve_cache_path(a.cache);

  auto disc = ingest::discover_recordings(a.data);
  for (const auto& e : disc.errors) r.error(e);

  // Open every pair up front so one unreadable file is reported by name
  // without stopping the rest.
  std::vector<ingest::RecordingSource> usable;
  json fingerprint = json::object();
  for (const auto& rec : disc.recordings) {
    try {
      const auto psg = edf::EdfFile::open(rec.psg);
      if (psg.header().find_signal(s.ingest.channel) < 0) {
        throw Error(Errc::kUnknownChannel, fmt::format("channel '{}' not present", s.ingest.channel));
      }
      edf::parse_annotations(edf::EdfFile::open(rec.hypnogram));
      fingerprint[rec.psg.filename().string()] = crc_hex(file_crc32(rec.psg));
      fingerprint[rec.hypnogram.filename().string()] = crc_hex(file_crc32(rec.hypnogram));
      usable.push_back(rec);
    } catch (const Error& e) {
      r.error(e.code(), fmt::format("{}: {}", rec.psg.filename().string(), e.what()));
    }
  }
  if (usable.empty()) throw Error(Errc::kIo, fmt::format("no usable recordings in '{}'", a.data.string()));

  if (!cache_path.parent_path().empty()) std::filesystem::create_directories(cache_path.parent_path());
  const auto result = ingest::ingest(usable, cache_path, s.ingest);

  std::ostringstream lines;
  ingest::write_summary_lines(lines, result.recordings);
  write_text(sibling(cache_path, ".summary.jsonl"), lines.str());

  std::array<std::size_t, edf::kNumStages> per_stage{};
  std::size_t excluded = 0;
  std::size_t trimmed = 0;
  std::size_t degenerate = 0;
  for (const auto& rec : result.recordings) {
    for (int k = 0; k < edf::kNumStages; ++k) per_stage[k] += rec.epochs.per_stage[k];
    excluded += rec.epochs.excluded;
    trimmed += rec.epochs.trimmed;
    degenerate += rec.degenerate_images;
    for (const auto& w : rec.epochs.warnings) std::cerr << "warning: " << rec.subject_id << ": " << w << '\n';
  }

  json manifest;
  manifest["tool"] = "hypnospec";
  manifest["version"] = version();
  manifest["seed"] = s.train.seed;
  manifest["config"] = snapshot_json(s);
  manifest["dataset"] = fingerprint;
  manifest["cache"] = {{"path", cache_path.filename().string()},
                       {"entries", result.index.entries.size()},
                       {"crc32", crc_hex(result.index.file_crc)}};
  write_text(sibling(cache_path, ".manifest.json"), manifest.dump(2) + "\n");

  const auto& trim = s.ingest.epochs.trim_wake_minutes;
  std::cout << fmt::format("ingested {} epochs from {} recordings into {}\n", result.index.entries.size(),
                           result.recordings.size(), cache_path.string());
  std::cout << fmt::format("stages {} excluded={} trimmed={} degenerate_images={}\n", stage_counts(per_stage),
                           excluded, trimmed, degenerate);
  std::cout << fmt::format("wake trimming: {}\n",
                           trim ? fmt::format("keep {} min around sleep", *trim) : std::string("off"));
  std::cout << fmt::format("cache crc32 {}\n", crc_hex(result.index.file_crc));
  if (a.expect_total) {
    const auto total = static_cast<long long>(result.index.entries.size());
    std::cout << fmt::format("expected total {}: got {} (delta {:+}) under the trimming rule above\n",
                             *a.expect_total, total, total - *a.expect_total);
  }
}

void run_train(const TrainArgs& a, const CommonOptions& c, Reporter& r) {
  config::KeyValues flags;
  if (a.folds) flags["train.folds"] = std::to_string(*a.folds);
  if (a.epochs) flags["train.epochs"] = std::to_string(*a.epochs);
  if (a.phase1_epochs) flags["train.phase1_epochs"] = std::to_string(*a.phase1_epochs);
  if (a.batch_size) flags["train.batch_size"] = std::to_string(*a.batch_size);
  auto s = resolve_settings(c, flags);
  const auto cache_path = resolve_cache_path(a.cache);
  const auto model_cfg = config::model_config(s);
  model_cfg.validate();
  {
    const nn::MicroNet<float> probe(model_cfg, 0);
    if (!s.phase2_selector.empty()) s.train.phase2_trainable = train::parse_selector(s.phase2_selector, probe.num_layers());
  }
  s.train.validate();

  const auto cache = cache::SpectrogramCache::open(cache_path, parse_tier(a.tier), s.ingest.workers);
  const train::CacheSource source(cache);
  std::vector<std::string> subjects;
  for (std::size_t i = 0; i < source.size(); ++i) subjects.push_back(source.subject(i));
  const auto plan = dataset::build_folds(subjects, s.folds);

  std::filesystem::create_directories(a.out);
  json manifest;
  manifest["tool"] = "hypnospec";
  manifest["version"] = version();
  manifest["seed"] = s.train.seed;
  manifest["config"] = snapshot_json(s);
  manifest["cache"] = {{"path", cache_path.filename().string()},
                       {"entries", cache.size()},
                       {"crc32", crc_hex(file_crc32(cache_path))}};
  write_text(a.out / "manifest.json", manifest.dump(2) + "\n");

  const auto factory = [&](std::size_t fold) {
    return nn::MicroNet<float>(model_cfg, s.train.seed + 1000003ULL * (fold + 1));
  };
  const auto on_fold = [&](const train::FoldResult& f, nn::MicroNet<float>& model) {
    const std::string stem = fmt::format("fold-{:02}", f.fold);
    json head;
    head["type"] = "report";
    head["fold"] = f.fold;
    head["validation_subjects"] = f.validation_subjects;
    head["train_samples"] = f.train_samples;
    head["validation_samples"] = f.validation_samples;
    head["accuracy"] = f.report.accuracy;
    head["macro_f1"] = f.report.macro_f1;
    head["kappa"] = f.report.kappa;
    head["per_class_f1"] = f.report.per_class_f1;
    head["confusion"] = confusion_json(f.report.confusion);
    head["frozen_layers"] = f.outcome.frozen_layers;
    head["frozen_hash_phase1_end"] = crc_hex(f.outcome.frozen_hash_phase1_end);
    head["frozen_hash_final"] = crc_hex(f.outcome.frozen_hash_final);
    head["trainable_params_phase1"] = f.outcome.trainable_params_phase1;
    head["trainable_params_phase2"] = f.outcome.trainable_params_phase2;
    std::string text = head.dump() + "\n";
    for (std::size_t e = 0; e < f.outcome.history.size(); ++e) {
      const auto& h = f.outcome.history[e];
      json line;
      line["type"] = "epoch";
      line["epoch"] = e + 1;
      line["train_accuracy"] = h.train_accuracy;
      line["val_accuracy"] = double_or_null(h.val_accuracy);
      line["mean_loss"] = h.mean_loss;
      text += line.dump() + "\n";
    }
    write_text(a.out / (stem + ".jsonl"), text);
    write_text(a.out / (stem + ".txt"), metrics::render_table(f.report));
    nn::save_checkpoint(model, a.out / (stem + ".egmw"));
    if (f.outcome.frozen_hash_phase1_end != f.outcome.frozen_hash_final) {
      r.error(Errc::kInvariantViolation, fmt::format("fold {}: frozen layers changed during phase 2", f.fold));
    }
    std::cout << fmt::format("fold {:2} acc={:.4f} mf1={:.4f} kappa={:.4f} ({} val / {} train)\n", f.fold,
                             f.report.accuracy, f.report.macro_f1, f.report.kappa, f.validation_samples,
                             f.train_samples);
  };
  const auto cv = train::run_cv(factory, plan, source, s.train, on_fold);

  const auto& agg = cv.aggregate;
  json out;
  out["folds"] = cv.folds.size();
  out["accuracy"] = agg.accuracy;
  out["macro_f1"] = agg.macro_f1;
  out["kappa"] = agg.kappa;
  out["per_class_f1"] = agg.per_class_f1;
  json fold_acc = json::array();
  for (const auto& f : cv.folds) fold_acc.push_back(f.report.accuracy);
  out["fold_accuracy"] = fold_acc;
  out["pooled_confusion"] = confusion_json(agg.pooled);
  write_text(a.out / "aggregate.json", out.dump(2) + "\n");

  std::string table = fmt::format("mean over {} folds: acc={:.4f} mf1={:.4f} kappa={:.4f}\n", cv.folds.size(),
                                  agg.accuracy, agg.macro_f1, agg.kappa);
  table += "pooled predictions:\n" + metrics::render_table(metrics::report(agg.pooled));
  write_text(a.out / "aggregate.txt", table);
  std::cout << table;
}

void run_eval(const EvalArgs& a, const CommonOptions& c, Reporter& /*r*/) {
  const auto s = resolve_settings(c, {});
  const auto cache_path = resolve_cache_path(a.cache);
  nn::MicroNet<float> model(config::model_config(s), 0);
  nn::load_checkpoint(model, a.checkpoint);
  const auto cache = cache::SpectrogramCache::open(cache_path, cache::Tier::kDisk);
  const train::CacheSource source(cache);

  std::set<std::string> wanted;
  std::stringstream ss(a.subjects);
  for (std::string id; std::getline(ss, id, ',');) {
    if (!id.empty()) wanted.insert(id);
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (wanted.empty() || wanted.contains(source.subject(i))) idx.push_back(i);
  }
  if (idx.empty()) throw Error(Errc::kEmptyFold, "no cache entries match the requested subjects");
  std::vector<int> labels;
  const auto preds = train::predict(model, source, idx, s.train.batch_size, &labels);
  const auto rep = metrics::report(metrics::confusion(labels, preds, nn::kNumClasses));
  std::cout << metrics::render_table(rep);
  if (!a.out.empty()) write_text(a.out, metrics::render_line(rep) + "\n");
}

void run_bench_io(const BenchIoArgs& a, const CommonOptions& c, Reporter& /*r*/) {
  if (a.passes < 1) throw Error(Errc::kUsage, "--passes must be at least 1");
  const auto s = resolve_settings(c, {});
  const auto cache_path = resolve_cache_path(a.cache);
  std::vector<cache::Tier> tiers;
  if (a.tier == "both") {
    tiers = {cache::Tier::kDisk, cache::Tier::kMemory};
  } else {
    tiers = {parse_tier(a.tier)};
  }

  using clock = std::chrono::steady_clock;
  json report = json::array();
  for (const auto tier : tiers) {
    const auto t0 = clock::now();
    const auto cache = cache::SpectrogramCache::open(cache_path, tier, s.ingest.workers);
    const double open_s = std::chrono::duration<double>(clock::now() - t0).count();
    auto keys = cache.keys();
    if (keys.empty()) throw Error(Errc::kCacheFormat, "cache holds no entries");
    const char* tier_name = tier == cache::Tier::kDisk ? "disk" : "memory";
    for (const char* pattern : {"sequential", "shuffled"}) {
      std::vector<std::size_t> order(keys.size());
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(s.train.seed);
      std::uint64_t checksum = 0;
      const auto t1 = clock::now();
      for (int p = 0; p < a.passes; ++p) {
        if (pattern[1] == 'h') std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) checksum += cache.get(keys[i]).image.pixels[0];
      }
      const double secs = std::chrono::duration<double>(clock::now() - t1).count();
      const double n = static_cast<double>(keys.size()) * a.passes;
      const double rate = secs > 0 ? n / secs : 0.0;
      std::cout << fmt::format("tier={} pattern={} images={} seconds={:.6f} images_per_s={:.1f} open_s={:.6f}\n",
                               tier_name, pattern, static_cast<std::uint64_t>(n), secs, rate, open_s);
      report.push_back({{"tier", tier_name},
                        {"pattern", pattern},
                        {"images", static_cast<std::uint64_t>(n)},
                        {"seconds", secs},
                        {"images_per_s", rate},
                        {"open_seconds", open_s},
                        {"checksum", checksum}});
    }
  }
  if (!a.out.empty()) write_text(a.out, report.dump(2) + "\n");
}

void run_spectrogram(const SpectrogramArgs& a, const CommonOptions& c, Reporter& /*r*/) {
  const auto s = resolve_settings(c, {});
  const std::string channel = a.channel.empty() ? s.ingest.channel : a.channel;
  const auto file = edf::EdfFile::open(a.psg);
  const auto ch = file.read_channel(channel);
  const auto len = static_cast<std::size_t>(std::lround(s.ingest.epochs.epoch_seconds * ch.sample_rate));
  const std::size_t available = len ? ch.samples.size() / len : 0;
  if (a.epoch < 0 || static_cast<std::size_t>(a.epoch) >= available) {
    throw Error(Errc::kUsage,
                fmt::format("epoch {} out of range; '{}' holds {} epochs", a.epoch, a.psg.filename().string(), available));
  }
  const std::span<const double> samples(ch.samples.data() + static_cast<std::size_t>(a.epoch) * len, len);
  auto spec_cfg = s.ingest.spectro;
  spec_cfg.fs = ch.sample_rate;
  const auto rendered = spectro::render_image(spectro::stft_spectrogram(samples, spec_cfg), s.ingest.render);
  write_png(a.out, rendered.image);
  if (rendered.degenerate_range) std::cerr << "warning: DegenerateRange: epoch has constant power\n";
  std::cout << fmt::format("wrote {}x{} spectrogram of epoch {} to {}\n", rendered.image.width,
                           rendered.image.height, a.epoch, a.out.string());
}

}  // namespace hypnospec::tools
