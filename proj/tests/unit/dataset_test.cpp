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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hypnospec/cache.hpp"
#include "hypnospec/dataset.hpp"
#include "hypnospec/error.hpp"
#include "hypnospec/fixtures.hpp"
#include "hypnospec/ingest.hpp"
#include "oracles.hpp"

namespace hypnospec {
namespace {

using dataset::EpochOptions;
using edf::SleepAnnotation;
using edf::StageLabel;

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::kUsage;
}

EpochOptions no_trim() {
  EpochOptions o;
  o.trim_wake_minutes.reset();
  return o;
}

TEST(Epochs, NinetySecondsOfN2GiveThreeEpochs) {
  const std::vector<double> x(9000, 1.0);
  const std::vector<SleepAnnotation> a = {{0, 90, "Sleep stage 2"}};
  const auto r = dataset::epoch_signal(x, 100.0, a, "S", 1, no_trim());
  ASSERT_EQ(r.epochs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.epochs[i].label, StageLabel::kN2);
    EXPECT_EQ(r.epochs[i].epoch_index, i);
    EXPECT_EQ(r.epochs[i].samples.size(), 3000u);
  }
}

TEST(Epochs, UnscoredSpanIsExcludedAndCounted) {
  const std::vector<double> x(6000, 0.0);
  const std::vector<SleepAnnotation> a = {{0, 60, "Sleep stage ?"}};
  const auto r = dataset::epoch_signal(x, 100.0, a, "S", 1, no_trim());
  EXPECT_TRUE(r.epochs.empty());
  EXPECT_EQ(r.summary.excluded, 2u);
  EXPECT_EQ(r.summary.total_slots, 2u);
}

TEST(Epochs, EightHourNight) {
  const std::vector<double> x(8 * 3600 * 100, 0.0);
  std::vector<SleepAnnotation> a;
  const char* cycle[] = {"Sleep stage 1", "Sleep stage 2", "Sleep stage 3", "Sleep stage R"};
  for (int i = 0; i < 96; ++i) a.push_back({i * 300.0, 300.0, cycle[i % 4]});
  const auto r = dataset::epoch_signal(x, 100.0, a, "S", 1);
  EXPECT_EQ(r.epochs.size(), 960u);
  for (const auto& e : r.epochs) ASSERT_EQ(e.samples.size(), 3000u);
}

TEST(Epochs, SamplesComeFromTheRightOffset) {
  std::vector<double> x(9000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const std::vector<SleepAnnotation> a = {{30, 30, "Sleep stage 4"}, {60, 30, "Sleep stage R"}};
  const auto r = dataset::epoch_signal(x, 100.0, a, "S", 2, no_trim());
  ASSERT_EQ(r.epochs.size(), 2u);
  EXPECT_EQ(r.epochs[0].samples.front(), 3000.0);
  EXPECT_EQ(r.epochs[0].label, StageLabel::kN3);
  EXPECT_EQ(r.epochs[1].samples.back(), 8999.0);
  EXPECT_EQ(r.epochs[1].night, 2);
}

TEST(Epochs, MisalignedDurationRejected) {
  const std::vector<double> x(9000, 0.0);
  const std::vector<SleepAnnotation> a = {{0, 45, "Sleep stage 2"}};
  EXPECT_EQ(code_of([&] { dataset::epoch_signal(x, 100.0, a, "S", 1); }), Errc::kMisalignedDuration);
}

TEST(Epochs, AnnotationPastSignalEndIsTruncatedWithWarning) {
  const std::vector<double> x(6000, 0.0);
  const std::vector<SleepAnnotation> a = {{0, 120, "Sleep stage 2"}};
  const auto r = dataset::epoch_signal(x, 100.0, a, "S", 1, no_trim());
  EXPECT_EQ(r.epochs.size(), 2u);
  EXPECT_EQ(r.summary.truncated, 2u);
  ASSERT_EQ(r.summary.warnings.size(), 1u);
  EXPECT_NE(r.summary.warnings[0].find("CoverageGap"), std::string::npos);
}

TEST(Epochs, WakeTrimmingKeepsMargin) {
  // 60 min wake, 30 min N2, 60 min wake; a 10 min margin keeps 20 wake epochs.
  const std::vector<double> x(150 * 60 * 100, 0.0);
  const std::vector<SleepAnnotation> a = {
      {0, 3600, "Sleep stage W"}, {3600, 1800, "Sleep stage 2"}, {5400, 3600, "Sleep stage W"}};
  EpochOptions o;
  o.trim_wake_minutes = 10.0;
  const auto r = dataset::epoch_signal(x, 100.0, a, "S", 1, o);
  EXPECT_EQ(r.summary.per_stage[0], 40u);
  EXPECT_EQ(r.summary.per_stage[2], 60u);
  EXPECT_EQ(r.summary.trimmed, 200u);
  EXPECT_EQ(r.epochs.front().epoch_index, 100u);
}

TEST(Epochs, AllWakeNightIsNotTrimmed) {
  const std::vector<double> x(200 * 3000, 0.0);
  const std::vector<SleepAnnotation> a = {{0, 6000, "Sleep stage W"}};
  const auto r = dataset::epoch_signal(x, 100.0, a, "S", 1);
  EXPECT_EQ(r.epochs.size(), 200u);
}

TEST(Epochs, SlotCountIsConserved) {
  std::mt19937_64 rng(12);
  const char* labels[] = {"Sleep stage W", "Sleep stage 1", "Sleep stage 2", "Sleep stage 3",
                          "Sleep stage 4", "Sleep stage R", "Sleep stage ?", "Movement time"};
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<SleepAnnotation> a;
    double t = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double d = 30.0 * std::uniform_int_distribution<int>(0, 12)(rng);
      a.push_back({t, d, labels[rng() % 8]});
      t += d;
    }
    const std::vector<double> x(static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 400)(rng)) * 3000, 0.0);
    EpochOptions o;
    if (trial % 2) o.trim_wake_minutes = 5.0;
    const auto r = dataset::epoch_signal(x, 100.0, a, "S", 1, o);
    const auto& s = r.summary;
    ASSERT_EQ(s.emitted + s.excluded + s.trimmed + s.truncated, s.total_slots);
    for (const auto& e : r.epochs) ASSERT_NE(e.label, StageLabel::kExcluded);
  }
}

std::vector<std::string> subjects(int n) {
  std::vector<std::string> s;
  for (int i = 0; i < n; ++i) s.push_back(fmt::format("SC4{:02}", i));
  return s;
}

TEST(Folds, TwentySubjectsLeaveOneOut) {
  const auto plan = dataset::build_folds(subjects(20), 20);
  ASSERT_EQ(plan.folds.size(), 20u);
  for (const auto& f : plan.folds) {
    EXPECT_EQ(f.validation.size(), 1u);
    EXPECT_EQ(f.training.size(), 19u);
  }
}

TEST(Folds, SingleFoldValidatesEverything) {
  const auto plan = dataset::build_folds(subjects(5), 1);
  ASSERT_EQ(plan.folds.size(), 1u);
  EXPECT_EQ(plan.folds[0].validation.size(), 5u);
  EXPECT_TRUE(plan.folds[0].training.empty());
}

TEST(Folds, TooFewSubjects) {
  EXPECT_EQ(code_of([] { dataset::build_folds(subjects(3), 4); }), Errc::kTooFewSubjects);
}

TEST(Folds, PartitionPropertyOnRandomSets) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 300; ++trial) {
    std::set<std::string> all;
    const int n = std::uniform_int_distribution<int>(1, 40)(rng);
    while (static_cast<int>(all.size()) < n) all.insert(fmt::format("S{}", rng() % 1000));
    std::vector<std::string> ids(all.begin(), all.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    const auto plan = dataset::build_folds(ids, k);
    std::set<std::string> seen;
    for (const auto& f : plan.folds) {
      for (const auto& v : f.validation) {
        ASSERT_FALSE(f.training.contains(v));
        ASSERT_TRUE(seen.insert(v).second);
      }
      std::set<std::string> u = f.training;
      u.insert(f.validation.begin(), f.validation.end());
      ASSERT_EQ(u, all);
    }
    ASSERT_EQ(seen, all);
  }
}

TEST(Folds, BothNightsShareAFold) {
  std::vector<dataset::LabeledEpoch> epochs;
  for (const auto& s : subjects(6)) {
    for (int night : {1, 2}) epochs.push_back({s, night, 0, {}, StageLabel::kW});
  }
  const auto plan = dataset::build_folds(epochs, 3);
  for (const auto& f : plan.folds) EXPECT_EQ(f.validation.size(), 2u);
}

RgbImage noise_image(int w, int h, std::mt19937_64& rng) {
  RgbImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng());
  return img;
}

TEST(Cache, RoundTripOnBothTiers) {
  testing::TempDir dir;
  std::mt19937_64 rng(2);
  std::vector<std::pair<cache::CacheKey, cache::CachedImage>> items;
  {
    cache::CacheWriter w(dir / "c.bin");
    for (int i = 0; i < 12; ++i) {
      cache::CacheKey k{i % 2 ? "SC401" : "SC400", 1 + i % 2, static_cast<std::uint32_t>(i)};
      cache::CachedImage v{noise_image(8 + i, 5, rng), static_cast<StageLabel>(i % 5)};
      w.append(k, v.label, v.image);
      items.emplace_back(k, v);
    }
    const auto idx = w.finish();
    EXPECT_EQ(idx.entries.size(), 12u);
  }
  for (auto tier : {cache::Tier::kDisk, cache::Tier::kMemory}) {
    const auto c = cache::SpectrogramCache::open(dir / "c.bin", tier, 3);
    ASSERT_EQ(c.size(), 12u);
    for (const auto& [k, v] : items) {
      const auto got = c.get(k);
      EXPECT_EQ(got.image, v.image);
      EXPECT_EQ(got.label, v.label);
    }
  }
}

TEST(Cache, HeaderBytesAreBitExact) {
  testing::TempDir dir;
  RgbImage img(1, 1);
  img.pixels = {1, 2, 3};
  {
    cache::CacheWriter w(dir / "c.bin");
    w.append({"AB", 2, 0x01020304u}, StageLabel::kRem, img);
    w.finish();
  }
  std::ifstream in(dir / "c.bin", std::ios::binary);
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(in)), {});
  const std::vector<std::uint8_t> head = {'E', 'G', 'M', 'C', 1, 0, 2, 0, 'A', 'B', 2, 4, 3, 2, 1, 4, 1, 0, 1, 0, 1, 2, 3};
  ASSERT_EQ(b.size(), head.size() + 4);
  EXPECT_TRUE(std::equal(head.begin(), head.end(), b.begin()));
  const std::uint32_t crc = cache::crc32(std::span(b).subspan(6, head.size() - 6));
  EXPECT_EQ(b[head.size()], crc & 0xff);
  EXPECT_EQ(b[head.size() + 3], crc >> 24);
}

TEST(Cache, FlippedByteIsChecksumMismatch) {
  testing::TempDir dir;
  std::mt19937_64 rng(3);
  cache::CacheKey key{"SC400", 1, 7};
  {
    cache::CacheWriter w(dir / "c.bin");
    w.append(key, StageLabel::kN1, noise_image(16, 16, rng));
    w.finish();
  }
  {
    std::fstream f(dir / "c.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    char c = 0;
    f.seekg(40);
    f.get(c);
    f.seekp(40);
    f.put(static_cast<char>(c ^ 0x10));
  }
  const auto c = cache::SpectrogramCache::open(dir / "c.bin", cache::Tier::kDisk);
  EXPECT_EQ(code_of([&] { c.get(key); }), Errc::kChecksumMismatch);
}

TEST(Cache, MissingKeyOnEmptyCache) {
  testing::TempDir dir;
  cache::CacheWriter(dir / "c.bin").finish();
  for (auto tier : {cache::Tier::kDisk, cache::Tier::kMemory}) {
    const auto c = cache::SpectrogramCache::open(dir / "c.bin", tier);
    EXPECT_EQ(c.size(), 0u);
    EXPECT_EQ(code_of([&] { c.get({"SC400", 1, 0}); }), Errc::kMissingKey);
  }
}

TEST(Cache, ExcludedLabelCannotBeStored) {
  testing::TempDir dir;
  cache::CacheWriter w(dir / "c.bin");
  EXPECT_THROW(w.append({"S", 1, 0}, StageLabel::kExcluded, RgbImage(1, 1)), Error);
}

TEST(Cache, BadMagicRejected) {
  testing::TempDir dir;
  std::ofstream(dir / "c.bin", std::ios::binary) << "NOPE\x01";
  EXPECT_EQ(code_of([&] { cache::SpectrogramCache::open(dir / "c.bin", cache::Tier::kDisk); }), Errc::kCacheFormat);
}

std::uint32_t file_crc(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(in)), {});
  return cache::crc32(b);
}

TEST(Ingest, FixtureCorpusProducesExpectedEntries) {
  testing::TempDir dir;
  fixtures::write_corpus(dir.path(), {});
  const auto disc = ingest::discover_recordings(dir.path());
  ASSERT_TRUE(disc.errors.empty());
  ASSERT_EQ(disc.recordings.size(), 2u);
  ingest::IngestOptions opt;
  opt.render.out_width = 32;
  opt.render.out_height = 32;
  const auto res = ingest::ingest(disc.recordings, dir / "cache.bin", opt);
  EXPECT_EQ(res.index.entries.size(), 20u);
  for (const auto& r : res.recordings) {
    EXPECT_EQ(r.epochs.emitted, 10u);
    EXPECT_EQ(r.epochs.excluded, 2u);
  }
  std::ostringstream lines;
  ingest::write_summary_lines(lines, res.recordings);
  std::istringstream in(lines.str());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("emitted").get<int>(), 10);
    EXPECT_EQ(j.at("excluded").get<int>(), 2);
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST(Ingest, WorkerCountAndOrderDoNotChangeBytes) {
  testing::TempDir dir;
  fixtures::CorpusOptions co;
  co.subjects = 3;
  co.nights = 2;
  co.epochs_per_night = 6;
  fixtures::write_corpus(dir.path(), co);
  auto recs = ingest::discover_recordings(dir.path()).recordings;
  ingest::IngestOptions opt;
  opt.render.out_width = 24;
  opt.render.out_height = 24;
  opt.chunk = 5;
  std::set<std::uint32_t> crcs;
  for (int workers : {1, 2, 8}) {
    opt.workers = workers;
    std::reverse(recs.begin(), recs.end());
    const auto path = dir / fmt::format("c{}.bin", workers);
    ingest::ingest(recs, path, opt);
    crcs.insert(file_crc(path));
  }
  EXPECT_EQ(crcs.size(), 1u);
}

TEST(Ingest, MissingPartnerNamesPsgFile) {
  testing::TempDir dir;
  const auto pairs = fixtures::write_corpus(dir.path(), {});
  std::filesystem::remove(pairs[1].hypnogram);
  const auto disc = ingest::discover_recordings(dir.path());
  ASSERT_EQ(disc.errors.size(), 1u);
  EXPECT_NE(disc.errors[0].find(pairs[1].psg.filename().string()), std::string::npos);
  EXPECT_EQ(disc.recordings.size(), 1u);
}

TEST(Ingest, EpochErrorsAreTagged) {
  testing::TempDir dir;
  std::vector<dataset::LabeledEpoch> epochs = {{"SC499", 1, 4, std::vector<double>(10, 0.0), StageLabel::kW}};
  try {
    ingest::ingest_epochs(epochs, dir / "c.bin", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSignalTooShort);
    EXPECT_NE(std::string(e.what()).find("SC499"), std::string::npos);
  }
}

}  // namespace
}  // namespace hypnospec
