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

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace hypnospec::tools;  // NOLINT

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--seed", c.seed, "Seed for every random choice");
  sub->add_option("--config", c.config_file, "key = value configuration file")->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "Override one configuration key (key=value); repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG sleep-stage spectrogram pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version());

  CommonOptions common;
  Reporter reporter(std::cerr);

  FixturesArgs fx;
  auto* fixtures = app.add_subcommand("fixtures", "Write a synthetic EDF corpus");
  fixtures->add_option("--out", fx.out, "Output directory")->required();
  fixtures->add_option("--subjects", fx.subjects, "Number of subjects");
  fixtures->add_option("--nights", fx.nights, "Nights per subject");
  fixtures->add_option("--epochs", fx.epochs, "Scored epochs per night");
  fixtures->add_option("--excluded", fx.excluded, "Unscored trailing epochs per night");
  add_common(fixtures, common);

  IngestArgs in;
  auto* ingest = app.add_subcommand("ingest", "Turn PSG/hypnogram pairs into a spectrogram cache");
  ingest->add_option("--data", in.data, "Directory with PSG and hypnogram files")->required();
  ingest->add_option("--cache", in.cache, "Cache file to write (default: $EEGM_CACHE)");
  ingest->add_option("--workers", in.workers, "Parallel transform workers");
  ingest->add_option("--expect-total", in.expect_total, "Reference epoch count; the delta is reported");
  add_common(ingest, common);

  TrainArgs tr;
  auto* trainc = app.add_subcommand("train", "Subject-wise cross-validated training");
  trainc->add_option("--cache", tr.cache, "Cache file (default: $EEGM_CACHE)");
  trainc->add_option("--out", tr.out, "Directory for reports, histories and checkpoints")->required();
  trainc->add_option("-k,--folds", tr.folds, "Number of folds");
  trainc->add_option("--epochs", tr.epochs, "Training epochs per fold");
  trainc->add_option("--phase1-epochs", tr.phase1_epochs, "Epochs before the lower layers are frozen");
  trainc->add_option("--batch-size", tr.batch_size, "Mini-batch size");
  trainc->add_option("--tier", tr.tier, "Cache tier: disk or memory");
  add_common(trainc, common);

  EvalArgs ev;
  auto* evalc = app.add_subcommand("eval", "Evaluate a checkpoint on cached spectrograms");
  evalc->add_option("--cache", ev.cache, "Cache file (default: $EEGM_CACHE)");
  evalc->add_option("--checkpoint", ev.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  evalc->add_option("--subjects", ev.subjects, "Comma-separated subject ids (default: all)");
  evalc->add_option("--out", ev.out, "Write the machine-readable report line here");
  add_common(evalc, common);

  BenchIoArgs bi;
  auto* bench = app.add_subcommand("bench-io", "Cache read throughput per tier and access pattern");
  bench->add_option("--cache", bi.cache, "Cache file (default: $EEGM_CACHE)");
  bench->add_option("--tier", bi.tier, "disk, memory or both");
  bench->add_option("--passes", bi.passes, "Passes over the cache per pattern");
  bench->add_option("--out", bi.out, "Write the JSON report here");
  add_common(bench, common);

  SpectrogramArgs sp;
  auto* spec = app.add_subcommand("spectrogram", "Render one epoch to PNG");
  spec->add_option("--psg", sp.psg, "PSG EDF file")->required()->check(CLI::ExistingFile);
  spec->add_option("--channel", sp.channel, "Channel label (default from configuration)");
  spec->add_option("--epoch", sp.epoch, "Epoch index")->required();
  spec->add_option("--out", sp.out, "Output PNG")->required();
  add_common(spec, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    reporter.error(hypnospec::Errc::kUsage, e.what());
    return 2;
  }

  try {
    if (*fixtures) run_fixtures(fx, common, reporter);
    if (*ingest) run_ingest(in, common, reporter);
    if (*trainc) run_train(tr, common, reporter);
    if (*evalc) run_eval(ev, common, reporter);
    if (*bench) run_bench_io(bi, common, reporter);
    if (*spec) run_spectrogram(sp, common, reporter);
  } catch (const hypnospec::Error& e) {
    reporter.error(e);
    return e.code() == hypnospec::Errc::kUsage ? 2 : 1;
  } catch (const std::exception& e) {
    reporter.error(hypnospec::Errc::kIo, e.what());
    return 1;
  }
  return reporter.count() == 0 ? 0 : 1;
}
