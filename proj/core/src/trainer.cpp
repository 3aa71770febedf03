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

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <random>
#include <set>

#include <fmt/format.h>

#include "hypnospec/error.hpp"
#include "hypnospec/train.hpp"

namespace hypnospec::train {

void MemorySource::add(std::string subject, RgbImage image, int label) {
  subjects_.push_back(std::move(subject));
  samples_.push_back(Sample{std::move(image), label});
}

CacheSource::CacheSource(const cache::SpectrogramCache& cache) : cache_(&cache), keys_(cache.keys()) {}

Sample CacheSource::get(std::size_t i) const {
  cache::CachedImage c = cache_->get(keys_.at(i));
  return Sample{std::move(c.image), static_cast<int>(c.label)};
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(Errc::kInvalidConfig, "InvalidConfig: batch_size must be >= 1");
  if (epochs < 0) throw Error(Errc::kInvalidConfig, "InvalidConfig: epochs must be >= 0");
  if (phase1_epochs < 0 || phase1_epochs > epochs) {
    throw Error(Errc::kInvalidConfig, "InvalidConfig: phase1_epochs must lie in [0, epochs]");
  }
  if (prefetch_depth < 0) throw Error(Errc::kInvalidConfig, "InvalidConfig: prefetch_depth must be >= 0");
  if (!(adam.lr > 0.0) || !(adam.eps > 0.0) || adam.beta1 < 0.0 || adam.beta1 >= 1.0 || adam.beta2 < 0.0 ||
      adam.beta2 >= 1.0) {
    throw Error(Errc::kInvalidConfig, "InvalidConfig: Adam hyperparameters out of range");
  }
}

template <typename T>
void image_to_tensor(const RgbImage& image, nn::Tensor4<T>& batch, int slot) {
  const nn::Shape s = batch.shape();
  if (s.c != 3) throw Error(Errc::kShapeMismatch, "ShapeMismatch: model input must have 3 channels");
  const RgbImage* src = &image;
  RgbImage resized;
  if (image.width != s.w || image.height != s.h) {
    resized = resize_bilinear(image, s.w, s.h);
    src = &resized;
  }
  T* dst = batch.data() + batch.offset(slot, 0, 0, 0);
  const std::size_t count = static_cast<std::size_t>(s.h) * s.w * 3;
  for (std::size_t i = 0; i < count; ++i) dst[i] = static_cast<T>(src->pixels[i]) / T(255);
}

template void image_to_tensor(const RgbImage&, nn::Tensor4<float>&, int);
template void image_to_tensor(const RgbImage&, nn::Tensor4<double>&, int);

namespace {

struct Batch {
  nn::Tensor4<float> x;
  std::vector<int> labels;
};

Batch assemble(const SampleSource& source, std::span<const std::size_t> indices, const nn::Shape& item) {
  Batch b{nn::Tensor4<float>({static_cast<int>(indices.size()), item.h, item.w, item.c}), {}};
  b.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    Sample s = source.get(indices[i]);
    if (s.label < 0 || s.label >= nn::kNumClasses) {
      throw Error(Errc::kLabelOutOfRange, fmt::format("LabelOutOfRange: sample {} has label {}", indices[i], s.label));
    }
    image_to_tensor(s.image, b.x, static_cast<int>(i));
    b.labels.push_back(s.label);
  }
  return b;
}

// Walks `order` in batch-sized slices, decoding up to `depth` batches ahead
// on background threads. Results come back in order.
class Feeder {
 public:
  Feeder(const SampleSource& source, std::vector<std::size_t> order, int batch, int depth, nn::Shape item)
      : source_(source), order_(std::move(order)), batch_(static_cast<std::size_t>(batch)),
        depth_(static_cast<std::size_t>(depth)), item_(item) {}

  bool next(Batch& out) {
    if (depth_ == 0) {
      if (cursor_ >= order_.size()) return false;
      out = assemble(source_, slice(), item_);
      return true;
    }
    while (pending_.size() < depth_ && cursor_ < order_.size()) {
      auto idx = slice();
      pending_.push_back(std::async(std::launch::async, [this, idx] { return assemble(source_, idx, item_); }));
    }
    if (pending_.empty()) return false;
    out = pending_.front().get();
    pending_.pop_front();
    return true;
  }

  ~Feeder() {
    for (auto& f : pending_) {
      if (f.valid()) f.wait();
    }
  }

 private:
  std::span<const std::size_t> slice() {
    const std::size_t n = std::min(batch_, order_.size() - cursor_);
    std::span<const std::size_t> s(order_.data() + cursor_, n);
    cursor_ += n;
    return s;
  }

  const SampleSource& source_;
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t depth_;
  nn::Shape item_;
  std::size_t cursor_ = 0;
  std::deque<std::future<Batch>> pending_;
};

int argmax_row(const float* row, int k) {
  return static_cast<int>(std::max_element(row, row + k) - row);
}

std::uint64_t epoch_seed(std::uint64_t seed, int epoch) {
  return seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch + 1));
}

}  // namespace

std::vector<int> predict(nn::MicroNet<float>& model, const SampleSource& source, std::span<const std::size_t> indices,
                         int batch_size, std::vector<int>* labels) {
  std::vector<int> preds;
  preds.reserve(indices.size());
  if (labels) labels->clear();
  Feeder feed(source, {indices.begin(), indices.end()}, std::max(batch_size, 1), 1, model.input_shape(1));
  Batch b;
  while (feed.next(b)) {
    const nn::Tensor4<float> probs = model.forward(b.x, nn::Mode::kInfer);
    const int k = probs.shape().c;
    for (int i = 0; i < probs.shape().n; ++i) preds.push_back(argmax_row(probs.data() + static_cast<std::size_t>(i) * k, k));
    if (labels) labels->insert(labels->end(), b.labels.begin(), b.labels.end());
  }
  return preds;
}

TrainOutcome train_model(nn::MicroNet<float>& model, const SampleSource& source,
                         std::span<const std::size_t> train_indices, std::span<const std::size_t> val_indices,
                         const TrainConfig& cfg) {
  cfg.validate();
  TrainOutcome out;
  const std::vector<std::size_t> selector =
      cfg.phase2_trainable.empty() ? default_phase2_selector(model) : cfg.phase2_trainable;
  {
    const std::set<std::size_t> keep(selector.begin(), selector.end());
    for (std::size_t i = 0; i < model.num_layers(); ++i) {
      if (!keep.contains(i)) out.frozen_layers.push_back(i);
    }
  }

  set_all_trainable(model);
  out.trainable_params_phase1 = nn::count_params(model, true);
  if (cfg.phase1_epochs == 0) set_trainable(model, selector);

  Adam<float> opt(cfg.adam);
  const nn::Shape item = model.input_shape(1);
  std::vector<std::size_t> order(train_indices.begin(), train_indices.end());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch == cfg.phase1_epochs) {
      out.frozen_hash_phase1_end = nn::parameter_hash(model, out.frozen_layers);
      set_trainable(model, selector);
      out.trainable_params_phase2 = nn::count_params(model, true);
    }
    std::mt19937_64 rng(epoch_seed(cfg.seed, epoch));
    std::vector<std::size_t> shuffled(order);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    Feeder feed(source, std::move(shuffled), cfg.batch_size, cfg.prefetch_depth, item);
    Batch b;
    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t correct = 0;
    while (feed.next(b)) {
      const nn::Tensor4<float> probs = model.forward(b.x, nn::Mode::kTrain);
      const int n = probs.shape().n;
      const int k = probs.shape().c;
      for (int i = 0; i < n; ++i) {
        if (argmax_row(probs.data() + static_cast<std::size_t>(i) * k, k) == b.labels[static_cast<std::size_t>(i)]) {
          ++correct;
        }
      }
      LossResult<float> loss = sparse_ce_loss(probs, std::span<const int>(b.labels));
      loss_sum += loss.loss * n;
      seen += static_cast<std::size_t>(n);
      model.backward_from_logits(loss.grad_logits);
      opt.step(model);
    }

    EpochStats st;
    st.train_accuracy = seen ? static_cast<double>(correct) / seen : 0.0;
    st.mean_loss = seen ? loss_sum / seen : 0.0;
    st.val_accuracy = std::numeric_limits<double>::quiet_NaN();
    if (cfg.validate_each_epoch && !val_indices.empty()) {
      std::vector<int> labels;
      const std::vector<int> preds = predict(model, source, val_indices, cfg.batch_size, &labels);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i] ? 1 : 0;
      st.val_accuracy = static_cast<double>(hits) / static_cast<double>(preds.size());
    }
    out.history.push_back(st);
  }

  if (cfg.epochs == cfg.phase1_epochs) {
    // Phase 2 never ran; the selector still applies to whatever comes next.
    out.frozen_hash_phase1_end = nn::parameter_hash(model, out.frozen_layers);
    set_trainable(model, selector);
    out.trainable_params_phase2 = nn::count_params(model, true);
  }
  if (cfg.phase1_epochs == 0) {
    out.trainable_params_phase2 = nn::count_params(model, true);
  }
  out.frozen_hash_final = nn::parameter_hash(model, out.frozen_layers);
  return out;
}

Aggregate aggregate(std::span<const FoldResult> folds) {
  Aggregate a;
  if (folds.empty()) return a;
  const int k = folds.front().report.confusion.k;
  a.pooled = metrics::ConfusionMatrix(k);
  a.per_class_f1.assign(static_cast<std::size_t>(k), 0.0);
  for (const auto& f : folds) {
    a.accuracy += f.report.accuracy;
    a.macro_f1 += f.report.macro_f1;
    a.kappa += f.report.kappa;
    for (int c = 0; c < k; ++c) a.per_class_f1[static_cast<std::size_t>(c)] += f.report.per_class_f1[static_cast<std::size_t>(c)];
    a.pooled += f.report.confusion;
  }
  const double n = static_cast<double>(folds.size());
  a.accuracy /= n;
  a.macro_f1 /= n;
  a.kappa /= n;
  for (double& v : a.per_class_f1) v /= n;
  return a;
}

CvResult run_cv(const ModelFactory& factory, const dataset::FoldPlan& plan, const SampleSource& source,
                const TrainConfig& cfg, const FoldCallback& on_fold) {
  cfg.validate();
  CvResult result;
  for (std::size_t fi = 0; fi < plan.folds.size(); ++fi) {
    const dataset::Fold& fold = plan.folds[fi];
    for (const auto& s : fold.validation) {
      if (fold.training.contains(s)) {
        throw Error(Errc::kLeakage, fmt::format("Leakage: subject '{}' is in both splits of fold {}", s, fi));
      }
    }
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    for (std::size_t i = 0; i < source.size(); ++i) {
      const std::string& subj = source.subject(i);
      if (fold.validation.contains(subj)) {
        val_idx.push_back(i);
      } else if (fold.training.contains(subj)) {
        train_idx.push_back(i);
      }
    }
    if (train_idx.empty() || val_idx.empty()) {
      throw Error(Errc::kEmptyFold, fmt::format("EmptyFold: fold {} has {} training and {} validation samples", fi,
                                                train_idx.size(), val_idx.size()));
    }

    nn::MicroNet<float> model = factory(fi);
    FoldResult fr;
    fr.fold = fi;
    fr.validation_subjects.assign(fold.validation.begin(), fold.validation.end());
    fr.train_samples = train_idx.size();
    fr.validation_samples = val_idx.size();
    fr.outcome = train_model(model, source, train_idx, val_idx, cfg);

    std::vector<int> labels;
    const std::vector<int> preds = predict(model, source, val_idx, cfg.batch_size, &labels);
    fr.report = metrics::report(metrics::confusion(labels, preds, nn::kNumClasses));
    if (on_fold) on_fold(fr, model);
    result.folds.push_back(std::move(fr));
  }
  result.aggregate = aggregate(result.folds);
  return result;
}

}  // namespace hypnospec::train
