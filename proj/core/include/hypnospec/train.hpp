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

#ifndef HYPNOSPEC_TRAIN_HPP_
#define HYPNOSPEC_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hypnospec/cache.hpp"
#include "hypnospec/dataset.hpp"
#include "hypnospec/image.hpp"
#include "hypnospec/metrics.hpp"
#include "hypnospec/nn/micronet.hpp"

namespace hypnospec::train {

template <typename T>
struct LossResult {
  double loss = 0.0;
  nn::Tensor4<T> grad_logits;  // (probs - onehot) / batch
};

// Mean sparse categorical cross-entropy and its gradient with respect to the
// logits feeding the softmax. Throws Error{kLabelOutOfRange}.
template <typename T>
LossResult<T> sparse_ce_loss(const nn::Tensor4<T>& probs, std::span<const int> labels);

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-7;
};

template <typename T>
struct AdamSlot {
  std::vector<T> m;
  std::vector<T> v;
};

// One bias-corrected Adam update of a single array at timestep t >= 1.
// Throws Error{kShapeMismatch}.
template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamSlot<T>& slot, const AdamHyper& hyper,
               std::int64_t t);

// Adam over a model; only layers flagged trainable are touched.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamHyper hyper = {}) : hyper_(hyper) {}

  void step(nn::MicroNet<T>& model);
  std::int64_t timestep() const { return t_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  AdamHyper hyper_;
  std::int64_t t_ = 0;
  std::map<std::string, AdamSlot<T>> slots_;
};

// Layers listed in `selector` become trainable, every other layer frozen.
// Throws Error{kBadSelector} for out-of-range indices.
template <typename T>
void set_trainable(nn::MicroNet<T>& model, std::span<const std::size_t> selector);
template <typename T>
void set_all_trainable(nn::MicroNet<T>& model);

// Last inverted-residual block plus the head.
template <typename T>
std::vector<std::size_t> default_phase2_selector(const nn::MicroNet<T>& model);

// "3-9", "0,2,5-7", "all", "none".
std::vector<std::size_t> parse_selector(const std::string& text, std::size_t num_layers);

struct Sample {
  RgbImage image;
  int label = 0;
};

class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual const std::string& subject(std::size_t i) const = 0;
  virtual Sample get(std::size_t i) const = 0;
};

class MemorySource final : public SampleSource {
 public:
  void add(std::string subject, RgbImage image, int label);
  std::size_t size() const override { return samples_.size(); }
  const std::string& subject(std::size_t i) const override { return subjects_.at(i); }
  Sample get(std::size_t i) const override { return samples_.at(i); }

 private:
  std::vector<std::string> subjects_;
  std::vector<Sample> samples_;
};

class CacheSource final : public SampleSource {
 public:
  explicit CacheSource(const cache::SpectrogramCache& cache);
  std::size_t size() const override { return keys_.size(); }
  const std::string& subject(std::size_t i) const override { return keys_.at(i).subject_id; }
  Sample get(std::size_t i) const override;
  const cache::CacheKey& key(std::size_t i) const { return keys_.at(i); }

 private:
  const cache::SpectrogramCache* cache_;
  std::vector<cache::CacheKey> keys_;
};

struct TrainConfig {
  int batch_size = 16;
  int epochs = 20;
  int phase1_epochs = 5;
  // Layers left trainable in phase 2; empty means default_phase2_selector.
  std::vector<std::size_t> phase2_trainable;
  AdamHyper adam;
  std::uint64_t seed = 42;
  int prefetch_depth = 2;
  bool validate_each_epoch = true;

  // Throws Error{kInvalidConfig}.
  void validate() const;
};

struct EpochStats {
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;  // NaN when there is no validation split
  double mean_loss = 0.0;
};

using TrainHistory = std::vector<EpochStats>;

struct TrainOutcome {
  TrainHistory history;
  std::vector<std::size_t> frozen_layers;  // phase-2 frozen layer indices
  std::uint32_t frozen_hash_phase1_end = 0;
  std::uint32_t frozen_hash_final = 0;
  std::size_t trainable_params_phase1 = 0;
  std::size_t trainable_params_phase2 = 0;
};

// Converts an RGB image to a (1, h, w, 3) tensor in [0, 1], resizing first
// when the dimensions differ.
template <typename T>
void image_to_tensor(const RgbImage& image, nn::Tensor4<T>& batch, int slot);

// Two-phase training: all layers for phase1_epochs, then only the selector.
TrainOutcome train_model(nn::MicroNet<float>& model, const SampleSource& source,
                         std::span<const std::size_t> train_indices, std::span<const std::size_t> val_indices,
                         const TrainConfig& cfg);

// Argmax predictions in inference mode.
std::vector<int> predict(nn::MicroNet<float>& model, const SampleSource& source, std::span<const std::size_t> indices,
                         int batch_size, std::vector<int>* labels = nullptr);

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::string> validation_subjects;
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
  metrics::EvalReport report;
  TrainOutcome outcome;
};

struct Aggregate {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
  std::vector<double> per_class_f1;
  metrics::ConfusionMatrix pooled;
};

struct CvResult {
  std::vector<FoldResult> folds;
  Aggregate aggregate;
};

using ModelFactory = std::function<nn::MicroNet<float>(std::size_t fold)>;
using FoldCallback = std::function<void(const FoldResult&, nn::MicroNet<float>&)>;

// Trains a fresh model per fold and evaluates it on the held-out subjects.
// Throws Error{kLeakage} if a validation subject reaches training,
// Error{kEmptyFold} if either side of a fold has no samples.
CvResult run_cv(const ModelFactory& factory, const dataset::FoldPlan& plan, const SampleSource& source,
                const TrainConfig& cfg, const FoldCallback& on_fold = {});

// Arithmetic means of the per-fold metrics plus the pooled confusion matrix.
Aggregate aggregate(std::span<const FoldResult> folds);

}  // namespace hypnospec::train

#endif  // HYPNOSPEC_TRAIN_HPP_
