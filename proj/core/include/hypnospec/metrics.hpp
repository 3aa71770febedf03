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

#ifndef HYPNOSPEC_METRICS_HPP_
#define HYPNOSPEC_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypnospec::metrics {

// k x k counts; rows are true classes, columns predictions.
struct ConfusionMatrix {
  int k = 0;
  std::vector<std::int64_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int classes)
      : k(classes), counts(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0) {}

  std::int64_t& at(int t, int p) { return counts[static_cast<std::size_t>(t * k + p)]; }
  std::int64_t at(int t, int p) const { return counts[static_cast<std::size_t>(t * k + p)]; }
  std::int64_t total() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// Throws Error{kLengthMismatch, kClassOutOfRange}.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int k = 5);

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
  std::vector<double> per_class_f1;
  std::vector<double> per_class_precision;
  std::vector<double> per_class_recall;
  // Classes absent from both truth and prediction (their F1 is 0 by
  // convention).
  std::vector<bool> absent;
  ConfusionMatrix confusion;
};

// Accuracy, per-class precision/recall/F1 (0/0 -> 0), macro-F1, and Cohen's
// kappa (0 when chance agreement is 1). Throws Error{kEmptyMatrix}.
EvalReport report(const ConfusionMatrix& cm);

// Column names default to W N1 N2 N3 REM for five-class matrices.
std::vector<std::string> class_names(int k);

// Aligned plain-text table: overall metrics, per-class F1, confusion matrix.
std::string render_table(const EvalReport& r);
// One line of key=value pairs with the same columns.
std::string render_line(const EvalReport& r);

}  // namespace hypnospec::metrics

#endif  // HYPNOSPEC_METRICS_HPP_
