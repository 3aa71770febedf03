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

#include "hypnospec/metrics.hpp"

#include <numeric>

#include <fmt/format.h>

#include "hypnospec/error.hpp"

namespace hypnospec::metrics {

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k != k) throw Error(Errc::kLengthMismatch, "confusion matrices of different size");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int k) {
  if (y_true.size() != y_pred.size()) {
    throw Error(Errc::kLengthMismatch, fmt::format("{} labels vs {} predictions", y_true.size(), y_pred.size()));
  }
  if (k < 1) throw Error(Errc::kClassOutOfRange, "class count must be positive");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= k || y_pred[i] < 0 || y_pred[i] >= k) {
      throw Error(Errc::kClassOutOfRange,
                  fmt::format("pair {} = ({}, {}) outside [0, {})", i, y_true[i], y_pred[i], k));
    }
    ++cm.at(y_true[i], y_pred[i]);
  }
  return cm;
}

EvalReport report(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) throw Error(Errc::kEmptyMatrix, "cannot report on an empty confusion matrix");
  const int k = cm.k;
  const double n = static_cast<double>(total);

  EvalReport r;
  r.confusion = cm;
  std::vector<double> rows(static_cast<std::size_t>(k), 0.0), cols(static_cast<std::size_t>(k), 0.0);
  double trace = 0.0;
  for (int t = 0; t < k; ++t) {
    for (int p = 0; p < k; ++p) {
      rows[static_cast<std::size_t>(t)] += static_cast<double>(cm.at(t, p));
      cols[static_cast<std::size_t>(p)] += static_cast<double>(cm.at(t, p));
    }
    trace += static_cast<double>(cm.at(t, t));
  }
  r.accuracy = trace / n;

  for (int c = 0; c < k; ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    const double row = rows[static_cast<std::size_t>(c)];
    const double col = cols[static_cast<std::size_t>(c)];
    const double precision = col > 0 ? tp / col : 0.0;
    const double recall = row > 0 ? tp / row : 0.0;
    const double f1 = (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    r.per_class_precision.push_back(precision);
    r.per_class_recall.push_back(recall);
    r.per_class_f1.push_back(f1);
    r.absent.push_back(row == 0 && col == 0);
  }
  r.macro_f1 = std::accumulate(r.per_class_f1.begin(), r.per_class_f1.end(), 0.0) / k;

  double chance = 0.0;
  for (int c = 0; c < k; ++c) chance += rows[static_cast<std::size_t>(c)] * cols[static_cast<std::size_t>(c)];
  chance /= n * n;
  r.kappa = chance == 1.0 ? 0.0 : (r.accuracy - chance) / (1.0 - chance);
  return r;
}

std::vector<std::string> class_names(int k) {
  if (k == 5) return {"W", "N1", "N2", "N3", "REM"};
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(fmt::format("C{}", i));
  return out;
}

std::string render_table(const EvalReport& r) {
  const int k = r.confusion.k;
  const auto names = class_names(k);
  std::string out;
  out += fmt::format("{:>8} {:>8} {:>8}", "ACC", "MF1", "Kappa");
  for (const auto& n : names) out += fmt::format(" {:>8}", n);
  out += '\n';
  out += fmt::format("{:>8.2f} {:>8.2f} {:>8.3f}", 100.0 * r.accuracy, 100.0 * r.macro_f1, r.kappa);
  for (const double f : r.per_class_f1) out += fmt::format(" {:>8.2f}", 100.0 * f);
  out += "\n\nconfusion (rows = true, cols = predicted)\n";
  out += fmt::format("{:>6}", "");
  for (const auto& n : names) out += fmt::format(" {:>7}", n);
  out += '\n';
  for (int t = 0; t < k; ++t) {
    out += fmt::format("{:>6}", names[static_cast<std::size_t>(t)]);
    for (int p = 0; p < k; ++p) out += fmt::format(" {:>7}", r.confusion.at(t, p));
    out += '\n';
  }
  return out;
}

std::string render_line(const EvalReport& r) {
  const auto names = class_names(r.confusion.k);
  std::string out = fmt::format("acc={:.17g} mf1={:.17g} kappa={:.17g}", r.accuracy, r.macro_f1, r.kappa);
  for (std::size_t i = 0; i < r.per_class_f1.size(); ++i) out += fmt::format(" f1_{}={:.17g}", names[i], r.per_class_f1[i]);
  out += fmt::format(" n={}", r.confusion.total());
  return out;
}

}  // namespace hypnospec::metrics
