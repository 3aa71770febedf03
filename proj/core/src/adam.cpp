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
#include <charconv>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "hypnospec/error.hpp"
#include "hypnospec/train.hpp"

namespace hypnospec::train {

template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamSlot<T>& slot, const AdamHyper& hyper,
               std::int64_t t) {
  if (param.size() != grad.size()) {
    throw Error(Errc::kShapeMismatch,
                fmt::format("ShapeMismatch: parameter has {} values, gradient {}", param.size(), grad.size()));
  }
  if (t < 1) throw Error(Errc::kInvalidConfig, "InvalidConfig: Adam timestep must be >= 1");
  if (slot.m.size() != param.size()) slot.m.assign(param.size(), T(0));
  if (slot.v.size() != param.size()) slot.v.assign(param.size(), T(0));

  const double b1 = hyper.beta1;
  const double b2 = hyper.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double m = b1 * slot.m[i] + (1.0 - b1) * g;
    const double v = b2 * slot.v[i] + (1.0 - b2) * g * g;
    slot.m[i] = static_cast<T>(m);
    slot.v[i] = static_cast<T>(v);
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    param[i] = static_cast<T>(param[i] - hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps));
  }
}

template <typename T>
void Adam<T>::step(nn::MicroNet<T>& model) {
  ++t_;
  for (auto& p : model.params(/*trainable_only=*/true)) {
    adam_step<T>(p.value, p.grad, slots_[p.name], hyper_, t_);
  }
}

template <typename T>
void set_trainable(nn::MicroNet<T>& model, std::span<const std::size_t> selector) {
  const std::set<std::size_t> chosen(selector.begin(), selector.end());
  for (std::size_t idx : chosen) {
    if (idx >= model.num_layers()) {
      throw Error(Errc::kBadSelector,
                  fmt::format("BadSelector: layer {} does not exist (model has {})", idx, model.num_layers()));
    }
  }
  for (std::size_t i = 0; i < model.num_layers(); ++i) model.layer(i).set_trainable(chosen.contains(i));
}

template <typename T>
void set_all_trainable(nn::MicroNet<T>& model) {
  for (std::size_t i = 0; i < model.num_layers(); ++i) model.layer(i).set_trainable(true);
}

template <typename T>
std::vector<std::size_t> default_phase2_selector(const nn::MicroNet<T>& model) {
  std::vector<std::size_t> out;
  const std::size_t first = model.head_begin() == 0 ? 0 : model.head_begin() - 1;
  for (std::size_t i = first; i < model.num_layers(); ++i) out.push_back(i);
  return out;
}

namespace {

std::size_t parse_index(std::string_view s, const std::string& whole) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end) {
    throw Error(Errc::kBadSelector, fmt::format("BadSelector: cannot parse '{}'", whole));
  }
  return v;
}

}  // namespace

std::vector<std::size_t> parse_selector(const std::string& text, std::size_t num_layers) {
  std::string t;
  for (char c : text) {
    if (c != ' ' && c != '\t') t.push_back(c);
  }
  std::set<std::size_t> out;
  if (t == "all") {
    for (std::size_t i = 0; i < num_layers; ++i) out.insert(i);
  } else if (t != "none" && !t.empty()) {
    std::string_view rest(t);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto dash = item.find('-');
      std::size_t lo = 0;
      std::size_t hi = 0;
      if (dash == std::string_view::npos) {
        lo = hi = parse_index(item, text);
      } else {
        lo = parse_index(item.substr(0, dash), text);
        hi = parse_index(item.substr(dash + 1), text);
      }
      if (lo > hi || hi >= num_layers) {
        throw Error(Errc::kBadSelector,
                    fmt::format("BadSelector: '{}' outside layers 0..{}", text, num_layers == 0 ? 0 : num_layers - 1));
      }
      for (std::size_t i = lo; i <= hi; ++i) out.insert(i);
    }
  }
  return {out.begin(), out.end()};
}

template void adam_step(std::span<float>, std::span<const float>, AdamSlot<float>&, const AdamHyper&, std::int64_t);
template void adam_step(std::span<double>, std::span<const double>, AdamSlot<double>&, const AdamHyper&,
                        std::int64_t);
template class Adam<float>;
template class Adam<double>;
template void set_trainable(nn::MicroNet<float>&, std::span<const std::size_t>);
template void set_trainable(nn::MicroNet<double>&, std::span<const std::size_t>);
template void set_all_trainable(nn::MicroNet<float>&);
template void set_all_trainable(nn::MicroNet<double>&);
template std::vector<std::size_t> default_phase2_selector(const nn::MicroNet<float>&);
template std::vector<std::size_t> default_phase2_selector(const nn::MicroNet<double>&);

}  // namespace hypnospec::train
