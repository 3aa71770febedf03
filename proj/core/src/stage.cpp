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

#include "hypnospec/edf.hpp"

namespace hypnospec::edf {

StageLabel remap_stage(std::string_view raw_label) {
  // Rechtschaffen & Kales stages S3 and S4 both become N3.
  if (raw_label == "Sleep stage W") return StageLabel::kW;
  if (raw_label == "Sleep stage 1") return StageLabel::kN1;
  if (raw_label == "Sleep stage 2") return StageLabel::kN2;
  if (raw_label == "Sleep stage 3") return StageLabel::kN3;
  if (raw_label == "Sleep stage 4") return StageLabel::kN3;
  if (raw_label == "Sleep stage R") return StageLabel::kRem;
  return StageLabel::kExcluded;
}

std::string_view stage_name(StageLabel label) {
  switch (label) {
    case StageLabel::kW: return "W";
    case StageLabel::kN1: return "N1";
    case StageLabel::kN2: return "N2";
    case StageLabel::kN3: return "N3";
    case StageLabel::kRem: return "REM";
    case StageLabel::kExcluded: return "Excluded";
  }
  return "?";
}

}  // namespace hypnospec::edf
