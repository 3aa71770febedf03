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

#ifndef HYPNOSPEC_ERROR_HPP_
#define HYPNOSPEC_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypnospec {

// Every failure the library reports carries one of these categories so
// callers (and the CLI's error lines) can branch on it without string
// matching.
enum class Errc {
  // edf
  kTruncatedHeader,
  kMalformedField,
  kInvariantViolation,
  kUnknownChannel,
  kTruncatedData,
  kMalformedTal,
  kNonMonotonicOnsets,
  // spectro
  kSignalTooShort,
  kInvalidConfig,
  kInvalidTarget,
  // dataset
  kMisalignedDuration,
  kTooFewSubjects,
  kCacheWriteFailure,
  kCacheFormat,
  kMissingKey,
  kChecksumMismatch,
  // nn / train
  kShapeMismatch,
  kLabelOutOfRange,
  kBadSelector,
  kEmptyFold,
  kLeakage,
  kCheckpointFormat,
  // metrics
  kLengthMismatch,
  kClassOutOfRange,
  kEmptyMatrix,
  // general
  kIo,
  kUsage,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kTruncatedHeader: return "TruncatedHeader";
    case Errc::kMalformedField: return "MalformedField";
    case Errc::kInvariantViolation: return "InvariantViolation";
    case Errc::kUnknownChannel: return "UnknownChannel";
    case Errc::kTruncatedData: return "TruncatedData";
    case Errc::kMalformedTal: return "MalformedTAL";
    case Errc::kNonMonotonicOnsets: return "NonMonotonicOnsets";
    case Errc::kSignalTooShort: return "SignalTooShort";
    case Errc::kInvalidConfig: return "InvalidConfig";
    case Errc::kInvalidTarget: return "InvalidTarget";
    case Errc::kMisalignedDuration: return "MisalignedDuration";
    case Errc::kTooFewSubjects: return "TooFewSubjects";
    case Errc::kCacheWriteFailure: return "CacheWriteFailure";
    case Errc::kCacheFormat: return "CacheFormat";
    case Errc::kMissingKey: return "MissingKey";
    case Errc::kChecksumMismatch: return "ChecksumMismatch";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kLabelOutOfRange: return "LabelOutOfRange";
    case Errc::kBadSelector: return "BadSelector";
    case Errc::kEmptyFold: return "EmptyFold";
    case Errc::kLeakage: return "Leakage";
    case Errc::kCheckpointFormat: return "CheckpointFormat";
    case Errc::kLengthMismatch: return "LengthMismatch";
    case Errc::kClassOutOfRange: return "ClassOutOfRange";
    case Errc::kEmptyMatrix: return "EmptyMatrix";
    case Errc::kIo: return "Io";
    case Errc::kUsage: return "Usage";
  }
  return "Unknown";
}

}  // namespace hypnospec

#endif  // HYPNOSPEC_ERROR_HPP_
