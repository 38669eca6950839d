// tdsv/error.h

// Copyright 2026  The tdsv-backend Authors

// See ../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TDSV_ERROR_H_
#define TDSV_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tdsv {

enum class ErrorKind {
  // Data / format errors (exit code 2).
  kIo,
  kMissingHeader,
  kBadMagic,
  kTruncated,
  kDimensionMismatch,
  kDuplicateId,
  kNonFinite,
  kColumnCount,
  kUnknownLabel,
  kOutOfRange,
  kProbabilitySum,
  kParse,
  kMissingId,
  kStrictEnrollment,
  kMisaligned,
  kUnlabeled,
  kNoTargets,
  kEmptyClass,
  kInfeasibleConfig,
  // Numeric / degenerate errors (exit code 3).
  kZeroNorm,
  kDegenerateCentroid,
  kDegenerateCohort,
  kFloorViolation,
  // Caller misuse (exit code 1).
  kInvalidArgument,
};

std::string_view ErrorKindName(ErrorKind kind);

/// Process exit code for an error of the given kind:
/// 1 usage, 2 data/format, 3 numeric/degenerate.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &message) {
  throw Error(kind, message);
}

}  // namespace tdsv

#endif  // TDSV_ERROR_H_
