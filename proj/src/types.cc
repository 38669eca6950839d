// src/types.cc

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

#include <cmath>

#include "tdsv/error.h"
#include "tdsv/types.h"

namespace tdsv {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kMissingHeader: return "missing-header";
    case ErrorKind::kBadMagic: return "bad-magic";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kDuplicateId: return "duplicate-id";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kColumnCount: return "column-count";
    case ErrorKind::kUnknownLabel: return "unknown-label";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kProbabilitySum: return "probability-sum";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kMissingId: return "missing-id";
    case ErrorKind::kStrictEnrollment: return "strict-enrollment";
    case ErrorKind::kMisaligned: return "misaligned";
    case ErrorKind::kUnlabeled: return "unlabeled";
    case ErrorKind::kNoTargets: return "no-targets";
    case ErrorKind::kEmptyClass: return "empty-class";
    case ErrorKind::kInfeasibleConfig: return "infeasible-config";
    case ErrorKind::kZeroNorm: return "zero-norm";
    case ErrorKind::kDegenerateCentroid: return "degenerate-centroid";
    case ErrorKind::kDegenerateCohort: return "degenerate-cohort";
    case ErrorKind::kFloorViolation: return "floor-violation";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kZeroNorm:
    case ErrorKind::kDegenerateCentroid:
    case ErrorKind::kDegenerateCohort:
    case ErrorKind::kFloorViolation:
      return 3;
    case ErrorKind::kInvalidArgument:
      return 1;
    default:
      return 2;
  }
}

void EmbeddingStore::Add(std::string id, std::span<const float> values) {
  if (values.empty())
    Fail(ErrorKind::kDimensionMismatch,
         "embedding '" + id + "' has dimension 0");
  if (dim_ == 0 && ids_.empty()) dim_ = values.size();
  if (values.size() != dim_)
    Fail(ErrorKind::kDimensionMismatch,
         "embedding '" + id + "' (record " + std::to_string(ids_.size() + 1) +
             ") has dimension " + std::to_string(values.size()) +
             ", expected " + std::to_string(dim_));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]))
      Fail(ErrorKind::kNonFinite,
           "embedding '" + id + "' (record " +
               std::to_string(ids_.size() + 1) +
               ") has a non-finite value at component " + std::to_string(i));
  }
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (!inserted)
    Fail(ErrorKind::kDuplicateId,
         "duplicate embedding id '" + id + "' (record " +
             std::to_string(ids_.size() + 1) + ")");
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), values.begin(), values.end());
}

bool EmbeddingStore::Contains(std::string_view id) const {
  return index_.count(std::string(id)) != 0;
}

std::optional<std::size_t> EmbeddingStore::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingStore::Get(std::string_view id) const {
  auto index = Find(id);
  if (!index)
    Fail(ErrorKind::kMissingId,
         "no embedding for id '" + std::string(id) + "'");
  return row(*index);
}

std::string_view LabelToken(TrialLabel label) {
  switch (label) {
    case TrialLabel::kTargetCorrect: return "TC";
    case TrialLabel::kTargetWrong: return "TW";
    case TrialLabel::kImposterCorrect: return "IC";
    case TrialLabel::kImposterWrong: return "IW";
  }
  return "??";
}

std::optional<TrialLabel> ParseLabelToken(std::string_view token) {
  if (token == "TC") return TrialLabel::kTargetCorrect;
  if (token == "TW") return TrialLabel::kTargetWrong;
  if (token == "IC") return TrialLabel::kImposterCorrect;
  if (token == "IW") return TrialLabel::kImposterWrong;
  return std::nullopt;
}

}  // namespace tdsv
