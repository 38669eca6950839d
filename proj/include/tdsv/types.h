// tdsv/types.h

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

#ifndef TDSV_TYPES_H_
#define TDSV_TYPES_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tdsv {

/// Number of fixed phrases; the phrase classifier adds one free-text class.
inline constexpr int kNumPhrases = 10;
inline constexpr int kNumPhraseClasses = kNumPhrases + 1;
inline constexpr int kFreeTextClass = kNumPhrases;

/// Number of enrollment utterances per model in strict mode.
inline constexpr std::size_t kStrictEnrollmentCount = 3;

/// Fixed-dimension container of float vectors keyed by id.  Vectors are
/// stored contiguously in insertion order; the store is not modified after
/// loading, so concurrent readers need no synchronization.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  /// Appends a record.  Throws kDimensionMismatch, kDuplicateId or
  /// kNonFinite.  The first insert into a dimensionless store fixes dim.
  void Add(std::string id, std::span<const float> values);

  bool Contains(std::string_view id) const;
  /// Index of id, or std::nullopt.
  std::optional<std::size_t> Find(std::string_view id) const;
  /// Throws kMissingId when absent.
  std::span<const float> Get(std::string_view id) const;

  const std::string &id(std::size_t index) const { return ids_[index]; }
  std::span<const float> row(std::size_t index) const {
    return {data_.data() + index * dim_, dim_};
  }
  const std::vector<std::string> &ids() const { return ids_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class TrialLabel { kTargetCorrect, kTargetWrong, kImposterCorrect,
                        kImposterWrong };

std::string_view LabelToken(TrialLabel label);
std::optional<TrialLabel> ParseLabelToken(std::string_view token);

struct Trial {
  std::string model_id;
  std::string test_utt_id;
  std::optional<TrialLabel> label;
};

struct ModelDefinition {
  std::string model_id;
  int phrase_id = 0;
  std::vector<std::string> enrollment_utts;
};

struct PhrasePosterior {
  std::string utt_id;
  std::array<double, kNumPhraseClasses> probs{};
};

struct ScoreRecord {
  std::string model_id;
  std::string test_utt_id;
  double score = 0.0;

  bool operator==(const ScoreRecord &) const = default;
};

}  // namespace tdsv

#endif  // TDSV_TYPES_H_
