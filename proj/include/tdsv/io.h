// tdsv/io.h

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

// Readers and writers for the on-disk formats.
//
//  Binary embeddings:  "TDSVEMB1" | u32 dim | u64 count |
//                      count x [u16 id_len | id bytes | dim x f32], all LE.
//  Text embeddings:    "id v1 ... vD" per line.
//  Trials:             model_id<TAB>test_utt_id[<TAB>TC|TW|IC|IW]
//  Models:             model_id<TAB>phrase_id<TAB>utt1,utt2,utt3
//  Posteriors:         utt_id<TAB>p0 p1 ... p10
//  Scores:             model_id<TAB>test_utt_id<TAB>score (6 decimals)
//  Speaker map:        utt_id<TAB>speaker_id
//
// Every reader reports the file name and the 1-based line (text) or byte
// offset (binary) of the first offending record.

#ifndef TDSV_IO_H_
#define TDSV_IO_H_

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdsv/types.h"

namespace tdsv {

enum class EmbeddingFormat { kBinary, kText };

inline constexpr std::string_view kEmbeddingMagic = "TDSVEMB1";

/// Sum tolerance for a posterior vector.
inline constexpr double kPosteriorSumTolerance = 1e-4;

EmbeddingStore ReadEmbeddings(const std::string &path, EmbeddingFormat format);
/// Sniffs the magic; anything else is read as text.
EmbeddingStore ReadEmbeddingsAuto(const std::string &path);
void WriteEmbeddings(const std::string &path, const EmbeddingStore &store,
                     EmbeddingFormat format);

// Stream/buffer variants; `name` is used in error messages only.
EmbeddingStore ParseBinaryEmbeddings(std::string_view bytes,
                                     const std::string &name);
EmbeddingStore ParseTextEmbeddings(std::string_view text,
                                   const std::string &name);
std::string SerializeBinaryEmbeddings(const EmbeddingStore &store);
std::string SerializeTextEmbeddings(const EmbeddingStore &store);

std::vector<Trial> ReadTrials(const std::string &path);
std::vector<Trial> ParseTrials(std::string_view text, const std::string &name);
void WriteTrials(const std::string &path, const std::vector<Trial> &trials);

struct ModelReadOptions {
  // Require exactly three enrollment utterances.
  bool strict_enrollment = true;
};

std::vector<ModelDefinition> ReadModels(const std::string &path,
                                        const ModelReadOptions &opts = {});
std::vector<ModelDefinition> ParseModels(std::string_view text,
                                         const std::string &name,
                                         const ModelReadOptions &opts = {});
void WriteModels(const std::string &path,
                 const std::vector<ModelDefinition> &models);

std::vector<PhrasePosterior> ReadPosteriors(const std::string &path);
std::vector<PhrasePosterior> ParsePosteriors(std::string_view text,
                                             const std::string &name);
void WritePosteriors(const std::string &path,
                     const std::vector<PhrasePosterior> &posteriors);

std::vector<ScoreRecord> ReadScores(const std::string &path);
std::vector<ScoreRecord> ParseScores(std::string_view text,
                                     const std::string &name);
std::string SerializeScores(const std::vector<ScoreRecord> &records);
void WriteScores(const std::string &path,
                 const std::vector<ScoreRecord> &records);

using SpeakerMap = std::vector<std::pair<std::string, std::string>>;
SpeakerMap ReadSpeakerMap(const std::string &path);
SpeakerMap ParseSpeakerMap(std::string_view text, const std::string &name);
void WriteSpeakerMap(const std::string &path, const SpeakerMap &map);

/// Whole-file read; throws kIo.
std::string ReadFileBytes(const std::string &path);

/// Writes `path` via a temporary sibling and rename, so readers never see a
/// partially written file.
void AtomicWriteFile(const std::string &path, std::string_view contents);

/// Splits on `sep`, keeping empty fields.
std::vector<std::string_view> SplitFields(std::string_view line, char sep);
/// Splits on runs of spaces/tabs, dropping empty fields.
std::vector<std::string_view> SplitWhitespace(std::string_view line);

/// Strict full-token decimal parse; std::nullopt on any trailing junk.
std::optional<double> ParseDouble(std::string_view token);
std::optional<long long> ParseInt(std::string_view token);

/// Fixed-point formatting with the given number of decimals ("%.Nf").
std::string FormatFixed(double value, int decimals);

}  // namespace tdsv

#endif  // TDSV_IO_H_
