// src/io.cc

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

#include "tdsv/io.h"

#include <unistd.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tdsv/error.h"

namespace tdsv {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary embedding I/O assumes a little-endian host");

std::string Where(const std::string &name, std::size_t line) {
  return name + ":" + std::to_string(line);
}

// Iterates non-empty lines, passing the 1-based line number.  A trailing
// '\r' is stripped.
template <typename Fn>
void ForEachLine(std::string_view text, Fn &&fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) fn(line, line_no);
    pos = end + 1;
  }
}

template <typename T>
void AppendLe(std::string *out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out->append(bytes, sizeof(T));
}

template <typename T>
T LoadLe(const char *p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

void AppendFloatText(std::string *out, float value) {
  char buf[32];
  // 9 significant digits round-trip any float32.
  int n = std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(value));
  out->append(buf, n);
}

}  // namespace

std::vector<std::string_view> SplitFields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t end = line.find(sep, pos);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return fields;
}

std::vector<std::string_view> SplitWhitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
      ++pos;
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    if (pos > start) fields.push_back(line.substr(start, pos - start));
  }
  return fields;
}

std::optional<double> ParseDouble(std::string_view token) {
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    return std::nullopt;
  return value;
}

std::optional<long long> ParseInt(std::string_view token) {
  if (token.empty()) return std::nullopt;
  long long value = 0;
  auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    return std::nullopt;
  return value;
}

std::string FormatFixed(double value, int decimals) {
  char buf[64];
  int n = std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string out(buf, n);
  // Avoid printing "-0.000000".
  if (out.front() == '-' &&
      out.find_first_not_of("-0.") == std::string::npos)
    out.erase(0, 1);
  return out;
}

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) Fail(ErrorKind::kIo, "error reading '" + path + "'");
  return std::move(buf).str();
}

void AtomicWriteFile(const std::string &path, std::string_view contents) {
  namespace fs = std::filesystem;
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorKind::kIo, "cannot open '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      Fail(ErrorKind::kIo, "error writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    Fail(ErrorKind::kIo, "cannot rename '" + tmp.string() + "' to '" + path +
                             "': " + ec.message());
  }
}

// ---------------------------------------------------------------------------
// Embeddings.

EmbeddingStore ParseBinaryEmbeddings(std::string_view bytes,
                                     const std::string &name) {
  constexpr std::size_t kHeaderSize = 8 + 4 + 8;
  if (bytes.empty())
    Fail(ErrorKind::kMissingHeader, name + ": missing header (empty file)");
  if (bytes.size() < kEmbeddingMagic.size() ||
      bytes.substr(0, kEmbeddingMagic.size()) != kEmbeddingMagic)
    Fail(ErrorKind::kBadMagic, name + ": bad magic at offset 0");
  if (bytes.size() < kHeaderSize)
    Fail(ErrorKind::kMissingHeader,
         name + ": missing header (file is " + std::to_string(bytes.size()) +
             " bytes)");
  const auto dim = LoadLe<std::uint32_t>(bytes.data() + 8);
  const auto count = LoadLe<std::uint64_t>(bytes.data() + 12);
  if (dim == 0)
    Fail(ErrorKind::kDimensionMismatch, name + ": header declares dim 0");

  EmbeddingStore store(dim);
  std::vector<float> values(dim);
  std::size_t offset = kHeaderSize;
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::string rec = " record " + std::to_string(r + 1) +
                            " at offset " + std::to_string(offset);
    if (bytes.size() - offset < 2)
      Fail(ErrorKind::kTruncated, name + ": truncated" + rec);
    const auto id_len = LoadLe<std::uint16_t>(bytes.data() + offset);
    const std::size_t need = 2 + std::size_t{id_len} + 4 * std::size_t{dim};
    if (bytes.size() - offset < need)
      Fail(ErrorKind::kTruncated, name + ": truncated" + rec);
    std::string id(bytes.substr(offset + 2, id_len));
    if (id.empty()) Fail(ErrorKind::kParse, name + ": empty id in" + rec);
    std::memcpy(values.data(), bytes.data() + offset + 2 + id_len, 4 * dim);
    try {
      store.Add(std::move(id), values);
    } catch (const Error &e) {
      Fail(e.kind(), name + ":" + rec + ": " + e.what());
    }
    offset += need;
  }
  if (offset != bytes.size())
    Fail(ErrorKind::kTruncated,
         name + ": " + std::to_string(bytes.size() - offset) +
             " trailing bytes after " + std::to_string(count) +
             " records at offset " + std::to_string(offset));
  return store;
}

EmbeddingStore ParseTextEmbeddings(std::string_view text,
                                   const std::string &name) {
  EmbeddingStore store;
  std::vector<float> values;
  std::size_t record = 0;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    ++record;
    auto fields = SplitWhitespace(line);
    if (fields.empty()) return;
    if (fields.size() < 2)
      Fail(ErrorKind::kColumnCount,
           Where(name, line_no) + ": record " + std::to_string(record) +
               " has no values");
    values.clear();
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = ParseDouble(fields[i]);
      if (!v)
        Fail(ErrorKind::kParse, Where(name, line_no) + ": bad value '" +
                                    std::string(fields[i]) + "'");
      values.push_back(static_cast<float>(*v));
    }
    if (store.dim() != 0 && values.size() != store.dim())
      Fail(ErrorKind::kDimensionMismatch,
           Where(name, line_no) + ": record " + std::to_string(record) +
               " ('" + std::string(fields[0]) + "') has dimension " +
               std::to_string(values.size()) + ", expected " +
               std::to_string(store.dim()));
    try {
      store.Add(std::string(fields[0]), values);
    } catch (const Error &e) {
      Fail(e.kind(), Where(name, line_no) + ": " + e.what());
    }
  });
  return store;
}

std::string SerializeBinaryEmbeddings(const EmbeddingStore &store) {
  std::string out(kEmbeddingMagic);
  out.reserve(20 + store.size() * (2 + 16 + 4 * store.dim()));
  AppendLe<std::uint32_t>(&out, static_cast<std::uint32_t>(store.dim()));
  AppendLe<std::uint64_t>(&out, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::string &id = store.id(i);
    if (id.size() > 0xFFFF)
      Fail(ErrorKind::kInvalidArgument, "id too long: '" + id + "'");
    AppendLe<std::uint16_t>(&out, static_cast<std::uint16_t>(id.size()));
    out += id;
    auto row = store.row(i);
    out.append(reinterpret_cast<const char *>(row.data()), 4 * row.size());
  }
  return out;
}

std::string SerializeTextEmbeddings(const EmbeddingStore &store) {
  std::string out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    out += store.id(i);
    for (float v : store.row(i)) {
      out += ' ';
      AppendFloatText(&out, v);
    }
    out += '\n';
  }
  return out;
}

EmbeddingStore ReadEmbeddings(const std::string &path,
                              EmbeddingFormat format) {
  std::string bytes = ReadFileBytes(path);
  return format == EmbeddingFormat::kBinary
             ? ParseBinaryEmbeddings(bytes, path)
             : ParseTextEmbeddings(bytes, path);
}

EmbeddingStore ReadEmbeddingsAuto(const std::string &path) {
  std::string bytes = ReadFileBytes(path);
  if (bytes.compare(0, kEmbeddingMagic.size(), kEmbeddingMagic) == 0)
    return ParseBinaryEmbeddings(bytes, path);
  return ParseTextEmbeddings(bytes, path);
}

void WriteEmbeddings(const std::string &path, const EmbeddingStore &store,
                     EmbeddingFormat format) {
  AtomicWriteFile(path, format == EmbeddingFormat::kBinary
                            ? SerializeBinaryEmbeddings(store)
                            : SerializeTextEmbeddings(store));
}

// ---------------------------------------------------------------------------
// Trials.

std::vector<Trial> ParseTrials(std::string_view text,
                               const std::string &name) {
  std::vector<Trial> trials;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 2 && fields.size() != 3)
      Fail(ErrorKind::kColumnCount,
           Where(name, line_no) + ": expected 2 or 3 columns, got " +
               std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      Fail(ErrorKind::kParse, Where(name, line_no) + ": empty id");
    Trial trial{std::string(fields[0]), std::string(fields[1]), std::nullopt};
    if (fields.size() == 3) {
      trial.label = ParseLabelToken(fields[2]);
      if (!trial.label)
        Fail(ErrorKind::kUnknownLabel, Where(name, line_no) +
                                           ": unknown label '" +
                                           std::string(fields[2]) + "'");
    }
    trials.push_back(std::move(trial));
  });
  return trials;
}

std::vector<Trial> ReadTrials(const std::string &path) {
  return ParseTrials(ReadFileBytes(path), path);
}

void WriteTrials(const std::string &path, const std::vector<Trial> &trials) {
  std::string out;
  for (const Trial &t : trials) {
    out += t.model_id;
    out += '\t';
    out += t.test_utt_id;
    if (t.label) {
      out += '\t';
      out += LabelToken(*t.label);
    }
    out += '\n';
  }
  AtomicWriteFile(path, out);
}

// ---------------------------------------------------------------------------
// Model definitions.

std::vector<ModelDefinition> ParseModels(std::string_view text,
                                         const std::string &name,
                                         const ModelReadOptions &opts) {
  std::vector<ModelDefinition> models;
  std::unordered_set<std::string> seen;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 3)
      Fail(ErrorKind::kColumnCount, Where(name, line_no) +
                                        ": expected 3 columns, got " +
                                        std::to_string(fields.size()));
    if (fields[0].empty())
      Fail(ErrorKind::kParse, Where(name, line_no) + ": empty model id");
    auto phrase = ParseInt(fields[1]);
    if (!phrase)
      Fail(ErrorKind::kParse, Where(name, line_no) + ": bad phrase id '" +
                                  std::string(fields[1]) + "'");
    if (*phrase < 0 || *phrase >= kNumPhrases)
      Fail(ErrorKind::kOutOfRange,
           Where(name, line_no) + ": phrase id " + std::to_string(*phrase) +
               " outside [0, " + std::to_string(kNumPhrases - 1) + "]");
    ModelDefinition model;
    model.model_id = std::string(fields[0]);
    model.phrase_id = static_cast<int>(*phrase);
    for (std::string_view utt : SplitFields(fields[2], ',')) {
      if (utt.empty())
        Fail(ErrorKind::kParse, Where(name, line_no) +
                                    ": empty enrollment utterance id");
      model.enrollment_utts.emplace_back(utt);
    }
    if (opts.strict_enrollment &&
        model.enrollment_utts.size() != kStrictEnrollmentCount)
      Fail(ErrorKind::kStrictEnrollment,
           Where(name, line_no) + ": model '" + model.model_id + "' has " +
               std::to_string(model.enrollment_utts.size()) +
               " enrollment utterances, strict mode requires 3");
    if (!seen.insert(model.model_id).second)
      Fail(ErrorKind::kDuplicateId, Where(name, line_no) +
                                        ": duplicate model id '" +
                                        model.model_id + "'");
    models.push_back(std::move(model));
  });
  return models;
}

std::vector<ModelDefinition> ReadModels(const std::string &path,
                                        const ModelReadOptions &opts) {
  return ParseModels(ReadFileBytes(path), path, opts);
}

void WriteModels(const std::string &path,
                 const std::vector<ModelDefinition> &models) {
  std::string out;
  for (const ModelDefinition &m : models) {
    out += m.model_id;
    out += '\t';
    out += std::to_string(m.phrase_id);
    out += '\t';
    for (std::size_t i = 0; i < m.enrollment_utts.size(); ++i) {
      if (i) out += ',';
      out += m.enrollment_utts[i];
    }
    out += '\n';
  }
  AtomicWriteFile(path, out);
}

// ---------------------------------------------------------------------------
// Phrase posteriors.

std::vector<PhrasePosterior> ParsePosteriors(std::string_view text,
                                             const std::string &name) {
  std::vector<PhrasePosterior> posteriors;
  std::unordered_set<std::string> seen;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 2)
      Fail(ErrorKind::kColumnCount, Where(name, line_no) +
                                        ": expected 2 columns, got " +
                                        std::to_string(fields.size()));
    if (fields[0].empty())
      Fail(ErrorKind::kParse, Where(name, line_no) + ": empty utterance id");
    auto values = SplitWhitespace(fields[1]);
    if (values.size() != kNumPhraseClasses)
      Fail(ErrorKind::kColumnCount,
           Where(name, line_no) + ": expected 11 probabilities, got " +
               std::to_string(values.size()));
    PhrasePosterior post;
    post.utt_id = std::string(fields[0]);
    double sum = 0.0;
    for (int k = 0; k < kNumPhraseClasses; ++k) {
      auto v = ParseDouble(values[k]);
      if (!v)
        Fail(ErrorKind::kParse, Where(name, line_no) + ": bad probability '" +
                                    std::string(values[k]) + "'");
      if (!std::isfinite(*v))
        Fail(ErrorKind::kNonFinite, Where(name, line_no) +
                                        ": non-finite probability for '" +
                                        post.utt_id + "'");
      if (*v < 0.0)
        Fail(ErrorKind::kOutOfRange, Where(name, line_no) +
                                         ": negative probability for '" +
                                         post.utt_id + "'");
      post.probs[k] = *v;
      sum += *v;
    }
    if (std::abs(sum - 1.0) > kPosteriorSumTolerance)
      Fail(ErrorKind::kProbabilitySum,
           Where(name, line_no) + ": posterior for '" + post.utt_id +
               "' sums to " + FormatFixed(sum, 6));
    if (!seen.insert(post.utt_id).second)
      Fail(ErrorKind::kDuplicateId, Where(name, line_no) +
                                        ": duplicate posterior for '" +
                                        post.utt_id + "'");
    posteriors.push_back(std::move(post));
  });
  return posteriors;
}

std::vector<PhrasePosterior> ReadPosteriors(const std::string &path) {
  return ParsePosteriors(ReadFileBytes(path), path);
}

void WritePosteriors(const std::string &path,
                     const std::vector<PhrasePosterior> &posteriors) {
  std::string out;
  char buf[32];
  for (const PhrasePosterior &p : posteriors) {
    out += p.utt_id;
    out += '\t';
    for (int k = 0; k < kNumPhraseClasses; ++k) {
      if (k) out += ' ';
      int n = std::snprintf(buf, sizeof(buf), "%.9g", p.probs[k]);
      out.append(buf, n);
    }
    out += '\n';
  }
  AtomicWriteFile(path, out);
}

// ---------------------------------------------------------------------------
// Scores.

std::vector<ScoreRecord> ParseScores(std::string_view text,
                                     const std::string &name) {
  std::vector<ScoreRecord> records;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 3)
      Fail(ErrorKind::kColumnCount, Where(name, line_no) +
                                        ": expected 3 columns, got " +
                                        std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      Fail(ErrorKind::kParse, Where(name, line_no) + ": empty id");
    auto score = ParseDouble(fields[2]);
    if (!score)
      Fail(ErrorKind::kParse, Where(name, line_no) + ": bad score '" +
                                  std::string(fields[2]) + "'");
    if (!std::isfinite(*score))
      Fail(ErrorKind::kNonFinite, Where(name, line_no) + ": non-finite score");
    records.push_back(
        {std::string(fields[0]), std::string(fields[1]), *score});
  });
  return records;
}

std::vector<ScoreRecord> ReadScores(const std::string &path) {
  return ParseScores(ReadFileBytes(path), path);
}

std::string SerializeScores(const std::vector<ScoreRecord> &records) {
  std::string out;
  out.reserve(records.size() * 32);
  for (const ScoreRecord &r : records) {
    out += r.model_id;
    out += '\t';
    out += r.test_utt_id;
    out += '\t';
    out += FormatFixed(r.score, 6);
    out += '\n';
  }
  return out;
}

void WriteScores(const std::string &path,
                 const std::vector<ScoreRecord> &records) {
  AtomicWriteFile(path, SerializeScores(records));
}

// ---------------------------------------------------------------------------
// Speaker map.

SpeakerMap ParseSpeakerMap(std::string_view text, const std::string &name) {
  SpeakerMap map;
  std::unordered_set<std::string> seen;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    auto fields = SplitFields(line, '\t');
    if (fields.size() != 2)
      Fail(ErrorKind::kColumnCount, Where(name, line_no) +
                                        ": expected 2 columns, got " +
                                        std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty())
      Fail(ErrorKind::kParse, Where(name, line_no) + ": empty id");
    if (!seen.emplace(fields[0]).second)
      Fail(ErrorKind::kDuplicateId, Where(name, line_no) +
                                        ": utterance '" +
                                        std::string(fields[0]) +
                                        "' mapped twice");
    map.emplace_back(std::string(fields[0]), std::string(fields[1]));
  });
  return map;
}

SpeakerMap ReadSpeakerMap(const std::string &path) {
  return ParseSpeakerMap(ReadFileBytes(path), path);
}

void WriteSpeakerMap(const std::string &path, const SpeakerMap &map) {
  std::string out;
  for (const auto &[utt, spk] : map) {
    out += utt;
    out += '\t';
    out += spk;
    out += '\n';
  }
  AtomicWriteFile(path, out);
}

}  // namespace tdsv
