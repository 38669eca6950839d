// src/pooling.cc

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

#include "tdsv/pooling.h"

#include <algorithm>
#include <cmath>

#include "tdsv/error.h"
#include "tdsv/io.h"

namespace tdsv {

Matrix Matrix::FromRows(const std::vector<std::vector<double>> &rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols)
      Fail(ErrorKind::kDimensionMismatch,
           "row " + std::to_string(r) + " has " +
               std::to_string(rows[r].size()) + " columns, expected " +
               std::to_string(cols));
    std::copy(rows[r].begin(), rows[r].end(), m.Row(r).begin());
  }
  return m;
}

void ValidateFrames(const Matrix &frames) {
  if (frames.rows() == 0 || frames.cols() == 0)
    Fail(ErrorKind::kDimensionMismatch, "frame matrix must be at least 1x1");
  for (std::size_t t = 0; t < frames.rows(); ++t)
    for (double v : frames.Row(t))
      if (!std::isfinite(v))
        Fail(ErrorKind::kNonFinite,
             "non-finite feature in frame " + std::to_string(t));
}

std::vector<double> StatisticsPool(const Matrix &frames) {
  ValidateFrames(frames);
  const std::size_t T = frames.rows(), F = frames.cols();
  std::vector<double> out(2 * F, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < F; ++f) out[f] += frames(t, f);
  for (std::size_t f = 0; f < F; ++f) out[f] /= static_cast<double>(T);
  // Second pass about the mean; avoids cancellation in E[x^2] - E[x]^2.
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < F; ++f) {
      const double d = frames(t, f) - out[f];
      out[F + f] += d * d;
    }
  for (std::size_t f = 0; f < F; ++f)
    out[F + f] = std::sqrt(out[F + f] / static_cast<double>(T));
  return out;
}

AttentivePoolingResult AttentivePool(const Matrix &frames,
                                     const AttentivePoolingParams &params) {
  ValidateFrames(frames);
  const std::size_t T = frames.rows(), F = frames.cols();
  const std::size_t out_dim = params.value_weight.rows();
  if (params.score_weight.size() != F || params.value_weight.cols() != F ||
      params.value_bias.size() != out_dim || out_dim == 0)
    Fail(ErrorKind::kDimensionMismatch,
         "attentive pooling parameters do not match feature dimension " +
             std::to_string(F));

  AttentivePoolingResult result;
  std::vector<double> &alpha = result.alpha;
  alpha.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    double e = params.score_bias;
    for (std::size_t f = 0; f < F; ++f) e += params.score_weight[f] * frames(t, f);
    alpha[t] = e;
  }
  const double max_e = *std::max_element(alpha.begin(), alpha.end());
  double denom = 0.0;
  for (double &a : alpha) {
    a = std::exp(a - max_e);
    denom += a;
  }
  for (double &a : alpha) a /= denom;

  // sum_t alpha_t (W2 h_t + b2) = W2 (sum_t alpha_t h_t) + b2, since the
  // weights sum to one.
  std::vector<double> context(F, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < F; ++f) context[f] += alpha[t] * frames(t, f);
  result.output.resize(out_dim);
  for (std::size_t d = 0; d < out_dim; ++d) {
    double v = params.value_bias[d];
    for (std::size_t f = 0; f < F; ++f) v += params.value_weight(d, f) * context[f];
    result.output[d] = v;
  }
  return result;
}

Matrix ParseFrameFeatures(std::string_view text, const std::string &name) {
  std::vector<std::vector<std::string_view>> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto fields = SplitWhitespace(text.substr(pos, end - pos));
    if (!fields.empty()) lines.push_back(std::move(fields));
    pos = end + 1;
  }
  if (lines.empty() || lines[0].size() != 2)
    Fail(ErrorKind::kMissingHeader, name + ": expected header line \"T F\"");
  auto T = ParseInt(lines[0][0]);
  auto F = ParseInt(lines[0][1]);
  if (!T || !F || *T < 1 || *F < 1)
    Fail(ErrorKind::kParse, name + ": bad header, need T >= 1 and F >= 1");
  if (lines.size() - 1 != static_cast<std::size_t>(*T))
    Fail(ErrorKind::kTruncated, name + ": header declares " +
                                    std::to_string(*T) + " frames, found " +
                                    std::to_string(lines.size() - 1));
  Matrix m(static_cast<std::size_t>(*T), static_cast<std::size_t>(*F));
  for (std::size_t t = 0; t < m.rows(); ++t) {
    const auto &row = lines[t + 1];
    if (row.size() != m.cols())
      Fail(ErrorKind::kDimensionMismatch,
           name + ": frame " + std::to_string(t + 1) + " has " +
               std::to_string(row.size()) + " values, expected " +
               std::to_string(m.cols()));
    for (std::size_t f = 0; f < m.cols(); ++f) {
      auto v = ParseDouble(row[f]);
      if (!v)
        Fail(ErrorKind::kParse, name + ": frame " + std::to_string(t + 1) +
                                    ": bad value '" + std::string(row[f]) + "'");
      m(t, f) = *v;
    }
  }
  ValidateFrames(m);
  return m;
}

Matrix ReadFrameFeatures(const std::string &path) {
  return ParseFrameFeatures(ReadFileBytes(path), path);
}

}  // namespace tdsv
