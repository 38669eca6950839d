// tdsv/pooling.h

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

// Utterance-level aggregation of frame-level feature sequences.

#ifndef TDSV_POOLING_H_
#define TDSV_POOLING_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tdsv {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Throws kDimensionMismatch if the rows are ragged.
  static Matrix FromRows(const std::vector<std::vector<double>> &rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<const double> Row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> Row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// T x F frame features, T >= 1, all entries finite.
void ValidateFrames(const Matrix &frames);

/// [mean over frames | population std over frames], length 2F.
std::vector<double> StatisticsPool(const Matrix &frames);

struct AttentivePoolingParams {
  std::vector<double> score_weight;  // length F
  double score_bias = 0.0;
  Matrix value_weight;               // Dout x F
  std::vector<double> value_bias;    // length Dout
};

struct AttentivePoolingResult {
  std::vector<double> output;  // length Dout
  std::vector<double> alpha;   // length T, attention weights
};

/// e_t = w . h_t + b;  alpha = softmax_t(e);  out = sum_t alpha_t (W2 h_t + b2).
/// Throws kDimensionMismatch on inconsistent shapes.
AttentivePoolingResult AttentivePool(const Matrix &frames,
                                     const AttentivePoolingParams &params);

/// Text matrix format: first line "T F", then T rows of F values.
Matrix ParseFrameFeatures(std::string_view text, const std::string &name);
Matrix ReadFrameFeatures(const std::string &path);

}  // namespace tdsv

#endif  // TDSV_POOLING_H_
