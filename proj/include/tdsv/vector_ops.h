// tdsv/vector_ops.h

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

#ifndef TDSV_VECTOR_OPS_H_
#define TDSV_VECTOR_OPS_H_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace tdsv {

// All reductions accumulate in double, strictly left to right.  Scores are
// therefore reproducible bit-for-bit by any loop that sums in index order.

template <typename A, typename B>
inline double Dot(std::span<const A> a, std::span<const B> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

template <typename A>
inline double Norm(std::span<const A> a) {
  return std::sqrt(Dot(a, a));
}

/// Cosine similarity given precomputed norms; the caller guarantees both
/// norms are positive.
template <typename A, typename B>
inline double CosineWithNorms(std::span<const A> a, double norm_a,
                              std::span<const B> b, double norm_b) {
  return Dot(a, b) / (norm_a * norm_b);
}

/// a . b / (|a| |b|).  Throws kZeroNorm for a zero vector and
/// kDimensionMismatch for unequal lengths.
double Cosine(std::span<const float> a, std::span<const float> b);
double Cosine(std::span<const double> a, std::span<const double> b);

/// Returns a / |a| in double precision; throws kZeroNorm.
std::vector<double> Normalized(std::span<const float> a);
std::vector<double> Normalized(std::span<const double> a);

}  // namespace tdsv

#endif  // TDSV_VECTOR_OPS_H_
