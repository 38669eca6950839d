// src/vector_ops.cc

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

#include "tdsv/vector_ops.h"

#include <string>

#include "tdsv/error.h"

namespace tdsv {

namespace {

template <typename T>
double CosineImpl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size())
    Fail(ErrorKind::kDimensionMismatch,
         "cosine of vectors with dimensions " + std::to_string(a.size()) +
             " and " + std::to_string(b.size()));
  const double na = Norm(a);
  const double nb = Norm(b);
  if (na == 0.0 || nb == 0.0)
    Fail(ErrorKind::kZeroNorm, "cosine of a zero-norm vector");
  return CosineWithNorms(a, na, b, nb);
}

template <typename T>
std::vector<double> NormalizedImpl(std::span<const T> a) {
  const double n = Norm(a);
  if (n == 0.0) Fail(ErrorKind::kZeroNorm, "cannot normalize a zero vector");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = static_cast<double>(a[i]) / n;
  return out;
}

}  // namespace

double Cosine(std::span<const float> a, std::span<const float> b) {
  return CosineImpl(a, b);
}

double Cosine(std::span<const double> a, std::span<const double> b) {
  return CosineImpl(a, b);
}

std::vector<double> Normalized(std::span<const float> a) {
  return NormalizedImpl(a);
}

std::vector<double> Normalized(std::span<const double> a) {
  return NormalizedImpl(a);
}

}  // namespace tdsv
