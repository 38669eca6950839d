// tdsv/loss.h

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

// Additive angular margin softmax with subcenters and the Inter-TopK
// penalty, with analytic gradients.
//
// For an embedding x and class prototypes w_{j,k}:
//   c_j     = max_k cos(x, w_{j,k})
//   z_y     = s * cos(theta_y + m)        (target)
//   z_j     = s * cos(theta_j - m')       (the K' hardest non-targets)
//   z_j     = s * c_j                     (other non-targets)
//   loss    = -log softmax(z)_y
// cos(theta + m) falls back to c - m sin(m) once theta + m > pi, and the
// penalty angle theta - m' is clipped at zero.

#ifndef TDSV_LOSS_H_
#define TDSV_LOSS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tdsv {

struct LossConfig {
  double scale = 32.0;
  double margin = 0.2;
  std::size_t subcenters = 2;
  std::size_t top_k = 5;
  double penalty_margin = 0.06;
};

/// C x K x F prototype tensor.  Prototypes are normalized on use, so they
/// need not be unit length, but must be nonzero.
class ClassWeights {
 public:
  ClassWeights() = default;
  ClassWeights(std::size_t classes, std::size_t subcenters, std::size_t dim)
      : classes_(classes), subcenters_(subcenters), dim_(dim),
        data_(classes * subcenters * dim, 0.0) {}

  std::size_t classes() const { return classes_; }
  std::size_t subcenters() const { return subcenters_; }
  std::size_t dim() const { return dim_; }

  std::span<double> Prototype(std::size_t j, std::size_t k) {
    return {data_.data() + (j * subcenters_ + k) * dim_, dim_};
  }
  std::span<const double> Prototype(std::size_t j, std::size_t k) const {
    return {data_.data() + (j * subcenters_ + k) * dim_, dim_};
  }
  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

 private:
  std::size_t classes_ = 0;
  std::size_t subcenters_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Throws kInvalidArgument unless s > 0, 0 <= m < pi/2, K >= 1,
/// K' < num_classes and m' >= 0.
void ValidateLossConfig(const LossConfig &config, std::size_t num_classes);

struct SubcenterCosineResult {
  std::vector<double> cosines;             // per class
  std::vector<std::size_t> best_subcenter; // argmax k, lowest on ties
};

SubcenterCosineResult SubcenterCosines(std::span<const double> x,
                                       const ClassWeights &weights);

/// cos(theta + m) for c = cos(theta) with the fallback above, and its
/// derivative with respect to c.
double MarginCosine(double c, double margin, double *derivative = nullptr);
/// cos(max(theta - m', 0)) and its derivative with respect to c.
double PenaltyCosine(double c, double penalty_margin,
                     double *derivative = nullptr);

struct AamSoftmaxResult {
  double loss = 0.0;
  std::vector<double> logits;
  std::vector<double> grad_x;
  // C x K x F, filled only when requested; zero for non-winning subcenters.
  std::vector<double> grad_weights;
};

AamSoftmaxResult AamSoftmax(std::span<const double> x,
                            const ClassWeights &weights, std::size_t label,
                            const LossConfig &config,
                            bool want_weight_grad = false);

struct GradientCheckReport {
  std::size_t instances = 0;
  double max_relative_error = 0.0;
  double max_weight_relative_error = 0.0;
};

/// Compares analytic gradients of random instances (C <= 6, F <= 10, with
/// subcenters and Inter-TopK active) against central differences.
GradientCheckReport RunLossGradientCheck(std::size_t instances,
                                         std::uint64_t seed,
                                         double step = 1e-4);

}  // namespace tdsv

#endif  // TDSV_LOSS_H_
