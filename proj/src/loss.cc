// src/loss.cc

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

#include "tdsv/loss.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "tdsv/error.h"
#include "tdsv/rng.h"
#include "tdsv/vector_ops.h"

namespace tdsv {

namespace {

// sin(theta) is clamped away from zero in derivatives; at theta = 0 the
// margin function has an unbounded slope.
constexpr double kMinSine = 1e-12;

double SineOf(double c) { return std::sqrt(std::max(0.0, 1.0 - c * c)); }

// Indices of the `k` non-target classes with the largest cosines; ties
// prefer the lower index.
std::vector<std::size_t> HardestNonTargets(const std::vector<double> &cosines,
                                           std::size_t label, std::size_t k) {
  std::vector<std::size_t> order;
  order.reserve(cosines.size());
  for (std::size_t j = 0; j < cosines.size(); ++j)
    if (j != label) order.push_back(j);
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (cosines[a] != cosines[b]) return cosines[a] > cosines[b];
                      return a < b;
                    });
  order.resize(k);
  return order;
}

}  // namespace

void ValidateLossConfig(const LossConfig &config, std::size_t num_classes) {
  if (!(config.scale > 0.0))
    Fail(ErrorKind::kInvalidArgument, "scale must be positive");
  if (!(config.margin >= 0.0 && config.margin < std::numbers::pi / 2))
    Fail(ErrorKind::kInvalidArgument, "margin must lie in [0, pi/2)");
  if (config.subcenters < 1)
    Fail(ErrorKind::kInvalidArgument, "need at least one subcenter");
  if (config.top_k >= num_classes)
    Fail(ErrorKind::kInvalidArgument,
         "top-k " + std::to_string(config.top_k) +
             " must be below the number of classes " +
             std::to_string(num_classes));
  if (!(config.penalty_margin >= 0.0))
    Fail(ErrorKind::kInvalidArgument, "penalty margin must be non-negative");
}

SubcenterCosineResult SubcenterCosines(std::span<const double> x,
                                       const ClassWeights &weights) {
  if (x.size() != weights.dim())
    Fail(ErrorKind::kDimensionMismatch,
         "embedding dimension " + std::to_string(x.size()) +
             " does not match prototype dimension " +
             std::to_string(weights.dim()));
  const double xn = Norm(x);
  if (xn == 0.0) Fail(ErrorKind::kZeroNorm, "zero-norm embedding");
  SubcenterCosineResult out;
  out.cosines.assign(weights.classes(), -2.0);
  out.best_subcenter.assign(weights.classes(), 0);
  for (std::size_t j = 0; j < weights.classes(); ++j) {
    for (std::size_t k = 0; k < weights.subcenters(); ++k) {
      auto w = weights.Prototype(j, k);
      const double wn = Norm(w);
      if (wn == 0.0)
        Fail(ErrorKind::kZeroNorm, "prototype (" + std::to_string(j) + ", " +
                                       std::to_string(k) + ") has zero norm");
      const double c = CosineWithNorms(x, xn, w, wn);
      if (c > out.cosines[j]) {
        out.cosines[j] = c;
        out.best_subcenter[j] = k;
      }
    }
  }
  return out;
}

double MarginCosine(double c, double margin, double *derivative) {
  if (margin == 0.0) {
    if (derivative) *derivative = 1.0;
    return c;
  }
  const double cos_m = std::cos(margin);
  const double sin_m = std::sin(margin);
  // theta + m > pi  <=>  c < cos(pi - m).
  if (c < std::cos(std::numbers::pi - margin)) {
    if (derivative) *derivative = 1.0;
    return c - margin * sin_m;
  }
  const double sin_t = SineOf(c);
  if (derivative) *derivative = cos_m + sin_m * c / std::max(sin_t, kMinSine);
  return c * cos_m - sin_t * sin_m;
}

double PenaltyCosine(double c, double penalty_margin, double *derivative) {
  if (penalty_margin == 0.0) {
    if (derivative) *derivative = 1.0;
    return c;
  }
  const double cos_p = std::cos(penalty_margin);
  const double sin_p = std::sin(penalty_margin);
  // theta < m'  <=>  c > cos(m'): angle clipped at zero.
  if (c > cos_p) {
    if (derivative) *derivative = 0.0;
    return 1.0;
  }
  const double sin_t = SineOf(c);
  if (derivative) *derivative = cos_p - sin_p * c / std::max(sin_t, kMinSine);
  return c * cos_p + sin_t * sin_p;
}

AamSoftmaxResult AamSoftmax(std::span<const double> x,
                            const ClassWeights &weights, std::size_t label,
                            const LossConfig &config, bool want_weight_grad) {
  const std::size_t C = weights.classes();
  const std::size_t F = weights.dim();
  ValidateLossConfig(config, C);
  if (weights.subcenters() != config.subcenters)
    Fail(ErrorKind::kDimensionMismatch,
         "weights have " + std::to_string(weights.subcenters()) +
             " subcenters, config says " + std::to_string(config.subcenters));
  if (label >= C)
    Fail(ErrorKind::kInvalidArgument, "label " + std::to_string(label) +
                                          " outside [0, " + std::to_string(C) +
                                          ")");
  const SubcenterCosineResult cos = SubcenterCosines(x, weights);

  // Logits and d(logit)/d(cosine).
  AamSoftmaxResult result;
  result.logits.resize(C);
  std::vector<double> slope(C, 1.0);
  for (std::size_t j = 0; j < C; ++j) result.logits[j] = cos.cosines[j];
  result.logits[label] = MarginCosine(cos.cosines[label], config.margin, &slope[label]);
  if (config.top_k > 0 && config.penalty_margin > 0.0)
    for (std::size_t j : HardestNonTargets(cos.cosines, label, config.top_k))
      result.logits[j] = PenaltyCosine(cos.cosines[j], config.penalty_margin, &slope[j]);
  for (std::size_t j = 0; j < C; ++j) result.logits[j] *= config.scale;

  const double max_z = *std::max_element(result.logits.begin(), result.logits.end());
  std::vector<double> prob(C);
  double denom = 0.0;
  for (std::size_t j = 0; j < C; ++j) {
    prob[j] = std::exp(result.logits[j] - max_z);
    denom += prob[j];
  }
  for (double &p : prob) p /= denom;
  result.loss = std::log(denom) + max_z - result.logits[label];

  // dL/dc_j = (p_j - [j == y]) * s * slope_j
  // dc_j/dx = (w_hat - c_j x_hat) / |x|,  dc_j/dw = (x_hat - c_j w_hat) / |w|
  const double xn = Norm(x);
  result.grad_x.assign(F, 0.0);
  if (want_weight_grad) result.grad_weights.assign(C * weights.subcenters() * F, 0.0);
  for (std::size_t j = 0; j < C; ++j) {
    const double dl_dc = (prob[j] - (j == label ? 1.0 : 0.0)) * config.scale * slope[j];
    if (dl_dc == 0.0) continue;
    const std::size_t k = cos.best_subcenter[j];
    auto w = weights.Prototype(j, k);
    const double wn = Norm(w);
    const double c = cos.cosines[j];
    for (std::size_t f = 0; f < F; ++f) {
      const double w_hat = w[f] / wn;
      const double x_hat = x[f] / xn;
      result.grad_x[f] += dl_dc * (w_hat - c * x_hat) / xn;
      if (want_weight_grad)
        result.grad_weights[(j * weights.subcenters() + k) * F + f] =
            dl_dc * (x_hat - c * w_hat) / wn;
    }
  }
  return result;
}

namespace {

// A random instance away from the loss's kinks (subcenter ties, top-k
// membership changes, margin branch switches), where central differences
// are meaningful.
struct LossInstance {
  LossConfig config;
  ClassWeights weights;
  std::vector<double> x;
  std::size_t label = 0;
};

bool NearKink(const LossInstance &inst, double gap) {
  const ClassWeights &w = inst.weights;
  const std::size_t C = w.classes();
  std::vector<double> cosines(C);
  for (std::size_t j = 0; j < C; ++j) {
    std::vector<double> per_k;
    for (std::size_t k = 0; k < w.subcenters(); ++k)
      per_k.push_back(Cosine(std::span<const double>(inst.x), w.Prototype(j, k)));
    std::sort(per_k.rbegin(), per_k.rend());
    if (per_k.size() > 1 && per_k[0] - per_k[1] < gap) return true;
    cosines[j] = per_k[0];
  }
  std::vector<double> others;
  for (std::size_t j = 0; j < C; ++j)
    if (j != inst.label) others.push_back(cosines[j]);
  std::sort(others.rbegin(), others.rend());
  const std::size_t k = inst.config.top_k;
  if (k > 0 && k < others.size() && others[k - 1] - others[k] < gap) return true;
  for (std::size_t i = 0; i < std::min(k, others.size()); ++i)
    if (std::abs(others[i] - std::cos(inst.config.penalty_margin)) < gap) return true;
  const double c_y = cosines[inst.label];
  if (std::abs(c_y - std::cos(std::numbers::pi - inst.config.margin)) < gap) return true;
  return std::abs(c_y) > 1.0 - gap;
}

LossInstance DrawInstance(CounterRng &rng) {
  for (;;) {
    LossInstance inst;
    const std::size_t C = 3 + rng.Below(4);   // 3..6
    const std::size_t K = 2 + rng.Below(2);   // 2..3
    const std::size_t F = 2 + rng.Below(9);   // 2..10
    inst.config.scale = rng.Uniform(8.0, 32.0);
    inst.config.margin = rng.Uniform(0.05, 0.5);
    inst.config.subcenters = K;
    inst.config.top_k = 1 + rng.Below(C - 1);  // 1..C-1
    inst.config.penalty_margin = rng.Uniform(0.02, 0.1);
    inst.weights = ClassWeights(C, K, F);
    for (double &v : inst.weights.flat()) v = rng.Gaussian();
    inst.x.resize(F);
    for (double &v : inst.x) v = rng.Gaussian();
    inst.label = rng.Below(C);
    if (!NearKink(inst, 1e-2)) return inst;
  }
}

double RelativeError(const std::vector<double> &a, const std::vector<double> &b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
  return std::sqrt(diff) / scale;
}

}  // namespace

GradientCheckReport RunLossGradientCheck(std::size_t instances,
                                         std::uint64_t seed, double step) {
  GradientCheckReport report;
  CounterRng rng(seed, {0x6c6f7373});
  for (std::size_t n = 0; n < instances; ++n) {
    LossInstance inst = DrawInstance(rng);
    const AamSoftmaxResult analytic =
        AamSoftmax(inst.x, inst.weights, inst.label, inst.config, true);

    std::vector<double> fd_x(inst.x.size());
    for (std::size_t i = 0; i < inst.x.size(); ++i) {
      std::vector<double> xp = inst.x, xm = inst.x;
      xp[i] += step;
      xm[i] -= step;
      fd_x[i] = (AamSoftmax(xp, inst.weights, inst.label, inst.config).loss -
                 AamSoftmax(xm, inst.weights, inst.label, inst.config).loss) /
                (2 * step);
    }
    report.max_relative_error =
        std::max(report.max_relative_error, RelativeError(analytic.grad_x, fd_x));

    std::vector<double> fd_w(inst.weights.flat().size());
    for (std::size_t i = 0; i < fd_w.size(); ++i) {
      ClassWeights wp = inst.weights, wm = inst.weights;
      wp.flat()[i] += step;
      wm.flat()[i] -= step;
      fd_w[i] = (AamSoftmax(inst.x, wp, inst.label, inst.config).loss -
                 AamSoftmax(inst.x, wm, inst.label, inst.config).loss) /
                (2 * step);
    }
    report.max_weight_relative_error = std::max(
        report.max_weight_relative_error, RelativeError(analytic.grad_weights, fd_w));
    ++report.instances;
  }
  return report;
}

}  // namespace tdsv
