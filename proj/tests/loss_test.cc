// tests/loss_test.cc

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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.h"
#include "tdsv/error.h"
#include "tdsv/loss.h"
#include "tdsv/rng.h"
#include "test_util.h"

using namespace tdsv;
using testutil::KindOf;

namespace {

ClassWeights RandomWeights(CounterRng &rng, std::size_t C, std::size_t K, std::size_t F) {
  ClassWeights w(C, K, F);
  for (double &v : w.flat()) v = rng.Gaussian();
  return w;
}

std::vector<double> RandomVector(CounterRng &rng, std::size_t F) {
  std::vector<double> x(F);
  for (double &v : x) v = rng.Gaussian();
  return x;
}

double PlainCos(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Every class/subcenter cosine, by brute force.
std::vector<std::vector<double>> AllCosines(const std::vector<double> &x,
                                            const ClassWeights &w) {
  std::vector<std::vector<double>> out(w.classes());
  for (std::size_t j = 0; j < w.classes(); ++j)
    for (std::size_t k = 0; k < w.subcenters(); ++k)
      out[j].push_back(PlainCos(x, w.Prototype(j, k)));
  return out;
}

double SoftmaxCrossEntropy(const std::vector<double> &logits, std::size_t y) {
  double denom = 0;
  for (double z : logits) denom += std::exp(z);
  return -std::log(std::exp(logits[y]) / denom);
}

}  // namespace

TEST_CASE("subcenter cosines: single subcenter is the plain cosine") {
  CounterRng rng(9, {1});
  ClassWeights w = RandomWeights(rng, 5, 1, 6);
  auto x = RandomVector(rng, 6);
  auto r = SubcenterCosines(x, w);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(r.cosines[j] == doctest::Approx(PlainCos(x, w.Prototype(j, 0))).epsilon(1e-14));
}

TEST_CASE("subcenter cosines: alignment with a subcenter gives one") {
  CounterRng rng(9, {2});
  ClassWeights w = RandomWeights(rng, 3, 3, 5);
  std::vector<double> x(w.Prototype(1, 2).begin(), w.Prototype(1, 2).end());
  for (double &v : x) v *= 2.5;
  auto r = SubcenterCosines(x, w);
  CHECK(r.cosines[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.best_subcenter[1] == 2);
}

TEST_CASE("subcenter cosines match the exhaustive maximum") {
  CounterRng rng(9, {3});
  ClassWeights w = RandomWeights(rng, 4, 3, 8);
  auto x = RandomVector(rng, 8);
  auto all = AllCosines(x, w);
  auto r = SubcenterCosines(x, w);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(std::abs(r.cosines[j] - *std::max_element(all[j].begin(), all[j].end())) < 1e-12);
}

TEST_CASE("margin-free loss is softmax cross-entropy over cosines") {
  CounterRng rng(9, {4});
  for (int n = 0; n < 20; ++n) {
    const std::size_t C = 2 + rng.Below(5), F = 2 + rng.Below(8);
    ClassWeights w = RandomWeights(rng, C, 1, F);
    auto x = RandomVector(rng, F);
    const std::size_t y = rng.Below(C);
    LossConfig cfg{.scale = 1.0, .margin = 0.0, .subcenters = 1, .top_k = 0,
                   .penalty_margin = 0.0};
    std::vector<double> cosines;
    for (std::size_t j = 0; j < C; ++j) cosines.push_back(PlainCos(x, w.Prototype(j, 0)));
    CHECK(std::abs(AamSoftmax(x, w, y, cfg).loss - SoftmaxCrossEntropy(cosines, y)) < 1e-9);
  }
}

TEST_CASE("two-class closed form") {
  ClassWeights w(2, 1, 2);
  w.Prototype(0, 0)[0] = 1.0;
  w.Prototype(1, 0)[1] = 1.0;
  std::vector<double> x{1.0, 0.0};
  LossConfig cfg{.scale = 1.0, .margin = 0.0, .subcenters = 1, .top_k = 0,
                 .penalty_margin = 0.0};
  // -log(e / (e + 1))
  CHECK(AamSoftmax(x, w, 0, cfg).loss == doctest::Approx(0.31326168751822286).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central differences") {
  CounterRng rng(9, {5});
  int checked = 0;
  double worst = 0.0, worst_w = 0.0;
  while (checked < 50) {
    const std::size_t C = 3 + rng.Below(4), K = 2 + rng.Below(2), F = 2 + rng.Below(9);
    LossConfig cfg{.scale = 32.0, .margin = 0.2, .subcenters = K,
                   .top_k = 1 + rng.Below(C - 1), .penalty_margin = 0.06};
    ClassWeights w = RandomWeights(rng, C, K, F);
    auto x = RandomVector(rng, F);
    const std::size_t y = rng.Below(C);

    // Skip draws within 1e-2 of a kink of the piecewise loss.
    auto all = AllCosines(x, w);
    std::vector<double> best;
    bool kink = false;
    for (auto &per_k : all) {
      std::sort(per_k.rbegin(), per_k.rend());
      kink |= per_k[0] - per_k[1] < 1e-2;
      best.push_back(per_k[0]);
    }
    std::vector<double> others;
    for (std::size_t j = 0; j < C; ++j)
      if (j != y) others.push_back(best[j]);
    std::sort(others.rbegin(), others.rend());
    if (cfg.top_k < others.size()) kink |= others[cfg.top_k - 1] - others[cfg.top_k] < 1e-2;
    for (std::size_t i = 0; i < cfg.top_k; ++i)
      kink |= std::abs(others[i] - std::cos(cfg.penalty_margin)) < 1e-2;
    kink |= std::abs(best[y] - std::cos(std::numbers::pi - cfg.margin)) < 1e-2;
    kink |= std::abs(best[y]) > 1 - 1e-2;
    if (kink) continue;

    auto analytic = AamSoftmax(x, w, y, cfg, true);
    auto fd = oracle::CentralDifference(
        [&](const std::vector<double> &v) { return AamSoftmax(v, w, y, cfg).loss; }, x, 1e-4);
    worst = std::max(worst, oracle::RelativeError(analytic.grad_x, fd));

    std::vector<double> flat(w.flat().begin(), w.flat().end());
    auto fd_w = oracle::CentralDifference(
        [&](const std::vector<double> &v) {
          ClassWeights ww(C, K, F);
          std::copy(v.begin(), v.end(), ww.flat().begin());
          return AamSoftmax(x, ww, y, cfg).loss;
        },
        flat, 1e-4);
    worst_w = std::max(worst_w, oracle::RelativeError(analytic.grad_weights, fd_w));
    ++checked;
  }
  MESSAGE("max relative error (x): " << worst << ", (weights): " << worst_w);
  CHECK(worst < 1e-4);
  CHECK(worst_w < 1e-4);
}

TEST_CASE("library gradient self-check agrees") {
  auto report = RunLossGradientCheck(20, 3);
  CHECK(report.instances == 20);
  CHECK(report.max_relative_error < 1e-4);
  CHECK(report.max_weight_relative_error < 1e-4);
}

TEST_CASE("property: loss decreases as the target cosine grows") {
  // Target prototype at angle theta from x in the plane; one fixed rival.
  LossConfig cfg{.scale = 32.0, .margin = 0.2, .subcenters = 1, .top_k = 1,
                 .penalty_margin = 0.06};
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 60; ++i) {
    const double theta = std::numbers::pi * (1.0 - i / 60.0) * 0.999;
    ClassWeights w(2, 1, 3);
    w.Prototype(0, 0)[0] = std::cos(theta);
    w.Prototype(0, 0)[1] = std::sin(theta);
    w.Prototype(1, 0)[2] = 1.0;
    w.Prototype(1, 0)[0] = 0.3;
    const double loss = AamSoftmax(std::vector<double>{1, 0, 0}, w, 0, cfg).loss;
    CHECK(loss < prev);
    prev = loss;
  }
}

TEST_CASE("property: margin never lowers the loss; input scale is irrelevant") {
  CounterRng rng(9, {6});
  for (int n = 0; n < 50; ++n) {
    const std::size_t C = 2 + rng.Below(5), K = 1 + rng.Below(3), F = 2 + rng.Below(9);
    ClassWeights w = RandomWeights(rng, C, K, F);
    auto x = RandomVector(rng, F);
    const std::size_t y = rng.Below(C);
    LossConfig with{.scale = 32.0, .margin = 0.2, .subcenters = K,
                    .top_k = rng.Below(C), .penalty_margin = 0.06};
    LossConfig without = with;
    without.margin = 0.0;
    auto cos = SubcenterCosines(x, w);
    if (*std::max_element(cos.cosines.begin(), cos.cosines.end()) == cos.cosines[y])
      CHECK(AamSoftmax(x, w, y, with).loss >= AamSoftmax(x, w, y, without).loss);

    std::vector<double> scaled = x;
    const double lambda = std::exp(rng.Uniform(-3, 3));
    for (double &v : scaled) v *= lambda;
    CHECK(std::abs(AamSoftmax(scaled, w, y, with).loss - AamSoftmax(x, w, y, with).loss) < 1e-9);
  }
}

TEST_CASE("property: Inter-TopK with K'=0 or m'=0 is plain subcenter AAM") {
  CounterRng rng(9, {7});
  for (int n = 0; n < 30; ++n) {
    const std::size_t C = 3 + rng.Below(4), K = 1 + rng.Below(3), F = 2 + rng.Below(9);
    ClassWeights w = RandomWeights(rng, C, K, F);
    auto x = RandomVector(rng, F);
    const std::size_t y = rng.Below(C);
    LossConfig plain{.scale = 32.0, .margin = 0.2, .subcenters = K, .top_k = 0,
                     .penalty_margin = 0.06};
    LossConfig zero_margin = plain;
    zero_margin.top_k = C - 1;
    zero_margin.penalty_margin = 0.0;
    CHECK(AamSoftmax(x, w, y, plain).loss == AamSoftmax(x, w, y, zero_margin).loss);
  }
}

TEST_CASE("margin function branches") {
  double d = 0;
  // theta + m > pi switches to c - m sin m.
  const double m = 0.2;
  const double c = std::cos(std::numbers::pi - 0.1);
  CHECK(MarginCosine(c, m, &d) == doctest::Approx(c - m * std::sin(m)));
  CHECK(d == 1.0);
  CHECK(MarginCosine(0.5, m) == doctest::Approx(std::cos(std::acos(0.5) + m)));
  CHECK(PenaltyCosine(0.5, 0.06) == doctest::Approx(std::cos(std::acos(0.5) - 0.06)));
  CHECK(PenaltyCosine(0.9999, 0.06, &d) == 1.0);
  CHECK(d == 0.0);
}

TEST_CASE("loss errors") {
  CounterRng rng(9, {8});
  ClassWeights w = RandomWeights(rng, 3, 2, 4);
  LossConfig cfg{.subcenters = 2, .top_k = 1};
  auto x = RandomVector(rng, 4);
  CHECK(KindOf([&] { AamSoftmax(x, w, 3, cfg); }) == ErrorKind::kInvalidArgument);
  CHECK(KindOf([&] { AamSoftmax(std::vector<double>(4, 0.0), w, 0, cfg); }) ==
        ErrorKind::kZeroNorm);
  LossConfig bad = cfg;
  bad.top_k = 3;
  CHECK(KindOf([&] { AamSoftmax(x, w, 0, bad); }) == ErrorKind::kInvalidArgument);
  bad = cfg;
  bad.scale = 0;
  CHECK(KindOf([&] { AamSoftmax(x, w, 0, bad); }) == ErrorKind::kInvalidArgument);
  bad = cfg;
  bad.margin = 2.0;
  CHECK(KindOf([&] { AamSoftmax(x, w, 0, bad); }) == ErrorKind::kInvalidArgument);
  bad = cfg;
  bad.subcenters = 3;
  CHECK(KindOf([&] { AamSoftmax(x, w, 0, bad); }) == ErrorKind::kDimensionMismatch);
}
