// tests/acceptance_test.cc

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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "tdsv/error.h"
#include "tdsv/io.h"
#include "tdsv/loss.h"
#include "tdsv/metrics.h"
#include "tdsv/pipeline.h"
#include "tdsv/pooling.h"
#include "tdsv/rng.h"
#include "tdsv/scoring.h"
#include "tdsv/synth.h"
#include "test_util.h"

using namespace tdsv;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::vector<double> DrawScores(CounterRng &rng, std::size_t n, double shift,
                               bool coarse) {
  std::vector<double> v(n);
  for (double &x : v)
    x = coarse ? std::round(rng.Gaussian() * 4 + shift) / 4
               : rng.Gaussian() + shift;
  return v;
}

EmbeddingStore RandomStore(CounterRng &rng, const std::string &prefix,
                           std::size_t n, std::size_t dim) {
  EmbeddingStore store;
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (float &x : v) x = static_cast<float>(rng.Gaussian());
    store.Add(prefix + std::to_string(i), v);
  }
  return store;
}

Cohort RandomCohort(CounterRng &rng, std::size_t speakers, std::size_t dim) {
  EmbeddingStore background = RandomStore(rng, "b", speakers * 2, dim);
  SpeakerMap map;
  for (std::size_t i = 0; i < background.size(); ++i)
    map.emplace_back(background.id(i), "c" + std::to_string(i / 2));
  return BuildCohort(background, map);
}

std::vector<double> CohortScores(std::span<const float> v,
                                 const Cohort &cohort) {
  std::vector<float> a(v.begin(), v.end());
  std::vector<double> out;
  for (std::size_t c = 0; c < cohort.size(); ++c) {
    auto row = cohort.centroids.row(c);
    out.push_back(oracle::ScalarCosine(a, std::vector<float>(row.begin(), row.end())));
  }
  return out;
}

// ---- criteria ---------------------------------------------------------------

void MetricOracle(Outcome &o) {
  const auto start = Clock::now();
  CounterRng rng(101, {1});
  MetricConfig cfg;
  double worst = 0;
  for (int n = 0; n < 200; ++n) {
    const bool coarse = n % 3 == 0;
    auto tar = DrawScores(rng, 1 + rng.Below(50), rng.Uniform(0, 2), coarse);
    auto non = DrawScores(rng, 1 + rng.Below(50), 0.0, coarse);
    auto r = Evaluate(tar, non, cfg);
    worst = std::max(worst, std::abs(r.eer - oracle::BruteEer(tar, non)));
    worst = std::max(worst, std::abs(r.min_dcf - oracle::BruteMinDcf(tar, non, cfg.p_target,
                                                                     cfg.c_miss, cfg.c_fa)));
  }
  const double secs = Seconds(start);
  o.detail << "max deviation " << worst << ", " << secs << " s";
  o.Require(worst <= 1e-12, "deviation <= 1e-12");
  o.Require(secs < 5.0, "runtime < 5 s");
}

void WorkedFixture(Outcome &o) {
  auto det = DetCurve(std::vector<double>{0.8, 0.6, 0.4}, std::vector<double>{0.7, 0.5, 0.3});
  const double eer = ComputeEer(det), dcf = ComputeMinDcf(det, MetricConfig{});
  o.detail << "EER " << eer << ", MinDCF " << dcf << ", normalizer "
           << DcfNormalizer(MetricConfig{});
  o.Require(std::abs(eer - 1.0 / 3.0) < 1e-12, "EER = 1/3");
  o.Require(std::abs(dcf - 2.0 / 3.0) < 1e-12, "MinDCF = 2/3");
  o.Require(std::abs(DcfNormalizer(MetricConfig{}) - 0.1) < 1e-15, "normalizer 0.1");
}

void MonotoneInvariance(Outcome &o) {
  CounterRng rng(101, {2});
  double worst = 0;
  for (int n = 0; n < 50; ++n) {
    auto tar = DrawScores(rng, 30, 1.0, n % 2 == 0);
    auto non = DrawScores(rng, 30, 0.0, n % 2 == 0);
    auto base = Evaluate(tar, non);
    const double a = std::exp(rng.Uniform(-2, 2)), b = rng.Uniform(-3, 3);
    for (int map = 0; map < 2; ++map) {
      auto f = [&](double x) { return map == 0 ? a * x + b : x * x * x; };
      std::vector<double> t2, n2;
      for (double x : tar) t2.push_back(f(x));
      for (double x : non) n2.push_back(f(x));
      auto moved = Evaluate(t2, n2);
      worst = std::max({worst, std::abs(moved.eer - base.eer),
                        std::abs(moved.min_dcf - base.min_dcf)});
    }
  }
  o.detail << "max change " << worst;
  o.Require(worst <= 1e-12, "change <= 1e-12");
}

void ASNormOracle(Outcome &o) {
  CounterRng rng(101, {3});
  auto models = RandomStore(rng, "m", 20, 64);
  auto tests = RandomStore(rng, "t", 40, 64);
  Cohort cohort = RandomCohort(rng, 50, 64);
  std::vector<Trial> trials;
  for (int i = 0; i < 200; ++i)
    trials.push_back({"m" + std::to_string(rng.Below(20)),
                      "t" + std::to_string(rng.Below(40)), std::nullopt});
  auto raw = ScoreTrials(trials, models, tests);
  auto out = ASNorm(raw, models, tests, cohort, {.top_n = 10});
  double worst = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double expected = oracle::BruteASNorm(
        raw[i].score, CohortScores(models.Get(raw[i].model_id), cohort),
        CohortScores(tests.Get(raw[i].test_utt_id), cohort), 10);
    worst = std::max(worst, std::abs(out[i].score - expected));
  }
  const double fixture = ASNormFromCohortScores(std::vector<double>{0.5}, {{0.1, 0.3}},
                                                {{0.2, 0.4}}, {.top_n = 2})[0];
  o.detail << "max deviation " << worst << ", fixture " << fixture;
  o.Require(worst <= 1e-9, "deviation <= 1e-9");
  o.Require(std::abs(fixture - 2.5) < 1e-12, "fixture = 2.5");
}

void ASNormAffine(Outcome &o) {
  CounterRng rng(101, {4});
  double worst = 0;
  for (int n = 0; n < 50; ++n) {
    const std::size_t size = 10 + rng.Below(40), top = 2 + rng.Below(size - 1);
    std::vector<std::vector<double>> ec(5), tc(5);
    std::vector<double> raw(5);
    for (int i = 0; i < 5; ++i) {
      raw[i] = rng.Uniform(-1, 1);
      for (std::size_t c = 0; c < size; ++c) {
        ec[i].push_back(rng.Uniform(-1, 1));
        tc[i].push_back(rng.Uniform(-1, 1));
      }
    }
    const double a = std::exp(rng.Uniform(-2, 2)), b = rng.Uniform(-5, 5);
    auto ec2 = ec, tc2 = tc;
    auto raw2 = raw;
    for (auto &row : ec2)
      for (double &x : row) x = a * x + b;
    for (auto &row : tc2)
      for (double &x : row) x = a * x + b;
    for (double &x : raw2) x = a * x + b;
    auto base = ASNormFromCohortScores(raw, ec, tc, {.top_n = top});
    auto moved = ASNormFromCohortScores(raw2, ec2, tc2, {.top_n = top});
    for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(base[i] - moved[i]));
  }
  o.detail << "max change " << worst;
  o.Require(worst <= 1e-9, "change <= 1e-9");
}

void LossGradient(Outcome &o) {
  auto report = RunLossGradientCheck(50, 1, 1e-4);
  CounterRng rng(101, {5});
  double worst_ce = 0;
  for (int n = 0; n < 50; ++n) {
    const std::size_t C = 2 + rng.Below(6), F = 2 + rng.Below(8);
    ClassWeights w(C, 1, F);
    for (double &v : w.flat()) v = rng.Gaussian();
    std::vector<double> x(F);
    for (double &v : x) v = rng.Gaussian();
    const std::size_t y = rng.Below(C);
    std::vector<double> cos(C);
    double denom = 0;
    for (std::size_t j = 0; j < C; ++j) {
      auto p = w.Prototype(j, 0);
      double ab = 0, aa = 0, bb = 0;
      for (std::size_t i = 0; i < F; ++i) {
        ab += x[i] * p[i];
        aa += x[i] * x[i];
        bb += p[i] * p[i];
      }
      cos[j] = ab / std::sqrt(aa * bb);
      denom += std::exp(cos[j]);
    }
    const double ce = -std::log(std::exp(cos[y]) / denom);
    LossConfig cfg{.scale = 1.0, .margin = 0.0, .subcenters = 1, .top_k = 0,
                   .penalty_margin = 0.0};
    worst_ce = std::max(worst_ce, std::abs(AamSoftmax(x, w, y, cfg).loss - ce));
  }
  o.detail << report.instances << " instances, max relative error x "
           << report.max_relative_error << ", weights "
           << report.max_weight_relative_error << ", softmax-CE deviation " << worst_ce;
  o.Require(report.instances == 50, "50 instances");
  o.Require(report.max_relative_error < 1e-4, "x gradient < 1e-4");
  o.Require(report.max_weight_relative_error < 1e-4, "weight gradient < 1e-4");
  o.Require(worst_ce <= 1e-9, "softmax-CE reduction <= 1e-9");
}

void PoolingProperties(Outcome &o) {
  CounterRng rng(101, {6});
  double alpha_sum = 0, perm = 0, uniform = 0, naive = 0;
  auto diff = [](const std::vector<double> &a, const std::vector<double> &b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  };
  for (int n = 0; n < 100; ++n) {
    const std::size_t T = 1 + rng.Below(20), F = 1 + rng.Below(10), D = 1 + rng.Below(8);
    std::vector<std::vector<double>> h(T, std::vector<double>(F)), w2(D, std::vector<double>(F));
    std::vector<double> w1(F), b2(D);
    for (auto &row : h)
      for (double &v : row) v = rng.Gaussian();
    for (auto &row : w2)
      for (double &v : row) v = rng.Gaussian();
    for (double &v : w1) v = rng.Gaussian();
    for (double &v : b2) v = rng.Gaussian();
    const double b1 = rng.Gaussian();
    AttentivePoolingParams params{w1, b1, Matrix::FromRows(w2), b2};
    auto r = AttentivePool(Matrix::FromRows(h), params);
    alpha_sum = std::max(alpha_sum,
                         std::abs(std::accumulate(r.alpha.begin(), r.alpha.end(), 0.0) - 1.0));
    naive = std::max(naive, diff(r.output, oracle::NaiveAttentivePool(h, w1, b1, w2, b2)));

    auto shuffled = h;
    for (std::size_t t = T; t > 1; --t) std::swap(shuffled[t - 1], shuffled[rng.Below(t)]);
    perm = std::max(perm, diff(AttentivePool(Matrix::FromRows(shuffled), params).output,
                               r.output));

    AttentivePoolingParams flat{std::vector<double>(F, 0.0), b1, Matrix::FromRows(w2), b2};
    auto u = AttentivePool(Matrix::FromRows(h), flat);
    std::vector<double> mean(D);
    for (std::size_t d = 0; d < D; ++d) {
      for (const auto &row : h) {
        double v = b2[d];
        for (std::size_t f = 0; f < F; ++f) v += w2[d][f] * row[f];
        mean[d] += v / T;
      }
    }
    uniform = std::max(uniform, diff(u.output, mean));
    for (double a : u.alpha) uniform = std::max(uniform, std::abs(a - 1.0 / T));
  }
  o.detail << "alpha sum " << alpha_sum << ", permutation " << perm << ", uniform " << uniform
           << ", naive " << naive;
  o.Require(alpha_sum <= 1e-9, "sum alpha = 1 within 1e-9");
  o.Require(perm <= 1e-9, "permutation within 1e-9");
  o.Require(uniform <= 1e-9, "uniform attention gives the mean");
  o.Require(naive <= 1e-6, "naive equivalence within 1e-6");
}

void EndToEnd(Outcome &o) {
  const auto start = Clock::now();
  SynthConfig base;
  base.n_speakers = 50;
  base.dim = 256;
  PipelineOptions opts;

  SynthConfig clean = base;
  clean.within_noise = 0.0;
  clean.posterior_confusion = 0.0;
  auto ideal = RunPipeline(Generate(clean), opts);
  o.detail << "clean: all " << FormatFixed(ideal.all.min_dcf, 4) << " & "
           << FormatFixed(ideal.all.eer * 100, 2) << ", tc-vs-tw "
           << FormatFixed(ideal.tc_vs_tw.min_dcf, 4) << " & "
           << FormatFixed(ideal.tc_vs_tw.eer * 100, 2);
  o.Require(ideal.all.eer == 0.0 && ideal.all.min_dcf == 0.0, "clean EER and MinDCF 0");
  o.Require(ideal.tc_vs_tw.eer == 0.0 && ideal.tc_vs_tw.min_dcf == 0.0,
            "clean TC-vs-TW EER and MinDCF 0");

  double prev = -1;
  o.detail << "; EER(%) over noise";
  for (double sigma : {0.2, 0.6, 1.2}) {
    SynthConfig c = base;
    c.within_noise = sigma;
    c.posterior_confusion = 0.0;
    auto r = RunPipeline(Generate(c), opts);
    o.detail << " " << sigma << ":" << FormatFixed(r.all.eer * 100, 4);
    o.Require(r.all.eer > prev, "EER strictly increasing at noise " + std::to_string(sigma));
    o.Require(r.tw_accepted == 0 && r.tw_trials > 0, "all TW trials rejected");
    prev = r.all.eer;
  }
  const double secs = Seconds(start);
  o.detail << "; " << secs << " s";
  o.Require(secs < 60.0, "runtime < 60 s");
}

void Throughput(Outcome &o) {
  const std::size_t dim = 256, n_models = 1000, n_tests = 1000, n_cohort = 1620;
  CounterRng rng(101, {7});
  auto models = RandomStore(rng, "m", n_models, dim);
  auto tests = RandomStore(rng, "t", n_tests, dim);
  EmbeddingStore background = RandomStore(rng, "b", n_cohort, dim);
  SpeakerMap map;
  for (std::size_t i = 0; i < background.size(); ++i)
    map.emplace_back(background.id(i), "c" + std::to_string(i));
  Cohort cohort = BuildCohort(background, map);
  std::vector<Trial> trials;
  trials.reserve(n_models * n_tests);
  for (std::size_t m = 0; m < n_models; ++m)
    for (std::size_t t = 0; t < n_tests; ++t)
      trials.push_back({models.id(m), tests.id(t), std::nullopt});

  auto run = [&](int workers) {
    auto raw = ScoreTrials(trials, models, tests, {.workers = workers});
    return ASNorm(raw, models, tests, cohort, {.top_n = 300}, {.workers = workers});
  };
  const auto start = Clock::now();
  auto timed = run(DefaultWorkers());
  const double secs = Seconds(start);
  const std::string one = SerializeScores(run(1));
  const std::string eight = SerializeScores(run(8));
  o.detail << trials.size() << " trials, " << cohort.size() << " centroids, D=" << dim << ", "
           << secs << " s with " << DefaultWorkers() << " worker(s)";
  o.Require(trials.size() == 1000000, "1,000,000 trials");
  o.Require(secs < 10.0, "runtime < 10 s");
  o.Require(one == eight, "workers 1 vs 8 byte-identical");
  o.Require(one == SerializeScores(timed), "timed run matches");
}

void Formats(Outcome &o) {
  CounterRng rng(101, {8});
  bool round_trip = true;
  for (int n = 0; n < 50; ++n) {
    EmbeddingStore store = RandomStore(rng, "u", 1 + rng.Below(20), 1 + rng.Below(64));
    EmbeddingStore back = ParseBinaryEmbeddings(SerializeBinaryEmbeddings(store), "x");
    round_trip &= back.size() == store.size() && back.dim() == store.dim();
    for (std::size_t i = 0; round_trip && i < store.size(); ++i)
      round_trip &= back.id(i) == store.id(i) &&
                    std::memcmp(back.row(i).data(), store.row(i).data(),
                                store.dim() * sizeof(float)) == 0;
  }
  o.Require(round_trip, "binary round-trip bit-identical");

  EmbeddingStore small;
  small.Add("a", std::vector<float>{1, 2});
  small.Add("b", std::vector<float>{3, 4});
  const std::string good = SerializeBinaryEmbeddings(small);
  std::string bad_magic = good, nan = good, dup = good;
  bad_magic[0] = 'X';
  const float q = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + 20 + 2 + 1, &q, 4);
  dup[20 + 2 + 1 + 8 + 2] = 'a';

  struct Case {
    const char *name;
    std::function<void()> fn;
    ErrorKind kind;
  };
  const std::vector<Case> corpus = {
      {"binary empty", [] { ParseBinaryEmbeddings("", "x"); }, ErrorKind::kMissingHeader},
      {"binary magic", [&] { ParseBinaryEmbeddings(bad_magic, "x"); }, ErrorKind::kBadMagic},
      {"binary truncated", [&] { ParseBinaryEmbeddings(good.substr(0, good.size() - 1), "x"); },
       ErrorKind::kTruncated},
      {"binary trailing", [&] { ParseBinaryEmbeddings(good + "z", "x"); }, ErrorKind::kTruncated},
      {"binary non-finite", [&] { ParseBinaryEmbeddings(nan, "x"); }, ErrorKind::kNonFinite},
      {"binary duplicate", [&] { ParseBinaryEmbeddings(dup, "x"); }, ErrorKind::kDuplicateId},
      {"text dimension", [] { ParseTextEmbeddings("a 1 2 3 4\nb 1 2 3 4 5\n", "x"); },
       ErrorKind::kDimensionMismatch},
      {"text duplicate", [] { ParseTextEmbeddings("a 1 2\na 3 4\n", "x"); },
       ErrorKind::kDuplicateId},
      {"text non-finite", [] { ParseTextEmbeddings("a 1 nan\n", "x"); }, ErrorKind::kNonFinite},
      {"text parse", [] { ParseTextEmbeddings("a 1 2x\n", "x"); }, ErrorKind::kParse},
      {"trials label", [] { ParseTrials("mdl1\tutt9\tXX\n", "x"); }, ErrorKind::kUnknownLabel},
      {"trials columns", [] { ParseTrials("mdl1\n", "x"); }, ErrorKind::kColumnCount},
      {"models columns", [] { ParseModels("m1\t3\n", "x"); }, ErrorKind::kColumnCount},
      {"models phrase", [] { ParseModels("m1\t10\tu1,u2,u3\n", "x"); }, ErrorKind::kOutOfRange},
      {"models strict", [] { ParseModels("m1\t3\tu1,u2\n", "x"); },
       ErrorKind::kStrictEnrollment},
      {"posteriors sum", [] { ParsePosteriors("u1\t0.9 0 0 0 0 0 0 0 0 0 0\n", "x"); },
       ErrorKind::kProbabilitySum},
      {"posteriors columns", [] { ParsePosteriors("u1\t1 0 0 0 0 0 0 0 0 0\n", "x"); },
       ErrorKind::kColumnCount},
      {"posteriors range", [] { ParsePosteriors("u1\t1.5 -0.5 0 0 0 0 0 0 0 0 0\n", "x"); },
       ErrorKind::kOutOfRange},
      {"scores columns", [] { ParseScores("m\tu\n", "x"); }, ErrorKind::kColumnCount},
      {"scores parse", [] { ParseScores("m\tu\tabc\n", "x"); }, ErrorKind::kParse},
      {"scores non-finite", [] { ParseScores("m\tu\tnan\n", "x"); }, ErrorKind::kNonFinite},
      {"speaker map duplicate", [] { ParseSpeakerMap("u1\ts1\nu1\ts2\n", "x"); },
       ErrorKind::kDuplicateId},
  };
  std::size_t correct = 0;
  for (const Case &c : corpus) {
    auto kind = testutil::KindOf(c.fn);
    if (kind == c.kind) {
      ++correct;
    } else {
      o.Require(false, std::string(c.name) + " expected " +
                           std::string(ErrorKindName(c.kind)) + ", got " +
                           (kind ? std::string(ErrorKindName(*kind)) : "no error"));
    }
  }

  std::vector<ScoreRecord> scores{{"m1", "u1", 0.123456}, {"m1", "u2", -1000.0}};
  o.Require(ParseScores(SerializeScores(scores), "x") == scores, "score round-trip");
  o.detail << "50 binary round-trips, " << correct << "/" << corpus.size()
           << " malformed inputs rejected with the expected kind";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char *, void (*)(Outcome &)>> criteria = {
      {"metric oracle equivalence", MetricOracle},
      {"worked metric fixture", WorkedFixture},
      {"monotone-transform invariance", MonotoneInvariance},
      {"AS-Norm oracle equivalence", ASNormOracle},
      {"AS-Norm affine invariance", ASNormAffine},
      {"loss gradient check", LossGradient},
      {"pooling properties", PoolingProperties},
      {"end-to-end synthetic pipeline", EndToEnd},
      {"determinism and throughput", Throughput},
      {"format round-trips and malformed inputs", Formats},
  };
  int failures = 0;
  for (const auto &[name, fn] : criteria) {
    Outcome o;
    try {
      fn(o);
    } catch (const std::exception &e) {
      o.Require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail.str()
              << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
