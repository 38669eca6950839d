// tests/oracles.h

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

// Independent reference computations used only by tests.  Each one takes
// the most direct route to its answer (exhaustive sweeps, per-trial
// recomputation, naive loops) and shares no code with the library paths
// it checks.

#ifndef TDSV_TESTS_ORACLES_H_
#define TDSV_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// ---- metrics --------------------------------------------------------------

struct SweepPoint {
  double p_miss;
  double p_fa;
};

// Every candidate threshold (-inf, each distinct score, +inf) evaluated by
// counting all scores from scratch.
inline std::vector<SweepPoint> ExhaustiveSweep(const std::vector<double> &tar,
                                               const std::vector<double> &non) {
  std::set<double> thresholds(tar.begin(), tar.end());
  thresholds.insert(non.begin(), non.end());
  std::vector<double> all{-std::numeric_limits<double>::infinity()};
  all.insert(all.end(), thresholds.begin(), thresholds.end());
  all.push_back(std::numeric_limits<double>::infinity());
  std::vector<SweepPoint> points;
  for (double x : all) {
    std::size_t miss = 0, fa = 0;
    for (double s : tar) miss += (s < x);
    for (double s : non) fa += (s >= x);
    points.push_back({double(miss) / tar.size(), double(fa) / non.size()});
  }
  return points;
}

inline double BruteEer(const std::vector<double> &tar,
                       const std::vector<double> &non) {
  const auto pts = ExhaustiveSweep(tar, non);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = pts[i].p_miss - pts[i].p_fa;
    if (d == 0) return pts[i].p_miss;
    if (d > 0) {
      const double d0 = pts[i - 1].p_miss - pts[i - 1].p_fa;
      const double t = d0 / (d0 - d);
      return pts[i - 1].p_miss + t * (pts[i].p_miss - pts[i - 1].p_miss);
    }
  }
  return 1.0;
}

inline double BruteMinDcf(const std::vector<double> &tar,
                          const std::vector<double> &non, double p_target,
                          double c_miss, double c_fa) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &p : ExhaustiveSweep(tar, non))
    best = std::min(best, c_miss * p.p_miss * p_target +
                              c_fa * p.p_fa * (1 - p_target));
  return best / std::min(c_miss * p_target, c_fa * (1 - p_target));
}

// ---- vectors / scoring -----------------------------------------------------

inline double ScalarCosine(const std::vector<float> &a,
                           const std::vector<float> &b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += double(a[i]) * double(b[i]);
  for (std::size_t i = 0; i < a.size(); ++i) aa += double(a[i]) * double(a[i]);
  for (std::size_t i = 0; i < b.size(); ++i) bb += double(b[i]) * double(b[i]);
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

// Group-by then mean of unit vectors, as doubles.
inline std::map<std::string, std::vector<double>> GroupUnitMeans(
    const std::vector<std::pair<std::string, std::vector<float>>> &rows) {
  std::map<std::string, std::vector<std::vector<double>>> groups;
  for (const auto &[key, v] : rows) {
    double n = 0;
    for (float x : v) n += double(x) * x;
    n = std::sqrt(n);
    std::vector<double> u;
    for (float x : v) u.push_back(x / n);
    groups[key].push_back(u);
  }
  std::map<std::string, std::vector<double>> out;
  for (const auto &[key, members] : groups) {
    std::vector<double> mean(members[0].size(), 0.0);
    for (const auto &m : members)
      for (std::size_t i = 0; i < m.size(); ++i) mean[i] += m[i];
    for (double &x : mean) x /= members.size();
    out[key] = mean;
  }
  return out;
}

// Recomputes and fully sorts every cohort score for one trial.
inline double BruteASNorm(double raw, std::vector<double> enroll_cohort,
                          std::vector<double> test_cohort, std::size_t top_n) {
  auto stats = [top_n](std::vector<double> s) {
    std::sort(s.begin(), s.end(), std::greater<>());
    s.resize(top_n);
    double mean = 0;
    for (double x : s) mean += x;
    mean /= top_n;
    double var = 0;
    for (double x : s) var += (x - mean) * (x - mean);
    return std::make_pair(mean, std::sqrt(var / top_n));
  };
  const auto [me, se] = stats(std::move(enroll_cohort));
  const auto [mt, st] = stats(std::move(test_cohort));
  return 0.5 * ((raw - me) / se + (raw - mt) / st);
}

// ---- pooling ---------------------------------------------------------------

// Direct evaluation of e_t, alpha_t and sum_t alpha_t (W2 h_t + b2).
inline std::vector<double> NaiveAttentivePool(
    const std::vector<std::vector<double>> &h, const std::vector<double> &w1,
    double b1, const std::vector<std::vector<double>> &w2,
    const std::vector<double> &b2, std::vector<double> *alpha_out = nullptr) {
  const std::size_t T = h.size();
  std::vector<double> e(T);
  for (std::size_t t = 0; t < T; ++t) {
    e[t] = b1;
    for (std::size_t f = 0; f < w1.size(); ++f) e[t] += w1[f] * h[t][f];
  }
  double denom = 0;
  for (std::size_t t = 0; t < T; ++t) denom += std::exp(e[t]);
  std::vector<double> alpha(T);
  for (std::size_t t = 0; t < T; ++t) alpha[t] = std::exp(e[t]) / denom;
  std::vector<double> out(b2.size(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t d = 0; d < b2.size(); ++d) {
      double v = b2[d];
      for (std::size_t f = 0; f < w1.size(); ++f) v += w2[d][f] * h[t][f];
      out[d] += alpha[t] * v;
    }
  }
  if (alpha_out) *alpha_out = alpha;
  return out;
}

// Two-pass mean / population std per column.
inline std::vector<double> TwoPassStats(const std::vector<std::vector<double>> &h) {
  const std::size_t T = h.size(), F = h[0].size();
  std::vector<double> mean(F, 0.0), sd(F, 0.0);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t t = 0; t < T; ++t) mean[f] += h[t][f];
    mean[f] /= T;
    for (std::size_t t = 0; t < T; ++t) sd[f] += (h[t][f] - mean[f]) * (h[t][f] - mean[f]);
    sd[f] = std::sqrt(sd[f] / T);
  }
  mean.insert(mean.end(), sd.begin(), sd.end());
  return mean;
}

// ---- finite differences ----------------------------------------------------

inline std::vector<double> CentralDifference(
    const std::function<double(const std::vector<double> &)> &f,
    std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

inline double RelativeError(const std::vector<double> &a,
                            const std::vector<double> &b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

}  // namespace oracle

#endif  // TDSV_TESTS_ORACLES_H_
