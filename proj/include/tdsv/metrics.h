// tdsv/metrics.h

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

// Detection metrics: DET operating points, EER and the normalized minimum
// detection cost.  A trial is accepted when score >= threshold.

#ifndef TDSV_METRICS_H_
#define TDSV_METRICS_H_

#include <span>
#include <vector>

#include "tdsv/types.h"

namespace tdsv {

struct MetricConfig {
  double p_target = 0.01;
  double c_miss = 10.0;
  double c_fa = 1.0;
};

struct DetPoint {
  double threshold;
  double p_miss;
  double p_fa;
};

enum class EerMethod {
  // Linear interpolation where p_miss - p_fa changes sign.
  kInterpolated,
  // max over operating points of min(p_miss, p_fa).
  kDiscrete,
};

struct EvalReport {
  double eer = 0.0;
  double min_dcf = 0.0;
  double min_dcf_threshold = 0.0;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
  std::vector<DetPoint> det;
};

/// Operating points at -inf, every distinct score, and +inf, ordered by
/// increasing threshold.
std::vector<DetPoint> DetCurve(std::span<const double> targets,
                               std::span<const double> nontargets);

double ComputeEer(const std::vector<DetPoint> &det,
                  EerMethod method = EerMethod::kInterpolated);

/// min(c_miss * p_target, c_fa * (1 - p_target)).
double DcfNormalizer(const MetricConfig &config);

/// Normalized minimum DCF; optionally reports the arg-min threshold.
double ComputeMinDcf(const std::vector<DetPoint> &det,
                     const MetricConfig &config,
                     double *threshold = nullptr);

EvalReport Evaluate(std::span<const double> targets,
                    std::span<const double> nontargets,
                    const MetricConfig &config = {},
                    EerMethod method = EerMethod::kInterpolated);

enum class TrialSubset {
  kAll,      // TC vs TW + IC + IW
  kTcVsTw,
  kTcVsIc,
};

struct LabeledScores {
  std::vector<double> targets;
  std::vector<double> nontargets;
};

/// Splits scores by trial label: TC is target, everything else nontarget,
/// restricted to `subset`.  Trials and scores must be aligned.  Throws
/// kUnlabeled, kMisaligned, or kNoTargets.
LabeledScores MapLabels(const std::vector<Trial> &trials,
                        std::span<const double> scores,
                        TrialSubset subset = TrialSubset::kAll);

/// Same, matching ScoreRecords to trials by position and checking ids.
LabeledScores MapLabels(const std::vector<Trial> &trials,
                        const std::vector<ScoreRecord> &scores,
                        TrialSubset subset = TrialSubset::kAll);

}  // namespace tdsv

#endif  // TDSV_METRICS_H_
