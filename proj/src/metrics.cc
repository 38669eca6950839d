// src/metrics.cc

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

#include "tdsv/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tdsv/error.h"

namespace tdsv {

namespace {

std::vector<double> SortedFinite(std::span<const double> scores,
                                 const char *what) {
  if (scores.empty())
    Fail(ErrorKind::kEmptyClass, std::string("no ") + what + " scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  for (double s : sorted)
    if (!std::isfinite(s))
      Fail(ErrorKind::kNonFinite, std::string("non-finite ") + what + " score");
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

}  // namespace

std::vector<DetPoint> DetCurve(std::span<const double> targets,
                               std::span<const double> nontargets) {
  const std::vector<double> tar = SortedFinite(targets, "target");
  const std::vector<double> non = SortedFinite(nontargets, "nontarget");
  const double nt = static_cast<double>(tar.size());
  const double nn = static_cast<double>(non.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<DetPoint> det;
  det.reserve(tar.size() + non.size() + 2);
  det.push_back({-kInf, 0.0, 1.0});
  // it/jt index the first target/nontarget >= threshold.
  std::size_t it = 0, jt = 0;
  while (it < tar.size() || jt < non.size()) {
    double x;
    if (jt == non.size() || (it < tar.size() && tar[it] <= non[jt]))
      x = tar[it];
    else
      x = non[jt];
    det.push_back({x, static_cast<double>(it) / nt,
                   static_cast<double>(non.size() - jt) / nn});
    while (it < tar.size() && tar[it] == x) ++it;
    while (jt < non.size() && non[jt] == x) ++jt;
  }
  det.push_back({kInf, 1.0, 0.0});
  return det;
}

double ComputeEer(const std::vector<DetPoint> &det, EerMethod method) {
  if (det.empty()) Fail(ErrorKind::kEmptyClass, "empty DET curve");
  if (method == EerMethod::kDiscrete) {
    double best = 0.0;
    for (const DetPoint &p : det) best = std::max(best, std::min(p.p_miss, p.p_fa));
    return best;
  }
  for (std::size_t i = 0; i < det.size(); ++i) {
    const double d = det[i].p_miss - det[i].p_fa;
    if (d == 0.0) return det[i].p_miss;
    if (d > 0.0) {
      if (i == 0) return det[i].p_miss;
      const DetPoint &a = det[i - 1];
      const DetPoint &b = det[i];
      const double da = a.p_miss - a.p_fa;
      const double t = da / (da - d);
      return a.p_miss + t * (b.p_miss - a.p_miss);
    }
  }
  // Curves from DetCurve end at (1, 0); only hand-built ones get here.
  return det.back().p_miss;
}

double DcfNormalizer(const MetricConfig &config) {
  return std::min(config.c_miss * config.p_target,
                  config.c_fa * (1.0 - config.p_target));
}

double ComputeMinDcf(const std::vector<DetPoint> &det,
                     const MetricConfig &config, double *threshold) {
  if (!(config.p_target > 0.0 && config.p_target < 1.0) ||
      !(config.c_miss > 0.0) || !(config.c_fa > 0.0))
    Fail(ErrorKind::kInvalidArgument,
         "metric config requires 0 < p_target < 1 and positive costs");
  if (det.empty()) Fail(ErrorKind::kEmptyClass, "empty DET curve");
  double best = std::numeric_limits<double>::infinity();
  double best_threshold = det.front().threshold;
  for (const DetPoint &p : det) {
    const double dcf = config.c_miss * p.p_miss * config.p_target +
                       config.c_fa * p.p_fa * (1.0 - config.p_target);
    if (dcf < best) {
      best = dcf;
      best_threshold = p.threshold;
    }
  }
  if (threshold) *threshold = best_threshold;
  return best / DcfNormalizer(config);
}

EvalReport Evaluate(std::span<const double> targets,
                    std::span<const double> nontargets,
                    const MetricConfig &config, EerMethod method) {
  EvalReport report;
  report.det = DetCurve(targets, nontargets);
  report.eer = ComputeEer(report.det, method);
  report.min_dcf = ComputeMinDcf(report.det, config, &report.min_dcf_threshold);
  report.n_target = targets.size();
  report.n_nontarget = nontargets.size();
  return report;
}

LabeledScores MapLabels(const std::vector<Trial> &trials,
                        std::span<const double> scores, TrialSubset subset) {
  if (trials.size() != scores.size())
    Fail(ErrorKind::kMisaligned,
         std::to_string(trials.size()) + " trials but " +
             std::to_string(scores.size()) + " scores");
  LabeledScores out;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!trials[i].label)
      Fail(ErrorKind::kUnlabeled, "trial " + std::to_string(i + 1) + " (" +
                                      trials[i].model_id + ", " +
                                      trials[i].test_utt_id +
                                      ") has no label");
    const TrialLabel label = *trials[i].label;
    if (label == TrialLabel::kTargetCorrect) {
      out.targets.push_back(scores[i]);
      continue;
    }
    const bool keep =
        subset == TrialSubset::kAll ||
        (subset == TrialSubset::kTcVsTw && label == TrialLabel::kTargetWrong) ||
        (subset == TrialSubset::kTcVsIc &&
         label == TrialLabel::kImposterCorrect);
    if (keep) out.nontargets.push_back(scores[i]);
  }
  if (out.targets.empty())
    Fail(ErrorKind::kNoTargets, "no targets: no TC trials to evaluate");
  return out;
}

LabeledScores MapLabels(const std::vector<Trial> &trials,
                        const std::vector<ScoreRecord> &scores,
                        TrialSubset subset) {
  if (trials.size() != scores.size())
    Fail(ErrorKind::kMisaligned,
         std::to_string(trials.size()) + " trials but " +
             std::to_string(scores.size()) + " scores");
  std::vector<double> values(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].model_id != trials[i].model_id ||
        scores[i].test_utt_id != trials[i].test_utt_id)
      Fail(ErrorKind::kMisaligned,
           "score line " + std::to_string(i + 1) + " (" + scores[i].model_id +
               ", " + scores[i].test_utt_id + ") does not match trial (" +
               trials[i].model_id + ", " + trials[i].test_utt_id + ")");
    values[i] = scores[i].score;
  }
  return MapLabels(trials, values, subset);
}

}  // namespace tdsv
