// tdsv/scoring.h

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

// Cosine scoring backend: enrollment averaging, batched trial scoring,
// adaptive score normalization against a speaker-centroid cohort, and
// equal-weight score fusion.

#ifndef TDSV_SCORING_H_
#define TDSV_SCORING_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tdsv/io.h"
#include "tdsv/parallel.h"
#include "tdsv/types.h"

namespace tdsv {

/// One centroid per background speaker, keyed by speaker id.
struct Cohort {
  EmbeddingStore centroids;
  std::size_t size() const { return centroids.size(); }
};

/// Centroid norms below this are treated as degenerate.
inline constexpr double kDegenerateNorm = 1e-9;

/// Mean of the L2-normalized embeddings of each speaker, speakers in order
/// of first appearance in `speaker_of`.  Centroids are stored as float32.
Cohort BuildCohort(const EmbeddingStore &store, const SpeakerMap &speaker_of);

struct EnrollOptions {
  bool strict_enrollment = true;
};

/// Per model, the mean of its L2-normalized enrollment embeddings, keyed by
/// model id and stored as float32.
EmbeddingStore Enroll(const std::vector<ModelDefinition> &models,
                      const EmbeddingStore &store,
                      const EnrollOptions &opts = {});

struct ScoringOptions {
  int workers = DefaultWorkers();
};

/// Cosine score per trial, in trial order.  Norms are computed once per
/// embedding; the score of every trial is bit-identical to
/// Dot(m, t) / (Norm(m) * Norm(t)).
std::vector<ScoreRecord> ScoreTrials(const std::vector<Trial> &trials,
                                     const EmbeddingStore &model_vectors,
                                     const EmbeddingStore &test_vectors,
                                     const ScoringOptions &opts = {});

struct ASNormConfig {
  std::size_t top_n = 300;
  double epsilon_sigma = 1e-6;
};

struct CohortStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Mean and population standard deviation of the top_n largest scores.
/// Ties are broken by lower cohort index.  Throws kInvalidArgument when
/// top_n is zero or exceeds the number of scores.
CohortStats TopNStats(std::span<const double> cohort_scores,
                      std::size_t top_n);

/// 0.5 * ((raw - mu_e) / sigma_e + (raw - mu_t) / sigma_t).
double NormalizeScore(double raw, const CohortStats &enroll,
                      const CohortStats &test);

/// AS-Norm on precomputed cohort score matrices: enroll_cohort[i] and
/// test_cohort[i] hold the cohort scores of trial i's two sides.
std::vector<double> ASNormFromCohortScores(
    std::span<const double> raw,
    const std::vector<std::vector<double>> &enroll_cohort,
    const std::vector<std::vector<double>> &test_cohort,
    const ASNormConfig &config);

struct ASNormOptions {
  int workers = DefaultWorkers();
  // Compute each embedding's cohort statistics once.  Disabling recomputes
  // them for every trial; outputs are identical either way.
  bool cache_cohort_stats = true;
};

/// Symmetric adaptive score normalization of `raw` (one record per trial).
/// Model ids resolve in `model_vectors`, test ids in `test_vectors`.
std::vector<ScoreRecord> ASNorm(const std::vector<ScoreRecord> &raw,
                                const EmbeddingStore &model_vectors,
                                const EmbeddingStore &test_vectors,
                                const Cohort &cohort,
                                const ASNormConfig &config,
                                const ASNormOptions &opts = {});

/// Equal-weight mean over aligned score lists.
std::vector<ScoreRecord> Fuse(
    const std::vector<std::vector<ScoreRecord>> &score_sets);

}  // namespace tdsv

#endif  // TDSV_SCORING_H_
