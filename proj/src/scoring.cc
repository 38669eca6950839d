// src/scoring.cc

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

#include "tdsv/scoring.h"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "tdsv/error.h"
#include "tdsv/vector_ops.h"

namespace tdsv {

namespace {

// Accumulates L2-normalized rows and returns their mean as float32.
class UnitMean {
 public:
  explicit UnitMean(std::size_t dim) : sum_(dim, 0.0) {}

  void Add(std::span<const float> v, const std::string &id) {
    const double n = Norm(v);
    if (n == 0.0)
      Fail(ErrorKind::kZeroNorm, "embedding '" + id + "' has zero norm");
    for (std::size_t i = 0; i < v.size(); ++i)
      sum_[i] += static_cast<double>(v[i]) / n;
    ++count_;
  }

  std::size_t count() const { return count_; }

  std::vector<float> Mean() const {
    std::vector<float> out(sum_.size());
    for (std::size_t i = 0; i < sum_.size(); ++i)
      out[i] = static_cast<float>(sum_[i] / static_cast<double>(count_));
    return out;
  }

  double MeanNorm() const {
    return Norm(std::span<const double>(sum_)) / static_cast<double>(count_);
  }

 private:
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

std::string TrialWhere(std::size_t index) {
  return "trial " + std::to_string(index + 1);
}

std::vector<double> RowNorms(const EmbeddingStore &store, int workers) {
  std::vector<double> norms(store.size());
  ParallelFor(store.size(), workers,
              [&](std::size_t i) { norms[i] = Norm(store.row(i)); });
  return norms;
}

}  // namespace

Cohort BuildCohort(const EmbeddingStore &store, const SpeakerMap &speaker_of) {
  if (speaker_of.empty())
    Fail(ErrorKind::kEmptyClass, "speaker map is empty; cohort has no speakers");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<UnitMean> groups;
  for (const auto &[utt, spk] : speaker_of) {
    auto index = store.Find(utt);
    if (!index)
      Fail(ErrorKind::kMissingId, "cohort utterance '" + utt +
                                      "' (speaker '" + spk +
                                      "') not found in embeddings");
    auto [it, inserted] = group_of.emplace(spk, groups.size());
    if (inserted) {
      order.push_back(spk);
      groups.emplace_back(store.dim());
    }
    groups[it->second].Add(store.row(*index), utt);
  }
  Cohort cohort;
  cohort.centroids = EmbeddingStore(store.dim());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].count() == 0)
      Fail(ErrorKind::kEmptyClass, "speaker '" + order[g] + "' has no utterances");
    if (groups[g].MeanNorm() < kDegenerateNorm)
      Fail(ErrorKind::kDegenerateCentroid,
           "centroid of speaker '" + order[g] + "' is (numerically) zero");
    cohort.centroids.Add(order[g], groups[g].Mean());
  }
  return cohort;
}

EmbeddingStore Enroll(const std::vector<ModelDefinition> &models,
                      const EmbeddingStore &store,
                      const EnrollOptions &opts) {
  EmbeddingStore out(store.dim());
  for (const ModelDefinition &model : models) {
    if (model.enrollment_utts.empty() ||
        (opts.strict_enrollment &&
         model.enrollment_utts.size() != kStrictEnrollmentCount))
      Fail(ErrorKind::kStrictEnrollment,
           "model '" + model.model_id + "' has " +
               std::to_string(model.enrollment_utts.size()) +
               " enrollment utterances" +
               (opts.strict_enrollment ? ", strict mode requires 3" : ""));
    UnitMean mean(store.dim());
    for (const std::string &utt : model.enrollment_utts) {
      auto index = store.Find(utt);
      if (!index)
        Fail(ErrorKind::kMissingId, "enrollment utterance '" + utt +
                                        "' of model '" + model.model_id +
                                        "' not found in embeddings");
      mean.Add(store.row(*index), utt);
    }
    if (mean.MeanNorm() < kDegenerateNorm)
      Fail(ErrorKind::kDegenerateCentroid,
           "model '" + model.model_id + "' averages to a zero vector");
    out.Add(model.model_id, mean.Mean());
  }
  return out;
}

std::vector<ScoreRecord> ScoreTrials(const std::vector<Trial> &trials,
                                     const EmbeddingStore &model_vectors,
                                     const EmbeddingStore &test_vectors,
                                     const ScoringOptions &opts) {
  if (!model_vectors.empty() && !test_vectors.empty() &&
      model_vectors.dim() != test_vectors.dim())
    Fail(ErrorKind::kDimensionMismatch,
         "model vectors have dimension " + std::to_string(model_vectors.dim()) +
             ", test embeddings " + std::to_string(test_vectors.dim()));

  std::vector<std::size_t> model_index(trials.size());
  std::vector<std::size_t> test_index(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    auto m = model_vectors.Find(trials[i].model_id);
    if (!m)
      Fail(ErrorKind::kMissingId, TrialWhere(i) + ": model '" +
                                      trials[i].model_id + "' not found");
    auto t = test_vectors.Find(trials[i].test_utt_id);
    if (!t)
      Fail(ErrorKind::kMissingId, TrialWhere(i) + ": test utterance '" +
                                      trials[i].test_utt_id + "' not found");
    model_index[i] = *m;
    test_index[i] = *t;
  }

  const std::vector<double> model_norms = RowNorms(model_vectors, opts.workers);
  const std::vector<double> test_norms = RowNorms(test_vectors, opts.workers);

  std::vector<ScoreRecord> out(trials.size());
  ParallelFor(trials.size(), opts.workers, [&](std::size_t i) {
    const std::size_t m = model_index[i];
    const std::size_t t = test_index[i];
    if (model_norms[m] == 0.0 || test_norms[t] == 0.0)
      Fail(ErrorKind::kZeroNorm,
           TrialWhere(i) + ": zero-norm embedding for '" +
               (model_norms[m] == 0.0 ? trials[i].model_id
                                      : trials[i].test_utt_id) +
               "'");
    out[i] = {trials[i].model_id, trials[i].test_utt_id,
              CosineWithNorms(model_vectors.row(m), model_norms[m],
                              test_vectors.row(t), test_norms[t])};
  });
  return out;
}

CohortStats TopNStats(std::span<const double> cohort_scores,
                      std::size_t top_n) {
  if (top_n == 0 || top_n > cohort_scores.size())
    Fail(ErrorKind::kInvalidArgument,
         "top-N " + std::to_string(top_n) + " must be in [1, " +
             std::to_string(cohort_scores.size()) + "]");
  std::vector<std::size_t> order(cohort_scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + top_n, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (cohort_scores[a] != cohort_scores[b])
                        return cohort_scores[a] > cohort_scores[b];
                      return a < b;
                    });
  double sum = 0.0;
  for (std::size_t k = 0; k < top_n; ++k) sum += cohort_scores[order[k]];
  const double mean = sum / static_cast<double>(top_n);
  double sq = 0.0;
  for (std::size_t k = 0; k < top_n; ++k) {
    const double d = cohort_scores[order[k]] - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / static_cast<double>(top_n))};
}

double NormalizeScore(double raw, const CohortStats &enroll,
                      const CohortStats &test) {
  return 0.5 * ((raw - enroll.mean) / enroll.stddev +
                (raw - test.mean) / test.stddev);
}

std::vector<double> ASNormFromCohortScores(
    std::span<const double> raw,
    const std::vector<std::vector<double>> &enroll_cohort,
    const std::vector<std::vector<double>> &test_cohort,
    const ASNormConfig &config) {
  if (enroll_cohort.size() != raw.size() || test_cohort.size() != raw.size())
    Fail(ErrorKind::kMisaligned, "cohort score rows do not match trial count");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const CohortStats e = TopNStats(enroll_cohort[i], config.top_n);
    const CohortStats t = TopNStats(test_cohort[i], config.top_n);
    if (e.stddev < config.epsilon_sigma || t.stddev < config.epsilon_sigma)
      Fail(ErrorKind::kDegenerateCohort,
           TrialWhere(i) + ": cohort standard deviation below epsilon");
    out[i] = NormalizeScore(raw[i], e, t);
  }
  return out;
}

namespace {

// Cohort statistics for one embedding against every centroid.
class CohortScorer {
 public:
  CohortScorer(const Cohort &cohort, const ASNormConfig &config, int workers)
      : cohort_(cohort), config_(config) {
    norms_ = RowNorms(cohort.centroids, workers);
    for (std::size_t c = 0; c < norms_.size(); ++c)
      if (norms_[c] < kDegenerateNorm)
        Fail(ErrorKind::kDegenerateCentroid,
             "cohort centroid '" + cohort.centroids.id(c) + "' has zero norm");
  }

  CohortStats Stats(std::span<const float> v, const std::string &id,
                    const char *side) const {
    const double norm = Norm(v);
    if (norm == 0.0)
      Fail(ErrorKind::kZeroNorm,
           std::string(side) + " embedding '" + id + "' has zero norm");
    std::vector<double> scores(norms_.size());
    for (std::size_t c = 0; c < norms_.size(); ++c)
      scores[c] = CosineWithNorms(v, norm, cohort_.centroids.row(c), norms_[c]);
    CohortStats stats = TopNStats(scores, config_.top_n);
    if (stats.stddev < config_.epsilon_sigma)
      Fail(ErrorKind::kDegenerateCohort,
           std::string(side) + " embedding '" + id +
               "': top-" + std::to_string(config_.top_n) +
               " cohort standard deviation " + std::to_string(stats.stddev) +
               " is below epsilon");
    return stats;
  }

 private:
  const Cohort &cohort_;
  const ASNormConfig &config_;
  std::vector<double> norms_;
};

// Assigns each distinct store index a dense key in order of first use.
struct KeyTable {
  std::vector<std::size_t> rows;        // key -> store row
  std::vector<std::size_t> key_of;      // trial -> key
};

KeyTable BuildKeys(const std::vector<std::size_t> &row_of_trial,
                   std::size_t store_size) {
  KeyTable table;
  std::vector<std::size_t> key_of_row(store_size, SIZE_MAX);
  table.key_of.resize(row_of_trial.size());
  for (std::size_t i = 0; i < row_of_trial.size(); ++i) {
    std::size_t &key = key_of_row[row_of_trial[i]];
    if (key == SIZE_MAX) {
      key = table.rows.size();
      table.rows.push_back(row_of_trial[i]);
    }
    table.key_of[i] = key;
  }
  return table;
}

}  // namespace

std::vector<ScoreRecord> ASNorm(const std::vector<ScoreRecord> &raw,
                                const EmbeddingStore &model_vectors,
                                const EmbeddingStore &test_vectors,
                                const Cohort &cohort,
                                const ASNormConfig &config,
                                const ASNormOptions &opts) {
  if (config.top_n == 0 || config.top_n > cohort.size())
    Fail(ErrorKind::kInvalidArgument,
         "top-N " + std::to_string(config.top_n) + " exceeds cohort size " +
             std::to_string(cohort.size()));
  for (const EmbeddingStore *s : {&model_vectors, &test_vectors})
    if (!s->empty() && s->dim() != cohort.centroids.dim())
      Fail(ErrorKind::kDimensionMismatch,
           "embedding dimension " + std::to_string(s->dim()) +
               " differs from cohort dimension " +
               std::to_string(cohort.centroids.dim()));

  std::vector<std::size_t> model_row(raw.size());
  std::vector<std::size_t> test_row(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto m = model_vectors.Find(raw[i].model_id);
    if (!m)
      Fail(ErrorKind::kMissingId, TrialWhere(i) + ": model '" +
                                      raw[i].model_id + "' not found");
    auto t = test_vectors.Find(raw[i].test_utt_id);
    if (!t)
      Fail(ErrorKind::kMissingId, TrialWhere(i) + ": test utterance '" +
                                      raw[i].test_utt_id + "' not found");
    model_row[i] = *m;
    test_row[i] = *t;
  }

  const CohortScorer scorer(cohort, config, opts.workers);
  std::vector<ScoreRecord> out(raw.size());

  if (!opts.cache_cohort_stats) {
    ParallelFor(raw.size(), opts.workers, [&](std::size_t i) {
      const CohortStats e = scorer.Stats(model_vectors.row(model_row[i]),
                                         raw[i].model_id, "enrollment-side");
      const CohortStats t = scorer.Stats(test_vectors.row(test_row[i]),
                                         raw[i].test_utt_id, "test-side");
      out[i] = {raw[i].model_id, raw[i].test_utt_id,
                NormalizeScore(raw[i].score, e, t)};
    });
    return out;
  }

  // Each key's slot is written by exactly one worker before any reads.
  const KeyTable model_keys = BuildKeys(model_row, model_vectors.size());
  const KeyTable test_keys = BuildKeys(test_row, test_vectors.size());
  std::vector<CohortStats> model_stats(model_keys.rows.size());
  std::vector<CohortStats> test_stats(test_keys.rows.size());
  ParallelFor(model_keys.rows.size(), opts.workers, [&](std::size_t k) {
    const std::size_t row = model_keys.rows[k];
    model_stats[k] = scorer.Stats(model_vectors.row(row),
                                  model_vectors.id(row), "enrollment-side");
  });
  ParallelFor(test_keys.rows.size(), opts.workers, [&](std::size_t k) {
    const std::size_t row = test_keys.rows[k];
    test_stats[k] = scorer.Stats(test_vectors.row(row), test_vectors.id(row),
                                 "test-side");
  });
  ParallelFor(raw.size(), opts.workers, [&](std::size_t i) {
    out[i] = {raw[i].model_id, raw[i].test_utt_id,
              NormalizeScore(raw[i].score,
                             model_stats[model_keys.key_of[i]],
                             test_stats[test_keys.key_of[i]])};
  });
  return out;
}

std::vector<ScoreRecord> Fuse(
    const std::vector<std::vector<ScoreRecord>> &score_sets) {
  if (score_sets.empty())
    Fail(ErrorKind::kInvalidArgument, "fusion needs at least one score set");
  const std::vector<ScoreRecord> &first = score_sets.front();
  for (std::size_t s = 1; s < score_sets.size(); ++s) {
    if (score_sets[s].size() != first.size())
      Fail(ErrorKind::kMisaligned,
           "score set " + std::to_string(s + 1) + " has " +
               std::to_string(score_sets[s].size()) + " trials, expected " +
               std::to_string(first.size()));
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (score_sets[s][i].model_id != first[i].model_id ||
          score_sets[s][i].test_utt_id != first[i].test_utt_id)
        Fail(ErrorKind::kMisaligned,
             "score set " + std::to_string(s + 1) + ", " + TrialWhere(i) +
                 ": (" + score_sets[s][i].model_id + ", " +
                 score_sets[s][i].test_utt_id + ") does not match (" +
                 first[i].model_id + ", " + first[i].test_utt_id + ")");
    }
  }
  // mean = x0 + sum(x_k - x0) / K, exact when every set agrees.
  const double k = static_cast<double>(score_sets.size());
  std::vector<ScoreRecord> out = first;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double delta = 0.0;
    for (std::size_t s = 1; s < score_sets.size(); ++s)
      delta += score_sets[s][i].score - first[i].score;
    out[i].score = first[i].score + delta / k;
  }
  return out;
}

}  // namespace tdsv
