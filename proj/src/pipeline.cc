// src/pipeline.cc

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

#include "tdsv/pipeline.h"

namespace tdsv {

PipelineResult RunPipeline(const SynthData &data, const PipelineOptions &opts) {
  PipelineResult result;
  const EmbeddingStore model_vectors = Enroll(data.models, data.embeddings);
  result.raw = ScoreTrials(data.trials, model_vectors, data.embeddings,
                           {.workers = opts.workers});
  if (opts.apply_asnorm) {
    const Cohort cohort =
        BuildCohort(data.cohort_embeddings, data.cohort_speaker_map);
    result.normalized = ASNorm(result.raw, model_vectors, data.embeddings,
                               cohort, opts.asnorm, {.workers = opts.workers});
  } else {
    result.normalized = result.raw;
  }
  result.gated = Gate(data.trials, data.models, data.posteriors,
                      result.normalized, opts.gate);

  const LabeledScores all = MapLabels(data.trials, result.gated.scores);
  result.all = Evaluate(all.targets, all.nontargets, opts.metric);
  const LabeledScores tw =
      MapLabels(data.trials, result.gated.scores, TrialSubset::kTcVsTw);
  if (!tw.nontargets.empty())
    result.tc_vs_tw = Evaluate(tw.targets, tw.nontargets, opts.metric);

  for (std::size_t i = 0; i < data.trials.size(); ++i) {
    if (data.trials[i].label != TrialLabel::kTargetWrong) continue;
    ++result.tw_trials;
    if (result.gated.decisions[i].accept) ++result.tw_accepted;
  }
  return result;
}

}  // namespace tdsv
