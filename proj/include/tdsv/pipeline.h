// tdsv/pipeline.h

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

// End-to-end scoring of a synthetic population: enroll, cosine-score,
// AS-Norm, phrase-gate, evaluate.

#ifndef TDSV_PIPELINE_H_
#define TDSV_PIPELINE_H_

#include "tdsv/gate.h"
#include "tdsv/metrics.h"
#include "tdsv/scoring.h"
#include "tdsv/synth.h"

namespace tdsv {

struct PipelineOptions {
  bool apply_asnorm = true;
  ASNormConfig asnorm;
  GateConfig gate;
  MetricConfig metric;
  int workers = DefaultWorkers();
};

struct PipelineResult {
  std::vector<ScoreRecord> raw;
  std::vector<ScoreRecord> normalized;  // equals raw without AS-Norm
  GateResult gated;
  EvalReport all;        // TC vs TW + IC on gated scores
  EvalReport tc_vs_tw;   // phrase gate view
  std::size_t tw_trials = 0;
  std::size_t tw_accepted = 0;
};

PipelineResult RunPipeline(const SynthData &data, const PipelineOptions &opts);

}  // namespace tdsv

#endif  // TDSV_PIPELINE_H_
