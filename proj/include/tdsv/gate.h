// tdsv/gate.h

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

// Phrase gate: rejects trials whose test utterance was classified as a
// phrase other than the model's enrolled phrase (or as free text).

#ifndef TDSV_GATE_H_
#define TDSV_GATE_H_

#include <optional>
#include <string>
#include <vector>

#include "tdsv/types.h"

namespace tdsv {

struct GateConfig {
  double floor_score = -1000.0;
  // When set, also reject if the winning probability is below this value.
  std::optional<double> min_confidence;
};

struct GateDecision {
  std::size_t trial_index = 0;
  bool accept = false;
  int predicted_class = 0;
};

struct GateResult {
  std::vector<ScoreRecord> scores;
  std::vector<GateDecision> decisions;
};

/// Argmax over the 11 classes; ties go to the lowest index.
int Classify(const PhrasePosterior &posterior);

/// Accepted trials keep their score bit-for-bit; rejected trials get
/// config.floor_score.  `scores` must be aligned with `trials`.  After
/// gating, every accepted score must lie strictly above the floor
/// (kFloorViolation otherwise).
GateResult Gate(const std::vector<Trial> &trials,
                const std::vector<ModelDefinition> &models,
                const std::vector<PhrasePosterior> &posteriors,
                const std::vector<ScoreRecord> &scores,
                const GateConfig &config = {});

/// TSV: model_id, test_utt_id, predicted class, accept (1/0).
std::string SerializeDecisions(const std::vector<Trial> &trials,
                               const std::vector<GateDecision> &decisions);

}  // namespace tdsv

#endif  // TDSV_GATE_H_
