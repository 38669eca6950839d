// src/gate.cc

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

#include "tdsv/gate.h"

#include <unordered_map>

#include "tdsv/error.h"

namespace tdsv {

int Classify(const PhrasePosterior &posterior) {
  int best = 0;
  for (int k = 1; k < kNumPhraseClasses; ++k)
    if (posterior.probs[k] > posterior.probs[best]) best = k;
  return best;
}

GateResult Gate(const std::vector<Trial> &trials,
                const std::vector<ModelDefinition> &models,
                const std::vector<PhrasePosterior> &posteriors,
                const std::vector<ScoreRecord> &scores,
                const GateConfig &config) {
  if (scores.size() != trials.size())
    Fail(ErrorKind::kMisaligned, std::to_string(trials.size()) +
                                     " trials but " +
                                     std::to_string(scores.size()) + " scores");
  std::unordered_map<std::string, int> phrase_of;
  for (const ModelDefinition &m : models) phrase_of[m.model_id] = m.phrase_id;
  std::unordered_map<std::string, const PhrasePosterior *> posterior_of;
  for (const PhrasePosterior &p : posteriors) posterior_of[p.utt_id] = &p;

  GateResult result;
  result.scores.reserve(trials.size());
  result.decisions.reserve(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial &trial = trials[i];
    const std::string where = "trial " + std::to_string(i + 1);
    if (scores[i].model_id != trial.model_id ||
        scores[i].test_utt_id != trial.test_utt_id)
      Fail(ErrorKind::kMisaligned, where + ": score record (" +
                                       scores[i].model_id + ", " +
                                       scores[i].test_utt_id +
                                       ") does not match trial");
    auto phrase = phrase_of.find(trial.model_id);
    if (phrase == phrase_of.end())
      Fail(ErrorKind::kMissingId, where + ": no definition for model '" +
                                      trial.model_id + "'");
    auto post = posterior_of.find(trial.test_utt_id);
    if (post == posterior_of.end())
      Fail(ErrorKind::kMissingId, where + ": no posterior for utterance '" +
                                      trial.test_utt_id + "'");
    const int predicted = Classify(*post->second);
    bool accept = predicted == phrase->second;
    if (accept && config.min_confidence &&
        post->second->probs[predicted] < *config.min_confidence)
      accept = false;
    result.decisions.push_back({i, accept, predicted});
    result.scores.push_back(scores[i]);
    if (!accept) {
      result.scores.back().score = config.floor_score;
    } else if (!(scores[i].score > config.floor_score)) {
      Fail(ErrorKind::kFloorViolation,
           where + ": accepted score " + std::to_string(scores[i].score) +
               " is not above the floor " +
               std::to_string(config.floor_score));
    }
  }
  return result;
}

std::string SerializeDecisions(const std::vector<Trial> &trials,
                               const std::vector<GateDecision> &decisions) {
  std::string out;
  for (const GateDecision &d : decisions) {
    const Trial &t = trials.at(d.trial_index);
    out += t.model_id;
    out += '\t';
    out += t.test_utt_id;
    out += '\t';
    out += std::to_string(d.predicted_class);
    out += '\t';
    out += d.accept ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace tdsv
