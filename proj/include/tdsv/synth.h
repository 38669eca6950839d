// tdsv/synth.h

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

// Deterministic synthetic text-dependent verification populations.
//
// Speakers are random directions on the unit sphere; an utterance is
// normalize(speaker_mean + noise * N(0, I)).  Each (speaker, phrase) pair
// has `utts_per_speaker_phrase` recordings: the first three enroll a model,
// the rest are test utterances.  Every speaker also has free-text test
// recordings.  Trials per model are drawn without replacement from
//   TC: same speaker, same phrase
//   TW: same speaker, other phrase or free text
//   IC: other speaker, same phrase
// No IW trials are produced.  A disjoint set of background speakers forms
// the cohort.

#ifndef TDSV_SYNTH_H_
#define TDSV_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tdsv/io.h"
#include "tdsv/types.h"

namespace tdsv {

struct SynthConfig {
  std::size_t n_speakers = 50;
  std::size_t n_phrases = 10;
  std::size_t utts_per_speaker_phrase = 6;
  std::size_t free_text_per_speaker = 2;
  std::size_t dim = 256;
  double within_noise = 0.6;
  double posterior_confusion = 0.01;
  std::uint64_t seed = 7;
  std::size_t tc_per_model = 3;
  std::size_t tw_per_model = 3;
  std::size_t ic_per_model = 6;
  std::size_t cohort_speakers = 400;
  std::size_t utts_per_cohort_speaker = 4;
};

struct UttInfo {
  std::string utt_id;
  std::string speaker_id;
  int phrase = 0;  // kFreeTextClass for free text
};

struct SynthData {
  EmbeddingStore embeddings;  // enrollment and test utterances
  std::vector<ModelDefinition> models;
  std::vector<std::string> model_speakers;  // aligned with models
  std::vector<Trial> trials;
  std::vector<PhrasePosterior> posteriors;  // one per test utterance
  std::vector<UttInfo> utt_info;            // one per embedding
  EmbeddingStore cohort_embeddings;
  SpeakerMap cohort_speaker_map;
};

/// Throws kInfeasibleConfig when the requested trial counts exceed the
/// available candidates or a parameter is out of range.
SynthData Generate(const SynthConfig &config);

/// Indices of trials whose label disagrees with the speaker/phrase
/// relation recorded in utt_info and model_speakers.
std::vector<std::size_t> FindMislabeledTrials(const SynthData &data);

/// File names written by WriteSynthData inside the output directory.
struct SynthFiles {
  static constexpr const char *kEmbeddings = "embeddings.bin";
  static constexpr const char *kModels = "models.tsv";
  static constexpr const char *kModelSpeakers = "model_spk.tsv";
  static constexpr const char *kTrials = "trials.tsv";
  static constexpr const char *kPosteriors = "posteriors.tsv";
  static constexpr const char *kUttInfo = "utt_info.tsv";
  static constexpr const char *kCohortEmbeddings = "cohort.bin";
  static constexpr const char *kCohortSpeakerMap = "cohort_spk.tsv";
};

void WriteSynthData(const std::string &dir, const SynthData &data);

}  // namespace tdsv

#endif  // TDSV_SYNTH_H_
