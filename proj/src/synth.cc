// src/synth.cc

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

#include "tdsv/synth.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unordered_map>

#include "tdsv/error.h"
#include "tdsv/rng.h"

namespace tdsv {

namespace {

// Stream tags for the counter-based generator.
enum : std::uint64_t {
  kTagSpeakerMean = 1,
  kTagUtterance = 2,
  kTagFreeText = 3,
  kTagCohortMean = 4,
  kTagCohortUtt = 5,
  kTagPosterior = 6,
  kTagTrials = 7,
};

std::string Padded(const char *prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, n);
  return buf;
}

std::string SpeakerId(std::size_t s) { return Padded("spk", s); }
std::string ModelId(std::size_t s, std::size_t p) {
  return SpeakerId(s) + Padded("-p", p);
}
std::string UttId(std::size_t s, std::size_t p, std::size_t i) {
  return ModelId(s, p) + Padded("-u", i);
}
std::string FreeTextId(std::size_t s, std::size_t i) {
  return SpeakerId(s) + Padded("-ft", i);
}

std::vector<double> RandomUnit(CounterRng rng, std::size_t dim) {
  std::vector<double> v(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double &x : v) {
      x = rng.Gaussian();
      sq += x * x;
    }
  } while (sq == 0.0);
  const double n = std::sqrt(sq);
  for (double &x : v) x /= n;
  return v;
}

std::vector<float> NoisyUnit(const std::vector<double> &mean, double noise,
                             CounterRng rng) {
  std::vector<double> v(mean);
  for (double &x : v) x += noise * rng.Gaussian();
  double sq = 0.0;
  for (double x : v) sq += x * x;
  std::vector<float> out(v.size());
  if (sq == 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(mean[i]);
    return out;
  }
  const double n = std::sqrt(sq);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / n);
  return out;
}

// `count` distinct items drawn uniformly without replacement, in draw order.
template <typename T>
std::vector<T> Sample(std::vector<T> pool, std::size_t count, CounterRng &rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

void Require(bool ok, const std::string &what) {
  if (!ok) Fail(ErrorKind::kInfeasibleConfig, "infeasible synthetic config: " + what);
}

}  // namespace

SynthData Generate(const SynthConfig &cfg) {
  Require(cfg.n_speakers >= 1, "need at least one speaker");
  Require(cfg.n_phrases >= 1 && cfg.n_phrases <= static_cast<std::size_t>(kNumPhrases),
          "phrases must be in [1, 10]");
  Require(cfg.utts_per_speaker_phrase >= kStrictEnrollmentCount,
          "need at least 3 utterances per speaker and phrase");
  Require(cfg.dim >= 1, "dimension must be positive");
  Require(cfg.within_noise >= 0.0 && std::isfinite(cfg.within_noise),
          "noise must be non-negative");
  Require(cfg.posterior_confusion >= 0.0 && cfg.posterior_confusion <= 1.0,
          "confusion must be a probability");
  Require(cfg.cohort_speakers == 0 || cfg.utts_per_cohort_speaker >= 1,
          "cohort speakers need at least one utterance");

  const std::size_t tests_per_pair = cfg.utts_per_speaker_phrase - kStrictEnrollmentCount;
  const std::size_t tc_avail = tests_per_pair;
  const std::size_t tw_avail =
      (cfg.n_phrases - 1) * tests_per_pair + cfg.free_text_per_speaker;
  const std::size_t ic_avail = (cfg.n_speakers - 1) * tests_per_pair;
  Require(cfg.tc_per_model <= tc_avail,
          std::to_string(cfg.tc_per_model) + " TC trials per model requested, " +
              std::to_string(tc_avail) + " available");
  Require(cfg.tw_per_model <= tw_avail,
          std::to_string(cfg.tw_per_model) + " TW trials per model requested, " +
              std::to_string(tw_avail) + " available");
  Require(cfg.ic_per_model <= ic_avail,
          std::to_string(cfg.ic_per_model) + " IC trials per model requested, " +
              std::to_string(ic_avail) + " available");

  SynthData data;
  data.embeddings = EmbeddingStore(cfg.dim);
  std::vector<std::vector<double>> means(cfg.n_speakers);
  for (std::size_t s = 0; s < cfg.n_speakers; ++s)
    means[s] = RandomUnit(CounterRng(cfg.seed, {kTagSpeakerMean, s}), cfg.dim);

  std::vector<bool> is_test;
  auto add_utt = [&](const std::string &id, std::size_t s, int phrase,
                     bool test, CounterRng rng) {
    data.embeddings.Add(id, NoisyUnit(means[s], cfg.within_noise, rng));
    data.utt_info.push_back({id, SpeakerId(s), phrase});
    is_test.push_back(test);
  };
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    for (std::size_t p = 0; p < cfg.n_phrases; ++p)
      for (std::size_t i = 0; i < cfg.utts_per_speaker_phrase; ++i)
        add_utt(UttId(s, p, i), s, static_cast<int>(p),
                i >= kStrictEnrollmentCount, CounterRng(cfg.seed, {kTagUtterance, s, p, i}));
    for (std::size_t i = 0; i < cfg.free_text_per_speaker; ++i)
      add_utt(FreeTextId(s, i), s, kFreeTextClass, true,
              CounterRng(cfg.seed, {kTagFreeText, s, i}));
  }

  // Posteriors for test utterances: one-hot on the true class, replaced by
  // a uniformly drawn wrong class with probability `posterior_confusion`.
  // Both draws are made unconditionally so that raising the confusion rate
  // only ever adds corrupted utterances.
  for (std::size_t u = 0; u < data.utt_info.size(); ++u) {
    if (!is_test[u]) continue;
    const UttInfo &info = data.utt_info[u];
    CounterRng rng(cfg.seed, {kTagPosterior, HashWords({u})});
    const double draw = rng.Uniform();
    const int offset = 1 + static_cast<int>(rng.Below(kNumPhraseClasses - 1));
    int cls = info.phrase;
    if (draw < cfg.posterior_confusion) cls = (cls + offset) % kNumPhraseClasses;
    PhrasePosterior post;
    post.utt_id = info.utt_id;
    post.probs[cls] = 1.0;
    data.posteriors.push_back(std::move(post));
  }

  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    for (std::size_t p = 0; p < cfg.n_phrases; ++p) {
      ModelDefinition model;
      model.model_id = ModelId(s, p);
      model.phrase_id = static_cast<int>(p);
      for (std::size_t i = 0; i < kStrictEnrollmentCount; ++i)
        model.enrollment_utts.push_back(UttId(s, p, i));

      std::vector<std::string> tc, tw, ic;
      for (std::size_t i = kStrictEnrollmentCount; i < cfg.utts_per_speaker_phrase; ++i) {
        tc.push_back(UttId(s, p, i));
        for (std::size_t q = 0; q < cfg.n_phrases; ++q)
          if (q != p) tw.push_back(UttId(s, q, i));
        for (std::size_t o = 0; o < cfg.n_speakers; ++o)
          if (o != s) ic.push_back(UttId(o, p, i));
      }
      for (std::size_t i = 0; i < cfg.free_text_per_speaker; ++i)
        tw.push_back(FreeTextId(s, i));

      CounterRng rng(cfg.seed, {kTagTrials, s, p});
      auto emit = [&](std::vector<std::string> pool, std::size_t n, TrialLabel label) {
        for (std::string &utt : Sample(std::move(pool), n, rng))
          data.trials.push_back({model.model_id, std::move(utt), label});
      };
      emit(std::move(tc), cfg.tc_per_model, TrialLabel::kTargetCorrect);
      emit(std::move(tw), cfg.tw_per_model, TrialLabel::kTargetWrong);
      emit(std::move(ic), cfg.ic_per_model, TrialLabel::kImposterCorrect);

      data.models.push_back(std::move(model));
      data.model_speakers.push_back(SpeakerId(s));
    }
  }

  data.cohort_embeddings = EmbeddingStore(cfg.dim);
  for (std::size_t c = 0; c < cfg.cohort_speakers; ++c) {
    const std::vector<double> mean =
        RandomUnit(CounterRng(cfg.seed, {kTagCohortMean, c}), cfg.dim);
    const std::string spk = Padded("coh", c);
    for (std::size_t i = 0; i < cfg.utts_per_cohort_speaker; ++i) {
      const std::string utt = spk + Padded("-u", i);
      data.cohort_embeddings.Add(
          utt, NoisyUnit(mean, cfg.within_noise,
                         CounterRng(cfg.seed, {kTagCohortUtt, c, i})));
      data.cohort_speaker_map.emplace_back(utt, spk);
    }
  }
  return data;
}

std::vector<std::size_t> FindMislabeledTrials(const SynthData &data) {
  struct Owner {
    std::string speaker;
    int phrase;
  };
  std::unordered_map<std::string, Owner> utt_owner, model_owner;
  for (const UttInfo &u : data.utt_info) utt_owner[u.utt_id] = {u.speaker_id, u.phrase};
  for (std::size_t m = 0; m < data.models.size(); ++m)
    model_owner[data.models[m].model_id] = {data.model_speakers.at(m),
                                            data.models[m].phrase_id};
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < data.trials.size(); ++i) {
    const Trial &t = data.trials[i];
    auto u = utt_owner.find(t.test_utt_id);
    auto m = model_owner.find(t.model_id);
    if (u == utt_owner.end() || m == model_owner.end() || !t.label) {
      bad.push_back(i);
      continue;
    }
    const bool same_speaker = u->second.speaker == m->second.speaker;
    const bool same_phrase = u->second.phrase == m->second.phrase;
    const TrialLabel expected =
        same_speaker ? (same_phrase ? TrialLabel::kTargetCorrect : TrialLabel::kTargetWrong)
                     : (same_phrase ? TrialLabel::kImposterCorrect : TrialLabel::kImposterWrong);
    if (*t.label != expected) bad.push_back(i);
  }
  return bad;
}

void WriteSynthData(const std::string &dir, const SynthData &data) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create directory '" + dir + "': " + ec.message());
  auto path = [&](const char *name) { return (fs::path(dir) / name).string(); };

  WriteEmbeddings(path(SynthFiles::kEmbeddings), data.embeddings, EmbeddingFormat::kBinary);
  WriteModels(path(SynthFiles::kModels), data.models);
  WriteTrials(path(SynthFiles::kTrials), data.trials);
  WritePosteriors(path(SynthFiles::kPosteriors), data.posteriors);
  WriteEmbeddings(path(SynthFiles::kCohortEmbeddings), data.cohort_embeddings,
                  EmbeddingFormat::kBinary);
  WriteSpeakerMap(path(SynthFiles::kCohortSpeakerMap), data.cohort_speaker_map);

  std::string info;
  for (const UttInfo &u : data.utt_info)
    info += u.utt_id + '\t' + u.speaker_id + '\t' + std::to_string(u.phrase) + '\n';
  AtomicWriteFile(path(SynthFiles::kUttInfo), info);

  std::string model_spk;
  for (std::size_t m = 0; m < data.models.size(); ++m)
    model_spk += data.models[m].model_id + '\t' + data.model_speakers[m] + '\n';
  AtomicWriteFile(path(SynthFiles::kModelSpeakers), model_spk);
}

}  // namespace tdsv
