// src/cli.cc

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

#include "tdsv/cli.h"

#include <chrono>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "tdsv/error.h"
#include "tdsv/gate.h"
#include "tdsv/io.h"
#include "tdsv/loss.h"
#include "tdsv/metrics.h"
#include "tdsv/scoring.h"
#include "tdsv/synth.h"

namespace tdsv {

namespace {

using ConfigMap = std::map<std::string, std::string>;

// `key = value` lines; `#` starts a comment.
ConfigMap LoadConfigFile(const std::string &path) {
  const std::string text = ReadFileBytes(path);
  ConfigMap config;
  std::size_t line_no = 0;
  for (std::string_view line : SplitFields(text, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    auto trim = [](std::string_view s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string_view::npos) return std::string_view{};
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      Fail(ErrorKind::kInvalidArgument,
           path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      Fail(ErrorKind::kInvalidArgument,
           path + ":" + std::to_string(line_no) + ": empty key");
    config[key] = value;
  }
  return config;
}

std::string FindConfigArg(const std::vector<std::string> &args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

// Installs config-file values as option defaults, so command-line flags
// still take precedence.  Keys are long option names, optionally qualified
// by subcommand ("asnorm.top-n").
void ApplyConfig(const ConfigMap &config, CLI::App &app) {
  std::set<std::string> known;
  for (CLI::App *sub : app.get_subcommands({})) {
    for (CLI::Option *opt : sub->get_options()) {
      const std::string name = opt->get_single_name();
      if (opt->get_lnames().empty()) continue;
      known.insert(name);
      known.insert(sub->get_name() + "." + name);
      const std::string *value = nullptr;
      if (auto it = config.find(sub->get_name() + "." + name); it != config.end())
        value = &it->second;
      else if (auto it2 = config.find(name); it2 != config.end())
        value = &it2->second;
      if (!value) continue;
      opt->default_str(*value);
      opt->required(false);
    }
  }
  for (const auto &[key, value] : config)
    if (!known.count(key))
      Fail(ErrorKind::kInvalidArgument, "unknown config key '" + key + "'");
}

// Options not given on the command line fall back to their default string,
// which carries config-file values.  CLI11 only applies defaults to bound
// variables when asked, so do it explicitly.
void ResolveDefaults(CLI::App *sub) {
  for (CLI::Option *opt : sub->get_options()) {
    if (opt->get_lnames().empty() || opt->count() > 0 ||
        opt == sub->get_help_ptr())
      continue;
    const std::string def = opt->get_default_str();
    if (def.empty()) continue;
    opt->clear();
    opt->add_result(def);
    opt->run_callback();
  }
}

std::string Manifest(CLI::App *sub) {
  std::string out = "subcommand\t" + sub->get_name() + "\n";
  for (CLI::Option *opt : sub->get_options()) {
    if (opt->get_lnames().empty() || opt == sub->get_help_ptr()) continue;
    if (opt->get_type_size() == 0) {
      out += opt->get_single_name() + "\t" +
             (opt->count() > 0 ? "true" : "false") + "\n";
      continue;
    }
    std::string value;
    for (const std::string &r : opt->results()) {
      if (!value.empty()) value += ',';
      value += r;
    }
    if (opt->results().empty()) value = opt->get_default_str();
    out += opt->get_single_name() + "\t" + value + "\n";
  }
  return out;
}

void WriteManifestFor(const std::string &output, CLI::App *sub) {
  AtomicWriteFile(output + ".manifest.tsv", Manifest(sub));
}

EmbeddingFormat ParseFormat(const std::string &name) {
  if (name == "binary") return EmbeddingFormat::kBinary;
  if (name == "text") return EmbeddingFormat::kText;
  Fail(ErrorKind::kInvalidArgument, "unknown embedding format '" + name + "'");
}

void CheckWorkers(int workers) {
  if (workers < 1)
    Fail(ErrorKind::kInvalidArgument, "--workers must be at least 1");
}

// Prefixes errors raised while processing `path`.
template <typename Fn>
auto WithContext(const std::string &path, Fn &&fn) {
  try {
    return fn();
  } catch (const Error &e) {
    Fail(e.kind(), path + ": " + e.what());
  }
}

struct GenArgs {
  SynthConfig config;
  std::string out;
};

struct EnrollArgs {
  std::string models, embeddings, out, format = "binary";
  bool relaxed = false;
};

struct ScoreArgs {
  std::string trials, models, embeddings, out;
  int workers = DefaultWorkers();
};

struct ASNormArgs {
  std::string cohort_embeddings, speaker_map, in, out, models, embeddings;
  std::size_t top_n = 300;
  double epsilon_sigma = 1e-6;
  int workers = DefaultWorkers();
  bool no_cache = false;
};

struct GateArgs {
  std::string trials, models, posteriors, scores, out, decisions;
  double floor = -1000.0;
  double min_confidence = 0.0;
  bool relaxed = false;
};

struct FuseArgs {
  std::vector<std::string> in;
  std::string out;
};

struct EvalArgs {
  std::string scores, trials, subset = "all", det_out, eer_method = "interpolated";
  MetricConfig metric;
};

struct LossCheckArgs {
  std::size_t instances = 50;
  std::uint64_t seed = 1;
  double step = 1e-4;
  double tolerance = 1e-4;
};

void RunGen(const GenArgs &a, std::ostream &out) {
  const SynthData data = Generate(a.config);
  WriteSynthData(a.out, data);
  out << "generated " << data.embeddings.size() << " utterances, "
      << data.models.size() << " models, " << data.trials.size()
      << " trials, " << data.cohort_speaker_map.size()
      << " cohort utterances in " << a.out << "\n";
}

void RunEnroll(const EnrollArgs &a, std::ostream &out) {
  const auto models = ReadModels(a.models, {.strict_enrollment = !a.relaxed});
  const EmbeddingStore store = ReadEmbeddingsAuto(a.embeddings);
  const EmbeddingStore vectors =
      Enroll(models, store, {.strict_enrollment = !a.relaxed});
  WriteEmbeddings(a.out, vectors, ParseFormat(a.format));
  out << "enrolled " << vectors.size() << " models\n";
}

void RunScore(const ScoreArgs &a, std::ostream &out) {
  CheckWorkers(a.workers);
  const auto trials = ReadTrials(a.trials);
  const EmbeddingStore models = ReadEmbeddingsAuto(a.models);
  const EmbeddingStore store = ReadEmbeddingsAuto(a.embeddings);
  const auto scores = WithContext(a.trials, [&] {
    return ScoreTrials(trials, models, store, {.workers = a.workers});
  });
  WriteScores(a.out, scores);
  out << "scored " << scores.size() << " trials\n";
}

void RunASNorm(const ASNormArgs &a, std::ostream &out) {
  CheckWorkers(a.workers);
  const auto raw = ReadScores(a.in);
  const EmbeddingStore models = ReadEmbeddingsAuto(a.models);
  const EmbeddingStore store = ReadEmbeddingsAuto(a.embeddings);
  const EmbeddingStore cohort_store = ReadEmbeddingsAuto(a.cohort_embeddings);
  const SpeakerMap speaker_map = ReadSpeakerMap(a.speaker_map);
  const Cohort cohort = BuildCohort(cohort_store, speaker_map);
  const auto normalized = WithContext(a.in, [&] {
    return ASNorm(raw, models, store, cohort,
                  {.top_n = a.top_n, .epsilon_sigma = a.epsilon_sigma},
                  {.workers = a.workers, .cache_cohort_stats = !a.no_cache});
  });
  WriteScores(a.out, normalized);
  out << "normalized " << normalized.size() << " trials against "
      << cohort.size() << " cohort speakers (top " << a.top_n << ")\n";
}

void RunGate(const GateArgs &a, std::ostream &out) {
  const auto trials = ReadTrials(a.trials);
  const auto models = ReadModels(a.models, {.strict_enrollment = !a.relaxed});
  const auto posteriors = ReadPosteriors(a.posteriors);
  const auto scores = ReadScores(a.scores);
  GateConfig config;
  config.floor_score = a.floor;
  if (a.min_confidence > 0.0) config.min_confidence = a.min_confidence;
  const GateResult result = WithContext(a.trials, [&] {
    return Gate(trials, models, posteriors, scores, config);
  });
  WriteScores(a.out, result.scores);
  if (!a.decisions.empty())
    AtomicWriteFile(a.decisions, SerializeDecisions(trials, result.decisions));
  std::size_t accepted = 0;
  for (const GateDecision &d : result.decisions) accepted += d.accept;
  out << "accepted " << accepted << " of " << result.decisions.size()
      << " trials\n";
}

void RunFuse(const FuseArgs &a, std::ostream &out) {
  std::vector<std::vector<ScoreRecord>> sets;
  for (const std::string &path : a.in) sets.push_back(ReadScores(path));
  const auto fused = Fuse(sets);
  WriteScores(a.out, fused);
  out << "fused " << sets.size() << " systems over " << fused.size()
      << " trials\n";
}

std::string FormatProbability(double p) {
  char buf[32];
  int n = std::snprintf(buf, sizeof(buf), "%.9g", p);
  return std::string(buf, n);
}

void RunEval(const EvalArgs &a, std::ostream &out) {
  const auto trials = ReadTrials(a.trials);
  const auto scores = ReadScores(a.scores);
  TrialSubset subset;
  if (a.subset == "all") subset = TrialSubset::kAll;
  else if (a.subset == "tc-vs-tw") subset = TrialSubset::kTcVsTw;
  else if (a.subset == "tc-vs-ic") subset = TrialSubset::kTcVsIc;
  else Fail(ErrorKind::kInvalidArgument, "unknown subset '" + a.subset + "'");
  EerMethod method;
  if (a.eer_method == "interpolated") method = EerMethod::kInterpolated;
  else if (a.eer_method == "discrete") method = EerMethod::kDiscrete;
  else Fail(ErrorKind::kInvalidArgument, "unknown EER method '" + a.eer_method + "'");

  const LabeledScores labeled = WithContext(a.scores, [&] {
    return MapLabels(trials, scores, subset);
  });
  const EvalReport report =
      Evaluate(labeled.targets, labeled.nontargets, a.metric, method);
  if (!a.det_out.empty()) {
    std::string det = "threshold\tp_miss\tp_fa\n";
    for (const DetPoint &p : report.det)
      det += FormatProbability(p.threshold) + "\t" +
             FormatProbability(p.p_miss) + "\t" + FormatProbability(p.p_fa) + "\n";
    AtomicWriteFile(a.det_out, det);
  }
  out << "targets\t" << report.n_target << "\n"
      << "nontargets\t" << report.n_nontarget << "\n"
      << "MinDCF\t" << FormatFixed(report.min_dcf, 4) << "\n"
      << "EER(%)\t" << FormatFixed(100.0 * report.eer, 4) << "\n"
      << "row\t" << FormatFixed(report.min_dcf, 4) << " & "
      << FormatFixed(100.0 * report.eer, 2) << "\n";
}

int RunLossCheck(const LossCheckArgs &a, std::ostream &out) {
  const GradientCheckReport report =
      RunLossGradientCheck(a.instances, a.seed, a.step);
  out << "instances\t" << report.instances << "\n"
      << "max_relative_error\t" << FormatProbability(report.max_relative_error) << "\n"
      << "max_weight_relative_error\t"
      << FormatProbability(report.max_weight_relative_error) << "\n";
  const bool ok = report.max_relative_error < a.tolerance &&
                  report.max_weight_relative_error < a.tolerance;
  out << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 3;
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out,
           std::ostream &err) {
  CLI::App app{"Text-dependent speaker verification scoring and evaluation"};
  app.name(args.empty() ? "tdsv" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string config_path;
  app.add_option("--config", config_path, "key = value defaults file");

  GenArgs gen;
  CLI::App *gen_cmd = app.add_subcommand("gen", "Generate a synthetic population");
  gen_cmd->add_option("--speakers", gen.config.n_speakers, "Evaluation speakers");
  gen_cmd->add_option("--phrases", gen.config.n_phrases, "Phrases (<= 10)");
  gen_cmd->add_option("--utts-per-phrase", gen.config.utts_per_speaker_phrase,
                      "Recordings per speaker and phrase (3 enroll + tests)");
  gen_cmd->add_option("--free-text", gen.config.free_text_per_speaker,
                      "Free-text recordings per speaker");
  gen_cmd->add_option("--dim", gen.config.dim, "Embedding dimension");
  gen_cmd->add_option("--noise", gen.config.within_noise, "Within-speaker noise");
  gen_cmd->add_option("--confusion", gen.config.posterior_confusion,
                      "Phrase posterior confusion probability");
  gen_cmd->add_option("--seed", gen.config.seed, "Random seed");
  gen_cmd->add_option("--tc", gen.config.tc_per_model, "TC trials per model");
  gen_cmd->add_option("--tw", gen.config.tw_per_model, "TW trials per model");
  gen_cmd->add_option("--ic", gen.config.ic_per_model, "IC trials per model");
  gen_cmd->add_option("--cohort-speakers", gen.config.cohort_speakers,
                      "Background cohort speakers");
  gen_cmd->add_option("--cohort-utts", gen.config.utts_per_cohort_speaker,
                      "Recordings per cohort speaker");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  EnrollArgs enroll;
  CLI::App *enroll_cmd = app.add_subcommand("enroll", "Average enrollment embeddings");
  enroll_cmd->add_option("--models", enroll.models, "Model list TSV")->required();
  enroll_cmd->add_option("--embeddings", enroll.embeddings, "Embedding file")->required();
  enroll_cmd->add_option("--out", enroll.out, "Model vector file")->required();
  enroll_cmd->add_option("--format", enroll.format, "binary or text");
  enroll_cmd->add_flag("--relaxed", enroll.relaxed, "Allow any number >= 1 of enrollment utterances");

  ScoreArgs score;
  CLI::App *score_cmd = app.add_subcommand("score", "Cosine-score trials");
  score_cmd->add_option("--trials", score.trials, "Trial list TSV")->required();
  score_cmd->add_option("--models", score.models, "Model vector file")->required();
  score_cmd->add_option("--embeddings", score.embeddings, "Test embedding file")->required();
  score_cmd->add_option("--out", score.out, "Score file")->required();
  score_cmd->add_option("--workers", score.workers, "Worker threads");

  ASNormArgs asnorm;
  CLI::App *asnorm_cmd = app.add_subcommand("asnorm", "Adaptive score normalization");
  asnorm_cmd->add_option("--cohort-embeddings", asnorm.cohort_embeddings,
                         "Cohort utterance embeddings")->required();
  asnorm_cmd->add_option("--speaker-map", asnorm.speaker_map,
                         "Cohort utt -> speaker TSV")->required();
  asnorm_cmd->add_option("--top-n", asnorm.top_n, "Cohort scores kept per side");
  asnorm_cmd->add_option("--epsilon-sigma", asnorm.epsilon_sigma,
                         "Smallest admissible cohort std");
  asnorm_cmd->add_option("--in", asnorm.in, "Raw score file")->required();
  asnorm_cmd->add_option("--out", asnorm.out, "Normalized score file")->required();
  asnorm_cmd->add_option("--models", asnorm.models, "Model vector file")->required();
  asnorm_cmd->add_option("--embeddings", asnorm.embeddings, "Test embedding file")->required();
  asnorm_cmd->add_option("--workers", asnorm.workers, "Worker threads");
  asnorm_cmd->add_flag("--no-cache", asnorm.no_cache,
                       "Recompute cohort statistics per trial");

  GateArgs gate;
  CLI::App *gate_cmd = app.add_subcommand("gate", "Reject wrong-phrase trials");
  gate_cmd->add_option("--trials", gate.trials, "Trial list TSV")->required();
  gate_cmd->add_option("--models", gate.models, "Model list TSV")->required();
  gate_cmd->add_option("--posteriors", gate.posteriors, "Phrase posteriors TSV")->required();
  gate_cmd->add_option("--scores", gate.scores, "Score file")->required();
  gate_cmd->add_option("--floor", gate.floor, "Score assigned to rejected trials");
  gate_cmd->add_option("--out", gate.out, "Gated score file")->required();
  gate_cmd->add_option("--decisions", gate.decisions, "Decision audit TSV");
  gate_cmd->add_option("--min-confidence", gate.min_confidence,
                       "Also reject when the top posterior is below this (0 = off)");
  gate_cmd->add_flag("--relaxed", gate.relaxed, "Allow any number >= 1 of enrollment utterances");

  FuseArgs fuse;
  CLI::App *fuse_cmd = app.add_subcommand("fuse", "Average aligned score files");
  fuse_cmd->add_option("--in", fuse.in, "Score files")->required()->delimiter(',');
  fuse_cmd->add_option("--out", fuse.out, "Fused score file")->required();

  EvalArgs eval;
  CLI::App *eval_cmd = app.add_subcommand("eval", "EER and normalized MinDCF");
  eval_cmd->add_option("--scores", eval.scores, "Score file")->required();
  eval_cmd->add_option("--trials", eval.trials, "Labeled trial list")->required();
  eval_cmd->add_option("--subset", eval.subset, "all, tc-vs-tw or tc-vs-ic");
  eval_cmd->add_option("--p-target", eval.metric.p_target, "Target prior");
  eval_cmd->add_option("--c-miss", eval.metric.c_miss, "Miss cost");
  eval_cmd->add_option("--c-fa", eval.metric.c_fa, "False-alarm cost");
  eval_cmd->add_option("--det-out", eval.det_out, "DET points TSV");
  eval_cmd->add_option("--eer-method", eval.eer_method, "interpolated or discrete");

  LossCheckArgs losscheck;
  CLI::App *loss_cmd = app.add_subcommand("losscheck",
                                          "Finite-difference check of the margin loss gradients");
  loss_cmd->add_option("--instances", losscheck.instances, "Random instances");
  loss_cmd->add_option("--seed", losscheck.seed, "Random seed");
  loss_cmd->add_option("--step", losscheck.step, "Central difference step");
  loss_cmd->add_option("--tolerance", losscheck.tolerance, "Largest passing relative error");

  std::vector<const char *> argv;
  for (const std::string &a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("tdsv");

  try {
    if (const std::string path = FindConfigArg(args); !path.empty())
      ApplyConfig(LoadConfigFile(path), app);
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 1;
    }
    CLI::App *sub = app.get_subcommands().front();
    ResolveDefaults(sub);

    if (sub == gen_cmd) {
      RunGen(gen, out);
      AtomicWriteFile((std::filesystem::path(gen.out) / "manifest.tsv").string(),
                      Manifest(sub));
    } else if (sub == enroll_cmd) {
      RunEnroll(enroll, out);
      WriteManifestFor(enroll.out, sub);
    } else if (sub == score_cmd) {
      RunScore(score, out);
      WriteManifestFor(score.out, sub);
    } else if (sub == asnorm_cmd) {
      RunASNorm(asnorm, out);
      WriteManifestFor(asnorm.out, sub);
    } else if (sub == gate_cmd) {
      RunGate(gate, out);
      WriteManifestFor(gate.out, sub);
    } else if (sub == fuse_cmd) {
      RunFuse(fuse, out);
      WriteManifestFor(fuse.out, sub);
    } else if (sub == eval_cmd) {
      RunEval(eval, out);
      if (!eval.det_out.empty()) WriteManifestFor(eval.det_out, sub);
    } else if (sub == loss_cmd) {
      return RunLossCheck(losscheck, out);
    }
    return 0;
  } catch (const Error &e) {
    err << "error [" << ErrorKindName(e.kind()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace tdsv
