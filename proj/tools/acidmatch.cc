// Copyright 2026 The acidmatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch command line: gen | acid | sample | train | eval | match.
//
// Every artifact-producing command writes its outputs into --out and a
// single <command>_manifest.json next to them. Failures print one line,
// `error: <code>: <message>`, and exit with status 1.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "acidmatch/acid.h"
#include "acidmatch/classifiers.h"
#include "acidmatch/core.h"
#include "acidmatch/datagen.h"
#include "acidmatch/error.h"
#include "acidmatch/eval.h"
#include "acidmatch/manifest.h"
#include "acidmatch/matcher.h"
#include "acidmatch/sampling.h"
#include "acidmatch/similarity.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace acidmatch;

namespace {

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string JsonNumber(double v) { return nlohmann::json(v).dump(); }

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "cannot create directory " + dir.string());
  }
}

// Inputs shared by the commands that read corpora.
struct CorpusArgs {
  std::string sn1;
  std::string sn2;
  std::string gazetteer;

  void Register(CLI::App* cmd) {
    cmd->add_option("--sn1", sn1, "SN1 profiles (JSON lines)")->required();
    cmd->add_option("--sn2", sn2, "SN2 profiles (JSON lines)")->required();
    cmd->add_option("--gazetteer", gazetteer,
                    "CSV label,lat,lon for locations given by label only");
  }
};

struct LoadedCorpora {
  Gazetteer gazetteer;
  Corpus sn1;
  Corpus sn2;
};

std::unique_ptr<LoadedCorpora> Load(const CorpusArgs& args,
                                    RunManifest& manifest) {
  auto out = std::make_unique<LoadedCorpora>();
  const Gazetteer* gaz = nullptr;
  if (!args.gazetteer.empty()) {
    out->gazetteer = Gazetteer::Load(args.gazetteer);
    manifest.AddInput(args.gazetteer);
    gaz = &out->gazetteer;
  }
  out->sn1 = LoadProfiles(args.sn1, gaz);
  out->sn2 = LoadProfiles(args.sn2, gaz);
  manifest.AddInput(args.sn1);
  manifest.AddInput(args.sn2);
  return out;
}

ThresholdConfig LoadThresholds(const std::string& path,
                               RunManifest& manifest) {
  if (path.empty()) return ThresholdConfig{};
  manifest.AddInput(path);
  ThresholdConfig th = ThresholdConfig::Load(path);
  th.Validate();
  return th;
}

// ------------------------------------------------------------------ gen

struct GenArgs {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
};

void RunGen(const GenArgs& args) {
  GenConfig config = GenConfig::Load(args.config);
  if (args.seed) config.seed = *args.seed;
  RunManifest manifest("gen");
  manifest.set_seed(config.seed);
  manifest.set_config(config.ToJsonText());
  manifest.AddInput(args.config);
  const GeneratedCorpora g = Generate(config);

  const fs::path dir(args.out);
  EnsureDir(dir);
  WriteProfiles(g.sn1, dir / "sn1.jsonl");
  WriteProfiles(g.sn2, dir / "sn2.jsonl");
  WriteGroundTruth(g.gt, dir / "ground_truth.csv");
  for (const char* name : {"sn1.jsonl", "sn2.jsonl", "ground_truth.csv"}) {
    manifest.AddOutput(dir / name);
  }
  nlohmann::ordered_json cal;
  for (AttributeKind kind : kAllAttributes) {
    const AttributeCalibration& c = g.calibration[Slot(kind)];
    cal[std::string(AttributeName(kind))] = {
        {"expected_availability", c.expected_availability},
        {"achieved_availability", c.achieved_availability},
        {"target_consistency", c.target_consistency},
        {"achieved_consistency", c.achieved_consistency},
        {"available_pairs", c.available_pairs}};
  }
  manifest.AddResult("calibration", cal.dump());
  manifest.AddResult("sn1_size", std::to_string(g.sn1.size()));
  manifest.AddResult("sn2_size", std::to_string(g.sn2.size()));
  manifest.AddResult("ground_truth_pairs", std::to_string(g.gt.size()));
  manifest.AddResult("impersonators", std::to_string(g.impersonators));
  manifest.AddResult("renamed_pairs", std::to_string(g.renamed));
  manifest.Write(dir);
  std::cout << "generated " << g.sn1.size() << " SN1 profiles, "
            << g.sn2.size() << " SN2 profiles, " << g.gt.size()
            << " matching pairs, " << g.impersonators << " impersonators\n";
}

// ----------------------------------------------------------------- acid

struct AcidArgs {
  CorpusArgs corpora;
  std::string gt;
  std::string thresholds;
  std::string out;
  int threads = 1;
  uint64_t seed = 0;
};

void RunAcid(const AcidArgs& args) {
  RunManifest manifest("acid");
  manifest.set_seed(args.seed);
  const auto c = Load(args.corpora, manifest);
  const GroundTruth gt = LoadGroundTruth(args.gt, c->sn1, c->sn2);
  manifest.AddInput(args.gt);
  const ThresholdConfig th = LoadThresholds(args.thresholds, manifest);
  manifest.set_config(th.ToJsonText());
  AcidOptions options;
  options.threads = args.threads;
  const AcidReport report = ComputeAcidReport(gt, c->sn1, c->sn2, th, options);
  const fs::path dir(args.out);
  EnsureDir(dir);
  WriteAcidReportCsv(report, dir / "acid_report.csv");
  manifest.AddOutput(dir / "acid_report.csv");
  manifest.Write(dir);
  std::cout << FormatAcidTable(report);
}

// --------------------------------------------------------------- sample

struct SampleArgs {
  CorpusArgs corpora;
  std::string gt;
  std::string out;
  uint64_t seed = 0;
  int threads = 1;
  size_t n_pos = 850;
  double test_fraction = 0.3;
  double min_sim = kDefaultMinSim;
  size_t cap = kDefaultCandidateCap;
  bool include_uncontained = false;
  size_t enriched = 0;
};

void RunSample(const SampleArgs& args) {
  if (!(args.test_fraction >= 0.0 && args.test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "--test-fraction must lie in [0,1)");
  }
  RunManifest manifest("sample");
  manifest.set_seed(args.seed);
  manifest.AddParameter("n_pos", std::to_string(args.n_pos));
  manifest.AddParameter("test_fraction", Fixed(args.test_fraction, 6));
  manifest.AddParameter("min_sim", Fixed(args.min_sim, 6));
  manifest.AddParameter("cap", std::to_string(args.cap));
  manifest.AddParameter("include_uncontained",
                        args.include_uncontained ? "true" : "false");
  const auto c = Load(args.corpora, manifest);
  const GroundTruth gt = LoadGroundTruth(args.gt, c->sn1, c->sn2);
  manifest.AddInput(args.gt);

  const auto [gt_train, gt_test] =
      SplitGroundTruth(gt, 1.0 - args.test_fraction, args.seed);
  const fs::path dir(args.out);
  EnsureDir(dir);
  auto emit = [&](const PairDataset& ds, const std::string& name) {
    WritePairDataset(ds, dir / name);
    manifest.AddOutput(dir / name);
    manifest.AddResult(name + ":pairs", std::to_string(ds.size()));
    manifest.AddResult(name + ":positives", std::to_string(ds.CountPositives()));
  };
  auto emit_gt = [&](const GroundTruth& part, const std::string& name) {
    WriteGroundTruth(part, dir / name);
    manifest.AddOutput(dir / name);
  };

  const Featurizer featurizer(c->sn1, c->sn2);
  const NameIndex index(c->sn2, featurizer.all_prepared2());
  EmulatedLargeOptions el;
  el.min_sim = args.min_sim;
  el.cap = args.cap;
  el.include_uncontained = args.include_uncontained;
  el.threads = args.threads;

  const size_t n_train = std::min(
      gt_train.size(),
      static_cast<size_t>(static_cast<double>(args.n_pos) *
                          (1.0 - args.test_fraction)));
  const size_t n_test = std::min(gt_test.size(), args.n_pos - n_train);

  const PairDataset random_train =
      BuildRandomSampled(gt_train, n_train, args.seed);
  emit(random_train, "random_train.csv");
  emit(Undersample(random_train, args.seed), "train.csv");
  emit_gt(gt_train, "gt_train.csv");

  const auto train_probes = GroundTruthProbes(gt_train, c->sn1);
  const EmulatedLarge el_train =
      BuildEmulatedLarge(train_probes, featurizer, index, gt_train, el);
  emit(el_train.dataset, "emulated_train.csv");
  manifest.AddResult("containment_rate_train",
                     JsonNumber(el_train.containment_rate));
  std::cout << "train: containment rate " << Fixed(el_train.containment_rate)
            << ", mean candidates " << Fixed(el_train.mean_candidates, 1)
            << "\n";

  const size_t n_enriched = args.enriched > 0 ? args.enriched : n_train;
  emit(BuildEnrichedTraining(gt_train, random_train, el_train.dataset,
                             n_enriched, args.seed),
       "enriched_train.csv");

  if (!gt_test.empty() && n_test > 0) {
    emit(BuildRandomSampled(gt_test, n_test, args.seed), "random_test.csv");
    emit_gt(gt_test, "gt_test.csv");
    const auto test_probes = GroundTruthProbes(gt_test, c->sn1);
    const EmulatedLarge el_test =
        BuildEmulatedLarge(test_probes, featurizer, index, gt_test, el);
    emit(el_test.dataset, "emulated_test.csv");
    manifest.AddResult("containment_rate_test",
                       JsonNumber(el_test.containment_rate));
    std::cout << "test: containment rate " << Fixed(el_test.containment_rate)
              << ", mean candidates " << Fixed(el_test.mean_candidates, 1)
              << "\n";
  }
  manifest.Write(dir);
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  CorpusArgs corpora;
  std::string family = "nb";
  std::string strategy;
  std::string train;
  std::string hard;
  std::string linker;
  std::string gt;
  std::string out;
  std::string name;
  uint64_t seed = 0;
  int threads = 1;
  double min_sim = kDefaultMinSim;
  size_t cap = kDefaultCandidateCap;
};

void RunTrain(const TrainArgs& args) {
  RunManifest manifest("train");
  manifest.set_seed(args.seed);
  manifest.AddParameter("family", args.family);
  const auto c = Load(args.corpora, manifest);
  const Featurizer featurizer(c->sn1, c->sn2);

  TrainConfig config;
  if (!args.strategy.empty()) {
    config.strategy = ParseStrategy(args.strategy);
    if (!config.strategy) {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown strategy '" + args.strategy + "'");
    }
  }
  auto dataset = [&](const std::string& path, const char* flag) {
    if (path.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  std::string(flag) + " is required for family " + args.family);
    }
    manifest.AddInput(path);
    PairDataset ds = LoadPairDataset(path);
    config.manifest[std::string(flag + 2) + "_sha256"] = Sha256File(path);
    return ds;
  };

  TrainedModel model;
  std::string name = args.name;
  if (args.family == "cascade") {
    const PairDataset random = dataset(args.train, "--train");
    const PairDataset hard = dataset(args.hard, "--hard");
    model = TrainCascade(FeaturizeDataset(random, featurizer, args.threads),
                         FeaturizeDataset(hard, featurizer, args.threads),
                         config, args.seed);
    if (name.empty()) name = "cascade";
  } else if (args.family == "confidence") {
    if (args.linker.empty() || args.gt.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "family confidence needs --linker and --gt");
    }
    manifest.AddInput(args.linker);
    manifest.AddInput(args.gt);
    const TrainedModel linker = LoadModel(args.linker);
    const GroundTruth gt = LoadGroundTruth(args.gt, c->sn1, c->sn2);
    const NameIndex index(c->sn2, featurizer.all_prepared2());
    const auto probes = GroundTruthProbes(gt, c->sn1);
    std::vector<CandidateSet> sets(probes.size());
    for (size_t i = 0; i < probes.size(); ++i) {
      sets[i] = BuildCandidateSet(probes[i], featurizer.prepared1(probes[i]),
                                  index, args.min_sim, args.cap);
    }
    const auto examples =
        CollectConfidenceExamples(sets, featurizer, linker, gt, args.threads);
    model = TrainConfidence(examples, Family::kLogisticRegression, args.seed);
    manifest.AddResult("confidence_examples", std::to_string(examples.size()));
    if (name.empty()) name = "confidence";
  } else {
    const auto family = ParseFamily(args.family);
    if (!family) {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown family '" + args.family + "'");
    }
    const PairDataset ds = dataset(args.train, "--train");
    model = Train(*family, FeaturizeDataset(ds, featurizer, args.threads),
                  config, args.seed);
    if (name.empty()) name = args.family;
  }
  const fs::path dir(args.out);
  EnsureDir(dir);
  const fs::path path = dir / (name + ".model");
  SaveModel(model, path);
  manifest.AddOutput(path);
  for (const auto& [k, v] : model.manifest()) {
    manifest.AddParameter("model." + k, v);
  }
  manifest.Write(dir);
  std::cout << "wrote " << path.string() << "\n";
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  CorpusArgs corpora;
  std::vector<std::string> models;
  std::vector<std::string> labels;
  std::string dataset;
  std::string thresholds;
  std::string out;
  uint64_t seed = 0;
  int threads = 1;
  double target_precision = 0.95;
  std::optional<double> th_p;
  size_t n_thresholds = kDefaultThresholdCount;
};

void RunEval(const EvalArgs& args) {
  RunManifest manifest("eval");
  manifest.set_seed(args.seed);
  manifest.AddParameter("target_precision", Fixed(args.target_precision, 6));
  const auto c = Load(args.corpora, manifest);
  const Featurizer featurizer(c->sn1, c->sn2);
  const ThresholdConfig th = LoadThresholds(args.thresholds, manifest);
  manifest.AddInput(args.dataset);
  const PairDataset ds = LoadPairDataset(args.dataset);
  if (ds.empty()) throw Error(ErrorCode::kEmptyCurve, "dataset is empty");
  if (!args.labels.empty() && args.labels.size() != args.models.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "--label must be given once per --model");
  }

  const fs::path dir(args.out);
  EnsureDir(dir);
  std::vector<LabeledCurve> curves;
  nlohmann::ordered_json summary;
  for (size_t m = 0; m < args.models.size(); ++m) {
    manifest.AddInput(args.models[m]);
    const TrainedModel model = LoadModel(args.models[m]);
    const std::string label = args.labels.empty()
                                  ? fs::path(args.models[m]).stem().string()
                                  : args.labels[m];
    const auto scores = ScoreDataset(model, ds, featurizer, args.threads);
    std::vector<int> y(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) y[i] = ds.pairs[i].match;
    LabeledCurve curve{label, PrCurve(scores, y, args.n_thresholds)};
    const double recall = RecallAtPrecision(curve.points, args.target_precision);
    const double th_p =
        args.th_p ? *args.th_p
                  : ThresholdAtPrecision(curve.points, args.target_precision);
    const MatchBreakdown breakdown =
        ComputeMatchBreakdown(scores, ds, featurizer, th_p, th);
    const std::string prefix = args.models.size() == 1 ? "" : label + "_";
    WritePrCsv(curve.points, dir / (prefix + "pr.csv"));
    WriteBreakdownCsv(breakdown, dir / (prefix + "breakdown.csv"));
    manifest.AddOutput(dir / (prefix + "pr.csv"));
    manifest.AddOutput(dir / (prefix + "breakdown.csv"));
    summary[label] = {{"recall_at_precision", recall}, {"th_p", th_p}};
    std::cout << label << ": recall " << Fixed(recall) << " at precision "
              << Fixed(args.target_precision, 2) << " (th_p " << Fixed(th_p)
              << ")\n";
    curves.push_back(std::move(curve));
  }
  EmitPrSvg(curves, dir / "pr.svg");
  manifest.AddOutput(dir / "pr.svg");
  for (size_t i = 0; i < curves.size(); ++i) {
    std::string safe;
    for (char ch : curves[i].label) {
      safe.push_back(std::isalnum(static_cast<unsigned char>(ch)) ||
                             ch == '-' || ch == '_'
                         ? ch
                         : '_');
    }
    if (safe.empty()) safe = "curve";
    manifest.AddOutput(dir / ("pr_" + std::to_string(i) + "_" + safe + ".csv"));
  }
  manifest.AddResult("summary", summary.dump());
  manifest.Write(dir);
}

void RunImbalanceDemo(const std::vector<double>& v) {
  const ImbalanceResult r = ImbalanceDemo(v[0], v[1], v[2], v[3]);
  std::cout << "true matches " << Fixed(r.true_matches, 0)
            << ", false matches " << Fixed(r.false_matches, 0)
            << ", precision " << Fixed(100.0 * r.precision, 2) << "%\n";
}

// ---------------------------------------------------------------- match

struct MatchArgs {
  CorpusArgs corpora;
  std::string mode = "unique";
  std::string model;
  std::string confidence;
  std::string gt;
  std::string calibration_gt;
  std::string out;
  uint64_t seed = 0;
  int threads = 1;
  bool remove_matches = false;
  std::optional<double> th_p;
  std::optional<double> th_q;
  double target_precision = 0.95;
  double min_sim = kDefaultMinSim;
  size_t cap = kDefaultCandidateCap;
};

void RunMatch(const MatchArgs& args) {
  if (args.mode != "generic" && args.mode != "unique") {
    throw Error(ErrorCode::kInvalidConfig,
                "--mode must be generic or unique, got '" + args.mode + "'");
  }
  RunManifest manifest("match");
  manifest.set_seed(args.seed);
  manifest.AddParameter("mode", args.mode);
  manifest.AddParameter("remove_matches", args.remove_matches ? "true" : "false");
  const auto c = Load(args.corpora, manifest);
  manifest.AddInput(args.model);
  const TrainedModel linker = LoadModel(args.model);
  TrainedModel confidence;
  if (args.mode == "unique") {
    if (args.confidence.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "--mode unique needs --confidence");
    }
    manifest.AddInput(args.confidence);
    confidence = LoadModel(args.confidence);
  }
  MatchOptions options;
  options.min_sim = args.min_sim;
  options.cap = args.cap;
  options.threads = args.threads;

  // Threshold: explicit, or calibrated on labeled probes against the full
  // SN2 corpus.
  double threshold = 0.0;
  const std::optional<double> explicit_th =
      args.mode == "unique" ? args.th_q : args.th_p;
  if (explicit_th) {
    threshold = *explicit_th;
  } else {
    if (args.calibration_gt.empty()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "give a threshold (--th-q / --th-p) or --calibration-gt");
    }
    manifest.AddInput(args.calibration_gt);
    const GroundTruth cal = LoadGroundTruth(args.calibration_gt, c->sn1, c->sn2);
    const Featurizer featurizer(c->sn1, c->sn2);
    const NameIndex index(c->sn2, featurizer.all_prepared2());
    const auto probes = GroundTruthProbes(cal, c->sn1);
    std::vector<double> scores;
    std::vector<int> labels;
    size_t positives = 0;
    for (size_t probe : probes) {
      const CandidateSet cs = BuildCandidateSet(
          probe, featurizer.prepared1(probe), index, args.min_sim, args.cap);
      const std::string& id1 = c->sn1[probe].profile_id;
      for (const Candidate& cand : cs.candidates) {
        positives += cal.IsMatch(id1, c->sn2[cand.index].profile_id);
      }
      if (cs.candidates.empty()) continue;
      if (args.mode == "unique") {
        const MatchDecision d =
            MatchUnique(cs, featurizer, linker, confidence, 1.0);
        scores.push_back(d.q);
        labels.push_back(cal.IsMatch(id1, d.top_id));
      } else {
        for (const ScoredCandidate& s :
             ScoreCandidates(cs, featurizer, linker)) {
          scores.push_back(s.p);
          labels.push_back(cal.IsMatch(id1, c->sn2[s.index].profile_id));
        }
      }
    }
    size_t predicted_pos = 0;
    for (int y : labels) predicted_pos += y;
    const auto curve =
        PrCurve(scores, labels, kDefaultThresholdCount,
                positives > predicted_pos ? positives - predicted_pos : 0);
    threshold = ThresholdAtPrecision(curve, args.target_precision);
    manifest.AddResult("calibration_recall",
                       JsonNumber(RecallAtPrecision(curve, args.target_precision)));
  }
  manifest.AddResult("threshold", JsonNumber(threshold));

  // Probe set and the SN2 corpus to match against.
  Corpus sn2 = c->sn2;
  std::vector<size_t> probes;
  if (!args.gt.empty()) {
    manifest.AddInput(args.gt);
    const GroundTruth gt = LoadGroundTruth(args.gt, c->sn1, c->sn2);
    probes = GroundTruthProbes(gt, c->sn1);
    if (args.remove_matches) sn2 = RemoveMatches(c->sn2, gt);
  } else {
    if (args.remove_matches) {
      throw Error(ErrorCode::kInvalidConfig, "--remove-matches needs --gt");
    }
    for (size_t i = 0; i < c->sn1.size(); ++i) probes.push_back(i);
  }
  const Featurizer featurizer(c->sn1, sn2);
  const NameIndex index(sn2, featurizer.all_prepared2());

  const fs::path dir(args.out);
  EnsureDir(dir);
  if (args.mode == "unique") {
    const auto decisions = MatchUniqueAll(probes, featurizer, index, linker,
                                          confidence, threshold, options);
    WriteDecisions(decisions, dir / "decisions.csv");
    manifest.AddOutput(dir / "decisions.csv");
    size_t matched = 0;
    for (const MatchDecision& d : decisions) {
      matched += d.outcome == Outcome::kMatched;
    }
    const double rate = decisions.empty()
                            ? 0.0
                            : static_cast<double>(matched) /
                                  static_cast<double>(decisions.size());
    manifest.AddResult("matched_rate", JsonNumber(rate));
    std::cout << "probes " << decisions.size() << ", matched " << matched
              << " (" << Fixed(100.0 * rate, 2) << "%), abstained "
              << decisions.size() - matched << ", th_q " << Fixed(threshold)
              << "\n";
  } else {
    const auto all = MatchGenericAll(probes, featurizer, index, linker,
                                     threshold, options);
    const fs::path path = dir / "matches.csv";
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    out << "probe_id,matched_id,p\n";
    size_t total = 0;
    for (const GenericMatches& g : all) {
      for (const ScoredCandidate& s : g.matches) {
        char p[40];
        std::snprintf(p, sizeof(p), "%.17g", s.p);
        out << g.probe_id << ',' << sn2[s.index].profile_id << ',' << p << '\n';
        ++total;
      }
    }
    out.close();
    if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
    manifest.AddOutput(path);
    manifest.AddResult("declared_matches", std::to_string(total));
    std::cout << "probes " << all.size() << ", declared matches " << total
              << ", th_p " << Fixed(threshold) << "\n";
  }
  manifest.Write(dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acidmatch: cross-network profile matching experiments"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate synthetic corpora");
  gen_cmd->add_option("--config", gen.config, "generator config (JSON)")
      ->required();
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "overrides the config seed");
  int gen_threads = 1;
  gen_cmd->add_option("--threads", gen_threads,
                      "accepted for uniformity; generation is sequential");

  AcidArgs acid;
  auto* acid_cmd = app.add_subcommand("acid", "estimate ACID properties");
  acid.corpora.Register(acid_cmd);
  acid_cmd->add_option("--gt", acid.gt, "ground truth CSV")->required();
  acid_cmd->add_option("--thresholds", acid.thresholds, "threshold JSON");
  acid_cmd->add_option("--out", acid.out, "output directory")->required();
  acid_cmd->add_option("--threads", acid.threads)->check(CLI::PositiveNumber);
  acid_cmd->add_option("--seed", acid.seed);

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "build pair datasets");
  sample.corpora.Register(sample_cmd);
  sample_cmd->add_option("--gt", sample.gt, "ground truth CSV")->required();
  sample_cmd->add_option("--out", sample.out, "output directory")->required();
  sample_cmd->add_option("--seed", sample.seed);
  sample_cmd->add_option("--threads", sample.threads)
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--n-pos", sample.n_pos,
                         "matching pairs behind the random-sampled sets");
  sample_cmd->add_option("--test-fraction", sample.test_fraction,
                         "share of SN1 probes held out for testing");
  sample_cmd->add_option("--min-sim", sample.min_sim, "blocking Jaro floor");
  sample_cmd->add_option("--cap", sample.cap, "candidate set cap");
  sample_cmd->add_flag("--include-uncontained", sample.include_uncontained,
                       "add matches that fall outside the candidate sets");
  sample_cmd->add_option("--enriched", sample.enriched,
                         "n for the enriched training set (default: train n)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train.corpora.Register(train_cmd);
  train_cmd->add_option("--family", train.family,
                        "nb|lr|svm|dt|cascade|confidence");
  train_cmd->add_option("--strategy", train.strategy,
                        "missing-value strategy");
  train_cmd->add_option("--train", train.train, "training pair dataset");
  train_cmd->add_option("--hard", train.hard, "hard negatives (cascade)");
  train_cmd->add_option("--linker", train.linker, "linker model (confidence)");
  train_cmd->add_option("--gt", train.gt, "ground truth (confidence)");
  train_cmd->add_option("--name", train.name, "model file stem");
  train_cmd->add_option("--out", train.out, "output directory")->required();
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--threads", train.threads)
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--min-sim", train.min_sim);
  train_cmd->add_option("--cap", train.cap);

  EvalArgs eval;
  std::vector<double> demo;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate models");
  eval_cmd->add_option("--demo-imbalance", demo,
                       "print the class-imbalance arithmetic: tpr fpr n_pos n_neg")
      ->expected(4);
  eval_cmd->add_option("--sn1", eval.corpora.sn1);
  eval_cmd->add_option("--sn2", eval.corpora.sn2);
  eval_cmd->add_option("--gazetteer", eval.corpora.gazetteer);
  eval_cmd->add_option("--model", eval.models, "model file (repeatable)");
  eval_cmd->add_option("--label", eval.labels, "curve label per model");
  eval_cmd->add_option("--dataset", eval.dataset, "labeled pair dataset");
  eval_cmd->add_option("--thresholds", eval.thresholds, "threshold JSON");
  eval_cmd->add_option("--out", eval.out, "output directory");
  eval_cmd->add_option("--seed", eval.seed);
  eval_cmd->add_option("--threads", eval.threads)->check(CLI::PositiveNumber);
  eval_cmd->add_option("--target-precision", eval.target_precision);
  eval_cmd->add_option("--th-p", eval.th_p, "breakdown threshold on p");
  eval_cmd->add_option("--n-thresholds", eval.n_thresholds);

  MatchArgs match;
  auto* match_cmd = app.add_subcommand("match", "match SN1 probes into SN2");
  match.corpora.Register(match_cmd);
  match_cmd->add_option("--mode", match.mode, "generic|unique");
  match_cmd->add_option("--model", match.model, "linker model")->required();
  match_cmd->add_option("--confidence", match.confidence, "confidence model");
  match_cmd->add_option("--gt", match.gt, "probe ground truth");
  match_cmd->add_option("--calibration-gt", match.calibration_gt,
                        "labeled probes for threshold calibration");
  match_cmd->add_flag("--remove-matches", match.remove_matches,
                      "drop the --gt matches from SN2 first");
  match_cmd->add_option("--th-p", match.th_p);
  match_cmd->add_option("--th-q", match.th_q);
  match_cmd->add_option("--target-precision", match.target_precision);
  match_cmd->add_option("--min-sim", match.min_sim);
  match_cmd->add_option("--cap", match.cap);
  match_cmd->add_option("--out", match.out, "output directory")->required();
  match_cmd->add_option("--seed", match.seed);
  match_cmd->add_option("--threads", match.threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: usage: " << msg << "\n";
    return 2;
  }

  try {
    if (*gen_cmd) {
      RunGen(gen);
    } else if (*acid_cmd) {
      RunAcid(acid);
    } else if (*sample_cmd) {
      RunSample(sample);
    } else if (*train_cmd) {
      RunTrain(train);
    } else if (*eval_cmd) {
      if (!demo.empty()) {
        RunImbalanceDemo(demo);
      } else {
        if (eval.corpora.sn1.empty() || eval.corpora.sn2.empty() ||
            eval.models.empty() || eval.dataset.empty() || eval.out.empty()) {
          throw Error(ErrorCode::kInvalidConfig,
                      "eval needs --sn1, --sn2, --model, --dataset and --out");
        }
        RunEval(eval);
      }
    } else if (*match_cmd) {
      RunMatch(match);
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << ErrorCodeName(e.code()) << ": " << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: internal: " << msg << "\n";
    return 1;
  }
  return 0;
}
