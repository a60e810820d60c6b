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

#include "acidmatch/matcher.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "acidmatch/error.h"
#include "acidmatch/parallel.h"
#include "csv.h"

namespace acidmatch {

std::vector<ScoredCandidate> ScoreCandidates(const CandidateSet& candidates,
                                             const Featurizer& featurizer,
                                             const TrainedModel& linker) {
  std::vector<ScoredCandidate> out;
  out.reserve(candidates.candidates.size());
  for (const Candidate& c : candidates.candidates) {
    const FeatureVector fv = featurizer(candidates.probe, c.index);
    out.push_back({c.index, linker.PredictProba(fv), c.score});
  }
  const Corpus& sn2 = featurizer.sn2();
  std::sort(out.begin(), out.end(),
            [&](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.p != b.p) return a.p > b.p;
              if (a.blocking != b.blocking) return a.blocking > b.blocking;
              return sn2[a.index].profile_id < sn2[b.index].profile_id;
            });
  return out;
}

std::vector<std::string> MatchGeneric(const CandidateSet& candidates,
                                      const Featurizer& featurizer,
                                      const TrainedModel& linker,
                                      double th_p) {
  std::vector<std::string> out;
  for (const ScoredCandidate& c :
       ScoreCandidates(candidates, featurizer, linker)) {
    if (c.p <= th_p) break;
    out.push_back(featurizer.sn2()[c.index].profile_id);
  }
  return out;
}

TopMatchResult TopMatch(const CandidateSet& candidates,
                        const Featurizer& featurizer,
                        const TrainedModel& linker) {
  if (candidates.candidates.empty()) {
    throw Error(ErrorCode::kInsufficientData,
                "topmatch needs a nonempty candidate set");
  }
  const auto scored = ScoreCandidates(candidates, featurizer, linker);
  TopMatchResult r;
  r.best = scored[0].index;
  r.p1 = scored[0].p;
  r.p2 = scored.size() > 1 ? scored[1].p : 0.0;
  return r;
}

std::array<double, 2> ConfidenceFeatures(double p1, double p2) {
  if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0)) {
    throw Error(ErrorCode::kDomain, "probabilities must lie in [0,1]");
  }
  if (p1 < p2) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "p1 (%.6g) is below p2 (%.6g)", p1, p2);
    throw Error(ErrorCode::kOrdering, buf);
  }
  return {p1, p1 - p2};
}

std::vector<FeatureSpec> ConfidenceFeatureSpecs() {
  return {FeatureSpec{"p1", 0.0, 1.0, false},
          FeatureSpec{"gap", 0.0, 1.0, false}};
}

TrainedModel TrainConfidence(std::span<const ConfidenceExample> examples,
                             Family family, uint64_t seed) {
  if (examples.empty()) {
    throw Error(ErrorCode::kInsufficientData,
                "confidence training set is empty");
  }
  Matrix m;
  m.features = ConfidenceFeatureSpecs();
  for (const ConfidenceExample& e : examples) {
    const auto f = ConfidenceFeatures(e.p1, e.p2);
    m.rows.push_back({f[0], f[1]});
    m.labels.push_back(e.correct ? 1 : 0);
  }
  TrainConfig config;
  config.manifest["role"] = "confidence";
  return Train(family, m, config, seed);
}

double ConfidenceScore(const TrainedModel& confidence, double p1, double p2) {
  const auto f = ConfidenceFeatures(p1, p2);
  const std::optional<double> row[2] = {f[0], f[1]};
  return confidence.PredictProba(row);
}

std::vector<ConfidenceExample> CollectConfidenceExamples(
    std::span<const CandidateSet> candidate_sets, const Featurizer& featurizer,
    const TrainedModel& linker, const GroundTruth& gt, int threads) {
  std::vector<std::optional<ConfidenceExample>> slots(candidate_sets.size());
  ParallelFor(candidate_sets.size(), threads, [&](size_t i) {
    const CandidateSet& cs = candidate_sets[i];
    if (cs.candidates.empty()) return;
    const TopMatchResult top = TopMatch(cs, featurizer, linker);
    slots[i] = ConfidenceExample{
        top.p1, top.p2,
        gt.IsMatch(featurizer.sn1()[cs.probe].profile_id,
                   featurizer.sn2()[top.best].profile_id)};
  });
  std::vector<ConfidenceExample> out;
  for (const auto& s : slots) {
    if (s) out.push_back(*s);
  }
  return out;
}

MatchDecision MatchUnique(const CandidateSet& candidates,
                          const Featurizer& featurizer,
                          const TrainedModel& linker,
                          const TrainedModel& confidence, double th_q) {
  MatchDecision d;
  d.probe_id = featurizer.sn1()[candidates.probe].profile_id;
  if (candidates.candidates.empty()) return d;
  const TopMatchResult top = TopMatch(candidates, featurizer, linker);
  d.top_id = featurizer.sn2()[top.best].profile_id;
  d.p1 = top.p1;
  d.p2 = top.p2;
  d.q = ConfidenceScore(confidence, top.p1, top.p2);
  if (d.q > th_q) {
    d.outcome = Outcome::kMatched;
    d.matched_id = d.top_id;
  }
  return d;
}

std::vector<MatchDecision> MatchUniqueAll(std::span<const size_t> probes,
                                          const Featurizer& featurizer,
                                          const NameIndex& index,
                                          const TrainedModel& linker,
                                          const TrainedModel& confidence,
                                          double th_q,
                                          const MatchOptions& options) {
  std::vector<MatchDecision> out(probes.size());
  ParallelFor(probes.size(), options.threads, [&](size_t i) {
    const CandidateSet cs =
        BuildCandidateSet(probes[i], featurizer.prepared1(probes[i]), index,
                          options.min_sim, options.cap);
    out[i] = MatchUnique(cs, featurizer, linker, confidence, th_q);
  });
  return out;
}

std::vector<GenericMatches> MatchGenericAll(std::span<const size_t> probes,
                                            const Featurizer& featurizer,
                                            const NameIndex& index,
                                            const TrainedModel& linker,
                                            double th_p,
                                            const MatchOptions& options) {
  std::vector<GenericMatches> out(probes.size());
  ParallelFor(probes.size(), options.threads, [&](size_t i) {
    const CandidateSet cs =
        BuildCandidateSet(probes[i], featurizer.prepared1(probes[i]), index,
                          options.min_sim, options.cap);
    out[i].probe_id = featurizer.sn1()[probes[i]].profile_id;
    for (const ScoredCandidate& c : ScoreCandidates(cs, featurizer, linker)) {
      if (c.p <= th_p) break;
      out[i].matches.push_back(c);
    }
  });
  return out;
}

namespace {

constexpr std::string_view kDecisionsHeader = "probe_id,outcome,matched_id,p1,p2,q";

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void WriteDecisions(std::span<const MatchDecision> decisions,
                    std::ostream& out) {
  out << kDecisionsHeader << '\n';
  for (const MatchDecision& d : decisions) {
    out << csv::Escape(d.probe_id) << ','
        << (d.outcome == Outcome::kMatched ? "matched" : "abstain") << ','
        << csv::Escape(d.matched_id) << ',' << Num(d.p1) << ',' << Num(d.p2)
        << ',' << Num(d.q) << '\n';
  }
}

void WriteDecisions(std::span<const MatchDecision> decisions,
                    const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  WriteDecisions(decisions, out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<MatchDecision> ParseDecisions(std::istream& in) {
  csv::ExpectHeader(in, kDecisionsHeader, "decisions");
  std::vector<MatchDecision> out;
  std::string line;
  size_t line_no = 1;
  while (csv::GetLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::SplitLine(line);
    if (f.size() != 6) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": expected 6 fields");
    }
    MatchDecision d;
    d.probe_id = f[0];
    if (f[1] == "matched") {
      d.outcome = Outcome::kMatched;
    } else if (f[1] != "abstain") {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                         ": unknown outcome '" + f[1] + "'");
    }
    d.matched_id = f[2];
    d.top_id = f[2];
    d.p1 = csv::ParseDouble(f[3], line_no);
    d.p2 = csv::ParseDouble(f[4], line_no);
    d.q = csv::ParseDouble(f[5], line_no);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace acidmatch
