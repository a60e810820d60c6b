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

// Generic pairwise matching, and the at-most-one-match pipeline: topmatch
// followed by a confidence model that may abstain.

#ifndef ACIDMATCH_MATCHER_H_
#define ACIDMATCH_MATCHER_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acidmatch/classifiers.h"
#include "acidmatch/core.h"
#include "acidmatch/sampling.h"
#include "acidmatch/similarity.h"

namespace acidmatch {

struct ScoredCandidate {
  size_t index = 0;       // into SN2
  double p = 0.0;         // linker probability
  double blocking = 0.0;  // candidate-set score
};

// Scores every candidate and orders them by p descending, then blocking
// score descending, then SN2 profile id ascending.
std::vector<ScoredCandidate> ScoreCandidates(const CandidateSet& candidates,
                                             const Featurizer& featurizer,
                                             const TrainedModel& linker);

// SN2 ids of the candidates with p > th_p, by p descending.
std::vector<std::string> MatchGeneric(const CandidateSet& candidates,
                                      const Featurizer& featurizer,
                                      const TrainedModel& linker, double th_p);

struct TopMatchResult {
  size_t best = 0;  // SN2 index
  double p1 = 0.0;
  double p2 = 0.0;  // 0 for a singleton candidate set
};

// Throws kInsufficientData on an empty candidate set.
TopMatchResult TopMatch(const CandidateSet& candidates,
                        const Featurizer& featurizer,
                        const TrainedModel& linker);

// (p1, p1 - p2). Throws kOrdering when p1 < p2 and kDomain outside [0,1].
std::array<double, 2> ConfidenceFeatures(double p1, double p2);

// Feature specs of the confidence model: p1 and gap, both in [0,1].
std::vector<FeatureSpec> ConfidenceFeatureSpecs();

struct ConfidenceExample {
  double p1 = 0.0;
  double p2 = 0.0;
  bool correct = false;  // the topmatch is the probe's matching profile
};

// Throws kInsufficientData on an empty set and kSingleClass when every
// example has the same label.
TrainedModel TrainConfidence(std::span<const ConfidenceExample> examples,
                             Family family = Family::kLogisticRegression,
                             uint64_t seed = 0);

// q for a topmatch with probabilities (p1, p2).
double ConfidenceScore(const TrainedModel& confidence, double p1, double p2);

// Runs topmatch over each candidate set; probes with an empty set are
// skipped. A decision is correct when its topmatch is a ground-truth match.
std::vector<ConfidenceExample> CollectConfidenceExamples(
    std::span<const CandidateSet> candidate_sets, const Featurizer& featurizer,
    const TrainedModel& linker, const GroundTruth& gt, int threads = 1);

enum class Outcome { kMatched, kAbstain };

struct MatchDecision {
  std::string probe_id;
  Outcome outcome = Outcome::kAbstain;
  std::string matched_id;  // empty on abstention
  // Topmatch id and probabilities, kept even on abstention.
  std::string top_id;
  double p1 = 0.0;
  double p2 = 0.0;
  double q = 0.0;
};

// Matched(topmatch) iff q > th_q. An empty candidate set abstains with
// p1 = p2 = q = 0.
MatchDecision MatchUnique(const CandidateSet& candidates,
                          const Featurizer& featurizer,
                          const TrainedModel& linker,
                          const TrainedModel& confidence, double th_q);

struct MatchOptions {
  double min_sim = kDefaultMinSim;
  size_t cap = kDefaultCandidateCap;
  int threads = 1;
};

// Builds the candidate set of each probe (SN1 indices) and decides it.
// Output follows probe order and does not depend on the thread count.
std::vector<MatchDecision> MatchUniqueAll(std::span<const size_t> probes,
                                          const Featurizer& featurizer,
                                          const NameIndex& index,
                                          const TrainedModel& linker,
                                          const TrainedModel& confidence,
                                          double th_q,
                                          const MatchOptions& options = {});

struct GenericMatches {
  std::string probe_id;
  std::vector<ScoredCandidate> matches;  // p > th_p
};

std::vector<GenericMatches> MatchGenericAll(std::span<const size_t> probes,
                                            const Featurizer& featurizer,
                                            const NameIndex& index,
                                            const TrainedModel& linker,
                                            double th_p,
                                            const MatchOptions& options = {});

// CSV with header `probe_id,outcome,matched_id,p1,p2,q`; outcome is
// matched|abstain.
void WriteDecisions(std::span<const MatchDecision> decisions,
                    std::ostream& out);
void WriteDecisions(std::span<const MatchDecision> decisions,
                    const std::filesystem::path& path);
std::vector<MatchDecision> ParseDecisions(std::istream& in);

}  // namespace acidmatch

#endif  // ACIDMATCH_MATCHER_H_
