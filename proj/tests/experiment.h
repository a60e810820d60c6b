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

// Shared plumbing for the end-to-end experiments: one generated corpus with
// candidate sets for every ground-truth probe, and train/test splits built
// from it without re-running the name search.

#ifndef ACIDMATCH_TESTS_EXPERIMENT_H_
#define ACIDMATCH_TESTS_EXPERIMENT_H_

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "acidmatch/classifiers.h"
#include "acidmatch/datagen.h"
#include "acidmatch/eval.h"
#include "acidmatch/matcher.h"
#include "acidmatch/sampling.h"

namespace acidmatch::experiment {

class World {
 public:
  // Generates the corpora and searches candidates for every probe. Not
  // movable: the featurizer and index point into the corpora.
  World(const GenConfig& config, double min_sim, size_t cap);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  const GeneratedCorpora& corpora() const { return corpora_; }
  const Featurizer& featurizer() const { return *featurizer_; }
  const NameIndex& index() const { return *index_; }
  double min_sim() const { return min_sim_; }
  size_t cap() const { return cap_; }

  // Candidate sets for the probes of `gt`, in GroundTruthProbes order.
  std::vector<CandidateSet> SetsFor(const GroundTruth& gt) const;

 private:
  GeneratedCorpora corpora_;
  std::unique_ptr<Featurizer> featurizer_;
  std::unique_ptr<NameIndex> index_;
  double min_sim_;
  size_t cap_;
  std::unordered_map<size_t, CandidateSet> sets_;
};

struct Split {
  GroundTruth gt_train;
  GroundTruth gt_test;
  PairDataset rs_train;  // full cross product, before balancing
  PairDataset rs_test;
  EmulatedLarge el_train;
  EmulatedLarge el_test;
};

// Splits by SN1 id (`test_fraction` held out) and builds random-sampled sets
// with `n_pos` positives in total, shared between the parts like the CLI.
Split MakeSplit(const World& world, double test_fraction, size_t n_pos,
                uint64_t seed);

TrainedModel TrainOn(Family family, const PairDataset& ds,
                     const Featurizer& featurizer, uint64_t seed);

double RecallAt(const TrainedModel& model, const PairDataset& ds,
                const Featurizer& featurizer, double target_precision);

// Curves over the probes of a candidate-set collection. Positives that are
// never predicted (the match missing from the set, or not the topmatch)
// count as false negatives.
std::vector<PrPoint> GenericCurve(const EmulatedLarge& el,
                                  const Featurizer& featurizer,
                                  const TrainedModel& linker);
std::vector<PrPoint> TopMatchCurve(std::span<const ConfidenceExample> tops,
                                   size_t positives);
std::vector<PrPoint> ConfidenceCurve(std::span<const ConfidenceExample> tops,
                                     size_t positives,
                                     const TrainedModel& confidence);

}  // namespace acidmatch::experiment

#endif  // ACIDMATCH_TESTS_EXPERIMENT_H_
