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

// Evaluation and training pair sets: random cross products, name-blocked
// candidate sets and class balancing.

#ifndef ACIDMATCH_SAMPLING_H_
#define ACIDMATCH_SAMPLING_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "acidmatch/core.h"
#include "acidmatch/similarity.h"

namespace acidmatch {

enum class Provenance { kRandomSampled, kEmulatedLarge, kEnrichedTraining };

// "random_sampled", "emulated_large", "enriched_training".
std::string_view ProvenanceName(Provenance p);
std::optional<Provenance> ParseProvenance(std::string_view name);

struct LabeledPair {
  std::string id1;
  std::string id2;
  bool match = false;
  Provenance provenance = Provenance::kRandomSampled;

  bool operator==(const LabeledPair&) const = default;
};

struct PairDataset {
  std::vector<LabeledPair> pairs;

  size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  size_t CountPositives() const;
  size_t CountNegatives() const { return size() - CountPositives(); }

  bool operator==(const PairDataset&) const = default;
};

// CSV with header `id1,id2,label,provenance`; label is match|non-match.
// Reading rejects duplicate pairs.
PairDataset ParsePairDataset(std::istream& in);
PairDataset LoadPairDataset(const std::filesystem::path& path);
void WritePairDataset(const PairDataset& ds, std::ostream& out);
void WritePairDataset(const PairDataset& ds,
                      const std::filesystem::path& path);

// Throws kDuplicatePair on repeats and kInvalidConfig when a label
// disagrees with `gt`.
void ValidatePairDataset(const PairDataset& ds, const GroundTruth& gt);

// Splits ground-truth pairs by SN1 id into two parts; `first_fraction` of the
// distinct SN1 ids (rounded down) go to the first part.
std::pair<GroundTruth, GroundTruth> SplitGroundTruth(const GroundTruth& gt,
                                                     double first_fraction,
                                                     uint64_t seed);

// Picks `n_pos` ground-truth pairs uniformly and emits every combination of
// their SN1 and SN2 sides, row-major in draw order.
PairDataset BuildRandomSampled(const GroundTruth& gt, size_t n_pos,
                               uint64_t seed);

enum class NameField { kRealName, kScreenName };

// Inverted index over the case-folded names of an SN2 corpus. Retrieval is
// lossless: Search returns exactly the entries whose Jaro similarity to the
// query is at least `min_sim`.
//
// Posting lists are keyed by single characters with per-name multiplicities.
// The multiset intersection bounds the number of Jaro matching characters m,
// and (m/|q| + m/|n| + 1)/3 bounds the similarity; only names passing that
// bound are verified.
struct Candidate {
  size_t index = 0;  // into the SN2 corpus
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

class NameIndex {
 public:
  // `prepared` must outlive the index and align with `corpus`.
  NameIndex(const Corpus& corpus, std::span<const PreparedProfile> prepared);

  // (corpus index, Jaro) pairs, in corpus-index order.
  void Search(NameField field, std::u32string_view query, double min_sim,
              std::vector<std::pair<size_t, double>>& out) const;

  // Top `cap` profiles by max(real-name, screen-name) Jaro among those with
  // at least `min_sim` (> 0) on either field; same result and order as an
  // exhaustive scan, but stops once the remaining keys cannot qualify.
  void Best(const PreparedProfile& probe, double min_sim, size_t cap,
            std::vector<Candidate>& out) const;

  const Corpus& corpus() const { return *corpus_; }
  std::span<const PreparedProfile> prepared() const { return prepared_; }

 private:
  struct FieldIndex {
    std::vector<std::u32string> keys;
    std::vector<std::vector<uint32_t>> owners;
    std::unordered_map<char32_t, std::vector<std::pair<uint32_t, uint32_t>>>
        postings;
  };

  void Add(FieldIndex& index, std::unordered_map<std::u32string, uint32_t>& ids,
           const std::u32string& key, uint32_t owner);
  void CountCommon(const FieldIndex& index, std::u32string_view query,
                   std::vector<uint32_t>& acc,
                   std::vector<uint32_t>& touched) const;
  void SearchField(const FieldIndex& index, std::u32string_view query,
                   double min_sim,
                   std::vector<std::pair<size_t, double>>& out) const;

  const Corpus* corpus_;
  std::span<const PreparedProfile> prepared_;
  FieldIndex real_names_;
  FieldIndex screen_names_;
};

inline constexpr double kDefaultMinSim = 0.5;
inline constexpr size_t kDefaultCandidateCap = 1000;

// Ordered by score descending, then SN2 profile id ascending.
struct CandidateSet {
  size_t probe = 0;  // into the SN1 corpus
  std::vector<Candidate> candidates;
};

// SN2 profiles whose real-name or screen-name Jaro to the probe's
// corresponding field is at least `min_sim`, scored by the larger of the two
// and truncated to `cap`.
CandidateSet BuildCandidateSet(size_t probe_index, const PreparedProfile& probe,
                               const NameIndex& index, double min_sim,
                               size_t cap);

struct EmulatedLargeOptions {
  double min_sim = kDefaultMinSim;
  size_t cap = kDefaultCandidateCap;
  // Adds the matching pair of probes whose match fell outside the candidate
  // set.
  bool include_uncontained = false;
  int threads = 1;
};

struct EmulatedLarge {
  PairDataset dataset;
  std::vector<CandidateSet> candidate_sets;  // one per probe, input order
  size_t probes_with_match = 0;
  size_t contained = 0;
  double containment_rate = 0.0;
  double mean_candidates = 0.0;
};

EmulatedLarge BuildEmulatedLarge(std::span<const size_t> probes,
                                 const Featurizer& featurizer,
                                 const NameIndex& index, const GroundTruth& gt,
                                 const EmulatedLargeOptions& options = {});

// Assembles the dataset from candidate sets built earlier, for example once
// for every probe and then reused across train/test splits.
EmulatedLarge EmulatedLargeFromCandidates(std::vector<CandidateSet> sets,
                                          const Corpus& sn1, const Corpus& sn2,
                                          const GroundTruth& gt,
                                          bool include_uncontained = false);

// SN1 indices of every ground-truth probe, in ground-truth order, deduplicated.
std::vector<size_t> GroundTruthProbes(const GroundTruth& gt, const Corpus& sn1);

// Keeps every positive and samples negatives without replacement down to the
// positive count; original order is preserved. Never oversamples.
PairDataset Undersample(const PairDataset& ds, uint64_t seed);

// n positives and n negatives from `random_ds` plus n negatives from
// `emulated_ds`, deduplicated, tagged enriched_training.
PairDataset BuildEnrichedTraining(const GroundTruth& gt,
                                  const PairDataset& random_ds,
                                  const PairDataset& emulated_ds, size_t n,
                                  uint64_t seed);

}  // namespace acidmatch

#endif  // ACIDMATCH_SAMPLING_H_
