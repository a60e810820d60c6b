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

// Availability, consistency, non-impersonability and discriminability
// estimators, and the closed-form relations between them.
//
// Conventions shared by every estimator:
//  - a MISSING similarity is never consistent (it behaves as similarity 0);
//  - "below th" means "does not pass PassesThreshold", so a pair exactly at
//    th counts as below;
//  - a maximum over an empty set is below th.

#ifndef ACIDMATCH_ACID_H_
#define ACIDMATCH_ACID_H_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "acidmatch/core.h"
#include "acidmatch/sampling.h"
#include "acidmatch/similarity.h"

namespace acidmatch {

struct AcidOptions {
  // Per-probe scans run on this many threads; results do not depend on it.
  int threads = 1;
  // Use the lossless name index for real and screen names. When false every
  // attribute is scanned exhaustively.
  bool name_blocking = true;
};

struct DiscriminabilityResult {
  size_t probes = 0;
  size_t impersonated = 0;
  // Probes whose best non-matching profile (impersonators included) is below
  // th.
  size_t below_all = 0;
  // Probes whose best non-matching, non-impersonating profile is below th.
  size_t below_excluding_impersonators = 0;
  // As above, restricted to probes without impersonators.
  size_t unimpersonated_below = 0;
  // Impersonated probes whose best impersonator is below th.
  size_t impersonators_below = 0;
  bool labeled = false;

  // Effective discriminability over all non-matching profiles.
  double d_tilde() const;
  // Discriminability with impersonators left out of the maximum, over all
  // probes. Satisfies d_tilde() <= d() exactly.
  double d() const;
  // Discriminability over probes that have no impersonator. Satisfies
  // d_conditional() <= d_tilde() / (1 - p_I) exactly. nullopt when every
  // probe is impersonated.
  std::optional<double> d_conditional() const;
  // nullopt without impersonator labels. 1 when no probe is impersonated.
  std::optional<double> non_impersonability() const;
  std::optional<double> impersonation_rate() const;
};

// One row of a single-attribute threshold-classifier sweep over
// probes x SN2: "declare a match iff the attribute passes th".
struct SweepPoint {
  double threshold = 0.0;
  size_t positives = 0;  // matching pairs of the probes
  size_t available = 0;  // of which the attribute is present on both sides
  size_t true_positives = 0;
  size_t false_positives = 0;
  size_t probes = 0;
  size_t probes_below = 0;  // no passing non-matching profile

  double recall() const;
  double precision() const;  // 0 with no declared pairs
  double availability() const;
  double consistency() const;  // 0 with no available pairs
  double d_tilde() const;
};

// Owns the prepared profiles and search structures for one
// (SN1, SN2, ground truth) triple.
class AcidEstimator {
 public:
  AcidEstimator(const Corpus& sn1, const Corpus& sn2, const GroundTruth& gt,
                const AcidOptions& options = {},
                const SimilarityConfig& similarity = {});
  ~AcidEstimator();

  // Throws kEmptyGroundTruth.
  double Availability(AttributeKind kind) const;
  // Throws kEmptyGroundTruth or kNoAvailablePairs.
  double Consistency(AttributeKind kind, const ThresholdConfig& th) const;
  // Throws kEmptyCorpus when SN2 is empty.
  DiscriminabilityResult Discriminability(std::span<const size_t> probes,
                                          AttributeKind kind,
                                          const ThresholdConfig& th) const;
  // Probes are every ground-truth SN1 profile.
  std::vector<SweepPoint> Sweep(AttributeKind kind,
                                std::span<const double> thresholds) const;

  // Appends (SN2 index, raw score) for every non-matching SN2 profile whose
  // score might pass `th` (a superset: callers re-check PassesThreshold).
  void NonMatchCandidates(size_t probe, AttributeKind kind, double th,
                          std::vector<std::pair<size_t, double>>& out) const;

  std::span<const size_t> probes() const { return probes_; }
  const Featurizer& featurizer() const { return featurizer_; }
  const GroundTruth& ground_truth() const { return *gt_; }

 private:
  struct FriendIndex;

  void CollectNames(size_t probe, AttributeKind kind, double th,
                    std::vector<std::pair<size_t, double>>& out) const;
  void CollectLocation(size_t probe, double th,
                       std::vector<std::pair<size_t, double>>& out) const;
  void CollectPhoto(size_t probe, double th,
                    std::vector<std::pair<size_t, double>>& out) const;
  void CollectFriends(size_t probe, double th,
                      std::vector<std::pair<size_t, double>>& out) const;
  void CollectExhaustive(size_t probe, AttributeKind kind,
                         std::vector<std::pair<size_t, double>>& out) const;
  // SN2 indices matching SN1 profile `probe`.
  std::span<const size_t> MatchIndices(size_t probe) const;

  const GroundTruth* gt_;
  AcidOptions options_;
  Featurizer featurizer_;
  std::vector<size_t> probes_;
  std::unordered_map<size_t, std::vector<size_t>> matches_;
  std::unordered_map<size_t, std::vector<size_t>> impersonators_;
  std::unique_ptr<NameIndex> names_;
  std::vector<std::pair<double, size_t>> by_latitude_;
  std::vector<size_t> with_photo_;
  std::unique_ptr<FriendIndex> friends_;
};

// Free-function estimators; each builds a throwaway AcidEstimator.
double EstimateAvailability(const GroundTruth& gt, const Corpus& sn1,
                            const Corpus& sn2, AttributeKind kind);
double EstimateConsistency(const GroundTruth& gt, const Corpus& sn1,
                           const Corpus& sn2, AttributeKind kind,
                           const ThresholdConfig& th);
// `probes` are SN1 ids; matching profiles per `gt` are excluded.
double EstimateDiscriminability(std::span<const std::string> probes,
                                const Corpus& sn1, const Corpus& sn2,
                                const GroundTruth& gt, AttributeKind kind,
                                const ThresholdConfig& th);

struct NonImpersonability {
  double non_impersonability = 1.0;
  double impersonation_rate = 0.0;
};
// Throws kNoImpersonatorLabels when SN2 is not impersonation-labeled.
NonImpersonability EstimateNonImpersonability(
    std::span<const std::string> probes, const Corpus& sn1, const Corpus& sn2,
    const GroundTruth& gt, AttributeKind kind, const ThresholdConfig& th);

// C * A. Throws kDomain outside [0,1].
double TheoremRecall(double availability, double consistency);
// recall / (recall + 1 - d_tilde); 0 when recall is 0. Throws kDomain.
double PrecisionUpperBound(double recall, double d_tilde);
// d * ((1 - p_I) + nI * p_I). Throws kDomain.
double EffectiveDiscriminability(double d, double non_impersonability,
                                 double impersonation_rate);

// Single-attribute threshold classifier as a score and a cut: a pair is
// declared iff DeclareScore(kind, raw) > DeclareThreshold(kind, th), which
// agrees exactly with PassesThreshold. MISSING scores -infinity.
double DeclareScore(AttributeKind kind, std::optional<double> raw);
double DeclareThreshold(AttributeKind kind, const ThresholdConfig& th);

struct AttributeAcid {
  AttributeKind kind = AttributeKind::kRealName;
  double availability = 0.0;
  std::optional<double> consistency;  // nullopt: no available pairs
  std::optional<double> non_impersonability;
  double d_tilde = 0.0;
  std::optional<double> d;
  double threshold = 0.0;
};

struct AcidReport {
  std::array<AttributeAcid, kNumAttributes> attributes;
  ThresholdConfig thresholds;
  std::optional<double> impersonation_rate;
  size_t sn1_size = 0;
  size_t sn2_size = 0;
  size_t ground_truth_size = 0;
  size_t probes = 0;
};

AcidReport ComputeAcidReport(const AcidEstimator& estimator,
                             const ThresholdConfig& th);
AcidReport ComputeAcidReport(const GroundTruth& gt, const Corpus& sn1,
                             const Corpus& sn2, const ThresholdConfig& th,
                             const AcidOptions& options = {});

// Header `attribute,A,C,nI,D_tilde,th,p_I`; unknown values print UNKNOWN.
void WriteAcidReportCsv(const AcidReport& report, std::ostream& out);
void WriteAcidReportCsv(const AcidReport& report,
                        const std::filesystem::path& path);
std::string FormatAcidTable(const AcidReport& report);

}  // namespace acidmatch

#endif  // ACIDMATCH_ACID_H_
