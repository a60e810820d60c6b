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

// Precision/recall curves, the class-imbalance arithmetic and per-attribute
// breakdowns of true, missed and false matches.

#ifndef ACIDMATCH_EVAL_H_
#define ACIDMATCH_EVAL_H_

#include <array>
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

// A pair is predicted a match iff its score is strictly above `threshold`.
struct PrPoint {
  double threshold = 0.0;
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  size_t tn = 0;
  double precision = 0.0;  // 0 when nothing is predicted
  double recall = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

inline constexpr size_t kDefaultThresholdCount = 101;

// Points at `n_thresholds` evenly spaced thresholds on [0,1], at every
// distinct score, and just below the smallest score (everything predicted),
// sorted by threshold. `extra_fn` adds positives that can never be predicted
// (for example matches missing from a candidate set). Throws kEmptyCurve
// when there is nothing to score.
std::vector<PrPoint> PrCurve(std::span<const double> scores,
                             std::span<const int> labels,
                             size_t n_thresholds = kDefaultThresholdCount,
                             size_t extra_fn = 0);

// Scores every pair with `model`.
std::vector<double> ScoreDataset(const TrainedModel& model,
                                 const PairDataset& ds,
                                 const Featurizer& featurizer,
                                 int threads = 1);

std::vector<PrPoint> PrCurve(const TrainedModel& model, const PairDataset& ds,
                             const Featurizer& featurizer,
                             size_t n_thresholds = kDefaultThresholdCount,
                             int threads = 1);

// Largest recall among points with precision >= target; 0 if none.
double RecallAtPrecision(std::span<const PrPoint> curve,
                         double target_precision);

// Threshold of the point realizing RecallAtPrecision (the largest such
// threshold on ties). Returns 1 when no point qualifies, which predicts
// nothing for scores in [0,1].
double ThresholdAtPrecision(std::span<const PrPoint> curve,
                            double target_precision);

struct ImbalanceResult {
  double true_matches = 0.0;
  double false_matches = 0.0;
  double precision = 0.0;
};

// (tpr * n_pos, fpr * n_neg, precision of those counts). Throws kDomain on
// rates outside [0,1] or negative counts.
ImbalanceResult ImbalanceDemo(double tpr, double fpr, double n_pos,
                              double n_neg);

enum class BreakdownColumn { kAll, kTrue, kMissed, kFalse };
inline constexpr size_t kNumBreakdownColumns = 4;

// Per attribute, the fraction of pairs in each column that have the
// attribute available on both sides and consistent under the thresholds.
// Columns: all matching pairs, true matches, missed matches, false matches.
// nullopt marks an empty column.
struct MatchBreakdown {
  std::array<std::array<std::optional<double>, kNumBreakdownColumns>,
             kNumAttributes>
      fraction;
  std::array<size_t, kNumBreakdownColumns> pairs{};
  double th_p = 0.0;
};

MatchBreakdown ComputeMatchBreakdown(std::span<const double> scores,
                                     const PairDataset& ds,
                                     const Featurizer& featurizer, double th_p,
                                     const ThresholdConfig& thresholds);
MatchBreakdown ComputeMatchBreakdown(const TrainedModel& model,
                                     const PairDataset& ds,
                                     const Featurizer& featurizer, double th_p,
                                     const ThresholdConfig& thresholds,
                                     int threads = 1);

// Header `attribute,all,true,missed,false`; empty columns print UNKNOWN.
void WriteBreakdownCsv(const MatchBreakdown& breakdown, std::ostream& out);
void WriteBreakdownCsv(const MatchBreakdown& breakdown,
                       const std::filesystem::path& path);

// Header `threshold,tp,fp,fn,tn,precision,recall,tpr,fpr`.
void WritePrCsv(std::span<const PrPoint> curve, std::ostream& out);
void WritePrCsv(std::span<const PrPoint> curve,
                const std::filesystem::path& path);
std::vector<PrPoint> ParsePrCsv(std::istream& in);

struct LabeledCurve {
  std::string label;
  std::vector<PrPoint> points;
};

// Standalone SVG of recall (x) against precision (y) on [0,1]x[0,1], one
// polyline and legend entry per curve. Each curve is also written as CSV
// next to `path`, named `<stem>_<index>_<label>.csv`. Throws kEmptyCurve if
// there are no curves or any curve is empty.
void EmitPrSvg(std::span<const LabeledCurve> curves,
               const std::filesystem::path& path);

}  // namespace acidmatch

#endif  // ACIDMATCH_EVAL_H_
