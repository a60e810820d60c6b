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

// Binary classifiers over feature rows with explicit missing values: naive
// Bayes with kernel densities, logistic regression, linear SVM and a CART
// decision tree, plus a two-stage naive Bayes cascade.

#ifndef ACIDMATCH_CLASSIFIERS_H_
#define ACIDMATCH_CLASSIFIERS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acidmatch/core.h"
#include "acidmatch/sampling.h"
#include "acidmatch/similarity.h"

namespace acidmatch {

enum class Family { kNaiveBayes, kLogisticRegression, kLinearSvm, kDecisionTree };

enum class MissingStrategy {
  kSkipFeature,
  kImputeMedian,
  kImputeNegativeOne,
  kAllBranches,
};

// "naive_bayes_kde", "logistic_regression", "linear_svm", "decision_tree".
std::string_view FamilyName(Family family);
// Also accepts the short forms nb, lr, svm, dt.
std::optional<Family> ParseFamily(std::string_view name);
std::string_view StrategyName(MissingStrategy strategy);
std::optional<MissingStrategy> ParseStrategy(std::string_view name);

MissingStrategy DefaultStrategy(Family family);
// NB: skip_feature. LR: impute_median. SVM: impute_negative_one.
// DT: impute_negative_one or all_branches.
bool IsCompatible(Family family, MissingStrategy strategy);

// Domain of one input column. Kernel densities reflect at finite bounds;
// linear models see log(1 + x) when `log1p_linear` is set.
struct FeatureSpec {
  std::string name;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  bool log1p_linear = false;

  bool operator==(const FeatureSpec&) const = default;
};

// The five similarity slots of a FeatureVector.
std::vector<FeatureSpec> LinkerFeatures();

using Row = std::vector<std::optional<double>>;

struct Matrix {
  std::vector<FeatureSpec> features;
  std::vector<Row> rows;
  std::vector<int> labels;  // 1 match, 0 non-match

  size_t dim() const { return features.size(); }
  size_t size() const { return rows.size(); }
  size_t positives() const;
};

Matrix FeaturizeDataset(const PairDataset& ds, const Featurizer& featurizer,
                        int threads = 1);

// One-dimensional Gaussian kernel density with reflection at finite domain
// bounds and Silverman's bandwidth 0.9 * min(sd, IQR / 1.34) * n^(-1/5)
// (falling back to whichever spread is positive, then to `min_bandwidth`).
class KernelDensity {
 public:
  KernelDensity() = default;
  KernelDensity(std::span<const double> samples, double lower, double upper,
                double min_bandwidth);

  // Exact log density; inputs are clamped into the domain first.
  double ExactLogDensity(double x) const;
  double Density(double x) const;
  // Piecewise-linear interpolation of ExactLogDensity on a grid of spacing
  // bandwidth / 16 covering the samples +- 10 bandwidths; exact elsewhere.
  double LogDensity(double x) const;

  double bandwidth() const { return bandwidth_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double min_sample() const { return values_.front(); }
  double max_sample() const { return values_.back(); }
  size_t sample_count() const { return n_; }
  // Sorted distinct samples and their multiplicities.
  std::span<const double> values() const { return values_; }
  std::span<const double> counts() const { return counts_; }

 private:
  std::vector<double> values_;
  std::vector<double> counts_;
  size_t n_ = 0;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double bandwidth_ = 0.0;
  double log_norm_ = 0.0;
  double grid_lo_ = 0.0;
  double grid_step_ = 0.0;
  std::vector<double> grid_;
};

struct NaiveBayesParams {
  std::vector<std::vector<double>> samples[2];  // [class][feature] raw values
  double log_prior[2] = {0.0, 0.0};
  // density[class][feature]; empty when the feature is skipped because a
  // class has no observed value.
  std::vector<std::optional<KernelDensity>> density[2];
  // log(1 / width of the pooled training range) per feature; the weight of
  // the uniform component mixed into each class density.
  std::vector<double> floor_log_density;
  double min_bandwidth = 0.0;
};

// Shared preprocessing of the linear families: optional log1p, imputation
// of missing values, then standardization with training statistics.
struct LinearParams {
  std::vector<char> log1p;
  std::vector<double> fill;  // value for missing entries, after log1p
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> weights;
  double bias = 0.0;

  std::vector<double> Transform(std::span<const std::optional<double>> x) const;
  double Margin(std::span<const std::optional<double>> x) const;
};

struct LogisticParams {
  LinearParams linear;
  double l2 = 0.0;
  int iterations = 0;
};

struct SvmParams {
  LinearParams linear;
  double lambda = 0.0;
  double platt_a = 0.0;
  double platt_b = 0.0;
  // Training objective after each epoch (not persisted).
  std::vector<double> objective_history;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;  // x <= threshold
  int right = -1;
  double left_fraction = 0.5;  // share of training weight sent left
  double probability = 0.0;    // Laplace-corrected positive share
  double weight = 0.0;
};

struct TreeParams {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct TrainConfig {
  std::optional<MissingStrategy> strategy;  // default per family
  double nb_min_bandwidth = 1e-2;
  double lr_l2 = 1e-3;
  int lr_max_iterations = 5000;
  double lr_tolerance = 1e-9;
  std::vector<double> svm_lambdas = {1e-4, 1e-3, 1e-2, 1e-1};
  int svm_epochs = 300;
  int svm_folds = 10;
  int dt_min_leaf = 5;
  int dt_max_depth = 8;
  double cascade_threshold = 0.5;
  // Extra provenance recorded in the model manifest.
  std::map<std::string, std::string> manifest;
};

class TrainedModel {
 public:
  TrainedModel() = default;

  bool valid() const { return impl_ != nullptr; }
  Family family() const;
  MissingStrategy strategy() const;
  bool is_cascade() const;
  const std::vector<FeatureSpec>& features() const;
  size_t dim() const { return features().size(); }
  const std::map<std::string, std::string>& manifest() const;

  // Probability of the positive class, in [0,1].
  double PredictProba(std::span<const std::optional<double>> x) const;
  double PredictProba(const FeatureVector& fv) const {
    return PredictProba(fv.view());
  }

  // Family parameters; null for other families. For a cascade these are
  // null and the stages are available instead.
  const NaiveBayesParams* naive_bayes() const;
  const LogisticParams* logistic() const;
  const SvmParams* svm() const;
  const TreeParams* tree() const;
  const TrainedModel* stage1() const;
  const TrainedModel* stage2() const;
  double cascade_threshold() const;

  struct Impl;
  explicit TrainedModel(std::shared_ptr<const Impl> impl)
      : impl_(std::move(impl)) {}
  const Impl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

// Throws kSingleClass, kNonFinite, kIncompatibleStrategy or
// kInsufficientData (empty input or mismatched widths).
TrainedModel Train(Family family, const Matrix& data,
                   const TrainConfig& config = {}, uint64_t seed = 0);

// Stage 1: naive Bayes on `random`. Stage 2: naive Bayes on the rows that
// pass stage 1 (p >= config.cascade_threshold), drawn from the positives of
// both sets and the negatives of `hard`. Predicts stage 2 on passing rows
// and 0 otherwise. Throws kInsufficientData when stage 2 would see a single
// class.
TrainedModel TrainCascade(const Matrix& random, const Matrix& hard,
                          const TrainConfig& config = {}, uint64_t seed = 0);

// Mean log-likelihood minus (l2 / 2) * |w|^2 over already-transformed rows.
// `params` holds the weights followed by the bias; the gradient has the
// same layout.
double LogisticObjective(const std::vector<std::vector<double>>& x,
                         std::span<const int> labels, double l2,
                         std::span<const double> params,
                         std::vector<double>* gradient);

// Text format with magic line `ACIDMATCH-MODEL v1`. Loading a file whose
// first line is not an ACIDMATCH-MODEL header throws kCorruptModel; another
// version throws kVersionMismatch.
inline constexpr int kModelFormatVersion = 1;
void SaveModel(const TrainedModel& model, std::ostream& out);
void SaveModel(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel LoadModel(std::istream& in);
TrainedModel LoadModel(const std::filesystem::path& path);

}  // namespace acidmatch

#endif  // ACIDMATCH_CLASSIFIERS_H_
