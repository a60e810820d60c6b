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

#include "acidmatch/classifiers.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <variant>

#include "acidmatch/error.h"
#include "acidmatch/parallel.h"
#include "acidmatch/random.h"
#include "csv.h"

namespace acidmatch {

struct TrainedModel::Impl {
  Family family = Family::kNaiveBayes;
  MissingStrategy strategy = MissingStrategy::kSkipFeature;
  std::vector<FeatureSpec> features;
  std::map<std::string, std::string> manifest;
  std::variant<std::monostate, NaiveBayesParams, LogisticParams, SvmParams,
               TreeParams>
      params;
  // Cascade only.
  std::shared_ptr<const TrainedModel> stage1;
  std::shared_ptr<const TrainedModel> stage2;
  double cascade_threshold = 0.5;
};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double LogSumExp(std::span<const double> terms) {
  double m = -kInf;
  for (double t : terms) m = std::max(m, t);
  if (m == -kInf) return -kInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

// Linear-interpolated quantile of sorted data (type 7).
double Quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t i = static_cast<size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

void ValidateMatrix(const Matrix& data) {
  if (data.rows.empty() || data.dim() == 0) {
    throw Error(ErrorCode::kInsufficientData, "training set is empty");
  }
  if (data.labels.size() != data.rows.size()) {
    throw Error(ErrorCode::kInsufficientData,
                "training labels do not match rows");
  }
  size_t pos = 0;
  for (size_t i = 0; i < data.rows.size(); ++i) {
    if (data.rows[i].size() != data.dim()) {
      throw Error(ErrorCode::kInsufficientData,
                  "row " + std::to_string(i) + " has the wrong width");
    }
    for (const auto& v : data.rows[i]) {
      if (v && !std::isfinite(*v)) {
        throw Error(ErrorCode::kNonFinite,
                    "non-finite feature value in row " + std::to_string(i));
      }
    }
    pos += data.labels[i] != 0;
  }
  if (pos == 0 || pos == data.rows.size()) {
    throw Error(ErrorCode::kSingleClass,
                "training set holds a single class (" + std::to_string(pos) +
                    " positives of " + std::to_string(data.rows.size()) + ")");
  }
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::string FormatPlain(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- naive Bayes

NaiveBayesParams BuildNaiveBayes(const std::vector<FeatureSpec>& features,
                                 std::vector<std::vector<double>> samples[2],
                                 const double log_prior[2],
                                 double min_bandwidth) {
  NaiveBayesParams nb;
  nb.min_bandwidth = min_bandwidth;
  for (int c = 0; c < 2; ++c) {
    nb.samples[c] = std::move(samples[c]);
    nb.log_prior[c] = log_prior[c];
    nb.density[c].resize(features.size());
  }
  nb.floor_log_density.assign(features.size(), 0.0);
  for (size_t j = 0; j < features.size(); ++j) {
    if (nb.samples[0][j].empty() || nb.samples[1][j].empty()) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int c = 0; c < 2; ++c) {
      for (double v : nb.samples[c][j]) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    nb.floor_log_density[j] = -std::log(std::max(hi - lo, min_bandwidth));
    for (int c = 0; c < 2; ++c) {
      nb.density[c][j] =
          KernelDensity(nb.samples[c][j], features[j].lower,
                        features[j].upper, min_bandwidth);
    }
  }
  return nb;
}

NaiveBayesParams TrainNaiveBayes(const Matrix& data,
                                 const TrainConfig& config) {
  std::vector<std::vector<double>> samples[2];
  double count[2] = {0.0, 0.0};
  for (int c = 0; c < 2; ++c) samples[c].resize(data.dim());
  for (size_t i = 0; i < data.size(); ++i) {
    const int c = data.labels[i] != 0;
    count[c] += 1.0;
    for (size_t j = 0; j < data.dim(); ++j) {
      if (data.rows[i][j]) samples[c][j].push_back(*data.rows[i][j]);
    }
  }
  const double n = count[0] + count[1];
  const double log_prior[2] = {std::log(count[0] / n), std::log(count[1] / n)};
  return BuildNaiveBayes(data.features, samples, log_prior,
                         config.nb_min_bandwidth);
}

double PredictNaiveBayes(const NaiveBayesParams& nb,
                         std::span<const std::optional<double>> x) {
  double ll[2] = {nb.log_prior[0], nb.log_prior[1]};
  for (size_t j = 0; j < x.size(); ++j) {
    if (!x[j] || !nb.density[0][j]) continue;
    // Kernel estimate mixed with one pseudo-observation spread uniformly
    // over the pooled training range, so sparse tails cannot produce
    // unbounded likelihood ratios.
    for (int c = 0; c < 2; ++c) {
      const double n = static_cast<double>(nb.samples[c][j].size());
      const double a = std::log(n) + nb.density[c][j]->LogDensity(*x[j]);
      const double b = nb.floor_log_density[j];
      ll[c] += std::max(a, b) + std::log1p(std::exp(-std::abs(a - b))) -
               std::log(n + 1.0);
    }
  }
  return Sigmoid(ll[1] - ll[0]);
}

// ------------------------------------------------------------ linear models

// Fits log1p, fill values and standardization on `data` and returns the
// transformed rows.
std::vector<std::vector<double>> FitLinearPreprocessing(
    const Matrix& data, MissingStrategy strategy, LinearParams& lp) {
  const size_t d = data.dim();
  lp.log1p.assign(d, 0);
  lp.fill.assign(d, 0.0);
  lp.mean.assign(d, 0.0);
  lp.scale.assign(d, 1.0);
  for (size_t j = 0; j < d; ++j) lp.log1p[j] = data.features[j].log1p_linear;

  for (size_t j = 0; j < d; ++j) {
    if (strategy == MissingStrategy::kImputeNegativeOne) {
      lp.fill[j] = -1.0;
      continue;
    }
    std::vector<double> present;
    for (const Row& r : data.rows) {
      if (r[j]) present.push_back(lp.log1p[j] ? std::log1p(*r[j]) : *r[j]);
    }
    if (present.empty()) continue;
    std::sort(present.begin(), present.end());
    lp.fill[j] = Quantile(present, 0.5);
  }

  // Standardize with the unit transform in place.
  std::vector<std::vector<double>> x(data.size());
  for (size_t i = 0; i < data.size(); ++i) x[i] = lp.Transform(data.rows[i]);
  const double n = static_cast<double>(data.size());
  for (size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& r : x) mean += r[j];
    mean /= n;
    double var = 0.0;
    for (const auto& r : x) var += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(var / n);
    lp.mean[j] = mean;
    lp.scale[j] = sd > 1e-12 ? sd : 1.0;
    for (auto& r : x) r[j] = (r[j] - lp.mean[j]) / lp.scale[j];
  }
  return x;
}

void FitLogistic(const std::vector<std::vector<double>>& x,
                 std::span<const int> y, const TrainConfig& config,
                 LogisticParams& out) {
  const size_t d = x.front().size();
  std::vector<double> params(d + 1, 0.0), grad, cand(d + 1), cand_grad;
  double f = LogisticObjective(x, y, config.lr_l2, params, &grad);
  double step = 1.0;
  int it = 0;
  for (; it < config.lr_max_iterations; ++it) {
    double gmax = 0.0, gsq = 0.0;
    for (double g : grad) {
      gmax = std::max(gmax, std::fabs(g));
      gsq += g * g;
    }
    if (gmax < config.lr_tolerance) break;
    bool accepted = false;
    while (step > 1e-20) {
      for (size_t k = 0; k <= d; ++k) cand[k] = params[k] + step * grad[k];
      const double fc = LogisticObjective(x, y, config.lr_l2, cand, &cand_grad);
      if (fc >= f + 1e-4 * step * gsq) {
        params.swap(cand);
        grad.swap(cand_grad);
        f = fc;
        step *= 2.0;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  out.linear.weights.assign(params.begin(), params.begin() + d);
  out.linear.bias = params[d];
  out.l2 = config.lr_l2;
  out.iterations = it;
}

double HingeObjective(const std::vector<std::vector<double>>& x,
                      std::span<const int> y, double lambda,
                      std::span<const double> w, double b) {
  double loss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double z = b;
    for (size_t j = 0; j < w.size(); ++j) z += w[j] * x[i][j];
    loss += std::max(0.0, 1.0 - (y[i] ? 1.0 : -1.0) * z);
  }
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return 0.5 * lambda * reg + loss / static_cast<double>(x.size());
}

// Full-batch subgradient descent. A step is taken only if it does not raise
// the objective; otherwise it is halved, so the objective never increases.
void FitSvmCore(const std::vector<std::vector<double>>& x,
                std::span<const int> y, double lambda, int epochs,
                std::vector<double>& w, double& b,
                std::vector<double>* history) {
  const size_t d = x.front().size();
  const double n = static_cast<double>(x.size());
  w.assign(d, 0.0);
  b = 0.0;
  double f = HingeObjective(x, y, lambda, w, b);
  if (history) history->assign(1, f);
  std::vector<double> gw(d), cw(d);
  double step = 0.5;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (size_t j = 0; j < d; ++j) gw[j] = lambda * w[j];
    double gb = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double yi = y[i] ? 1.0 : -1.0;
      double z = b;
      for (size_t j = 0; j < d; ++j) z += w[j] * x[i][j];
      if (yi * z < 1.0) {
        for (size_t j = 0; j < d; ++j) gw[j] -= yi * x[i][j] / n;
        gb -= yi / n;
      }
    }
    // Start from twice the last accepted step so the step size adapts.
    double eta = std::min(1.0, 2.0 * step);
    bool moved = false;
    for (int tries = 0; tries < 40; ++tries, eta *= 0.5) {
      for (size_t j = 0; j < d; ++j) cw[j] = w[j] - eta * gw[j];
      const double cb = b - eta * gb;
      const double fc = HingeObjective(x, y, lambda, cw, cb);
      if (fc <= f) {
        w.swap(cw);
        b = cb;
        f = fc;
        step = eta;
        moved = true;
        break;
      }
    }
    if (history) history->push_back(f);
    if (!moved) break;
  }
}

// Platt scaling with the Newton method and smoothed targets of Lin, Lin and
// Weng. Returns (A, B) for p = 1 / (1 + exp(A f + B)).
std::pair<double, double> FitPlatt(std::span<const double> f,
                                   std::span<const int> y) {
  double prior1 = 0.0, prior0 = 0.0;
  for (int v : y) (v ? prior1 : prior0) += 1.0;
  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(y.size());
  for (size_t i = 0; i < y.size(); ++i) t[i] = y[i] ? hi : lo;

  auto objective = [&](double a, double b) {
    double v = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * a + b;
      v += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z))
                    : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return v;
  };
  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(a, b);
  for (int it = 0; it < 100; ++it) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-5 && std::fabs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step *= 0.5;
    }
    if (step < 1e-10) break;
  }
  return {a, b};
}

SvmParams TrainSvm(const Matrix& data, const TrainConfig& config,
                   uint64_t seed) {
  SvmParams out;
  const std::vector<std::vector<double>> x = FitLinearPreprocessing(
      data, MissingStrategy::kImputeNegativeOne, out.linear);
  const std::span<const int> y = data.labels;

  // Lambda by k-fold cross-validated mean hinge loss; ties go to the larger
  // lambda. 0/1 accuracy was too coarse here and tied often.
  std::vector<double> lambdas = config.svm_lambdas;
  if (lambdas.empty()) lambdas = {1e-3};
  std::sort(lambdas.begin(), lambdas.end());
  double best_lambda = lambdas.front();
  if (lambdas.size() > 1) {
    const size_t folds = std::clamp<size_t>(config.svm_folds, 2, x.size());
    std::vector<size_t> order(x.size());
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(seed, "svm-folds");
    rng.Shuffle(order);
    std::vector<size_t> fold_of(x.size());
    for (size_t k = 0; k < order.size(); ++k) fold_of[order[k]] = k % folds;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double lambda : lambdas) {
      double loss = 0.0;
      for (size_t fold = 0; fold < folds; ++fold) {
        std::vector<std::vector<double>> tx;
        std::vector<int> ty;
        for (size_t i = 0; i < x.size(); ++i) {
          if (fold_of[i] == fold) continue;
          tx.push_back(x[i]);
          ty.push_back(y[i]);
        }
        if (tx.empty()) continue;
        std::vector<double> w;
        double b = 0.0;
        FitSvmCore(tx, ty, lambda, config.svm_epochs, w, b, nullptr);
        for (size_t i = 0; i < x.size(); ++i) {
          if (fold_of[i] != fold) continue;
          double z = b;
          for (size_t j = 0; j < w.size(); ++j) z += w[j] * x[i][j];
          loss += std::max(0.0, 1.0 - (y[i] ? z : -z));
        }
      }
      if (loss <= best_loss) {
        best_loss = loss;
        best_lambda = lambda;
      }
    }
  }
  out.lambda = best_lambda;
  FitSvmCore(x, y, best_lambda, config.svm_epochs, out.linear.weights,
             out.linear.bias, &out.objective_history);

  std::vector<double> margins(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double z = out.linear.bias;
    for (size_t j = 0; j < x[i].size(); ++j) {
      z += out.linear.weights[j] * x[i][j];
    }
    margins[i] = z;
  }
  std::tie(out.platt_a, out.platt_b) = FitPlatt(margins, y);
  return out;
}

// ------------------------------------------------------------ decision tree

struct WeightedSample {
  size_t row;
  double weight;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Row>& rows, const std::vector<int>& labels,
              const TrainConfig& config)
      : rows_(rows), labels_(labels), config_(config) {}

  TreeParams Build() {
    std::vector<WeightedSample> all;
    all.reserve(rows_.size());
    for (size_t i = 0; i < rows_.size(); ++i) all.push_back({i, 1.0});
    Grow(all, 0);
    return std::move(tree_);
  }

 private:
  static double Gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
  }

  int Grow(const std::vector<WeightedSample>& samples, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double w = 0.0, wpos = 0.0;
    for (const auto& s : samples) {
      w += s.weight;
      if (labels_[s.row]) wpos += s.weight;
    }
    tree_.nodes[id].weight = w;
    // Laplace-corrected, so small pure leaves rank below large ones.
    tree_.nodes[id].probability = (wpos + 1.0) / (w + 2.0);
    const double min_leaf = config_.dt_min_leaf;
    if (depth >= config_.dt_max_depth || w < 2.0 * min_leaf ||
        wpos <= 0.0 || wpos >= w) {
      return id;
    }

    int best_feature = -1;
    double best_gain = 1e-12, best_threshold = 0.0, best_left = 0.5;
    const size_t dim = rows_.front().size();
    std::vector<std::pair<double, WeightedSample>> present;
    for (size_t j = 0; j < dim; ++j) {
      present.clear();
      double wp = 0.0, wp_pos = 0.0;
      for (const auto& s : samples) {
        if (!rows_[s.row][j]) continue;
        present.emplace_back(*rows_[s.row][j], s);
        wp += s.weight;
        if (labels_[s.row]) wp_pos += s.weight;
      }
      if (wp < 2.0 * min_leaf) continue;
      std::sort(present.begin(), present.end(),
                [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first < b.first;
                  return a.second.row < b.second.row;
                });
      const double parent = Gini(wp_pos, wp);
      double wl = 0.0, wl_pos = 0.0;
      for (size_t k = 0; k + 1 < present.size(); ++k) {
        wl += present[k].second.weight;
        if (labels_[present[k].second.row]) wl_pos += present[k].second.weight;
        if (present[k].first == present[k + 1].first) continue;
        const double wr = wp - wl;
        if (wl < min_leaf || wr < min_leaf) continue;
        const double child = (wl / wp) * Gini(wl_pos, wl) +
                             (wr / wp) * Gini(wp_pos - wl_pos, wr);
        // Gain on the present rows, scaled by their share of the node.
        const double gain = (wp / w) * (parent - child);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(j);
          best_threshold = 0.5 * (present[k].first + present[k + 1].first);
          best_left = wl / wp;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<WeightedSample> left, right;
    for (const auto& s : samples) {
      const auto& v = rows_[s.row][best_feature];
      if (!v) {
        if (best_left > 0.0) left.push_back({s.row, s.weight * best_left});
        if (best_left < 1.0) {
          right.push_back({s.row, s.weight * (1.0 - best_left)});
        }
      } else if (*v <= best_threshold) {
        left.push_back(s);
      } else {
        right.push_back(s);
      }
    }
    tree_.nodes[id].feature = best_feature;
    tree_.nodes[id].threshold = best_threshold;
    tree_.nodes[id].left_fraction = best_left;
    const int l = Grow(left, depth + 1);
    const int r = Grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  const std::vector<Row>& rows_;
  const std::vector<int>& labels_;
  const TrainConfig& config_;
  TreeParams tree_;
};

double PredictTreeNode(const TreeParams& tree, int id,
                       std::span<const std::optional<double>> x) {
  const TreeNode& node = tree.nodes[id];
  if (node.feature < 0) return node.probability;
  const auto& v = x[node.feature];
  if (!v) {
    return node.left_fraction * PredictTreeNode(tree, node.left, x) +
           (1.0 - node.left_fraction) * PredictTreeNode(tree, node.right, x);
  }
  return PredictTreeNode(tree, *v <= node.threshold ? node.left : node.right,
                         x);
}

Row ImputeNegativeOne(std::span<const std::optional<double>> x) {
  Row out(x.begin(), x.end());
  for (auto& v : out) {
    if (!v) v = -1.0;
  }
  return out;
}

TreeParams TrainTree(const Matrix& data, MissingStrategy strategy,
                     const TrainConfig& config) {
  if (strategy == MissingStrategy::kImputeNegativeOne) {
    std::vector<Row> rows;
    rows.reserve(data.size());
    for (const Row& r : data.rows) rows.push_back(ImputeNegativeOne(r));
    return TreeBuilder(rows, data.labels, config).Build();
  }
  return TreeBuilder(data.rows, data.labels, config).Build();
}

std::map<std::string, std::string> BaseManifest(Family family,
                                                MissingStrategy strategy,
                                                const Matrix& data,
                                                const TrainConfig& config,
                                                uint64_t seed) {
  std::map<std::string, std::string> m = config.manifest;
  m["family"] = std::string(FamilyName(family));
  m["strategy"] = std::string(StrategyName(strategy));
  m["seed"] = std::to_string(seed);
  m["training_rows"] = std::to_string(data.size());
  m["training_positives"] = std::to_string(data.positives());
  return m;
}

}  // namespace

std::string_view FamilyName(Family family) {
  switch (family) {
    case Family::kNaiveBayes: return "naive_bayes_kde";
    case Family::kLogisticRegression: return "logistic_regression";
    case Family::kLinearSvm: return "linear_svm";
    case Family::kDecisionTree: return "decision_tree";
  }
  return "";
}

std::optional<Family> ParseFamily(std::string_view name) {
  if (name == "nb" || name == "naive_bayes_kde") return Family::kNaiveBayes;
  if (name == "lr" || name == "logistic_regression") {
    return Family::kLogisticRegression;
  }
  if (name == "svm" || name == "linear_svm") return Family::kLinearSvm;
  if (name == "dt" || name == "decision_tree") return Family::kDecisionTree;
  return std::nullopt;
}

std::string_view StrategyName(MissingStrategy strategy) {
  switch (strategy) {
    case MissingStrategy::kSkipFeature: return "skip_feature";
    case MissingStrategy::kImputeMedian: return "impute_median";
    case MissingStrategy::kImputeNegativeOne: return "impute_negative_one";
    case MissingStrategy::kAllBranches: return "all_branches";
  }
  return "";
}

std::optional<MissingStrategy> ParseStrategy(std::string_view name) {
  for (MissingStrategy s :
       {MissingStrategy::kSkipFeature, MissingStrategy::kImputeMedian,
        MissingStrategy::kImputeNegativeOne, MissingStrategy::kAllBranches}) {
    if (StrategyName(s) == name) return s;
  }
  return std::nullopt;
}

MissingStrategy DefaultStrategy(Family family) {
  switch (family) {
    case Family::kNaiveBayes: return MissingStrategy::kSkipFeature;
    case Family::kLogisticRegression: return MissingStrategy::kImputeMedian;
    case Family::kLinearSvm: return MissingStrategy::kImputeNegativeOne;
    case Family::kDecisionTree: return MissingStrategy::kAllBranches;
  }
  return MissingStrategy::kSkipFeature;
}

bool IsCompatible(Family family, MissingStrategy strategy) {
  switch (family) {
    case Family::kNaiveBayes:
      return strategy == MissingStrategy::kSkipFeature;
    case Family::kLogisticRegression:
      return strategy == MissingStrategy::kImputeMedian;
    case Family::kLinearSvm:
      return strategy == MissingStrategy::kImputeNegativeOne;
    case Family::kDecisionTree:
      return strategy == MissingStrategy::kImputeNegativeOne ||
             strategy == MissingStrategy::kAllBranches;
  }
  return false;
}

std::vector<FeatureSpec> LinkerFeatures() {
  std::vector<FeatureSpec> out;
  for (AttributeKind kind : kAllAttributes) {
    FeatureSpec spec;
    spec.name = std::string(AttributeName(kind));
    if (kind == AttributeKind::kFriends) {
      spec.log1p_linear = true;
    } else {
      spec.upper = 1.0;
    }
    out.push_back(std::move(spec));
  }
  return out;
}

size_t Matrix::positives() const {
  return static_cast<size_t>(
      std::count_if(labels.begin(), labels.end(), [](int v) { return v; }));
}

Matrix FeaturizeDataset(const PairDataset& ds, const Featurizer& featurizer,
                        int threads) {
  Matrix m;
  m.features = LinkerFeatures();
  m.rows.resize(ds.size());
  m.labels.resize(ds.size());
  ParallelFor(ds.size(), threads, [&](size_t i) {
    const LabeledPair& p = ds.pairs[i];
    const FeatureVector fv = featurizer(p.id1, p.id2);
    m.rows[i].assign(fv.slots.begin(), fv.slots.end());
    m.labels[i] = p.match ? 1 : 0;
  });
  return m;
}

// ----------------------------------------------------------- KernelDensity

KernelDensity::KernelDensity(std::span<const double> samples, double lower,
                             double upper, double min_bandwidth)
    : lower_(lower), upper_(upper) {
  if (samples.empty()) {
    throw Error(ErrorCode::kInsufficientData,
                "kernel density needs at least one sample");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  n_ = sorted.size();
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    values_.push_back(sorted[i]);
    counts_.push_back(static_cast<double>(j - i));
    i = j;
  }

  const double n = static_cast<double>(n_);
  double mean = 0.0;
  for (double v : sorted) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : sorted) var += (v - mean) * (v - mean);
  const double sd = n_ > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  const double iqr = (Quantile(sorted, 0.75) - Quantile(sorted, 0.25)) / 1.34;
  const double spread =
      (sd > 0.0 && iqr > 0.0) ? std::min(sd, iqr) : std::max(sd, iqr);
  bandwidth_ = std::max(0.9 * spread * std::pow(n, -0.2), min_bandwidth);
  log_norm_ = std::log(n * bandwidth_ * std::sqrt(2.0 * std::numbers::pi));

  const double lo = std::max(lower_, values_.front() - 10.0 * bandwidth_);
  const double hi = std::min(upper_, values_.back() + 10.0 * bandwidth_);
  constexpr size_t kMaxGrid = 1 << 16;
  double step = bandwidth_ / 16.0;
  size_t points = static_cast<size_t>(std::ceil((hi - lo) / step)) + 1;
  if (points > kMaxGrid) {
    points = kMaxGrid;
    step = (hi - lo) / static_cast<double>(kMaxGrid - 1);
  }
  grid_lo_ = lo;
  grid_step_ = step;
  grid_.resize(points);
  for (size_t i = 0; i < points; ++i) {
    grid_[i] = ExactLogDensity(lo + static_cast<double>(i) * step);
  }
}

double KernelDensity::ExactLogDensity(double x) const {
  x = std::clamp(x, lower_, upper_);
  thread_local std::vector<double> terms;
  terms.clear();
  const double inv = 1.0 / (2.0 * bandwidth_ * bandwidth_);
  for (size_t k = 0; k < values_.size(); ++k) {
    const double lc = std::log(counts_[k]);
    const double v = values_[k];
    terms.push_back(lc - (x - v) * (x - v) * inv);
    if (std::isfinite(lower_)) {
      const double r = 2.0 * lower_ - v;
      terms.push_back(lc - (x - r) * (x - r) * inv);
    }
    if (std::isfinite(upper_)) {
      const double r = 2.0 * upper_ - v;
      terms.push_back(lc - (x - r) * (x - r) * inv);
    }
  }
  return LogSumExp(terms) - log_norm_;
}

double KernelDensity::Density(double x) const {
  if (x < lower_ || x > upper_) return 0.0;
  return std::exp(ExactLogDensity(x));
}

double KernelDensity::LogDensity(double x) const {
  x = std::clamp(x, lower_, upper_);
  if (grid_.size() < 2) return ExactLogDensity(x);
  const double u = (x - grid_lo_) / grid_step_;
  if (u < 0.0 || u > static_cast<double>(grid_.size() - 1)) {
    return ExactLogDensity(x);
  }
  const size_t i = std::min(static_cast<size_t>(u), grid_.size() - 2);
  const double frac = u - static_cast<double>(i);
  return grid_[i] + frac * (grid_[i + 1] - grid_[i]);
}

// ------------------------------------------------------------ linear helpers

std::vector<double> LinearParams::Transform(
    std::span<const std::optional<double>> x) const {
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) {
    double v = fill[j];
    if (x[j]) v = log1p[j] ? std::log1p(*x[j]) : *x[j];
    out[j] = (v - mean[j]) / scale[j];
  }
  return out;
}

double LinearParams::Margin(std::span<const std::optional<double>> x) const {
  double z = bias;
  for (size_t j = 0; j < x.size(); ++j) {
    double v = fill[j];
    if (x[j]) v = log1p[j] ? std::log1p(*x[j]) : *x[j];
    z += weights[j] * (v - mean[j]) / scale[j];
  }
  return z;
}

double LogisticObjective(const std::vector<std::vector<double>>& x,
                         std::span<const int> labels, double l2,
                         std::span<const double> params,
                         std::vector<double>* gradient) {
  const size_t d = params.size() - 1;
  const double n = static_cast<double>(x.size());
  if (gradient) gradient->assign(d + 1, 0.0);
  double ll = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double z = params[d];
    for (size_t j = 0; j < d; ++j) z += params[j] * x[i][j];
    const double y = labels[i] ? 1.0 : 0.0;
    ll += y * z - Softplus(z);
    if (gradient) {
      const double r = y - Sigmoid(z);
      for (size_t j = 0; j < d; ++j) (*gradient)[j] += r * x[i][j];
      (*gradient)[d] += r;
    }
  }
  double reg = 0.0;
  for (size_t j = 0; j < d; ++j) reg += params[j] * params[j];
  if (gradient) {
    for (size_t j = 0; j <= d; ++j) (*gradient)[j] /= n;
    for (size_t j = 0; j < d; ++j) (*gradient)[j] -= l2 * params[j];
  }
  return ll / n - 0.5 * l2 * reg;
}

// ------------------------------------------------------------ TrainedModel

Family TrainedModel::family() const { return impl_->family; }
MissingStrategy TrainedModel::strategy() const { return impl_->strategy; }
bool TrainedModel::is_cascade() const { return impl_->stage1 != nullptr; }
const std::vector<FeatureSpec>& TrainedModel::features() const {
  return impl_->features;
}
const std::map<std::string, std::string>& TrainedModel::manifest() const {
  return impl_->manifest;
}
const NaiveBayesParams* TrainedModel::naive_bayes() const {
  return std::get_if<NaiveBayesParams>(&impl_->params);
}
const LogisticParams* TrainedModel::logistic() const {
  return std::get_if<LogisticParams>(&impl_->params);
}
const SvmParams* TrainedModel::svm() const {
  return std::get_if<SvmParams>(&impl_->params);
}
const TreeParams* TrainedModel::tree() const {
  return std::get_if<TreeParams>(&impl_->params);
}
const TrainedModel* TrainedModel::stage1() const { return impl_->stage1.get(); }
const TrainedModel* TrainedModel::stage2() const { return impl_->stage2.get(); }
double TrainedModel::cascade_threshold() const {
  return impl_->cascade_threshold;
}

double TrainedModel::PredictProba(
    std::span<const std::optional<double>> x) const {
  if (x.size() != impl_->features.size()) {
    throw Error(ErrorCode::kDomain,
                "feature row has " + std::to_string(x.size()) +
                    " values, model expects " +
                    std::to_string(impl_->features.size()));
  }
  if (impl_->stage1) {
    if (impl_->stage1->PredictProba(x) < impl_->cascade_threshold) return 0.0;
    return impl_->stage2->PredictProba(x);
  }
  double p = 0.0;
  if (const auto* nb = naive_bayes()) {
    p = PredictNaiveBayes(*nb, x);
  } else if (const auto* lr = logistic()) {
    p = Sigmoid(lr->linear.Margin(x));
  } else if (const auto* svm_params = svm()) {
    const double z = svm_params->linear.Margin(x);
    p = Sigmoid(-(svm_params->platt_a * z + svm_params->platt_b));
  } else if (const auto* t = tree()) {
    if (impl_->strategy == MissingStrategy::kImputeNegativeOne) {
      p = PredictTreeNode(*t, 0, ImputeNegativeOne(x));
    } else {
      p = PredictTreeNode(*t, 0, x);
    }
  }
  return std::clamp(p, 0.0, 1.0);
}

TrainedModel Train(Family family, const Matrix& data,
                   const TrainConfig& config, uint64_t seed) {
  const MissingStrategy strategy =
      config.strategy.value_or(DefaultStrategy(family));
  if (!IsCompatible(family, strategy)) {
    throw Error(ErrorCode::kIncompatibleStrategy,
                std::string(StrategyName(strategy)) + " cannot be used with " +
                    std::string(FamilyName(family)));
  }
  ValidateMatrix(data);
  auto impl = std::make_shared<TrainedModel::Impl>();
  impl->family = family;
  impl->strategy = strategy;
  impl->features = data.features;
  impl->manifest = BaseManifest(family, strategy, data, config, seed);
  switch (family) {
    case Family::kNaiveBayes:
      impl->params = TrainNaiveBayes(data, config);
      impl->manifest["nb_min_bandwidth"] = FormatPlain(config.nb_min_bandwidth);
      break;
    case Family::kLogisticRegression: {
      LogisticParams lr;
      const auto x = FitLinearPreprocessing(data, strategy, lr.linear);
      FitLogistic(x, data.labels, config, lr);
      impl->manifest["lr_l2"] = FormatPlain(lr.l2);
      impl->manifest["lr_iterations"] = std::to_string(lr.iterations);
      impl->params = std::move(lr);
      break;
    }
    case Family::kLinearSvm: {
      SvmParams svm_params = TrainSvm(data, config, seed);
      impl->manifest["svm_lambda"] = FormatPlain(svm_params.lambda);
      impl->manifest["svm_epochs"] = std::to_string(config.svm_epochs);
      impl->manifest["svm_folds"] = std::to_string(config.svm_folds);
      impl->manifest["calibration"] = "platt_logistic_link_on_training_margins";
      impl->params = std::move(svm_params);
      break;
    }
    case Family::kDecisionTree:
      impl->params = TrainTree(data, strategy, config);
      impl->manifest["dt_min_leaf"] = std::to_string(config.dt_min_leaf);
      impl->manifest["dt_max_depth"] = std::to_string(config.dt_max_depth);
      break;
  }
  return TrainedModel(std::move(impl));
}

TrainedModel TrainCascade(const Matrix& random, const Matrix& hard,
                          const TrainConfig& config, uint64_t seed) {
  TrainConfig nb_config = config;
  nb_config.strategy = MissingStrategy::kSkipFeature;
  TrainedModel stage1 = Train(Family::kNaiveBayes, random, nb_config, seed);

  Matrix pass;
  pass.features = random.features;
  auto keep = [&](const Matrix& m, bool positives, bool negatives) {
    for (size_t i = 0; i < m.size(); ++i) {
      const bool pos = m.labels[i] != 0;
      if ((pos && !positives) || (!pos && !negatives)) continue;
      if (stage1.PredictProba(m.rows[i]) < config.cascade_threshold) continue;
      pass.rows.push_back(m.rows[i]);
      pass.labels.push_back(m.labels[i]);
    }
  };
  keep(random, true, false);
  keep(hard, true, true);
  const size_t pos = pass.positives();
  if (pos == 0 || pos == pass.size()) {
    throw Error(ErrorCode::kInsufficientData,
                "cascade stage 2 would train on a single class (" +
                    std::to_string(pos) + " positives of " +
                    std::to_string(pass.size()) + " passing rows)");
  }
  TrainedModel stage2 = Train(Family::kNaiveBayes, pass, nb_config, seed);

  auto impl = std::make_shared<TrainedModel::Impl>();
  impl->family = Family::kNaiveBayes;
  impl->strategy = MissingStrategy::kSkipFeature;
  impl->features = random.features;
  impl->manifest = config.manifest;
  impl->manifest["family"] = "cascade";
  impl->manifest["seed"] = std::to_string(seed);
  impl->manifest["cascade_threshold"] = FormatPlain(config.cascade_threshold);
  impl->manifest["stage2_rows"] = std::to_string(pass.size());
  impl->manifest["stage2_positives"] = std::to_string(pos);
  impl->stage1 = std::make_shared<const TrainedModel>(std::move(stage1));
  impl->stage2 = std::make_shared<const TrainedModel>(std::move(stage2));
  impl->cascade_threshold = config.cascade_threshold;
  return TrainedModel(std::move(impl));
}

// ------------------------------------------------------------ persistence

namespace {

constexpr std::string_view kMagic = "ACIDMATCH-MODEL";

[[noreturn]] void Corrupt(const std::string& why) {
  throw Error(ErrorCode::kCorruptModel, "corrupt model file: " + why);
}

void WriteDoubles(std::ostream& out, std::string_view tag,
                  std::span<const double> values) {
  out << tag << ' ' << values.size();
  for (double v : values) out << ' ' << FormatDouble(v);
  out << '\n';
}

void WriteBody(const TrainedModel& model, std::ostream& out) {
  const TrainedModel::Impl& m = model.impl();
  out << "family " << FamilyName(m.family) << '\n';
  out << "strategy " << StrategyName(m.strategy) << '\n';
  out << "features " << m.features.size() << '\n';
  for (const FeatureSpec& f : m.features) {
    out << "feature " << f.name << ' ' << FormatDouble(f.lower) << ' '
        << FormatDouble(f.upper) << ' ' << (f.log1p_linear ? 1 : 0) << '\n';
  }
  out << "manifest " << m.manifest.size() << '\n';
  for (const auto& [k, v] : m.manifest) out << "meta " << k << ' ' << v << '\n';

  auto write_linear = [&](const LinearParams& lp) {
    std::vector<double> log1p(lp.log1p.begin(), lp.log1p.end());
    WriteDoubles(out, "log1p", log1p);
    WriteDoubles(out, "fill", lp.fill);
    WriteDoubles(out, "mean", lp.mean);
    WriteDoubles(out, "scale", lp.scale);
    WriteDoubles(out, "weights", lp.weights);
    out << "bias " << FormatDouble(lp.bias) << '\n';
  };
  if (const auto* nb = model.naive_bayes()) {
    out << "prior " << FormatDouble(nb->log_prior[0]) << ' '
        << FormatDouble(nb->log_prior[1]) << '\n';
    out << "min_bandwidth " << FormatDouble(nb->min_bandwidth) << '\n';
    for (int c = 0; c < 2; ++c) {
      for (size_t j = 0; j < nb->samples[c].size(); ++j) {
        WriteDoubles(out, "samples", nb->samples[c][j]);
      }
    }
  } else if (const auto* lr = model.logistic()) {
    write_linear(lr->linear);
    out << "l2 " << FormatDouble(lr->l2) << '\n';
    out << "iterations " << lr->iterations << '\n';
  } else if (const auto* svm_params = model.svm()) {
    write_linear(svm_params->linear);
    out << "lambda " << FormatDouble(svm_params->lambda) << '\n';
    out << "platt " << FormatDouble(svm_params->platt_a) << ' '
        << FormatDouble(svm_params->platt_b) << '\n';
  } else if (const auto* t = model.tree()) {
    out << "nodes " << t->nodes.size() << '\n';
    for (const TreeNode& n : t->nodes) {
      out << "node " << n.feature << ' ' << FormatDouble(n.threshold) << ' '
          << n.left << ' ' << n.right << ' ' << FormatDouble(n.left_fraction)
          << ' ' << FormatDouble(n.probability) << ' '
          << FormatDouble(n.weight) << '\n';
    }
  }
  out << "end\n";
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  // Next line split into whitespace tokens; the first must equal `tag`.
  std::istringstream Expect(std::string_view tag) {
    std::string line;
    if (!std::getline(in_, line)) Corrupt("unexpected end of file");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head != tag) {
      Corrupt("line " + std::to_string(line_no_) + ": expected '" +
              std::string(tag) + "', got '" + head + "'");
    }
    return ss;
  }

  std::string Peek() {
    const auto pos = in_.tellg();
    std::string line;
    std::getline(in_, line);
    in_.clear();
    in_.seekg(pos);
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    return head;
  }

  static double ParseDouble(std::istringstream& ss) {
    std::string tok;
    if (!(ss >> tok)) Corrupt("missing number");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) Corrupt("bad number '" + tok + "'");
    return v;
  }

  static long ParseInt(std::istringstream& ss) {
    long v = 0;
    if (!(ss >> v)) Corrupt("missing integer");
    return v;
  }

  std::vector<double> Doubles(std::string_view tag) {
    auto ss = Expect(tag);
    const long n = ParseInt(ss);
    if (n < 0 || n > (1L << 28)) Corrupt("bad length");
    std::vector<double> out(static_cast<size_t>(n));
    for (double& v : out) v = ParseDouble(ss);
    return out;
  }

  double Double(std::string_view tag) {
    auto ss = Expect(tag);
    return ParseDouble(ss);
  }

 private:
  std::istream& in_;
  size_t line_no_ = 1;
};

TrainedModel ReadBody(ModelReader& r) {
  auto impl = std::make_shared<TrainedModel::Impl>();
  std::string name;
  {
    auto ss = r.Expect("family");
    ss >> name;
    auto f = ParseFamily(name);
    if (!f) Corrupt("unknown family '" + name + "'");
    impl->family = *f;
  }
  {
    auto ss = r.Expect("strategy");
    ss >> name;
    auto s = ParseStrategy(name);
    if (!s || !IsCompatible(impl->family, *s)) {
      Corrupt("bad strategy '" + name + "'");
    }
    impl->strategy = *s;
  }
  {
    auto ss = r.Expect("features");
    const long n = ModelReader::ParseInt(ss);
    if (n <= 0 || n > 1024) Corrupt("bad feature count");
    for (long j = 0; j < n; ++j) {
      auto fs = r.Expect("feature");
      FeatureSpec spec;
      fs >> spec.name;
      spec.lower = ModelReader::ParseDouble(fs);
      spec.upper = ModelReader::ParseDouble(fs);
      spec.log1p_linear = ModelReader::ParseInt(fs) != 0;
      impl->features.push_back(std::move(spec));
    }
  }
  {
    auto ss = r.Expect("manifest");
    const long n = ModelReader::ParseInt(ss);
    if (n < 0 || n > 4096) Corrupt("bad manifest size");
    for (long k = 0; k < n; ++k) {
      auto ms = r.Expect("meta");
      std::string key, value;
      ms >> key;
      std::getline(ms >> std::ws, value);
      impl->manifest[key] = value;
    }
  }
  const size_t d = impl->features.size();
  auto read_linear = [&](LinearParams& lp) {
    const auto log1p = r.Doubles("log1p");
    lp.log1p.assign(log1p.begin(), log1p.end());
    lp.fill = r.Doubles("fill");
    lp.mean = r.Doubles("mean");
    lp.scale = r.Doubles("scale");
    lp.weights = r.Doubles("weights");
    lp.bias = r.Double("bias");
    if (lp.log1p.size() != d || lp.fill.size() != d || lp.mean.size() != d ||
        lp.scale.size() != d || lp.weights.size() != d) {
      Corrupt("linear parameter width mismatch");
    }
  };
  switch (impl->family) {
    case Family::kNaiveBayes: {
      auto ss = r.Expect("prior");
      double log_prior[2];
      log_prior[0] = ModelReader::ParseDouble(ss);
      log_prior[1] = ModelReader::ParseDouble(ss);
      const double min_bw = r.Double("min_bandwidth");
      std::vector<std::vector<double>> samples[2];
      for (int c = 0; c < 2; ++c) {
        for (size_t j = 0; j < d; ++j) samples[c].push_back(r.Doubles("samples"));
      }
      impl->params = BuildNaiveBayes(impl->features, samples, log_prior, min_bw);
      break;
    }
    case Family::kLogisticRegression: {
      LogisticParams lr;
      read_linear(lr.linear);
      lr.l2 = r.Double("l2");
      auto ss = r.Expect("iterations");
      lr.iterations = static_cast<int>(ModelReader::ParseInt(ss));
      impl->params = std::move(lr);
      break;
    }
    case Family::kLinearSvm: {
      SvmParams svm_params;
      read_linear(svm_params.linear);
      svm_params.lambda = r.Double("lambda");
      auto ss = r.Expect("platt");
      svm_params.platt_a = ModelReader::ParseDouble(ss);
      svm_params.platt_b = ModelReader::ParseDouble(ss);
      impl->params = std::move(svm_params);
      break;
    }
    case Family::kDecisionTree: {
      TreeParams t;
      auto ss = r.Expect("nodes");
      const long n = ModelReader::ParseInt(ss);
      if (n <= 0 || n > (1L << 24)) Corrupt("bad node count");
      for (long k = 0; k < n; ++k) {
        auto ns = r.Expect("node");
        TreeNode node;
        node.feature = static_cast<int>(ModelReader::ParseInt(ns));
        node.threshold = ModelReader::ParseDouble(ns);
        node.left = static_cast<int>(ModelReader::ParseInt(ns));
        node.right = static_cast<int>(ModelReader::ParseInt(ns));
        node.left_fraction = ModelReader::ParseDouble(ns);
        node.probability = ModelReader::ParseDouble(ns);
        node.weight = ModelReader::ParseDouble(ns);
        t.nodes.push_back(node);
      }
      for (const TreeNode& node : t.nodes) {
        if (node.feature < 0) continue;
        if (node.feature >= static_cast<int>(d) || node.left <= 0 ||
            node.right <= 0 || node.left >= n || node.right >= n) {
          Corrupt("tree node out of range");
        }
      }
      impl->params = std::move(t);
      break;
    }
  }
  r.Expect("end");
  return TrainedModel(std::move(impl));
}

}  // namespace

void SaveModel(const TrainedModel& model, std::ostream& out) {
  out << kMagic << " v" << kModelFormatVersion << '\n';
  if (model.is_cascade()) {
    const TrainedModel::Impl& m = model.impl();
    out << "model cascade\n";
    out << "threshold " << FormatDouble(m.cascade_threshold) << '\n';
    out << "manifest " << m.manifest.size() << '\n';
    for (const auto& [k, v] : m.manifest) {
      out << "meta " << k << ' ' << v << '\n';
    }
    out << "stage\n";
    WriteBody(*m.stage1, out);
    out << "stage\n";
    WriteBody(*m.stage2, out);
  } else {
    out << "model single\n";
    WriteBody(model, out);
  }
  out << "endmodel\n";
}

void SaveModel(const TrainedModel& model, const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  SaveModel(model, out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

TrainedModel LoadModel(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) Corrupt("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind(std::string(kMagic) + " v", 0) != 0) {
    Corrupt("missing ACIDMATCH-MODEL header");
  }
  const std::string version = line.substr(kMagic.size() + 2);
  if (version != std::to_string(kModelFormatVersion)) {
    throw Error(ErrorCode::kVersionMismatch,
                "model format version " + version + " is not supported (this "
                "build reads version " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  ModelReader r(in);
  std::string kind;
  {
    auto ss = r.Expect("model");
    ss >> kind;
  }
  TrainedModel model;
  if (kind == "single") {
    model = ReadBody(r);
  } else if (kind == "cascade") {
    auto impl = std::make_shared<TrainedModel::Impl>();
    impl->cascade_threshold = r.Double("threshold");
    auto ss = r.Expect("manifest");
    const long n = ModelReader::ParseInt(ss);
    if (n < 0 || n > 4096) Corrupt("bad manifest size");
    for (long k = 0; k < n; ++k) {
      auto ms = r.Expect("meta");
      std::string key, value;
      ms >> key;
      std::getline(ms >> std::ws, value);
      impl->manifest[key] = value;
    }
    r.Expect("stage");
    impl->stage1 = std::make_shared<const TrainedModel>(ReadBody(r));
    r.Expect("stage");
    impl->stage2 = std::make_shared<const TrainedModel>(ReadBody(r));
    impl->family = Family::kNaiveBayes;
    impl->strategy = MissingStrategy::kSkipFeature;
    impl->features = impl->stage1->features();
    if (impl->stage2->features() != impl->features) {
      Corrupt("cascade stages disagree on features");
    }
    model = TrainedModel(std::move(impl));
  } else {
    Corrupt("unknown model kind '" + kind + "'");
  }
  r.Expect("endmodel");
  return model;
}

TrainedModel LoadModel(const std::filesystem::path& path) {
  auto in = csv::OpenInput(path);
  try {
    return LoadModel(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace acidmatch
