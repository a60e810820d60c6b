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

#include "acidmatch/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "acidmatch/error.h"
#include "acidmatch/parallel.h"
#include "csv.h"

namespace acidmatch {

namespace {

std::string Num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

constexpr std::string_view kPrHeader =
    "threshold,tp,fp,fn,tn,precision,recall,tpr,fpr";

}  // namespace

std::vector<PrPoint> PrCurve(std::span<const double> scores,
                             std::span<const int> labels, size_t n_thresholds,
                             size_t extra_fn) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kDomain, "scores and labels differ in length");
  }
  if (scores.empty() && extra_fn == 0) {
    throw Error(ErrorCode::kEmptyCurve, "no scored pairs");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw Error(ErrorCode::kNonFinite, "non-finite score");
    }
  }

  // Scores descending; prefix counts give the confusion at any cut.
  std::vector<size_t> order(scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<double> sorted(order.size());
  std::vector<size_t> pos_prefix(order.size() + 1, 0);
  for (size_t k = 0; k < order.size(); ++k) {
    sorted[k] = scores[order[k]];
    pos_prefix[k + 1] = pos_prefix[k] + (labels[order[k]] != 0);
  }
  const size_t total_pos = pos_prefix.back() + extra_fn;
  const size_t total_neg = scores.size() - pos_prefix.back();

  std::vector<double> thresholds;
  for (size_t i = 0; i < n_thresholds; ++i) {
    thresholds.push_back(n_thresholds == 1
                             ? 0.0
                             : static_cast<double>(i) /
                                   static_cast<double>(n_thresholds - 1));
  }
  thresholds.insert(thresholds.end(), sorted.begin(), sorted.end());
  if (!sorted.empty()) {
    thresholds.push_back(std::nextafter(
        sorted.back(), -std::numeric_limits<double>::infinity()));
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<PrPoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    // Number of scores strictly above t.
    const size_t k = static_cast<size_t>(
        std::partition_point(sorted.begin(), sorted.end(),
                             [t](double s) { return s > t; }) -
        sorted.begin());
    PrPoint p;
    p.threshold = t;
    p.tp = pos_prefix[k];
    p.fp = k - p.tp;
    p.fn = total_pos - p.tp;
    p.tn = total_neg - p.fp;
    p.precision = k > 0 ? static_cast<double>(p.tp) / static_cast<double>(k)
                        : 0.0;
    p.recall = total_pos > 0 ? static_cast<double>(p.tp) /
                                   static_cast<double>(total_pos)
                             : 0.0;
    p.tpr = p.recall;
    p.fpr = total_neg > 0 ? static_cast<double>(p.fp) /
                                static_cast<double>(total_neg)
                          : 0.0;
    curve.push_back(p);
  }
  return curve;
}

std::vector<double> ScoreDataset(const TrainedModel& model,
                                 const PairDataset& ds,
                                 const Featurizer& featurizer, int threads) {
  std::vector<double> scores(ds.size());
  ParallelFor(ds.size(), threads, [&](size_t i) {
    scores[i] = model.PredictProba(
        featurizer(ds.pairs[i].id1, ds.pairs[i].id2));
  });
  return scores;
}

std::vector<PrPoint> PrCurve(const TrainedModel& model, const PairDataset& ds,
                             const Featurizer& featurizer, size_t n_thresholds,
                             int threads) {
  const std::vector<double> scores =
      ScoreDataset(model, ds, featurizer, threads);
  std::vector<int> labels(ds.size());
  for (size_t i = 0; i < ds.size(); ++i) labels[i] = ds.pairs[i].match;
  return PrCurve(scores, labels, n_thresholds);
}

double RecallAtPrecision(std::span<const PrPoint> curve,
                         double target_precision) {
  double best = 0.0;
  for (const PrPoint& p : curve) {
    if (p.precision >= target_precision) best = std::max(best, p.recall);
  }
  return best;
}

double ThresholdAtPrecision(std::span<const PrPoint> curve,
                            double target_precision) {
  double best_recall = -1.0;
  double threshold = 1.0;
  for (const PrPoint& p : curve) {
    if (p.precision < target_precision || p.tp == 0) continue;
    if (p.recall > best_recall ||
        (p.recall == best_recall && p.threshold > threshold)) {
      best_recall = p.recall;
      threshold = p.threshold;
    }
  }
  return threshold;
}

ImbalanceResult ImbalanceDemo(double tpr, double fpr, double n_pos,
                              double n_neg) {
  if (!(tpr >= 0.0 && tpr <= 1.0 && fpr >= 0.0 && fpr <= 1.0)) {
    throw Error(ErrorCode::kDomain, "rates must lie in [0,1]");
  }
  if (!(n_pos >= 0.0 && n_neg >= 0.0) || !std::isfinite(n_pos) ||
      !std::isfinite(n_neg)) {
    throw Error(ErrorCode::kDomain, "counts must be finite and nonnegative");
  }
  ImbalanceResult r;
  r.true_matches = tpr * n_pos;
  r.false_matches = fpr * n_neg;
  const double declared = r.true_matches + r.false_matches;
  r.precision = declared > 0.0 ? r.true_matches / declared : 0.0;
  return r;
}

MatchBreakdown ComputeMatchBreakdown(std::span<const double> scores,
                                     const PairDataset& ds,
                                     const Featurizer& featurizer, double th_p,
                                     const ThresholdConfig& thresholds) {
  if (scores.size() != ds.size()) {
    throw Error(ErrorCode::kDomain, "scores and dataset differ in length");
  }
  MatchBreakdown b;
  b.th_p = th_p;
  std::array<std::array<size_t, kNumBreakdownColumns>, kNumAttributes> hits{};
  const Corpus& sn1 = featurizer.sn1();
  const Corpus& sn2 = featurizer.sn2();
  for (size_t i = 0; i < ds.size(); ++i) {
    const LabeledPair& pair = ds.pairs[i];
    const bool predicted = scores[i] > th_p;
    bool in[kNumBreakdownColumns] = {
        pair.match, pair.match && predicted, pair.match && !predicted,
        !pair.match && predicted};
    if (!in[0] && !in[3]) continue;
    const auto i1 = sn1.IndexOf(pair.id1);
    const auto i2 = sn2.IndexOf(pair.id2);
    if (!i1 || !i2) {
      throw Error(ErrorCode::kUnresolvedId,
                  "pair " + pair.id1 + "," + pair.id2 + " not in the corpora");
    }
    for (size_t c = 0; c < kNumBreakdownColumns; ++c) b.pairs[c] += in[c];
    for (AttributeKind kind : kAllAttributes) {
      const auto raw = AttributeScore(kind, featurizer.prepared1(*i1),
                                      featurizer.prepared2(*i2));
      if (!raw || !PassesThreshold(kind, *raw, thresholds)) continue;
      for (size_t c = 0; c < kNumBreakdownColumns; ++c) {
        hits[Slot(kind)][c] += in[c];
      }
    }
  }
  for (size_t a = 0; a < kNumAttributes; ++a) {
    for (size_t c = 0; c < kNumBreakdownColumns; ++c) {
      if (b.pairs[c] == 0) continue;
      b.fraction[a][c] = static_cast<double>(hits[a][c]) /
                         static_cast<double>(b.pairs[c]);
    }
  }
  return b;
}

MatchBreakdown ComputeMatchBreakdown(const TrainedModel& model,
                                     const PairDataset& ds,
                                     const Featurizer& featurizer, double th_p,
                                     const ThresholdConfig& thresholds,
                                     int threads) {
  return ComputeMatchBreakdown(ScoreDataset(model, ds, featurizer, threads),
                               ds, featurizer, th_p, thresholds);
}

void WriteBreakdownCsv(const MatchBreakdown& breakdown, std::ostream& out) {
  out << "attribute,all,true,missed,false\n";
  for (AttributeKind kind : kAllAttributes) {
    out << AttributeName(kind);
    for (const auto& v : breakdown.fraction[Slot(kind)]) {
      out << ',';
      if (v) {
        out << Num(*v);
      } else {
        out << "UNKNOWN";
      }
    }
    out << '\n';
  }
}

void WriteBreakdownCsv(const MatchBreakdown& breakdown,
                       const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  WriteBreakdownCsv(breakdown, out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

void WritePrCsv(std::span<const PrPoint> curve, std::ostream& out) {
  out << kPrHeader << '\n';
  for (const PrPoint& p : curve) {
    out << Num(p.threshold) << ',' << p.tp << ',' << p.fp << ',' << p.fn
        << ',' << p.tn << ',' << Num(p.precision) << ',' << Num(p.recall)
        << ',' << Num(p.tpr) << ',' << Num(p.fpr) << '\n';
  }
}

void WritePrCsv(std::span<const PrPoint> curve,
                const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  WritePrCsv(curve, out);
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<PrPoint> ParsePrCsv(std::istream& in) {
  csv::ExpectHeader(in, kPrHeader, "PR curve");
  std::vector<PrPoint> out;
  std::string line;
  size_t line_no = 1;
  auto count = [&](const std::string& s) {
    const double v = csv::ParseDouble(s, line_no);
    if (v < 0 || v != std::floor(v)) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": bad count");
    }
    return static_cast<size_t>(v);
  };
  while (csv::GetLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::SplitLine(line);
    if (f.size() != 9) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + ": expected 9 fields");
    }
    PrPoint p;
    p.threshold = csv::ParseDouble(f[0], line_no);
    p.tp = count(f[1]);
    p.fp = count(f[2]);
    p.fn = count(f[3]);
    p.tn = count(f[4]);
    p.precision = csv::ParseDouble(f[5], line_no);
    p.recall = csv::ParseDouble(f[6], line_no);
    p.tpr = csv::ParseDouble(f[7], line_no);
    p.fpr = csv::ParseDouble(f[8], line_no);
    out.push_back(p);
  }
  return out;
}

namespace {

std::string XmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string FileSafe(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "curve" : out;
}

}  // namespace

void EmitPrSvg(std::span<const LabeledCurve> curves,
               const std::filesystem::path& path) {
  if (curves.empty()) throw Error(ErrorCode::kEmptyCurve, "no curves to plot");
  for (const LabeledCurve& c : curves) {
    if (c.points.empty()) {
      throw Error(ErrorCode::kEmptyCurve, "curve '" + c.label + "' is empty");
    }
  }
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                            "#9467bd", "#ff7f0e", "#8c564b",
                                            "#17becf", "#7f7f7f"};
  // Plot area: x in [60, 460], y in [20, 420].
  constexpr double kLeft = 60, kTop = 20, kSize = 400;
  auto px = [&](double r) { return kLeft + r * kSize; };
  auto py = [&](double p) { return kTop + (1.0 - p) * kSize; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"480\" viewBox=\"0 0 640 480\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kSize
      << "\" height=\"" << kSize
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    svg << "<line x1=\"" << Short(px(v)) << "\" y1=\"" << Short(py(0))
        << "\" x2=\"" << Short(px(v)) << "\" y2=\"" << Short(py(0) + 5)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << Short(px(v)) << "\" y=\"" << Short(py(0) + 18)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << Short(v).substr(0, 3)
        << "</text>\n"
        << "<line x1=\"" << Short(px(0) - 5) << "\" y1=\"" << Short(py(v))
        << "\" x2=\"" << Short(px(0)) << "\" y2=\"" << Short(py(v))
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << Short(px(0) - 8) << "\" y=\"" << Short(py(v) + 3)
        << "\" font-size=\"10\" text-anchor=\"end\">" << Short(v).substr(0, 3)
        << "</text>\n";
  }
  svg << "<text x=\"" << Short(px(0.5)) << "\" y=\"460\" font-size=\"12\" "
         "text-anchor=\"middle\">recall</text>\n"
      << "<text x=\"16\" y=\"" << Short(py(0.5))
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << Short(py(0.5)) << ")\">precision</text>\n";

  const std::filesystem::path dir = path.parent_path();
  const std::string stem = path.stem().string();
  for (size_t i = 0; i < curves.size(); ++i) {
    const LabeledCurve& c = curves[i];
    const char* color = kColors[i % std::size(kColors)];
    // Points by recall, then precision, so the polyline reads left to right.
    std::vector<std::pair<double, double>> xy;
    for (const PrPoint& p : c.points) xy.emplace_back(p.recall, p.precision);
    std::sort(xy.begin(), xy.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    });
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t k = 0; k < xy.size(); ++k) {
      if (k) svg << ' ';
      svg << Short(px(xy[k].first)) << ',' << Short(py(xy[k].second));
    }
    svg << "\"><title>" << XmlEscape(c.label) << "</title></polyline>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
    svg << "<g class=\"legend\"><line x1=\"475\" y1=\"" << Short(ly - 4)
        << "\" x2=\"495\" y2=\"" << Short(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/><text x=\"500\" y=\"" << Short(ly)
        << "\" font-size=\"11\">" << XmlEscape(c.label) << "</text></g>\n";

    WritePrCsv(c.points, dir / (stem + "_" + std::to_string(i) + "_" +
                                FileSafe(c.label) + ".csv"));
  }
  svg << "</svg>\n";
  auto out = csv::OpenOutput(path);
  out << svg.str();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace acidmatch
