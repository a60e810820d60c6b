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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "acidmatch/error.h"
#include "acidmatch/random.h"

namespace acidmatch {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no acidmatch::Error thrown";
  return ErrorCode::kIo;
}

const PrPoint& At(const std::vector<PrPoint>& curve, double threshold) {
  for (const PrPoint& p : curve) {
    if (std::abs(p.threshold - threshold) < 1e-12) return p;
  }
  ADD_FAILURE() << "no point at " << threshold;
  return curve.front();
}

TEST(PrCurveTest, HandCounts) {
  const std::vector<double> scores = {0.9, 0.8, 0.7, 0.3};
  const std::vector<int> labels = {1, 0, 1, 0};
  const auto curve = PrCurve(scores, labels, 11, /*extra_fn=*/1);
  ASSERT_FALSE(curve.empty());
  EXPECT_TRUE(std::is_sorted(curve.begin(), curve.end(),
                             [](auto& a, auto& b) {
                               return a.threshold < b.threshold;
                             }));
  // Everything predicted.
  const PrPoint& all = curve.front();
  EXPECT_LT(all.threshold, 0.3);
  EXPECT_EQ(all.tp, 2u);
  EXPECT_EQ(all.fp, 2u);
  EXPECT_EQ(all.fn, 1u);
  EXPECT_EQ(all.tn, 0u);
  EXPECT_DOUBLE_EQ(all.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(all.precision, 0.5);
  // Scores equal to the threshold are not predicted.
  const PrPoint& at8 = At(curve, 0.8);
  EXPECT_EQ(at8.tp, 1u);
  EXPECT_EQ(at8.fp, 0u);
  EXPECT_EQ(at8.fn, 2u);
  EXPECT_EQ(at8.tn, 2u);
  EXPECT_DOUBLE_EQ(at8.tpr, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(at8.fpr, 0.0);
  const PrPoint& top = At(curve, 0.9);
  EXPECT_EQ(top.tp + top.fp, 0u);
  EXPECT_EQ(top.precision, 0.0);

  EXPECT_DOUBLE_EQ(RecallAtPrecision(curve, 1.0), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(RecallAtPrecision(curve, 0.6), 2.0 / 3.0);
  // Largest threshold that still keeps recall 1/3 at precision 1.
  EXPECT_NEAR(ThresholdAtPrecision(curve, 1.0), 0.8, 1e-12);

  const std::vector<int> negatives = {0, 0, 0, 0};
  const auto hopeless = PrCurve(scores, negatives, 11, 1);
  EXPECT_EQ(RecallAtPrecision(hopeless, 0.5), 0.0);
  EXPECT_EQ(ThresholdAtPrecision(hopeless, 0.5), 1.0);
}

TEST(PrCurveTest, RejectsEmptyInput) {
  EXPECT_EQ(CodeOf([] { PrCurve(std::vector<double>{}, std::vector<int>{}); }),
            ErrorCode::kEmptyCurve);
}

TEST(PrCurveTest, RecallNeverRisesWithThreshold) {
  Rng rng(12, "pr-monotone");
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng.UniformInt(60);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (size_t i = 0; i < n; ++i) {
      // Coarse grid so ties are common.
      scores[i] = static_cast<double>(rng.UniformInt(11)) / 10.0;
      labels[i] = rng.Bernoulli(0.3);
    }
    const size_t extra = rng.UniformInt(3);
    const auto curve = PrCurve(scores, labels, 1 + rng.UniformInt(30), extra);
    for (size_t k = 1; k < curve.size(); ++k) {
      ASSERT_LE(curve[k].recall, curve[k - 1].recall);
      ASSERT_LE(curve[k].tp + curve[k].fp, curve[k - 1].tp + curve[k - 1].fp);
    }
    for (const PrPoint& p : curve) {
      ASSERT_EQ(p.tp + p.fp + p.tn + p.fn, n + extra);
    }
  }
}

TEST(ImbalanceDemoTest, TinyFalsePositiveRateStillSwamps) {
  const ImbalanceResult r = ImbalanceDemo(0.9, 0.01, 1000, 999000);
  EXPECT_DOUBLE_EQ(r.true_matches, 900.0);
  EXPECT_DOUBLE_EQ(r.false_matches, 9990.0);
  EXPECT_NEAR(r.precision, 900.0 / 10890.0, 1e-15);
  EXPECT_EQ(CodeOf([] { ImbalanceDemo(1.1, 0.0, 1, 1); }), ErrorCode::kDomain);
  EXPECT_EQ(CodeOf([] { ImbalanceDemo(0.5, 0.5, -1, 1); }),
            ErrorCode::kDomain);
}

Profile P(const char* id, const char* real, const char* screen) {
  Profile p;
  p.profile_id = id;
  p.network_id = "n";
  if (real) p.real_name = real;
  p.screen_name = screen;
  return p;
}

TEST(BreakdownTest, HandColumns) {
  const Corpus sn1({P("a1", "Ann Lee", "s1"), P("a2", "Bo Chen", "s2")});
  const Corpus sn2({P("b1", "Ann Lee", "t1"), P("b2", "Zed", "t2"),
                    P("b3", "Bo Chen", "t3")});
  const Featurizer fz(sn1, sn2);
  PairDataset ds;
  ds.pairs = {{"a1", "b1", true, Provenance::kEmulatedLarge},
              {"a2", "b2", true, Provenance::kEmulatedLarge},
              {"a2", "b3", false, Provenance::kEmulatedLarge}};
  const std::vector<double> scores = {0.9, 0.1, 0.8};
  const MatchBreakdown b = ComputeMatchBreakdown(scores, ds, fz, 0.5, {});
  EXPECT_EQ(b.pairs, (std::array<size_t, 4>{2, 1, 1, 1}));
  const auto& real = b.fraction[Slot(AttributeKind::kRealName)];
  EXPECT_DOUBLE_EQ(*real[0], 0.5);
  EXPECT_DOUBLE_EQ(*real[1], 1.0);
  EXPECT_DOUBLE_EQ(*real[2], 0.0);
  EXPECT_DOUBLE_EQ(*real[3], 1.0);
  EXPECT_DOUBLE_EQ(*b.fraction[Slot(AttributeKind::kPhoto)][0], 0.0);

  // Nothing predicted: the true and false columns are empty.
  const MatchBreakdown none = ComputeMatchBreakdown(scores, ds, fz, 0.95, {});
  EXPECT_FALSE(none.fraction[Slot(AttributeKind::kRealName)][1].has_value());
  std::stringstream ss;
  WriteBreakdownCsv(none, ss);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "attribute,all,true,missed,false");
  EXPECT_NE(ss.str().find("UNKNOWN"), std::string::npos);
}

TEST(PrCsvTest, RoundTrip) {
  const std::vector<double> scores = {0.91, 0.4, 0.4, 0.05};
  const std::vector<int> labels = {1, 1, 0, 0};
  const auto curve = PrCurve(scores, labels, 7);
  std::stringstream ss;
  WritePrCsv(curve, ss);
  const auto back = ParsePrCsv(ss);
  ASSERT_EQ(back.size(), curve.size());
  for (size_t i = 0; i < curve.size(); ++i) {
    EXPECT_EQ(back[i].threshold, curve[i].threshold);
    EXPECT_EQ(back[i].tp, curve[i].tp);
    EXPECT_EQ(back[i].fn, curve[i].fn);
    EXPECT_EQ(back[i].precision, curve[i].precision);
  }
}

TEST(PrSvgTest, WritesPlotAndCurves) {
  const auto dir = std::filesystem::temp_directory_path() / "acidmatch_svg";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::vector<double> scores = {0.9, 0.2};
  const std::vector<int> labels = {1, 0};
  const std::vector<LabeledCurve> curves = {
      {"a", PrCurve(scores, labels)}, {"b & c", PrCurve(scores, labels)}};
  EmitPrSvg(curves, dir / "pr.svg");
  std::ifstream in(dir / "pr.svg");
  std::stringstream svg;
  svg << in.rdbuf();
  EXPECT_NE(svg.str().find("<svg"), std::string::npos);
  EXPECT_NE(svg.str().find("&amp;"), std::string::npos);
  size_t csvs = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    csvs += e.path().extension() == ".csv";
  }
  EXPECT_EQ(csvs, 2u);
  EXPECT_EQ(CodeOf([&] { EmitPrSvg({}, dir / "x.svg"); }),
            ErrorCode::kEmptyCurve);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace acidmatch
