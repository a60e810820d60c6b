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

#include "acidmatch/acid.h"

#include <gtest/gtest.h>

#include <sstream>

#include "acidmatch/datagen.h"
#include "acidmatch/error.h"

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

Profile P(const char* id, const char* real, const char* screen) {
  Profile p;
  p.profile_id = id;
  p.network_id = "n";
  if (real) p.real_name = real;
  p.screen_name = screen;
  return p;
}

// Real-name Jaro values (python reference):
//   ann lee ~ cy dee 0.6429, bo chen ~ xyz wvu 0.4286, everything else
//   between distinct names <= 0.6429, identical names 1.
// With the default threshold 0.66:
//   a1 best non-match 0.6429 (below), a2 has a non-matching twin b4,
//   a3 has no real name, a4 is impersonated by b5 and otherwise below.
struct Hand {
  Corpus sn1{{P("a1", "Ann Lee", "s1"), P("a2", "Bo Chen", "s2"),
              P("a3", nullptr, "s3"), P("a4", "Cy Dee", "s4")}};
  Corpus sn2 = [] {
    Profile imp = P("b5", "Cy Dee", "t5");
    imp.is_impersonator_of = "a4";
    return Corpus({P("b1", "Ann Lee", "t1"), P("b2", "Xyz Wvu", "t2"),
                   P("b3", nullptr, "t3"), P("b4", "Bo Chen", "t4"), imp,
                   P("b6", "Cy Dee", "t6")},
                  true);
  }();
  GroundTruth gt{std::vector<MatchPair>{
      {"a1", "b1"}, {"a2", "b2"}, {"a3", "b3"}, {"a4", "b6"}}};
};

TEST(AcidEstimatorTest, HandCorpusAvailabilityAndConsistency) {
  const Hand h;
  const AcidEstimator est(h.sn1, h.sn2, h.gt);
  const ThresholdConfig th;
  EXPECT_DOUBLE_EQ(est.Availability(AttributeKind::kRealName), 0.75);
  EXPECT_DOUBLE_EQ(est.Consistency(AttributeKind::kRealName, th), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(est.Availability(AttributeKind::kScreenName), 1.0);
  EXPECT_DOUBLE_EQ(est.Availability(AttributeKind::kPhoto), 0.0);
  EXPECT_EQ(CodeOf([&] { est.Consistency(AttributeKind::kPhoto, th); }),
            ErrorCode::kNoAvailablePairs);
}

TEST(AcidEstimatorTest, HandCorpusDiscriminability) {
  const Hand h;
  const AcidEstimator est(h.sn1, h.sn2, h.gt);
  const DiscriminabilityResult r =
      est.Discriminability(est.probes(), AttributeKind::kRealName, {});
  EXPECT_EQ(r.probes, 4u);
  EXPECT_EQ(r.impersonated, 1u);
  EXPECT_EQ(r.below_all, 2u);
  EXPECT_DOUBLE_EQ(r.d_tilde(), 0.5);
  EXPECT_DOUBLE_EQ(r.d(), 0.75);
  EXPECT_DOUBLE_EQ(*r.d_conditional(), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.non_impersonability(), 0.0);
  EXPECT_DOUBLE_EQ(*r.impersonation_rate(), 0.25);
  // Both inequalities hold; the second is tight here.
  EXPECT_LE(r.d_tilde(), r.d());
  EXPECT_LE(*r.d_conditional(), r.d_tilde() / (1 - 0.25) + 1e-15);

  const std::vector<std::string> ids = {"a1", "a2"};
  EXPECT_DOUBLE_EQ(EstimateDiscriminability(ids, h.sn1, h.sn2, h.gt,
                                            AttributeKind::kRealName, {}),
                   0.5);
  const std::vector<std::string> victim = {"a4"};
  const NonImpersonability ni = EstimateNonImpersonability(
      victim, h.sn1, h.sn2, h.gt, AttributeKind::kRealName, {});
  EXPECT_DOUBLE_EQ(ni.non_impersonability, 0.0);
  EXPECT_DOUBLE_EQ(ni.impersonation_rate, 1.0);
}

TEST(AcidEstimatorTest, HandCorpusSweep) {
  const Hand h;
  const AcidEstimator est(h.sn1, h.sn2, h.gt);
  const std::vector<double> ths = {0.0, 0.66, 0.99};
  const auto sweep = est.Sweep(AttributeKind::kRealName, ths);
  ASSERT_EQ(sweep.size(), 3u);
  const SweepPoint& mid = sweep[1];
  EXPECT_EQ(mid.positives, 4u);
  EXPECT_EQ(mid.available, 3u);
  EXPECT_EQ(mid.true_positives, 2u);
  // a2~b4 and a4~b5 (the impersonator counts as non-matching).
  EXPECT_EQ(mid.false_positives, 2u);
  EXPECT_EQ(mid.probes_below, 2u);
  EXPECT_DOUBLE_EQ(mid.recall(), 0.5);
  EXPECT_DOUBLE_EQ(mid.recall(), mid.availability() * mid.consistency());
  EXPECT_DOUBLE_EQ(mid.precision(), 0.5);
  EXPECT_EQ(sweep[2].true_positives, 2u);
  EXPECT_GE(sweep[0].false_positives, sweep[1].false_positives);
}

TEST(AcidEstimatorTest, UnlabeledCorpusHasNoNonImpersonability) {
  const Hand h;
  const Corpus plain({P("b1", "Ann Lee", "t1")});
  const GroundTruth gt(std::vector<MatchPair>{{"a1", "b1"}});
  const std::vector<std::string> ids = {"a1"};
  EXPECT_EQ(CodeOf([&] {
              EstimateNonImpersonability(ids, h.sn1, plain, gt,
                                         AttributeKind::kRealName, {});
            }),
            ErrorCode::kNoImpersonatorLabels);
  EXPECT_EQ(CodeOf([&] {
              EstimateAvailability(GroundTruth{}, h.sn1, plain,
                                   AttributeKind::kRealName);
            }),
            ErrorCode::kEmptyGroundTruth);
}

TEST(AcidEstimatorTest, BlockingDoesNotChangeResults) {
  GenConfig config;
  config.n = 400;
  config.seed = 11;
  config.impersonation_rate = 0.1;
  for (AttributeGenConfig& a : config.attributes) a.fidelity = 0.6;
  const GeneratedCorpora c = Generate(config);
  AcidOptions off;
  off.name_blocking = false;
  AcidOptions threaded;
  threaded.threads = 3;
  const AcidEstimator fast(c.sn1, c.sn2, c.gt, threaded);
  const AcidEstimator slow(c.sn1, c.sn2, c.gt, off);
  const std::vector<double> ths = {0.3, 0.5, 0.66, 0.8, 0.95};
  for (AttributeKind k : kAllAttributes) {
    const auto a = fast.Discriminability(fast.probes(), k, {});
    const auto b = slow.Discriminability(slow.probes(), k, {});
    EXPECT_EQ(a.below_all, b.below_all) << AttributeName(k);
    EXPECT_EQ(a.below_excluding_impersonators,
              b.below_excluding_impersonators);
    EXPECT_EQ(a.impersonators_below, b.impersonators_below);
  }
  for (AttributeKind k : {AttributeKind::kRealName, AttributeKind::kScreenName}) {
    const auto a = fast.Sweep(k, ths);
    const auto b = slow.Sweep(k, ths);
    for (size_t i = 0; i < ths.size(); ++i) {
      EXPECT_EQ(a[i].false_positives, b[i].false_positives);
      EXPECT_EQ(a[i].probes_below, b[i].probes_below);
    }
  }
}

TEST(AcidFormulaTest, ClosedForms) {
  EXPECT_DOUBLE_EQ(TheoremRecall(0.8, 0.5), 0.4);
  EXPECT_NEAR(PrecisionUpperBound(0.5, 0.9), 0.5 / 0.6, 1e-15);
  EXPECT_EQ(PrecisionUpperBound(0.0, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(PrecisionUpperBound(0.2, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(EffectiveDiscriminability(0.9, 0.5, 0.2), 0.9 * 0.9);
  EXPECT_DOUBLE_EQ(EffectiveDiscriminability(0.9, 1.0, 0.7), 0.9);
  EXPECT_EQ(CodeOf([] { TheoremRecall(1.2, 0.5); }), ErrorCode::kDomain);
  EXPECT_EQ(CodeOf([] { PrecisionUpperBound(0.5, -0.1); }),
            ErrorCode::kDomain);
  EXPECT_EQ(CodeOf([] { EffectiveDiscriminability(0.5, 0.5, 2.0); }),
            ErrorCode::kDomain);
}

TEST(AcidFormulaTest, DeclareScoreAgreesWithThresholds) {
  const ThresholdConfig th;
  for (AttributeKind k : kAllAttributes) {
    const double cut = DeclareThreshold(k, th);
    for (double raw : {0.0, 0.5, 0.66, 0.82, 0.9, 1.0, 2.0, 3.0, 69.9, 70.0,
                       200.0}) {
      EXPECT_EQ(DeclareScore(k, raw) > cut, PassesThreshold(k, raw, th))
          << AttributeName(k) << " " << raw;
    }
    EXPECT_FALSE(DeclareScore(k, std::nullopt) > cut);
  }
}

TEST(AcidReportTest, CsvMarksUnknowns) {
  const Hand h;
  const AcidReport report = ComputeAcidReport(h.gt, h.sn1, h.sn2, {});
  EXPECT_EQ(report.probes, 4u);
  std::stringstream ss;
  WriteAcidReportCsv(report, ss);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "attribute,A,C,nI,D_tilde,th,p_I");
  bool photo_unknown = false;
  while (std::getline(ss, line)) {
    if (line.rfind("photo,", 0) == 0) {
      photo_unknown = line.find("UNKNOWN") != std::string::npos;
    }
  }
  EXPECT_TRUE(photo_unknown);
  EXPECT_FALSE(FormatAcidTable(report).empty());
}

}  // namespace
}  // namespace acidmatch
