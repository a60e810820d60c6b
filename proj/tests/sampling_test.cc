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

#include "acidmatch/sampling.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "acidmatch/datagen.h"
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

const GeneratedCorpora& World() {
  static const GeneratedCorpora c = [] {
    GenConfig config;
    config.n = 600;
    config.seed = 21;
    config.forenames = 60;
    config.surnames = 120;
    return Generate(config);
  }();
  return c;
}

TEST(SplitTest, DisjointAndComplete) {
  const GroundTruth& gt = World().gt;
  const auto [a, b] = SplitGroundTruth(gt, 0.7, 4);
  EXPECT_EQ(a.size() + b.size(), gt.size());
  EXPECT_NEAR(static_cast<double>(a.size()) / gt.size(), 0.7, 0.01);
  std::set<std::string> ids;
  for (const MatchPair& p : a.pairs()) ids.insert(p.id1);
  for (const MatchPair& p : b.pairs()) EXPECT_FALSE(ids.contains(p.id1));
  const auto [c, d] = SplitGroundTruth(gt, 0.7, 4);
  EXPECT_TRUE(std::equal(a.pairs().begin(), a.pairs().end(),
                         c.pairs().begin(), c.pairs().end()));
  EXPECT_EQ(CodeOf([&] { SplitGroundTruth(gt, 1.5, 0); }), ErrorCode::kDomain);
}

TEST(RandomSampledTest, AllCrossPairsOfTheSample) {
  const GroundTruth& gt = World().gt;
  const PairDataset ds = BuildRandomSampled(gt, 30, 8);
  EXPECT_EQ(ds.size(), 30u * 30u);
  EXPECT_EQ(ds.CountPositives(), 30u);
  ValidatePairDataset(ds, gt);
  for (const LabeledPair& p : ds.pairs) {
    EXPECT_EQ(p.provenance, Provenance::kRandomSampled);
  }
  EXPECT_EQ(ds, BuildRandomSampled(gt, 30, 8));
  EXPECT_NE(ds, BuildRandomSampled(gt, 30, 9));
  EXPECT_EQ(CodeOf([&] { BuildRandomSampled(gt, gt.size() + 1, 0); }),
            ErrorCode::kInsufficientData);
}

TEST(RandomSampledTest, ManyToManyLabelsFollowGroundTruth) {
  // a matches both x and y, so (a, y) is positive even though the sample
  // paired it through b.
  const GroundTruth gt(
      std::vector<MatchPair>{{"a", "x"}, {"a", "y"}, {"b", "y"}});
  const PairDataset ds = BuildRandomSampled(gt, 3, 1);
  ValidatePairDataset(ds, gt);
  EXPECT_EQ(ds.CountPositives(), 3u);
}

TEST(UndersampleTest, BalancesClasses) {
  const PairDataset ds = BuildRandomSampled(World().gt, 25, 2);
  const PairDataset u = Undersample(ds, 3);
  EXPECT_EQ(u.CountPositives(), 25u);
  EXPECT_EQ(u.CountNegatives(), 25u);
  for (const LabeledPair& p : u.pairs) {
    EXPECT_NE(std::find(ds.pairs.begin(), ds.pairs.end(), p), ds.pairs.end());
  }
  PairDataset none;
  none.pairs.push_back({"a", "b", false, Provenance::kRandomSampled});
  EXPECT_EQ(CodeOf([&] { Undersample(none, 0); }), ErrorCode::kSingleClass);
}

struct Blocked {
  Featurizer fz{World().sn1, World().sn2};
  NameIndex index{World().sn2, fz.all_prepared2()};
};

double BruteMax(const PreparedProfile& a, const PreparedProfile& b) {
  double best = 0.0;
  if (a.real_name && b.real_name) {
    best = JaroNormalized(*a.real_name, *b.real_name);
  }
  return std::max(best, JaroNormalized(a.screen_name, b.screen_name));
}

TEST(NameIndexTest, SearchMatchesExhaustiveScan) {
  const Blocked b;
  Rng rng(5, "name-search");
  std::vector<std::pair<size_t, double>> got;
  for (int q = 0; q < 60; ++q) {
    const PreparedProfile& probe =
        b.fz.prepared1(rng.UniformInt(World().sn1.size()));
    const double min_sim = 0.5 + 0.4 * rng.Uniform();
    got.clear();
    b.index.Search(NameField::kScreenName, probe.screen_name, min_sim, got);
    std::vector<std::pair<size_t, double>> want;
    for (size_t j = 0; j < World().sn2.size(); ++j) {
      const double s =
          JaroNormalized(probe.screen_name, b.fz.prepared2(j).screen_name);
      if (s >= min_sim) want.emplace_back(j, s);
    }
    ASSERT_EQ(got, want) << "query " << q;
  }
}

TEST(NameIndexTest, BestMatchesExhaustiveTopCap) {
  const Blocked b;
  Rng rng(6, "name-best");
  for (int q = 0; q < 60; ++q) {
    const size_t i = rng.UniformInt(World().sn1.size());
    const size_t cap = 1 + rng.UniformInt(20);
    const CandidateSet got =
        BuildCandidateSet(i, b.fz.prepared1(i), b.index, 0.5, cap);
    std::vector<Candidate> all;
    for (size_t j = 0; j < World().sn2.size(); ++j) {
      const double s = BruteMax(b.fz.prepared1(i), b.fz.prepared2(j));
      if (s >= 0.5) all.push_back({j, s});
    }
    std::stable_sort(all.begin(), all.end(), [](auto& x, auto& y) {
      return x.score > y.score;
    });
    ASSERT_EQ(got.candidates.size(), std::min(cap, all.size()));
    for (size_t k = 0; k < got.candidates.size(); ++k) {
      // Equal scores may be ordered differently; the score sequence may not.
      ASSERT_EQ(got.candidates[k].score, all[k].score) << "query " << q;
    }
  }
}

TEST(EmulatedLargeTest, CandidateSetsAndContainment) {
  const Blocked b;
  const GroundTruth& gt = World().gt;
  const auto probes = GroundTruthProbes(gt, World().sn1);
  EmulatedLargeOptions options;
  options.cap = 10;
  const EmulatedLarge el =
      BuildEmulatedLarge(probes, b.fz, b.index, gt, options);
  EXPECT_EQ(el.candidate_sets.size(), probes.size());
  EXPECT_EQ(el.probes_with_match, probes.size());
  EXPECT_LE(el.contained, el.probes_with_match);
  EXPECT_DOUBLE_EQ(el.containment_rate,
                   static_cast<double>(el.contained) / el.probes_with_match);
  EXPECT_EQ(el.dataset.CountPositives(), el.contained);
  ValidatePairDataset(el.dataset, gt);
  for (const CandidateSet& s : el.candidate_sets) {
    EXPECT_LE(s.candidates.size(), 10u);
  }

  options.include_uncontained = true;
  options.threads = 2;
  const EmulatedLarge all =
      BuildEmulatedLarge(probes, b.fz, b.index, gt, options);
  EXPECT_EQ(all.dataset.CountPositives(), probes.size());
  EXPECT_EQ(all.dataset.CountNegatives(), el.dataset.CountNegatives());
}

TEST(EnrichedTest, ThreeEqualSources) {
  const Blocked b;
  const GroundTruth& gt = World().gt;
  const PairDataset rs = BuildRandomSampled(gt, 40, 1);
  const auto probes = GroundTruthProbes(gt, World().sn1);
  const EmulatedLarge el = BuildEmulatedLarge(probes, b.fz, b.index, gt);
  const PairDataset e = BuildEnrichedTraining(gt, rs, el.dataset, 40, 2);
  EXPECT_EQ(e.CountPositives(), 40u);
  EXPECT_EQ(e.size(), 120u);
  ValidatePairDataset(e, gt);
  for (const LabeledPair& p : e.pairs) {
    EXPECT_EQ(p.provenance, Provenance::kEnrichedTraining);
  }
  EXPECT_EQ(CodeOf([&] { BuildEnrichedTraining(gt, rs, el.dataset, 41, 2); }),
            ErrorCode::kInsufficientData);
}

TEST(PairDatasetTest, CsvRoundTripAndValidation) {
  PairDataset ds;
  ds.pairs = {{"a", "x", true, Provenance::kRandomSampled},
              {"a", "y", false, Provenance::kEmulatedLarge},
              {"b", "x", false, Provenance::kEnrichedTraining}};
  std::stringstream ss;
  WritePairDataset(ds, ss);
  EXPECT_EQ(ParsePairDataset(ss), ds);

  const GroundTruth gt(std::vector<MatchPair>{{"a", "x"}});
  ValidatePairDataset(ds, gt);
  PairDataset dup = ds;
  dup.pairs.push_back(ds.pairs[0]);
  EXPECT_EQ(CodeOf([&] { ValidatePairDataset(dup, gt); }),
            ErrorCode::kDuplicatePair);
  PairDataset wrong = ds;
  wrong.pairs[1].match = true;
  EXPECT_THROW(ValidatePairDataset(wrong, gt), Error);

  std::stringstream bad("id1,id2,label,provenance\na,x,maybe,random_sampled\n");
  EXPECT_EQ(CodeOf([&] { ParsePairDataset(bad); }), ErrorCode::kParse);
}

}  // namespace
}  // namespace acidmatch
