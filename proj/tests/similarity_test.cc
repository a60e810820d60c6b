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

#include "acidmatch/similarity.h"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "acidmatch/random.h"
#include "acidmatch/text.h"

namespace acidmatch {
namespace {

// Reference values from an independent Python implementation.
TEST(JaroTest, MatchesReferenceValues) {
  struct Case {
    const char* a;
    const char* b;
    double want;
  };
  const Case cases[] = {
      {"MARTHA", "MARHTA", 0.944444444444445},
      {"DWAYNE", "DUANE", 0.822222222222222},
      {"DIXON", "DICKSONX", 0.766666666666667},
      {"JELLYFISH", "SMELLYFISH", 0.896296296296296},
      {" Jon Smith", "john  smith ", 0.939393939393939},
      {"abc", "xyz", 0.0},
      {"a", "a", 1.0},
      {"ab", "ba", 0.0},
  };
  for (const Case& c : cases) {
    EXPECT_NEAR(Jaro(c.a, c.b), c.want, 1e-12) << c.a << " / " << c.b;
    EXPECT_NEAR(Jaro(c.b, c.a), c.want, 1e-12) << c.b << " / " << c.a;
  }
}

TEST(JaroTest, LongStringsUseTheScanPath) {
  std::string a, b;
  for (int i = 0; i < 7; ++i) {
    a += "abcdefghij";
    b += "abdcefhgij";
  }
  a += "xyz";
  b += "xzy";
  EXPECT_NEAR(Jaro(a, b), 0.931506849315069, 1e-12);
  EXPECT_NEAR(Jaro(a, std::string(a.rbegin(), a.rend())), 0.805936073059361,
              1e-12);
}

TEST(JaroTest, EmptyIsZero) {
  EXPECT_EQ(Jaro("", "abc"), 0.0);
  EXPECT_EQ(Jaro("  ", "  "), 0.0);
}

// Textbook greedy Jaro, written without any of the library's shortcuts.
double ReferenceJaro(std::u32string a, std::u32string b) {
  if (a.empty() || b.empty()) return 0.0;
  if (b.size() < a.size() || (b.size() == a.size() && b < a)) std::swap(a, b);
  const size_t w = std::max<size_t>(std::max(a.size(), b.size()) / 2, 1) - 1;
  std::vector<bool> ma(a.size()), mb(b.size());
  size_t m = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const size_t lo = i > w ? i - w : 0;
    for (size_t j = lo; j < std::min(b.size(), i + w + 1); ++j) {
      if (!mb[j] && a[i] == b[j]) {
        ma[i] = mb[j] = true;
        ++m;
        break;
      }
    }
  }
  if (m == 0) return 0.0;
  std::u32string s1, s2;
  for (size_t i = 0; i < a.size(); ++i) {
    if (ma[i]) s1 += a[i];
  }
  for (size_t j = 0; j < b.size(); ++j) {
    if (mb[j]) s2 += b[j];
  }
  size_t t = 0;
  for (size_t k = 0; k < m; ++k) t += s1[k] != s2[k];
  t /= 2;
  const double dm = static_cast<double>(m);
  return (dm / a.size() + dm / b.size() + (dm - t) / dm) / 3.0;
}

TEST(JaroTest, AgreesWithReferenceOnRandomStrings) {
  Rng rng(3, "jaro-property");
  // Small alphabets force repeated characters; a few code points are
  // non-ASCII.
  const std::u32string alphabet = U"abcdeé中";
  for (int trial = 0; trial < 5000; ++trial) {
    const size_t la = rng.UniformInt(trial % 10 == 0 ? 90 : 20);
    const size_t lb = rng.UniformInt(trial % 10 == 0 ? 90 : 20);
    const size_t k = 2 + rng.UniformInt(alphabet.size() - 1);
    std::u32string a, b;
    for (size_t i = 0; i < la; ++i) a += alphabet[rng.UniformInt(k)];
    for (size_t i = 0; i < lb; ++i) b += alphabet[rng.UniformInt(k)];
    const double got = JaroNormalized(a, b);
    ASSERT_NEAR(got, ReferenceJaro(a, b), 1e-15) << "trial " << trial;
    ASSERT_EQ(got, JaroNormalized(b, a));
    ASSERT_GE(got, 0.0);
    ASSERT_LE(got, 1.0);
  }
}

TEST(GeodesicTest, MatchesReferenceDistances) {
  EXPECT_NEAR(GeodesicKm({48.8566, 2.3522}, {51.5074, -0.1278}), 343.556060341,
              1e-6);
  EXPECT_NEAR(GeodesicKm({40.7128, -74.0060}, {34.0522, -118.2437}),
              3935.746254610, 1e-6);
  EXPECT_NEAR(GeodesicKm({0, 0}, {0, 180}), 20015.086796021, 1e-6);
  EXPECT_EQ(GeodesicKm({10, 20}, {10, 20}), 0.0);
}

TEST(GeodesicTest, SymmetricAndBounded) {
  Rng rng(4, "geo");
  for (int i = 0; i < 1000; ++i) {
    const LatLon a{rng.Uniform() * 180 - 90, rng.Uniform() * 360 - 180};
    const LatLon b{rng.Uniform() * 180 - 90, rng.Uniform() * 360 - 180};
    const double d = GeodesicKm(a, b);
    ASSERT_NEAR(d, GeodesicKm(b, a), 1e-9);
    ASSERT_GE(d, 0.0);
    ASSERT_LE(d, std::numbers::pi * kEarthRadiusKm + 1e-9);
  }
}

TEST(LocationSimilarityTest, DecaysExponentially) {
  EXPECT_EQ(LocationSimilarity(0.0), 1.0);
  EXPECT_NEAR(LocationSimilarity(35.0), 0.496585303791410, 1e-15);
  EXPECT_NEAR(LocationSimilarity(50.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(LocationSimilarity(500.0), 4.539992976248485e-05, 1e-18);
  EXPECT_LT(LocationSimilarity(100.0), LocationSimilarity(99.0));
}

TEST(PhotoSimilarityTest, CountsDifferingBits) {
  EXPECT_EQ(PhotoSimilarity(0, 0), 1.0);
  EXPECT_EQ(PhotoSimilarity(0, 0xFFFF), 0.75);
  EXPECT_EQ(PhotoSimilarity(0, ~uint64_t{0}), 0.0);
  EXPECT_EQ(PhotoSimilarity(0xF0, 0x0F), 1.0 - 8.0 / 64.0);
}

std::vector<Friend> Friends(
    std::vector<std::pair<const char*, const char*>> spec) {
  std::vector<Friend> out;
  for (auto [rn, sn] : spec) {
    Friend f;
    if (rn) f.real_name = rn;
    f.screen_name = sn;
    out.push_back(f);
  }
  return out;
}

TEST(FriendsOverlapTest, HandCases) {
  EXPECT_EQ(FriendsOverlap(Friends({}), Friends({{"A B", "ab"}})), 0);
  // A real name never matches a screen name.
  EXPECT_EQ(FriendsOverlap(Friends({{"Ann Lee", "a1"}}),
                           Friends({{nullptr, "annlee"}})),
            0);
  EXPECT_EQ(FriendsOverlap(Friends({{nullptr, "jdoe"}, {nullptr, "asmith"}}),
                           Friends({{nullptr, "asmith"}, {nullptr, "jdoe"}})),
            2);
  // Case-folded real names match across different screen names.
  EXPECT_EQ(FriendsOverlap(Friends({{"Ann Lee", "ann"}}),
                           Friends({{"ANN LEE", "other"}})),
            1);
  // One friend pairs with at most one on the other side.
  EXPECT_EQ(FriendsOverlap(Friends({{"Ann Lee", "ann"}}),
                           Friends({{"Ann Lee", "a1"}, {"Zed", "ann"}})),
            1);
  // Crossed keys still admit a perfect matching.
  EXPECT_EQ(FriendsOverlap(Friends({{"Ann Lee", "ann"}, {"Bo Chen", "bo"}}),
                           Friends({{"Ann Lee", "bo"}, {"Cy Dee", "ann"}})),
            2);
  // Greedy first-come pairing would find 1 here; the maximum is 2.
  EXPECT_EQ(FriendsOverlap(Friends({{"X", "z"}, {nullptr, "q"}}),
                           Friends({{"X", "q"}, {"Y", "z"}})),
            2);
  EXPECT_EQ(FriendsOverlap(Friends({{nullptr, "dup"}, {nullptr, "dup"}}),
                           Friends({{nullptr, "dup"}})),
            1);
}

TEST(FriendsOverlapTest, SymmetricOnRandomLists) {
  Rng rng(5, "friends");
  const char* names[] = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 500; ++trial) {
    auto make = [&] {
      std::vector<Friend> v(rng.UniformInt(6));
      for (Friend& f : v) {
        if (rng.Bernoulli(0.5)) f.real_name = names[rng.UniformInt(5)];
        f.screen_name = names[rng.UniformInt(5)];
      }
      return v;
    };
    const auto a = make();
    const auto b = make();
    const int ab = FriendsOverlap(a, b);
    ASSERT_EQ(ab, FriendsOverlap(b, a));
    ASSERT_LE(ab, static_cast<int>(std::min(a.size(), b.size())));
  }
}

Profile Person(const char* id, const char* real, const char* screen) {
  Profile p;
  p.profile_id = id;
  p.network_id = "n";
  if (real) p.real_name = real;
  p.screen_name = screen;
  return p;
}

TEST(FeaturizeTest, MissingAttributesStayMissing) {
  Profile a = Person("a", "Ann Lee", "annlee");
  Profile b = Person("b", nullptr, "ann_lee");
  a.photo = 0;
  b.photo = 0xFF;
  a.location = Location{"", 48.8566, 2.3522};
  const FeatureVector fv = Featurize(a, b);
  EXPECT_FALSE(fv[AttributeKind::kRealName].has_value());
  EXPECT_FALSE(fv[AttributeKind::kLocation].has_value());
  EXPECT_FALSE(fv[AttributeKind::kFriends].has_value());
  ASSERT_TRUE(fv[AttributeKind::kScreenName].has_value());
  EXPECT_NEAR(*fv[AttributeKind::kPhoto], 1.0 - 8.0 / 64.0, 1e-15);

  b.location = Location{"", 51.5074, -0.1278};
  const FeatureVector with_loc = Featurize(a, b);
  EXPECT_NEAR(*with_loc[AttributeKind::kLocation],
              LocationSimilarity(343.556060341), 1e-9);
}

TEST(FeaturizeTest, RawScoresUseThresholdUnits) {
  Profile a = Person("a", "Ann", "ann");
  Profile b = Person("b", "Ann", "ann");
  a.location = Location{"", 0, 0};
  b.location = Location{"", 0, 1};
  const PreparedProfile pa = Prepare(a);
  const PreparedProfile pb = Prepare(b);
  const double km = *AttributeScore(AttributeKind::kLocation, pa, pb);
  EXPECT_NEAR(km, GeodesicKm({0, 0}, {0, 1}), 1e-9);
  const ThresholdConfig th;
  EXPECT_FALSE(PassesThreshold(AttributeKind::kLocation, km, th));
  EXPECT_TRUE(PassesThreshold(AttributeKind::kLocation, 10.0, th));
  EXPECT_TRUE(PassesThreshold(AttributeKind::kFriends, 2.0, th));
  EXPECT_FALSE(PassesThreshold(AttributeKind::kFriends, 1.0, th));
  EXPECT_TRUE(PassesThreshold(AttributeKind::kRealName, 1.0, th));
}

TEST(TextTest, NormalizationFoldsCaseAndTrims) {
  EXPECT_EQ(NormalizeForComparison(" Ann  LEE\t"), U"ann  lee");
  EXPECT_EQ(NormalizeForComparison("ÉLODIE"), U"élodie");
}

}  // namespace
}  // namespace acidmatch
