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

// Attribute similarity metrics and feature-vector assembly.

#ifndef ACIDMATCH_SIMILARITY_H_
#define ACIDMATCH_SIMILARITY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acidmatch/core.h"

namespace acidmatch {

// Jaro similarity of the case-folded, trimmed strings (inner spaces are
// kept). Returns 0 when either side is empty. The transposition count is half
// the number of out-of-order matched characters, rounded down.
double Jaro(std::string_view a, std::string_view b);

// Jaro over already-normalized code points (see NormalizeForComparison).
double JaroNormalized(std::u32string_view a, std::u32string_view b);

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

inline constexpr double kEarthRadiusKm = 6371.0;

// Haversine great-circle distance on a sphere of radius kEarthRadiusKm.
double GeodesicKm(LatLon a, LatLon b);

inline constexpr double kDefaultLocationKappaKm = 50.0;

// exp(-distance / kappa): 1 at zero distance, strictly decreasing.
double LocationSimilarity(double distance_km,
                          double kappa_km = kDefaultLocationKappaKm);

// 1 - hamming(a, b) / 64.
double PhotoSimilarity(uint64_t a, uint64_t b);

// Number of friends in `a` having a case-folded screen-name or real-name
// twin in `b`. Each friend on either side is paired at most once (maximum
// bipartite matching), which keeps the count symmetric and bounded by the
// shorter list.
int FriendsOverlap(std::span<const Friend> a, std::span<const Friend> b);

struct SimilarityConfig {
  double location_kappa_km = kDefaultLocationKappaKm;
};

// Profile with every comparison key normalized once, for hot loops.
struct PreparedFriends {
  // (key, friend index), sorted by key. Empty keys are dropped.
  std::vector<std::pair<std::u32string, int>> by_screen_name;
  std::vector<std::pair<std::u32string, int>> by_real_name;
  int count = 0;
};

struct PreparedProfile {
  std::optional<std::u32string> real_name;
  std::u32string screen_name;
  std::optional<LatLon> location;
  std::optional<uint64_t> photo;
  std::optional<PreparedFriends> friends;
};

PreparedProfile Prepare(const Profile& profile);
std::vector<PreparedProfile> Prepare(const Corpus& corpus);

int FriendsOverlap(const PreparedFriends& a, const PreparedFriends& b);

FeatureVector Featurize(const Profile& a1, const Profile& a2,
                        const SimilarityConfig& config = {});
FeatureVector Featurize(const PreparedProfile& a1, const PreparedProfile& a2,
                        const SimilarityConfig& config = {});

// Raw per-attribute score in the units of ThresholdConfig: Jaro for names,
// kilometres for location, photo similarity, common-friend count. nullopt
// when the attribute is unavailable on either side.
std::optional<double> AttributeScore(AttributeKind kind,
                                     const PreparedProfile& a1,
                                     const PreparedProfile& a2);

// True when a raw score is consistent under `th`: above the threshold for
// names and photo, below it for location, at least it for friends.
bool PassesThreshold(AttributeKind kind, double raw_score,
                     const ThresholdConfig& th);

// Featurizes pairs drawn from two corpora, preparing every profile once.
class Featurizer {
 public:
  Featurizer(const Corpus& sn1, const Corpus& sn2,
             SimilarityConfig config = {});

  FeatureVector operator()(size_t sn1_index, size_t sn2_index) const {
    return Featurize(prepared1_[sn1_index], prepared2_[sn2_index], config_);
  }
  // Throws kUnresolvedId for unknown ids.
  FeatureVector operator()(std::string_view id1, std::string_view id2) const;

  const Corpus& sn1() const { return *sn1_; }
  const Corpus& sn2() const { return *sn2_; }
  const PreparedProfile& prepared1(size_t i) const { return prepared1_[i]; }
  const PreparedProfile& prepared2(size_t i) const { return prepared2_[i]; }
  std::span<const PreparedProfile> all_prepared1() const { return prepared1_; }
  std::span<const PreparedProfile> all_prepared2() const { return prepared2_; }
  const SimilarityConfig& config() const { return config_; }

 private:
  const Corpus* sn1_;
  const Corpus* sn2_;
  SimilarityConfig config_;
  std::vector<PreparedProfile> prepared1_;
  std::vector<PreparedProfile> prepared2_;
};

}  // namespace acidmatch

#endif  // ACIDMATCH_SIMILARITY_H_
