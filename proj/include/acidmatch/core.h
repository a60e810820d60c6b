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

// Domain types shared by every module: profiles, corpora, ground truth,
// consistency thresholds and feature vectors.

#ifndef ACIDMATCH_CORE_H_
#define ACIDMATCH_CORE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace acidmatch {

enum class AttributeKind : int {
  kRealName = 0,
  kScreenName = 1,
  kLocation = 2,
  kPhoto = 3,
  kFriends = 4,
};

inline constexpr size_t kNumAttributes = 5;

inline constexpr std::array<AttributeKind, kNumAttributes> kAllAttributes = {
    AttributeKind::kRealName, AttributeKind::kScreenName,
    AttributeKind::kLocation, AttributeKind::kPhoto, AttributeKind::kFriends};

constexpr size_t Slot(AttributeKind kind) { return static_cast<size_t>(kind); }

// "real_name", "screen_name", "location", "photo", "friends".
std::string_view AttributeName(AttributeKind kind);
std::optional<AttributeKind> ParseAttributeName(std::string_view name);

struct Location {
  std::string label;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const Location&) const = default;
};

struct Friend {
  std::optional<std::string> real_name;
  std::string screen_name;

  bool operator==(const Friend&) const = default;
};

// One account on one network.
struct Profile {
  std::string profile_id;
  std::string network_id;
  std::optional<std::string> real_name;
  std::string screen_name;
  std::optional<Location> location;
  std::optional<uint64_t> photo;
  // nullopt means the network exposes no friend data; an empty vector means
  // the account has no friends.
  std::optional<std::vector<Friend>> friends;
  // Ground-truth-only label set by the generator.
  std::optional<std::string> is_impersonator_of;

  bool operator==(const Profile&) const = default;

  bool HasAttribute(AttributeKind kind) const;
};

// An immutable, id-indexed set of profiles from one network.
class Corpus {
 public:
  Corpus() = default;

  // Validates unique ids and coordinate bounds. `impersonation_labeled`
  // records whether the corpus carries ground-truth impersonator labels
  // (a labeled corpus may still contain zero impersonators).
  explicit Corpus(std::vector<Profile> profiles,
                  bool impersonation_labeled = false);

  size_t size() const { return profiles_.size(); }
  bool empty() const { return profiles_.empty(); }
  const Profile& operator[](size_t i) const { return profiles_[i]; }
  std::span<const Profile> profiles() const { return profiles_; }
  auto begin() const { return profiles_.begin(); }
  auto end() const { return profiles_.end(); }

  std::optional<size_t> IndexOf(std::string_view profile_id) const;
  const Profile* Find(std::string_view profile_id) const;
  bool Contains(std::string_view profile_id) const {
    return IndexOf(profile_id).has_value();
  }

  bool impersonation_labeled() const { return impersonation_labeled_; }

  bool operator==(const Corpus& other) const {
    return profiles_ == other.profiles_ &&
           impersonation_labeled_ == other.impersonation_labeled_;
  }

 private:
  std::vector<Profile> profiles_;
  std::unordered_map<std::string, size_t> index_;
  bool impersonation_labeled_ = false;
};

// Optional offline geocoder: label -> coordinates.
class Gazetteer {
 public:
  Gazetteer() = default;
  // CSV with header `label,lat,lon`.
  static Gazetteer Load(const std::filesystem::path& path);
  static Gazetteer Parse(std::istream& in);

  void Add(std::string label, double lat, double lon);
  std::optional<std::pair<double, double>> Find(std::string_view label) const;
  size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::pair<double, double>> entries_;
};

// JSON-lines, one profile per line. Photo image paths (`photo_path`) are
// resolved relative to `base_dir` and hashed at load.
Corpus ParseProfiles(std::istream& in, const Gazetteer* gazetteer = nullptr,
                     const std::filesystem::path& base_dir = {});
Corpus LoadProfiles(const std::filesystem::path& path,
                    const Gazetteer* gazetteer = nullptr);
void WriteProfiles(const Corpus& corpus, std::ostream& out);
void WriteProfiles(const Corpus& corpus, const std::filesystem::path& path);

struct MatchPair {
  std::string id1;
  std::string id2;

  auto operator<=>(const MatchPair&) const = default;
};

// Labeled matching pairs between SN1 and SN2. Every other cross pair is
// implicitly non-matching.
class GroundTruth {
 public:
  GroundTruth() = default;
  explicit GroundTruth(std::vector<MatchPair> pairs);

  std::span<const MatchPair> pairs() const { return pairs_; }
  size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  bool IsMatch(std::string_view id1, std::string_view id2) const;
  // SN2 ids matched with `id1`, in insertion order.
  std::span<const std::string> MatchesOf(std::string_view id1) const;
  bool HasMatch(std::string_view id1) const {
    return !MatchesOf(id1).empty();
  }
  bool IsMatchedSn2(std::string_view id2) const {
    return sn2_ids_.contains(std::string(id2));
  }
  // True when each SN1 id appears in at most one pair.
  bool AtMostOneMatch() const;

  // Throws kUnresolvedId if any id is missing from its corpus.
  void Validate(const Corpus& sn1, const Corpus& sn2) const;

 private:
  std::vector<MatchPair> pairs_;
  std::unordered_map<std::string, std::vector<std::string>> by_id1_;
  std::unordered_set<std::string> sn2_ids_;
  std::unordered_set<std::string> keys_;
};

// CSV with header `id1,id2`.
GroundTruth ParseGroundTruth(std::istream& in, const Corpus& sn1,
                             const Corpus& sn2);
GroundTruth LoadGroundTruth(const std::filesystem::path& path,
                            const Corpus& sn1, const Corpus& sn2);
void WriteGroundTruth(const GroundTruth& gt, std::ostream& out);
void WriteGroundTruth(const GroundTruth& gt,
                      const std::filesystem::path& path);

// Per-attribute consistency thresholds. Names and photo are similarities in
// [0,1] (consistent when strictly above), location is a distance in km
// (consistent when strictly below) and friends is a minimum common-friend
// count (consistent when at least).
struct ThresholdConfig {
  double real_name = 0.66;
  double screen_name = 0.82;
  double location_km = 70.0;
  double photo = 0.60;
  double friends = 2.0;

  double Get(AttributeKind kind) const;
  void Set(AttributeKind kind, double value);
  // Throws kInvalidConfig on non-finite or out-of-domain values.
  void Validate() const;

  // JSON object keyed by attribute name; missing keys keep defaults.
  static ThresholdConfig FromJsonText(std::string_view text);
  static ThresholdConfig Load(const std::filesystem::path& path);
  std::string ToJsonText() const;

  bool operator==(const ThresholdConfig&) const = default;
};

// Per-attribute similarity scores; nullopt marks a missing value. The
// friends slot holds a raw common-friend count.
struct FeatureVector {
  std::array<std::optional<double>, kNumAttributes> slots;

  std::optional<double>& operator[](AttributeKind kind) {
    return slots[Slot(kind)];
  }
  const std::optional<double>& operator[](AttributeKind kind) const {
    return slots[Slot(kind)];
  }
  std::span<const std::optional<double>> view() const { return slots; }

  bool operator==(const FeatureVector&) const = default;
};

}  // namespace acidmatch

#endif  // ACIDMATCH_CORE_H_
