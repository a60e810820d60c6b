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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>

#include "acidmatch/error.h"
#include "acidmatch/text.h"

namespace acidmatch {

namespace {

double JaroScore(size_t matches, size_t out_of_order, size_t n1, size_t n2) {
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(out_of_order / 2);
  return (m / static_cast<double>(n1) + m / static_cast<double>(n2) +
          (m - t) / m) /
         3.0;
}

// Same greedy matching as the scan below, for strings of at most 64
// characters: each s1 character takes the lowest unused equal position of
// s2 inside its window.
double JaroBitParallel(std::u32string_view s1, std::u32string_view s2,
                       size_t window) {
  const size_t n1 = s1.size();
  const size_t n2 = s2.size();
  thread_local uint64_t ascii[128] = {};
  char32_t other_chars[64];
  uint64_t other_masks[64];
  size_t others = 0;
  auto mask_of = [&](char32_t c) -> uint64_t {
    if (c < 128) return ascii[c];
    for (size_t k = 0; k < others; ++k) {
      if (other_chars[k] == c) return other_masks[k];
    }
    return 0;
  };
  for (size_t j = 0; j < n2; ++j) {
    const char32_t c = s2[j];
    if (c < 128) {
      ascii[c] |= uint64_t{1} << j;
      continue;
    }
    size_t k = 0;
    while (k < others && other_chars[k] != c) ++k;
    if (k == others) {
      other_chars[others] = c;
      other_masks[others++] = 0;
    }
    other_masks[k] |= uint64_t{1} << j;
  }

  uint64_t used = 0;
  uint64_t matched1 = 0;
  size_t matches = 0;
  for (size_t i = 0; i < n1; ++i) {
    const size_t lo = i > window ? i - window : 0;
    const size_t hi = std::min(n2, i + window + 1);
    if (lo >= hi) continue;
    const uint64_t span =
        (hi - lo == 64 ? ~uint64_t{0} : ((uint64_t{1} << (hi - lo)) - 1)) << lo;
    const uint64_t free = mask_of(s1[i]) & span & ~used;
    if (free == 0) continue;
    used |= free & (~free + 1);
    matched1 |= uint64_t{1} << i;
    ++matches;
  }
  for (size_t j = 0; j < n2; ++j) {
    if (s2[j] < 128) ascii[s2[j]] = 0;
  }
  if (matches == 0) return 0.0;

  size_t out_of_order = 0;
  uint64_t a = matched1;
  uint64_t b = used;
  while (a != 0) {
    const int i = std::countr_zero(a);
    const int j = std::countr_zero(b);
    if (s1[i] != s2[j]) ++out_of_order;
    a &= a - 1;
    b &= b - 1;
  }
  return JaroScore(matches, out_of_order, n1, n2);
}

double JaroOrdered(std::u32string_view s1, std::u32string_view s2) {
  const size_t n1 = s1.size();
  const size_t n2 = s2.size();
  if (n1 == 0 || n2 == 0) return 0.0;

  const size_t longest = std::max(n1, n2);
  const size_t window = longest / 2 > 0 ? longest / 2 - 1 : 0;
  if (n1 <= 64 && n2 <= 64) return JaroBitParallel(s1, s2, window);

  // Names are short; avoid heap traffic for the common case.
  constexpr size_t kStack = 128;
  bool stack1[kStack] = {};
  bool stack2[kStack] = {};
  bool* m1 = stack1;
  bool* m2 = stack2;
  std::unique_ptr<bool[]> h1, h2;
  if (n1 > kStack || n2 > kStack) {
    h1 = std::make_unique<bool[]>(n1);
    h2 = std::make_unique<bool[]>(n2);
    m1 = h1.get();
    m2 = h2.get();
    std::fill(m1, m1 + n1, false);
    std::fill(m2, m2 + n2, false);
  }

  size_t matches = 0;
  for (size_t i = 0; i < n1; ++i) {
    const size_t lo = i > window ? i - window : 0;
    const size_t hi = std::min(n2, i + window + 1);
    for (size_t j = lo; j < hi; ++j) {
      if (!m2[j] && s1[i] == s2[j]) {
        m1[i] = true;
        m2[j] = true;
        ++matches;
        break;
      }
    }
  }
  if (matches == 0) return 0.0;

  size_t out_of_order = 0;
  size_t k = 0;
  for (size_t i = 0; i < n1; ++i) {
    if (!m1[i]) continue;
    while (!m2[k]) ++k;
    if (s1[i] != s2[k]) ++out_of_order;
    ++k;
  }
  return JaroScore(matches, out_of_order, n1, n2);
}

// Kuhn's augmenting-path matching over a small bipartite graph.
int MaximumMatching(int left, int right,
                    const std::vector<std::vector<int>>& adjacency) {
  std::vector<int> owner(right, -1);
  std::vector<char> seen;
  int matched = 0;
  auto augment = [&](auto&& self, int u) -> bool {
    for (int v : adjacency[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      if (owner[v] < 0 || self(self, owner[v])) {
        owner[v] = u;
        return true;
      }
    }
    return false;
  };
  for (int u = 0; u < left; ++u) {
    seen.assign(right, 0);
    if (augment(augment, u)) ++matched;
  }
  return matched;
}

void CollectEdges(const std::vector<std::pair<std::u32string, int>>& a,
                  const std::vector<std::pair<std::u32string, int>>& b,
                  std::vector<std::pair<int, int>>& edges) {
  size_t i = 0;
  size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const int cmp = a[i].first.compare(b[j].first);
    if (cmp < 0) {
      ++i;
    } else if (cmp > 0) {
      ++j;
    } else {
      // Cross product of the equal-key runs.
      size_t i_end = i;
      while (i_end < a.size() && a[i_end].first == a[i].first) ++i_end;
      size_t j_end = j;
      while (j_end < b.size() && b[j_end].first == b[j].first) ++j_end;
      for (size_t x = i; x < i_end; ++x) {
        for (size_t y = j; y < j_end; ++y) {
          edges.emplace_back(a[x].second, b[y].second);
        }
      }
      i = i_end;
      j = j_end;
    }
  }
}

PreparedFriends PrepareFriends(std::span<const Friend> friends) {
  PreparedFriends out;
  out.count = static_cast<int>(friends.size());
  for (size_t i = 0; i < friends.size(); ++i) {
    std::u32string sn = NormalizeForComparison(friends[i].screen_name);
    if (!sn.empty()) out.by_screen_name.emplace_back(std::move(sn), i);
    if (friends[i].real_name) {
      std::u32string rn = NormalizeForComparison(*friends[i].real_name);
      if (!rn.empty()) out.by_real_name.emplace_back(std::move(rn), i);
    }
  }
  std::sort(out.by_screen_name.begin(), out.by_screen_name.end());
  std::sort(out.by_real_name.begin(), out.by_real_name.end());
  return out;
}

}  // namespace

double JaroNormalized(std::u32string_view a, std::u32string_view b) {
  // Greedy matching depends on argument order; a canonical order makes the
  // metric symmetric.
  if (b.size() < a.size() || (b.size() == a.size() && b < a)) {
    std::swap(a, b);
  }
  return JaroOrdered(a, b);
}

double Jaro(std::string_view a, std::string_view b) {
  return JaroNormalized(NormalizeForComparison(a), NormalizeForComparison(b));
}

double GeodesicKm(LatLon a, LatLon b) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = a.lat * kRad;
  const double phi2 = b.lat * kRad;
  const double dphi = (b.lat - a.lat) * kRad;
  const double dlambda = (b.lon - a.lon) * kRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double LocationSimilarity(double distance_km, double kappa_km) {
  if (!(distance_km >= 0.0)) {
    throw Error(ErrorCode::kDomain, "distance must be nonnegative");
  }
  return std::exp(-distance_km / kappa_km);
}

double PhotoSimilarity(uint64_t a, uint64_t b) {
  return 1.0 - static_cast<double>(std::popcount(a ^ b)) / 64.0;
}

int FriendsOverlap(const PreparedFriends& a, const PreparedFriends& b) {
  thread_local std::vector<std::pair<int, int>> edges;
  edges.clear();
  CollectEdges(a.by_screen_name, b.by_screen_name, edges);
  CollectEdges(a.by_real_name, b.by_real_name, edges);
  if (edges.empty()) return 0;
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  // Fast path: the edges already form a matching.
  thread_local std::vector<int> deg_a, deg_b;
  deg_a.assign(a.count, 0);
  deg_b.assign(b.count, 0);
  bool simple = true;
  for (auto [u, v] : edges) {
    if (++deg_a[u] > 1) simple = false;
    if (++deg_b[v] > 1) simple = false;
  }
  if (simple) return static_cast<int>(edges.size());

  std::vector<std::vector<int>> adjacency(a.count);
  for (auto [u, v] : edges) adjacency[u].push_back(v);
  return MaximumMatching(a.count, b.count, adjacency);
}

int FriendsOverlap(std::span<const Friend> a, std::span<const Friend> b) {
  return FriendsOverlap(PrepareFriends(a), PrepareFriends(b));
}

PreparedProfile Prepare(const Profile& profile) {
  PreparedProfile out;
  if (profile.real_name) {
    out.real_name = NormalizeForComparison(*profile.real_name);
  }
  out.screen_name = NormalizeForComparison(profile.screen_name);
  if (profile.location) {
    out.location = LatLon{profile.location->lat, profile.location->lon};
  }
  out.photo = profile.photo;
  if (profile.friends) out.friends = PrepareFriends(*profile.friends);
  return out;
}

std::vector<PreparedProfile> Prepare(const Corpus& corpus) {
  std::vector<PreparedProfile> out;
  out.reserve(corpus.size());
  for (const Profile& p : corpus) out.push_back(Prepare(p));
  return out;
}

std::optional<double> AttributeScore(AttributeKind kind,
                                     const PreparedProfile& a1,
                                     const PreparedProfile& a2) {
  switch (kind) {
    case AttributeKind::kRealName:
      if (!a1.real_name || !a2.real_name) return std::nullopt;
      return JaroNormalized(*a1.real_name, *a2.real_name);
    case AttributeKind::kScreenName:
      return JaroNormalized(a1.screen_name, a2.screen_name);
    case AttributeKind::kLocation:
      if (!a1.location || !a2.location) return std::nullopt;
      return GeodesicKm(*a1.location, *a2.location);
    case AttributeKind::kPhoto:
      if (!a1.photo || !a2.photo) return std::nullopt;
      return PhotoSimilarity(*a1.photo, *a2.photo);
    case AttributeKind::kFriends:
      if (!a1.friends || !a2.friends) return std::nullopt;
      return static_cast<double>(FriendsOverlap(*a1.friends, *a2.friends));
  }
  return std::nullopt;
}

bool PassesThreshold(AttributeKind kind, double raw_score,
                     const ThresholdConfig& th) {
  switch (kind) {
    case AttributeKind::kLocation:
      return raw_score < th.location_km;
    case AttributeKind::kFriends:
      return raw_score >= th.friends;
    default:
      return raw_score > th.Get(kind);
  }
}

FeatureVector Featurize(const PreparedProfile& a1, const PreparedProfile& a2,
                        const SimilarityConfig& config) {
  FeatureVector fv;
  for (AttributeKind kind : kAllAttributes) {
    std::optional<double> raw = AttributeScore(kind, a1, a2);
    if (raw && kind == AttributeKind::kLocation) {
      raw = LocationSimilarity(*raw, config.location_kappa_km);
    }
    fv[kind] = raw;
  }
  return fv;
}

FeatureVector Featurize(const Profile& a1, const Profile& a2,
                        const SimilarityConfig& config) {
  return Featurize(Prepare(a1), Prepare(a2), config);
}

Featurizer::Featurizer(const Corpus& sn1, const Corpus& sn2,
                       SimilarityConfig config)
    : sn1_(&sn1),
      sn2_(&sn2),
      config_(config),
      prepared1_(Prepare(sn1)),
      prepared2_(Prepare(sn2)) {}

FeatureVector Featurizer::operator()(std::string_view id1,
                                     std::string_view id2) const {
  auto i1 = sn1_->IndexOf(id1);
  auto i2 = sn2_->IndexOf(id2);
  if (!i1 || !i2) {
    throw Error(ErrorCode::kUnresolvedId,
                "unknown profile id in pair (" + std::string(id1) + ", " +
                    std::string(id2) + ")");
  }
  return (*this)(*i1, *i2);
}

}  // namespace acidmatch
