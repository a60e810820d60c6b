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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "acidmatch/error.h"
#include "acidmatch/parallel.h"
#include "csv.h"

namespace acidmatch {

namespace {

double Ratio(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void CheckUnit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::kDomain,
                std::string(what) + " must lie in [0,1], got " +
                    std::to_string(v));
  }
}

bool IsName(AttributeKind kind) {
  return kind == AttributeKind::kRealName ||
         kind == AttributeKind::kScreenName;
}

// The most permissive threshold among `thresholds` for `kind`.
double Loosest(AttributeKind kind, std::span<const double> thresholds) {
  if (kind == AttributeKind::kLocation) {
    return *std::max_element(thresholds.begin(), thresholds.end());
  }
  return *std::min_element(thresholds.begin(), thresholds.end());
}

}  // namespace

double DiscriminabilityResult::d_tilde() const {
  return Ratio(below_all, probes);
}

double DiscriminabilityResult::d() const {
  return Ratio(below_excluding_impersonators, probes);
}

std::optional<double> DiscriminabilityResult::d_conditional() const {
  if (probes == impersonated) return std::nullopt;
  return Ratio(unimpersonated_below, probes - impersonated);
}

std::optional<double> DiscriminabilityResult::non_impersonability() const {
  if (!labeled) return std::nullopt;
  if (impersonated == 0) return 1.0;
  return Ratio(impersonators_below, impersonated);
}

std::optional<double> DiscriminabilityResult::impersonation_rate() const {
  if (!labeled) return std::nullopt;
  return Ratio(impersonated, probes);
}

double SweepPoint::recall() const { return Ratio(true_positives, positives); }

double SweepPoint::precision() const {
  return Ratio(true_positives, true_positives + false_positives);
}

double SweepPoint::availability() const { return Ratio(available, positives); }

double SweepPoint::consistency() const {
  return Ratio(true_positives, available);
}

double SweepPoint::d_tilde() const { return Ratio(probes_below, probes); }

struct AcidEstimator::FriendIndex {
  std::unordered_map<std::u32string, std::vector<uint32_t>> by_screen_name;
  std::unordered_map<std::u32string, std::vector<uint32_t>> by_real_name;
  std::vector<uint32_t> with_friends;
};

AcidEstimator::AcidEstimator(const Corpus& sn1, const Corpus& sn2,
                             const GroundTruth& gt, const AcidOptions& options,
                             const SimilarityConfig& similarity)
    : gt_(&gt), options_(options), featurizer_(sn1, sn2, similarity) {
  gt.Validate(sn1, sn2);
  probes_ = GroundTruthProbes(gt, sn1);
  for (const MatchPair& p : gt.pairs()) {
    matches_[*sn1.IndexOf(p.id1)].push_back(*sn2.IndexOf(p.id2));
  }
  for (auto& [probe, list] : matches_) std::sort(list.begin(), list.end());
  for (size_t j = 0; j < sn2.size(); ++j) {
    if (!sn2[j].is_impersonator_of) continue;
    if (auto victim = sn1.IndexOf(*sn2[j].is_impersonator_of)) {
      impersonators_[*victim].push_back(j);
    }
  }

  names_ = std::make_unique<NameIndex>(sn2, featurizer_.all_prepared2());
  friends_ = std::make_unique<FriendIndex>();
  for (size_t j = 0; j < sn2.size(); ++j) {
    const PreparedProfile& p = featurizer_.prepared2(j);
    if (p.location) by_latitude_.emplace_back(p.location->lat, j);
    if (p.photo) with_photo_.push_back(j);
    if (p.friends) {
      const uint32_t doc = static_cast<uint32_t>(j);
      friends_->with_friends.push_back(doc);
      auto add = [doc](auto& map, const auto& keyed) {
        for (const auto& [key, idx] : keyed) {
          auto& list = map[key];
          if (list.empty() || list.back() != doc) list.push_back(doc);
        }
      };
      add(friends_->by_screen_name, p.friends->by_screen_name);
      add(friends_->by_real_name, p.friends->by_real_name);
    }
  }
  std::sort(by_latitude_.begin(), by_latitude_.end());
}

AcidEstimator::~AcidEstimator() = default;

std::span<const size_t> AcidEstimator::MatchIndices(size_t probe) const {
  auto it = matches_.find(probe);
  if (it == matches_.end()) return {};
  return it->second;
}

double AcidEstimator::Availability(AttributeKind kind) const {
  if (gt_->empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "ground truth is empty");
  }
  size_t available = 0;
  for (const MatchPair& p : gt_->pairs()) {
    const Profile& a1 = *featurizer_.sn1().Find(p.id1);
    const Profile& a2 = *featurizer_.sn2().Find(p.id2);
    available += a1.HasAttribute(kind) && a2.HasAttribute(kind);
  }
  return Ratio(available, gt_->size());
}

double AcidEstimator::Consistency(AttributeKind kind,
                                  const ThresholdConfig& th) const {
  if (gt_->empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "ground truth is empty");
  }
  size_t available = 0;
  size_t consistent = 0;
  for (const MatchPair& p : gt_->pairs()) {
    const auto raw = AttributeScore(
        kind, featurizer_.prepared1(*featurizer_.sn1().IndexOf(p.id1)),
        featurizer_.prepared2(*featurizer_.sn2().IndexOf(p.id2)));
    if (!raw) continue;
    ++available;
    consistent += PassesThreshold(kind, *raw, th);
  }
  if (available == 0) {
    throw Error(ErrorCode::kNoAvailablePairs,
                "no matching pair has " + std::string(AttributeName(kind)) +
                    " on both sides");
  }
  return Ratio(consistent, available);
}

void AcidEstimator::NonMatchCandidates(
    size_t probe, AttributeKind kind, double th,
    std::vector<std::pair<size_t, double>>& out) const {
  const size_t first = out.size();
  if (IsName(kind) && !options_.name_blocking) {
    CollectExhaustive(probe, kind, out);
  } else {
    switch (kind) {
      case AttributeKind::kRealName:
      case AttributeKind::kScreenName:
        CollectNames(probe, kind, th, out);
        break;
      case AttributeKind::kLocation:
        CollectLocation(probe, th, out);
        break;
      case AttributeKind::kPhoto:
        CollectPhoto(probe, th, out);
        break;
      case AttributeKind::kFriends:
        CollectFriends(probe, th, out);
        break;
    }
  }
  std::span<const size_t> matches = MatchIndices(probe);
  if (matches.empty()) return;
  auto is_match = [&](const std::pair<size_t, double>& e) {
    return std::binary_search(matches.begin(), matches.end(), e.first);
  };
  out.erase(std::remove_if(out.begin() + first, out.end(), is_match),
            out.end());
}

void AcidEstimator::CollectExhaustive(
    size_t probe, AttributeKind kind,
    std::vector<std::pair<size_t, double>>& out) const {
  const PreparedProfile& a1 = featurizer_.prepared1(probe);
  for (size_t j = 0; j < featurizer_.sn2().size(); ++j) {
    if (auto raw = AttributeScore(kind, a1, featurizer_.prepared2(j))) {
      out.emplace_back(j, *raw);
    }
  }
}

void AcidEstimator::CollectNames(
    size_t probe, AttributeKind kind, double th,
    std::vector<std::pair<size_t, double>>& out) const {
  const PreparedProfile& a1 = featurizer_.prepared1(probe);
  const std::u32string* query = nullptr;
  if (kind == AttributeKind::kRealName) {
    if (!a1.real_name) return;
    query = &*a1.real_name;
  } else {
    query = &a1.screen_name;
  }
  thread_local std::vector<std::pair<size_t, double>> hits;
  names_->Search(kind == AttributeKind::kRealName ? NameField::kRealName
                                                  : NameField::kScreenName,
                 *query, th, hits);
  for (auto [j, s] : hits) {
    // The index scores absent real names as 0 when th <= 0; those pairs are
    // MISSING, not similar.
    if (kind == AttributeKind::kRealName && !featurizer_.prepared2(j).real_name) {
      continue;
    }
    out.emplace_back(j, s);
  }
}

void AcidEstimator::CollectLocation(
    size_t probe, double th,
    std::vector<std::pair<size_t, double>>& out) const {
  const PreparedProfile& a1 = featurizer_.prepared1(probe);
  if (!a1.location) return;
  // Great-circle distance is at least R * |dlat|.
  const double window =
      th / kEarthRadiusKm * 180.0 / std::numbers::pi + 1e-9;
  auto lo = std::lower_bound(by_latitude_.begin(), by_latitude_.end(),
                             std::make_pair(a1.location->lat - window, size_t{0}));
  for (auto it = lo; it != by_latitude_.end() &&
                     it->first <= a1.location->lat + window;
       ++it) {
    const double d =
        GeodesicKm(*a1.location, *featurizer_.prepared2(it->second).location);
    out.emplace_back(it->second, d);
  }
}

void AcidEstimator::CollectPhoto(
    size_t probe, double th,
    std::vector<std::pair<size_t, double>>& out) const {
  const PreparedProfile& a1 = featurizer_.prepared1(probe);
  if (!a1.photo) return;
  for (size_t j : with_photo_) {
    const double s = PhotoSimilarity(*a1.photo, *featurizer_.prepared2(j).photo);
    if (s >= th) out.emplace_back(j, s);
  }
}

void AcidEstimator::CollectFriends(
    size_t probe, double th,
    std::vector<std::pair<size_t, double>>& out) const {
  const PreparedProfile& a1 = featurizer_.prepared1(probe);
  if (!a1.friends) return;
  if (th <= 0.0) {
    for (uint32_t j : friends_->with_friends) {
      out.emplace_back(j, FriendsOverlap(*a1.friends,
                                         *featurizer_.prepared2(j).friends));
    }
    return;
  }
  // hits[j] counts probe friends with at least one key in j's list, an upper
  // bound on the matching size.
  thread_local std::vector<uint32_t> hits;
  thread_local std::vector<int> last_friend;
  thread_local std::vector<uint32_t> touched;
  const size_t n2 = featurizer_.sn2().size();
  if (hits.size() < n2) {
    hits.resize(n2, 0);
    last_friend.resize(n2, -1);
  }
  touched.clear();
  // Group each friend's keys so a friend reaching the same profile through
  // both fields counts once.
  std::vector<std::vector<const std::u32string*>> sn_keys(a1.friends->count);
  std::vector<std::vector<const std::u32string*>> rn_keys(a1.friends->count);
  for (const auto& [key, idx] : a1.friends->by_screen_name) {
    sn_keys[idx].push_back(&key);
  }
  for (const auto& [key, idx] : a1.friends->by_real_name) {
    rn_keys[idx].push_back(&key);
  }
  for (int f = 0; f < a1.friends->count; ++f) {
    auto visit = [&](const auto& map, const std::u32string* key) {
      auto it = map.find(*key);
      if (it == map.end()) return;
      for (uint32_t j : it->second) {
        if (last_friend[j] == f) continue;
        if (last_friend[j] < 0) touched.push_back(j);
        last_friend[j] = f;
        ++hits[j];
      }
    };
    for (const std::u32string* key : sn_keys[f]) {
      visit(friends_->by_screen_name, key);
    }
    for (const std::u32string* key : rn_keys[f]) {
      visit(friends_->by_real_name, key);
    }
  }
  for (uint32_t j : touched) {
    if (static_cast<double>(hits[j]) >= th) {
      const double overlap =
          FriendsOverlap(*a1.friends, *featurizer_.prepared2(j).friends);
      out.emplace_back(j, overlap);
    }
    hits[j] = 0;
    last_friend[j] = -1;
  }
}

DiscriminabilityResult AcidEstimator::Discriminability(
    std::span<const size_t> probes, AttributeKind kind,
    const ThresholdConfig& th) const {
  if (featurizer_.sn2().empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "SN2 corpus is empty");
  }
  const double t = th.Get(kind);
  struct Flags {
    bool other = false;
    bool impersonator = false;
    bool impersonated = false;
  };
  std::vector<Flags> flags(probes.size());
  ParallelFor(probes.size(), options_.threads, [&](size_t k) {
    const size_t probe = probes[k];
    thread_local std::vector<std::pair<size_t, double>> found;
    found.clear();
    NonMatchCandidates(probe, kind, t, found);
    auto imp = impersonators_.find(probe);
    Flags& f = flags[k];
    f.impersonated = imp != impersonators_.end();
    for (auto [j, raw] : found) {
      if (!PassesThreshold(kind, raw, th)) continue;
      const bool is_imp =
          f.impersonated && std::find(imp->second.begin(), imp->second.end(),
                                      j) != imp->second.end();
      (is_imp ? f.impersonator : f.other) = true;
    }
  });
  DiscriminabilityResult r;
  r.labeled = featurizer_.sn2().impersonation_labeled();
  r.probes = probes.size();
  for (const Flags& f : flags) {
    r.impersonated += f.impersonated;
    r.below_all += !f.other && !f.impersonator;
    r.below_excluding_impersonators += !f.other;
    r.unimpersonated_below += !f.impersonated && !f.other;
    r.impersonators_below += f.impersonated && !f.impersonator;
  }
  return r;
}

std::vector<SweepPoint> AcidEstimator::Sweep(
    AttributeKind kind, std::span<const double> thresholds) const {
  if (thresholds.empty()) return {};
  if (gt_->empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "ground truth is empty");
  }
  const double loosest = Loosest(kind, thresholds);
  struct ProbeScores {
    std::vector<std::optional<double>> matches;
    std::vector<double> others;
  };
  std::vector<ProbeScores> scores(probes_.size());
  ParallelFor(probes_.size(), options_.threads, [&](size_t k) {
    const size_t probe = probes_[k];
    thread_local std::vector<std::pair<size_t, double>> found;
    found.clear();
    NonMatchCandidates(probe, kind, loosest, found);
    ProbeScores& s = scores[k];
    s.others.reserve(found.size());
    for (auto [j, raw] : found) s.others.push_back(raw);
    for (size_t j : MatchIndices(probe)) {
      s.matches.push_back(AttributeScore(kind, featurizer_.prepared1(probe),
                                         featurizer_.prepared2(j)));
    }
  });

  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    ThresholdConfig th;
    th.Set(kind, t);
    SweepPoint pt;
    pt.threshold = t;
    pt.probes = probes_.size();
    for (const ProbeScores& s : scores) {
      for (const auto& raw : s.matches) {
        ++pt.positives;
        if (!raw) continue;
        ++pt.available;
        pt.true_positives += PassesThreshold(kind, *raw, th);
      }
      size_t fp = 0;
      for (double raw : s.others) fp += PassesThreshold(kind, raw, th);
      pt.false_positives += fp;
      pt.probes_below += fp == 0;
    }
    out.push_back(pt);
  }
  return out;
}

double EstimateAvailability(const GroundTruth& gt, const Corpus& sn1,
                            const Corpus& sn2, AttributeKind kind) {
  if (gt.empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "ground truth is empty");
  }
  return AcidEstimator(sn1, sn2, gt).Availability(kind);
}

double EstimateConsistency(const GroundTruth& gt, const Corpus& sn1,
                           const Corpus& sn2, AttributeKind kind,
                           const ThresholdConfig& th) {
  if (gt.empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "ground truth is empty");
  }
  return AcidEstimator(sn1, sn2, gt).Consistency(kind, th);
}

namespace {

std::vector<size_t> ResolveProbes(std::span<const std::string> probes,
                                  const Corpus& sn1) {
  std::vector<size_t> out;
  out.reserve(probes.size());
  for (const std::string& id : probes) {
    auto i = sn1.IndexOf(id);
    if (!i) {
      throw Error(ErrorCode::kUnresolvedId,
                  "probe '" + id + "' not in SN1 corpus");
    }
    out.push_back(*i);
  }
  return out;
}

}  // namespace

double EstimateDiscriminability(std::span<const std::string> probes,
                                const Corpus& sn1, const Corpus& sn2,
                                const GroundTruth& gt, AttributeKind kind,
                                const ThresholdConfig& th) {
  if (sn2.empty()) throw Error(ErrorCode::kEmptyCorpus, "SN2 corpus is empty");
  AcidEstimator est(sn1, sn2, gt);
  return est.Discriminability(ResolveProbes(probes, sn1), kind, th).d_tilde();
}

NonImpersonability EstimateNonImpersonability(
    std::span<const std::string> probes, const Corpus& sn1, const Corpus& sn2,
    const GroundTruth& gt, AttributeKind kind, const ThresholdConfig& th) {
  if (!sn2.impersonation_labeled()) {
    throw Error(ErrorCode::kNoImpersonatorLabels,
                "SN2 corpus carries no impersonator labels");
  }
  if (sn2.empty()) throw Error(ErrorCode::kEmptyCorpus, "SN2 corpus is empty");
  AcidEstimator est(sn1, sn2, gt);
  DiscriminabilityResult r =
      est.Discriminability(ResolveProbes(probes, sn1), kind, th);
  return {*r.non_impersonability(), *r.impersonation_rate()};
}

double TheoremRecall(double availability, double consistency) {
  CheckUnit(availability, "availability");
  CheckUnit(consistency, "consistency");
  return consistency * availability;
}

double PrecisionUpperBound(double recall, double d_tilde) {
  CheckUnit(recall, "recall");
  CheckUnit(d_tilde, "effective discriminability");
  if (recall == 0.0) return 0.0;
  return recall / (recall + 1.0 - d_tilde);
}

double EffectiveDiscriminability(double d, double non_impersonability,
                                 double impersonation_rate) {
  CheckUnit(d, "discriminability");
  CheckUnit(non_impersonability, "non-impersonability");
  CheckUnit(impersonation_rate, "impersonation rate");
  return d * ((1.0 - impersonation_rate) +
              non_impersonability * impersonation_rate);
}

double DeclareScore(AttributeKind kind, std::optional<double> raw) {
  if (!raw) return -std::numeric_limits<double>::infinity();
  return kind == AttributeKind::kLocation ? -*raw : *raw;
}

double DeclareThreshold(AttributeKind kind, const ThresholdConfig& th) {
  const double t = th.Get(kind);
  switch (kind) {
    case AttributeKind::kLocation:
      return -t;
    case AttributeKind::kFriends:
      // x > prev(t) is x >= t for doubles.
      return std::nextafter(t, -std::numeric_limits<double>::infinity());
    default:
      return t;
  }
}

AcidReport ComputeAcidReport(const AcidEstimator& estimator,
                             const ThresholdConfig& th) {
  th.Validate();
  const Featurizer& f = estimator.featurizer();
  AcidReport report;
  report.thresholds = th;
  report.sn1_size = f.sn1().size();
  report.sn2_size = f.sn2().size();
  report.ground_truth_size = estimator.ground_truth().size();
  report.probes = estimator.probes().size();
  for (AttributeKind kind : kAllAttributes) {
    AttributeAcid& row = report.attributes[Slot(kind)];
    row.kind = kind;
    row.threshold = th.Get(kind);
    row.availability = estimator.Availability(kind);
    try {
      row.consistency = estimator.Consistency(kind, th);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoAvailablePairs) throw;
    }
    DiscriminabilityResult d =
        estimator.Discriminability(estimator.probes(), kind, th);
    row.d_tilde = d.d_tilde();
    row.non_impersonability = d.non_impersonability();
    if (d.labeled) row.d = d.d();
    report.impersonation_rate = d.impersonation_rate();
  }
  return report;
}

AcidReport ComputeAcidReport(const GroundTruth& gt, const Corpus& sn1,
                             const Corpus& sn2, const ThresholdConfig& th,
                             const AcidOptions& options) {
  if (gt.empty()) {
    throw Error(ErrorCode::kEmptyGroundTruth, "ground truth is empty");
  }
  if (sn2.empty()) throw Error(ErrorCode::kEmptyCorpus, "SN2 corpus is empty");
  AcidEstimator est(sn1, sn2, gt, options);
  return ComputeAcidReport(est, th);
}

namespace {

std::string Num(std::optional<double> v) {
  if (!v) return "UNKNOWN";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", *v);
  return buf;
}

}  // namespace

void WriteAcidReportCsv(const AcidReport& report, std::ostream& out) {
  out << "attribute,A,C,nI,D_tilde,th,p_I\n";
  for (const AttributeAcid& row : report.attributes) {
    out << AttributeName(row.kind) << ',' << Num(row.availability) << ','
        << Num(row.consistency) << ',' << Num(row.non_impersonability) << ','
        << Num(row.d_tilde) << ',' << Num(row.threshold) << ','
        << Num(report.impersonation_rate) << '\n';
  }
}

void WriteAcidReportCsv(const AcidReport& report,
                        const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  WriteAcidReportCsv(report, out);
}

std::string FormatAcidTable(const AcidReport& report) {
  auto pct = [](std::optional<double> v) -> std::string {
    if (!v) return "UNKNOWN";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * *v);
    return buf;
  };
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line),
                "SN1 %zu profiles, SN2 %zu profiles, %zu matching pairs, "
                "%zu probes, p_I %s\n",
                report.sn1_size, report.sn2_size, report.ground_truth_size,
                report.probes, pct(report.impersonation_rate).c_str());
  out << line;
  std::snprintf(line, sizeof(line), "%-12s %10s %8s %8s %8s %8s %8s\n",
                "attribute", "th", "A", "C", "nI", "D_tilde", "D");
  out << line;
  for (const AttributeAcid& row : report.attributes) {
    std::snprintf(line, sizeof(line), "%-12s %10g %8s %8s %8s %8s %8s\n",
                  std::string(AttributeName(row.kind)).c_str(), row.threshold,
                  pct(row.availability).c_str(), pct(row.consistency).c_str(),
                  pct(row.non_impersonability).c_str(),
                  pct(row.d_tilde).c_str(), pct(row.d).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace acidmatch
