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

#include <algorithm>
#include <unordered_set>

#include "acidmatch/error.h"
#include "acidmatch/parallel.h"
#include "acidmatch/random.h"
#include "csv.h"

namespace acidmatch {

namespace {

std::string PairKey(std::string_view id1, std::string_view id2) {
  std::string key(id1);
  key.push_back('\x1f');
  key.append(id2);
  return key;
}

std::vector<size_t> IndicesWhere(const PairDataset& ds, bool match) {
  std::vector<size_t> out;
  for (size_t i = 0; i < ds.pairs.size(); ++i) {
    if (ds.pairs[i].match == match) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kRandomSampled: return "random_sampled";
    case Provenance::kEmulatedLarge: return "emulated_large";
    case Provenance::kEnrichedTraining: return "enriched_training";
  }
  return "";
}

std::optional<Provenance> ParseProvenance(std::string_view name) {
  for (Provenance p : {Provenance::kRandomSampled, Provenance::kEmulatedLarge,
                       Provenance::kEnrichedTraining}) {
    if (ProvenanceName(p) == name) return p;
  }
  return std::nullopt;
}

size_t PairDataset::CountPositives() const {
  return static_cast<size_t>(
      std::count_if(pairs.begin(), pairs.end(),
                    [](const LabeledPair& p) { return p.match; }));
}

PairDataset ParsePairDataset(std::istream& in) {
  csv::ExpectHeader(in, "id1,id2,label,provenance", "pair dataset");
  PairDataset ds;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 1;
  while (csv::GetLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "pair dataset line " + std::to_string(line_no);
    auto fields = csv::SplitLine(line);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kParse, where + ": expected 4 fields");
    }
    LabeledPair p;
    p.id1 = std::move(fields[0]);
    p.id2 = std::move(fields[1]);
    if (fields[2] == "match") {
      p.match = true;
    } else if (fields[2] != "non-match") {
      throw Error(ErrorCode::kParse, where + ": bad label '" + fields[2] + "'");
    }
    auto prov = ParseProvenance(fields[3]);
    if (!prov) {
      throw Error(ErrorCode::kParse,
                  where + ": bad provenance '" + fields[3] + "'");
    }
    p.provenance = *prov;
    if (!seen.insert(PairKey(p.id1, p.id2)).second) {
      throw Error(ErrorCode::kDuplicatePair, where + ": duplicate pair (" +
                                                 p.id1 + ", " + p.id2 + ")");
    }
    ds.pairs.push_back(std::move(p));
  }
  return ds;
}

PairDataset LoadPairDataset(const std::filesystem::path& path) {
  auto in = csv::OpenInput(path);
  return ParsePairDataset(in);
}

void WritePairDataset(const PairDataset& ds, std::ostream& out) {
  out << "id1,id2,label,provenance\n";
  for (const LabeledPair& p : ds.pairs) {
    out << csv::Escape(p.id1) << ',' << csv::Escape(p.id2) << ','
        << (p.match ? "match" : "non-match") << ','
        << ProvenanceName(p.provenance) << '\n';
  }
}

void WritePairDataset(const PairDataset& ds,
                      const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  WritePairDataset(ds, out);
}

void ValidatePairDataset(const PairDataset& ds, const GroundTruth& gt) {
  std::unordered_set<std::string> seen;
  for (const LabeledPair& p : ds.pairs) {
    if (!seen.insert(PairKey(p.id1, p.id2)).second) {
      throw Error(ErrorCode::kDuplicatePair,
                  "duplicate pair (" + p.id1 + ", " + p.id2 + ")");
    }
    if (gt.IsMatch(p.id1, p.id2) != p.match) {
      throw Error(ErrorCode::kInvalidConfig,
                  "label of (" + p.id1 + ", " + p.id2 +
                      ") disagrees with ground truth");
    }
  }
}

std::pair<GroundTruth, GroundTruth> SplitGroundTruth(const GroundTruth& gt,
                                                     double first_fraction,
                                                     uint64_t seed) {
  if (!(first_fraction >= 0.0 && first_fraction <= 1.0)) {
    throw Error(ErrorCode::kDomain, "split fraction must be in [0,1]");
  }
  std::vector<std::string> ids;
  std::unordered_set<std::string> seen;
  for (const MatchPair& p : gt.pairs()) {
    if (seen.insert(p.id1).second) ids.push_back(p.id1);
  }
  Rng rng(seed, "split-ground-truth");
  rng.Shuffle(ids);
  const size_t cut = static_cast<size_t>(first_fraction * ids.size());
  std::unordered_set<std::string> first(ids.begin(), ids.begin() + cut);
  std::vector<MatchPair> a, b;
  for (const MatchPair& p : gt.pairs()) {
    (first.contains(p.id1) ? a : b).push_back(p);
  }
  return {GroundTruth(std::move(a)), GroundTruth(std::move(b))};
}

PairDataset BuildRandomSampled(const GroundTruth& gt, size_t n_pos,
                               uint64_t seed) {
  if (n_pos > gt.size()) {
    throw Error(ErrorCode::kInsufficientData,
                "requested " + std::to_string(n_pos) +
                    " positives but ground truth has " +
                    std::to_string(gt.size()) + " pairs");
  }
  Rng rng(seed, "random-sampled");
  std::vector<size_t> picked = rng.SampleWithoutReplacement(gt.size(), n_pos);
  PairDataset ds;
  ds.pairs.reserve(n_pos * n_pos);
  std::unordered_set<std::string> seen;
  const bool may_repeat = !gt.AtMostOneMatch();
  for (size_t i : picked) {
    const std::string& id1 = gt.pairs()[i].id1;
    for (size_t j : picked) {
      const std::string& id2 = gt.pairs()[j].id2;
      if (may_repeat && !seen.insert(PairKey(id1, id2)).second) continue;
      ds.pairs.push_back(LabeledPair{id1, id2, i == j || gt.IsMatch(id1, id2),
                                     Provenance::kRandomSampled});
    }
  }
  return ds;
}

NameIndex::NameIndex(const Corpus& corpus,
                     std::span<const PreparedProfile> prepared)
    : corpus_(&corpus), prepared_(prepared) {
  if (prepared.size() != corpus.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                "prepared profiles do not align with the corpus");
  }
  std::unordered_map<std::u32string, uint32_t> real_ids, screen_ids;
  for (size_t i = 0; i < prepared.size(); ++i) {
    const uint32_t owner = static_cast<uint32_t>(i);
    if (prepared[i].real_name && !prepared[i].real_name->empty()) {
      Add(real_names_, real_ids, *prepared[i].real_name, owner);
    }
    if (!prepared[i].screen_name.empty()) {
      Add(screen_names_, screen_ids, prepared[i].screen_name, owner);
    }
  }
}

void NameIndex::Add(FieldIndex& index,
                    std::unordered_map<std::u32string, uint32_t>& ids,
                    const std::u32string& key, uint32_t owner) {
  auto [it, fresh] = ids.emplace(key, static_cast<uint32_t>(index.keys.size()));
  if (fresh) {
    index.keys.push_back(key);
    index.owners.emplace_back();
    std::u32string sorted = key;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size();) {
      size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      index.postings[sorted[i]].emplace_back(it->second,
                                             static_cast<uint32_t>(j - i));
      i = j;
    }
  }
  index.owners[it->second].push_back(owner);
}

// Adds, for every key sharing a character with `query`, the size of the
// common character multiset to acc[key]; touched keys are appended.
void NameIndex::CountCommon(const FieldIndex& index, std::u32string_view query,
                            std::vector<uint32_t>& acc,
                            std::vector<uint32_t>& touched) const {
  if (acc.size() < index.keys.size()) acc.resize(index.keys.size(), 0);
  std::u32string sorted(query);
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const uint32_t qc = static_cast<uint32_t>(j - i);
    auto it = index.postings.find(sorted[i]);
    if (it != index.postings.end()) {
      for (auto [key, count] : it->second) {
        if (acc[key] == 0) touched.push_back(key);
        acc[key] += std::min(qc, count);
      }
    }
    i = j;
  }
}

namespace {

// Jaro cannot exceed this with `m` characters in common and no
// transpositions.
double JaroUpperBound(double m, double q, double n) {
  return (m / q + m / n + 1.0) / 3.0;
}

}  // namespace

void NameIndex::SearchField(const FieldIndex& index,
                            std::u32string_view query, double min_sim,
                            std::vector<std::pair<size_t, double>>& out) const {
  const size_t first = out.size();
  if (min_sim <= 0.0) {
    // Every name qualifies, including those sharing nothing with the query.
    for (size_t k = 0; k < index.keys.size(); ++k) {
      const double s = JaroNormalized(query, index.keys[k]);
      for (uint32_t owner : index.owners[k]) out.emplace_back(owner, s);
    }
  } else if (!query.empty()) {
    thread_local std::vector<uint32_t> acc;
    thread_local std::vector<uint32_t> touched;
    touched.clear();
    CountCommon(index, query, acc, touched);
    const double q = static_cast<double>(query.size());
    for (uint32_t key : touched) {
      const double n = static_cast<double>(index.keys[key].size());
      // Small slack keeps the filter conservative under rounding.
      if (JaroUpperBound(acc[key], q, n) < min_sim - 1e-12) continue;
      const double s = JaroNormalized(query, index.keys[key]);
      if (s < min_sim) continue;
      for (uint32_t owner : index.owners[key]) out.emplace_back(owner, s);
    }
    for (uint32_t key : touched) acc[key] = 0;
  }
  std::sort(out.begin() + first, out.end());
}

void NameIndex::Search(NameField field, std::u32string_view query,
                       double min_sim,
                       std::vector<std::pair<size_t, double>>& out) const {
  out.clear();
  SearchField(field == NameField::kRealName ? real_names_ : screen_names_,
              query, min_sim, out);
  if (min_sim <= 0.0) {
    // Profiles lacking the field have similarity 0 and still qualify.
    std::vector<char> present(prepared_.size(), 0);
    for (auto [i, s] : out) present[i] = 1;
    for (size_t i = 0; i < prepared_.size(); ++i) {
      if (!present[i]) out.emplace_back(i, 0.0);
    }
    std::sort(out.begin(), out.end());
  }
}

void NameIndex::Best(const PreparedProfile& probe, double min_sim, size_t cap,
                     std::vector<Candidate>& out) const {
  out.clear();
  if (cap == 0) return;
  // Exact Jaro is evaluated in decreasing order of the character-count
  // bound. Once `cap` profiles score above every bound still pending, no
  // remaining key can enter the result or improve a profile inside it.
  constexpr int kBuckets = 1024;
  const double width = (1.0 - min_sim) / kBuckets;
  auto bucket_of = [&](double v) {
    const int b = static_cast<int>((v - min_sim) / width);
    return std::clamp(b, 0, kBuckets - 1);
  };
  struct Pending {
    uint32_t key;
    uint8_t field;
  };
  thread_local std::vector<std::vector<Pending>> pending(kBuckets);
  thread_local std::vector<uint32_t> acc, touched;
  thread_local std::vector<double> best;
  thread_local std::vector<uint32_t> found;
  thread_local std::vector<uint32_t> found_per_bucket(kBuckets);
  for (auto& p : pending) p.clear();
  if (best.size() < corpus_->size()) best.resize(corpus_->size(), -1.0);
  found.clear();
  std::fill(found_per_bucket.begin(), found_per_bucket.end(), 0);

  const FieldIndex* fields[2] = {&real_names_, &screen_names_};
  const std::u32string_view queries[2] = {
      probe.real_name ? std::u32string_view(*probe.real_name)
                      : std::u32string_view(),
      probe.screen_name};
  int top = -1;
  for (int f = 0; f < 2; ++f) {
    if (queries[f].empty()) continue;
    touched.clear();
    CountCommon(*fields[f], queries[f], acc, touched);
    const double q = static_cast<double>(queries[f].size());
    for (uint32_t key : touched) {
      const double n = static_cast<double>(fields[f]->keys[key].size());
      const double ub = JaroUpperBound(acc[key], q, n) + 1e-12;
      acc[key] = 0;
      if (ub < min_sim) continue;
      const int b = bucket_of(ub);
      pending[b].push_back({key, static_cast<uint8_t>(f)});
      top = std::max(top, b);
    }
  }

  // found_per_bucket counts profiles by the bucket of their best score.
  size_t above = 0;  // profiles whose best lies in buckets > b + 1
  for (int b = top; b >= 0; --b) {
    if (b + 2 < kBuckets) above += found_per_bucket[b + 2];
    if (above >= cap) break;
    for (const Pending& p : pending[b]) {
      const FieldIndex& index = *fields[p.field];
      const double s = JaroNormalized(queries[p.field], index.keys[p.key]);
      if (s < min_sim) continue;
      const int sb = bucket_of(s);
      for (uint32_t owner : index.owners[p.key]) {
        double& cur = best[owner];
        if (cur < 0.0) {
          found.push_back(owner);
        } else if (s > cur) {
          const int ob = bucket_of(cur);
          --found_per_bucket[ob];
          if (ob > b + 1) --above;
        } else {
          continue;
        }
        cur = s;
        ++found_per_bucket[sb];
        if (sb > b + 1) ++above;
      }
    }
  }

  out.reserve(found.size());
  for (uint32_t owner : found) {
    out.push_back({owner, best[owner]});
    best[owner] = -1.0;
  }
  const Corpus& sn2 = *corpus_;
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return sn2[a.index].profile_id < sn2[b.index].profile_id;
  };
  if (out.size() > cap) {
    std::partial_sort(out.begin(), out.begin() + cap, out.end(), better);
    out.resize(cap);
  } else {
    std::sort(out.begin(), out.end(), better);
  }
}

CandidateSet BuildCandidateSet(size_t probe_index, const PreparedProfile& probe,
                               const NameIndex& index, double min_sim,
                               size_t cap) {
  if (min_sim > 0.0) {
    CandidateSet out;
    out.probe = probe_index;
    index.Best(probe, min_sim, cap, out.candidates);
    return out;
  }
  thread_local std::vector<std::pair<size_t, double>> by_real, by_screen;
  by_real.clear();
  if (probe.real_name) {
    index.Search(NameField::kRealName, *probe.real_name, min_sim, by_real);
  }
  index.Search(NameField::kScreenName, probe.screen_name, min_sim, by_screen);

  CandidateSet out;
  out.probe = probe_index;
  // Both lists are sorted by corpus index; merge keeping the larger score.
  size_t i = 0, j = 0;
  while (i < by_real.size() || j < by_screen.size()) {
    if (j == by_screen.size() ||
        (i < by_real.size() && by_real[i].first < by_screen[j].first)) {
      out.candidates.push_back({by_real[i].first, by_real[i].second});
      ++i;
    } else if (i == by_real.size() || by_screen[j].first < by_real[i].first) {
      out.candidates.push_back({by_screen[j].first, by_screen[j].second});
      ++j;
    } else {
      out.candidates.push_back(
          {by_real[i].first, std::max(by_real[i].second, by_screen[j].second)});
      ++i;
      ++j;
    }
  }
  const Corpus& sn2 = index.corpus();
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return sn2[a.index].profile_id < sn2[b.index].profile_id;
  };
  if (out.candidates.size() > cap) {
    std::partial_sort(out.candidates.begin(), out.candidates.begin() + cap,
                      out.candidates.end(), better);
    out.candidates.resize(cap);
  } else {
    std::sort(out.candidates.begin(), out.candidates.end(), better);
  }
  return out;
}

std::vector<size_t> GroundTruthProbes(const GroundTruth& gt,
                                      const Corpus& sn1) {
  std::vector<size_t> out;
  std::unordered_set<size_t> seen;
  for (const MatchPair& p : gt.pairs()) {
    auto i = sn1.IndexOf(p.id1);
    if (!i) {
      throw Error(ErrorCode::kUnresolvedId,
                  "ground-truth id1 '" + p.id1 + "' not in SN1 corpus");
    }
    if (seen.insert(*i).second) out.push_back(*i);
  }
  return out;
}

EmulatedLarge BuildEmulatedLarge(std::span<const size_t> probes,
                                 const Featurizer& featurizer,
                                 const NameIndex& index, const GroundTruth& gt,
                                 const EmulatedLargeOptions& options) {
  std::vector<CandidateSet> sets(probes.size());
  ParallelFor(probes.size(), options.threads, [&](size_t k) {
    sets[k] = BuildCandidateSet(probes[k], featurizer.prepared1(probes[k]),
                                index, options.min_sim, options.cap);
  });
  return EmulatedLargeFromCandidates(std::move(sets), featurizer.sn1(),
                                     index.corpus(), gt,
                                     options.include_uncontained);
}

EmulatedLarge EmulatedLargeFromCandidates(std::vector<CandidateSet> sets,
                                          const Corpus& sn1, const Corpus& sn2,
                                          const GroundTruth& gt,
                                          bool include_uncontained) {
  EmulatedLarge out;
  out.candidate_sets = std::move(sets);
  size_t total = 0;
  for (size_t k = 0; k < out.candidate_sets.size(); ++k) {
    const Profile& a1 = sn1[out.candidate_sets[k].probe];
    const CandidateSet& cs = out.candidate_sets[k];
    total += cs.candidates.size();
    auto matches = gt.MatchesOf(a1.profile_id);
    size_t found = 0;
    for (const Candidate& c : cs.candidates) {
      const std::string& id2 = sn2[c.index].profile_id;
      const bool match = gt.IsMatch(a1.profile_id, id2);
      found += match;
      out.dataset.pairs.push_back(
          LabeledPair{a1.profile_id, id2, match, Provenance::kEmulatedLarge});
    }
    if (!matches.empty()) {
      ++out.probes_with_match;
      if (found > 0) ++out.contained;
      if (include_uncontained && found < matches.size()) {
        for (const std::string& id2 : matches) {
          const bool listed = std::any_of(
              cs.candidates.begin(), cs.candidates.end(),
              [&](const Candidate& c) { return sn2[c.index].profile_id == id2; });
          if (!listed) {
            out.dataset.pairs.push_back(LabeledPair{
                a1.profile_id, id2, true, Provenance::kEmulatedLarge});
          }
        }
      }
    }
  }
  out.containment_rate =
      out.probes_with_match == 0
          ? 0.0
          : static_cast<double>(out.contained) / out.probes_with_match;
  out.mean_candidates =
      out.candidate_sets.empty()
          ? 0.0
          : static_cast<double>(total) / out.candidate_sets.size();
  return out;
}

PairDataset Undersample(const PairDataset& ds, uint64_t seed) {
  const std::vector<size_t> pos = IndicesWhere(ds, true);
  const std::vector<size_t> neg = IndicesWhere(ds, false);
  if (pos.empty()) {
    throw Error(ErrorCode::kSingleClass, "cannot undersample: no positives");
  }
  if (neg.size() <= pos.size()) return ds;
  Rng rng(seed, "undersample");
  std::vector<size_t> keep = rng.SampleWithoutReplacement(neg.size(), pos.size());
  for (size_t& k : keep) k = neg[k];
  keep.insert(keep.end(), pos.begin(), pos.end());
  std::sort(keep.begin(), keep.end());
  PairDataset out;
  out.pairs.reserve(keep.size());
  for (size_t i : keep) out.pairs.push_back(ds.pairs[i]);
  return out;
}

PairDataset BuildEnrichedTraining(const GroundTruth& gt,
                                  const PairDataset& random_ds,
                                  const PairDataset& emulated_ds, size_t n,
                                  uint64_t seed) {
  const std::vector<size_t> pos = IndicesWhere(random_ds, true);
  const std::vector<size_t> neg_random = IndicesWhere(random_ds, false);
  const std::vector<size_t> neg_hard = IndicesWhere(emulated_ds, false);
  if (pos.size() < n || neg_random.size() < n || neg_hard.size() < n) {
    throw Error(ErrorCode::kInsufficientData,
                "enriched training needs " + std::to_string(n) +
                    " positives and negatives from each source");
  }
  PairDataset out;
  std::unordered_set<std::string> seen;
  auto take = [&](const PairDataset& src, const std::vector<size_t>& from,
                  std::string_view purpose) {
    Rng rng(seed, purpose);
    for (size_t k : rng.SampleWithoutReplacement(from.size(), n)) {
      LabeledPair p = src.pairs[from[k]];
      if (!seen.insert(PairKey(p.id1, p.id2)).second) continue;
      p.match = gt.IsMatch(p.id1, p.id2);
      p.provenance = Provenance::kEnrichedTraining;
      out.pairs.push_back(std::move(p));
    }
  };
  take(random_ds, pos, "enriched-positives");
  take(random_ds, neg_random, "enriched-random-negatives");
  take(emulated_ds, neg_hard, "enriched-hard-negatives");
  return out;
}

}  // namespace acidmatch
