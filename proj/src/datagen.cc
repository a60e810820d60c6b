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

#include "acidmatch/datagen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "acidmatch/error.h"
#include "acidmatch/random.h"
#include "acidmatch/similarity.h"
#include "acidmatch/text.h"
#include "json.hpp"

namespace acidmatch {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, "invalid generator config: " + what);
}

void CheckUnit(double v, const std::string& name) {
  if (!(v >= 0.0 && v <= 1.0)) Invalid(name + " must lie in [0,1]");
}

void CheckNonNegative(double v, const std::string& name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    Invalid(name + " must be finite and >= 0");
  }
}

}  // namespace

void GenConfig::Validate() const {
  if (n < 1) Invalid("n must be at least 1");
  CheckUnit(matched_fraction, "matched_fraction");
  CheckUnit(impersonation_rate, "impersonation_rate");
  CheckUnit(rename_rate, "rename_rate");
  if (!(rename_floor > 0.0 && rename_floor <= 1.0)) {
    Invalid("rename_floor must lie in (0,1]");
  }
  if (forename_list.empty() && forenames < 1) Invalid("forenames must be >= 1");
  if (surname_list.empty() && surnames < 1) Invalid("surnames must be >= 1");
  for (const auto* list : {&forename_list, &surname_list}) {
    for (const std::string& s : *list) {
      if (s.empty()) Invalid("name lists may not contain empty names");
    }
  }
  CheckNonNegative(zipf_exponent, "zipf_exponent");
  if (full_names > 0) {
    const double combos =
        static_cast<double>(forename_list.empty() ? forenames
                                                  : forename_list.size()) *
        static_cast<double>(surname_list.empty() ? surnames
                                                 : surname_list.size());
    if (static_cast<double>(full_names) > 0.5 * combos) {
      Invalid("full_names must not exceed half of forenames x surnames");
    }
  }
  if (towns < 1) Invalid("towns must be >= 1");
  CheckNonNegative(town_zipf_exponent, "town zipf_exponent");
  CheckNonNegative(name_edit_mean, "name_edit_mean");
  CheckNonNegative(location_jitter_km, "location_jitter_km");
  CheckNonNegative(photo_bit_flips, "photo_bit_flips");
  CheckUnit(friend_overlap_rate, "friend_overlap_rate");
  CheckNonNegative(friends_mean, "friends_mean");
  for (AttributeKind kind : kAllAttributes) {
    const AttributeGenConfig& a = attributes[Slot(kind)];
    const std::string name(AttributeName(kind));
    CheckUnit(a.availability_sn1, name + ".availability_sn1");
    CheckUnit(a.availability_sn2, name + ".availability_sn2");
    CheckUnit(a.consistency, name + ".consistency");
    CheckUnit(a.fidelity, name + ".fidelity");
    if (!(a.correlation >= -1.0 && a.correlation <= 1.0)) {
      Invalid(name + ".correlation must lie in [-1,1]");
    }
  }
  const AttributeGenConfig& screen = attributes[Slot(AttributeKind::kScreenName)];
  if (screen.availability_sn1 != 1.0 || screen.availability_sn2 != 1.0) {
    Invalid("screen names are always present; their availability must be 1");
  }
  try {
    thresholds.Validate();
  } catch (const Error& e) {
    Invalid(e.what());
  }
}

namespace {

// Reads `key` from `obj` into `out` when present and removes it, so that
// leftovers can be reported as unknown keys.
template <typename T>
void Take(json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    Invalid(std::string("bad value for '") + key + "'");
  }
  obj.erase(it);
}

json TakeObject(json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return json::object();
  if (!it->is_object()) Invalid(std::string("'") + key + "' must be an object");
  json out = *it;
  obj.erase(it);
  return out;
}

void RejectLeftovers(const json& obj, const std::string& where) {
  if (!obj.empty()) {
    Invalid("unknown key '" + obj.begin().key() + "' in " + where);
  }
}

}  // namespace

GenConfig GenConfig::FromJsonText(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                std::string("generator config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) Invalid("top level must be an object");
  GenConfig c;
  Take(root, "n", c.n);
  Take(root, "matched_fraction", c.matched_fraction);
  Take(root, "sn2_filler", c.sn2_filler);
  Take(root, "seed", c.seed);
  Take(root, "impersonation_rate", c.impersonation_rate);
  Take(root, "rename_rate", c.rename_rate);
  Take(root, "rename_floor", c.rename_floor);

  json names = TakeObject(root, "names");
  Take(names, "forenames", c.forenames);
  Take(names, "surnames", c.surnames);
  Take(names, "zipf_exponent", c.zipf_exponent);
  Take(names, "full_names", c.full_names);
  Take(names, "forename_list", c.forename_list);
  Take(names, "surname_list", c.surname_list);
  RejectLeftovers(names, "names");

  json towns = TakeObject(root, "towns");
  Take(towns, "count", c.towns);
  Take(towns, "zipf_exponent", c.town_zipf_exponent);
  RejectLeftovers(towns, "towns");

  json noise = TakeObject(root, "noise");
  Take(noise, "name_edit_mean", c.name_edit_mean);
  Take(noise, "location_jitter_km", c.location_jitter_km);
  Take(noise, "photo_bit_flips", c.photo_bit_flips);
  Take(noise, "friend_overlap_rate", c.friend_overlap_rate);
  Take(noise, "friends_mean", c.friends_mean);
  Take(noise, "friend_universe", c.friend_universe);
  RejectLeftovers(noise, "noise");

  json attrs = TakeObject(root, "attributes");
  for (auto it = attrs.begin(); it != attrs.end(); ++it) {
    auto kind = ParseAttributeName(it.key());
    if (!kind) Invalid("unknown attribute '" + it.key() + "'");
    if (!it->is_object()) Invalid("attribute '" + it.key() + "' must be an object");
    json a = *it;
    AttributeGenConfig& g = c.attributes[Slot(*kind)];
    Take(a, "availability_sn1", g.availability_sn1);
    Take(a, "availability_sn2", g.availability_sn2);
    Take(a, "correlation", g.correlation);
    Take(a, "consistency", g.consistency);
    Take(a, "fidelity", g.fidelity);
    RejectLeftovers(a, "attributes." + it.key());
  }

  auto th = root.find("thresholds");
  if (th != root.end()) {
    c.thresholds = ThresholdConfig::FromJsonText(th->dump());
    root.erase(th);
  }
  RejectLeftovers(root, "the top level");
  c.Validate();
  return c;
}

GenConfig GenConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return FromJsonText(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string GenConfig::ToJsonText() const {
  ordered_json j;
  j["n"] = n;
  j["matched_fraction"] = matched_fraction;
  j["sn2_filler"] = sn2_filler;
  j["seed"] = seed;
  j["impersonation_rate"] = impersonation_rate;
  j["rename_rate"] = rename_rate;
  j["rename_floor"] = rename_floor;
  j["names"] = {{"forenames", forenames},
                {"surnames", surnames},
                {"zipf_exponent", zipf_exponent},
                {"full_names", full_names},
                {"forename_list", forename_list},
                {"surname_list", surname_list}};
  j["towns"] = {{"count", towns}, {"zipf_exponent", town_zipf_exponent}};
  j["noise"] = {{"name_edit_mean", name_edit_mean},
                {"location_jitter_km", location_jitter_km},
                {"photo_bit_flips", photo_bit_flips},
                {"friend_overlap_rate", friend_overlap_rate},
                {"friends_mean", friends_mean},
                {"friend_universe", friend_universe}};
  ordered_json attrs;
  for (AttributeKind kind : kAllAttributes) {
    const AttributeGenConfig& a = attributes[Slot(kind)];
    attrs[std::string(AttributeName(kind))] = {
        {"availability_sn1", a.availability_sn1},
        {"availability_sn2", a.availability_sn2},
        {"correlation", a.correlation},
        {"consistency", a.consistency},
        {"fidelity", a.fidelity}};
  }
  j["attributes"] = attrs;
  j["thresholds"] = ordered_json::parse(thresholds.ToJsonText());
  return j.dump(2) + "\n";
}

// ----------------------------------------------------------- PerturbName

namespace {

char32_t RandomLetter(Rng& rng) {
  return U'a' + static_cast<char32_t>(rng.UniformInt(26));
}

void ApplyEdit(std::u32string& s, Rng& rng) {
  enum Op { kSubstitute, kInsert, kDelete, kTranspose };
  std::vector<size_t> swappable;
  for (size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] != s[i + 1]) swappable.push_back(i);
  }
  std::vector<Op> ops = {kInsert};
  if (!s.empty()) ops.push_back(kSubstitute);
  if (s.size() >= 2) ops.push_back(kDelete);
  if (!swappable.empty()) ops.push_back(kTranspose);
  switch (ops[rng.UniformInt(ops.size())]) {
    case kSubstitute: {
      const size_t pos = rng.UniformInt(s.size());
      char32_t c;
      do {
        c = RandomLetter(rng);
      } while (c == s[pos] || c == FoldCase(s[pos]));
      s[pos] = c;
      break;
    }
    case kInsert:
      s.insert(s.begin() + static_cast<long>(rng.UniformInt(s.size() + 1)),
               RandomLetter(rng));
      break;
    case kDelete:
      s.erase(s.begin() + static_cast<long>(rng.UniformInt(s.size())));
      break;
    case kTranspose: {
      const size_t i = swappable[rng.UniformInt(swappable.size())];
      std::swap(s[i], s[i + 1]);
      break;
    }
  }
}

}  // namespace

std::string PerturbName(std::string_view name, int edit_ops, uint64_t seed) {
  if (edit_ops <= 0) return std::string(name);
  Rng rng(seed, "perturb-name");
  std::u32string s = DecodeUtf8(name);
  for (int k = 0; k < edit_ops; ++k) ApplyEdit(s, rng);
  return EncodeUtf8(s);
}

Corpus RemoveMatches(const Corpus& sn2, const GroundTruth& gt) {
  std::vector<Profile> kept;
  for (const Profile& p : sn2) {
    if (!gt.IsMatchedSn2(p.profile_id)) kept.push_back(p);
  }
  return Corpus(std::move(kept), sn2.impersonation_labeled());
}

// ------------------------------------------------------------- Generate

namespace {

constexpr int kMaxTries = 200;

const char* const kOnsets[] = {"b",  "br", "c",  "ch", "d",  "f",  "g",  "gr",
                               "h",  "j",  "k",  "l",  "m",  "n",  "p",  "r",
                               "s",  "sh", "st", "t",  "th", "v",  "w",  "z"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ea", "ou", "y"};
const char* const kCodas[] = {"", "", "", "n", "r", "s", "l", "rd", "nt", "ck",
                              "m", "tt"};

std::string Word(Rng& rng, int syllables) {
  std::string w;
  for (int i = 0; i < syllables; ++i) {
    w += kOnsets[rng.UniformInt(std::size(kOnsets))];
    w += kVowels[rng.UniformInt(std::size(kVowels))];
    w += kCodas[rng.UniformInt(std::size(kCodas))];
  }
  return w;
}

std::string Capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = s[0] - 'a' + 'A';
  return s;
}

std::string Lower(std::string_view s) {
  return EncodeUtf8(NormalizeForComparison(s));
}

std::vector<std::string> MakePool(uint64_t seed, std::string_view tag,
                                  size_t count, int min_syl, int max_syl) {
  Rng rng(seed, tag);
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < count) {
    const int syl =
        min_syl + static_cast<int>(rng.UniformInt(max_syl - min_syl + 1));
    std::string w = Capitalize(Word(rng, syl));
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

int Geometric(Rng& rng, double mean) {
  const double q = mean / (1.0 + mean);
  int k = 0;
  while (k < 12 && rng.Uniform() < q) ++k;
  return k;
}

int Poisson(Rng& rng, double mean) {
  // Knuth; means here are small.
  const double limit = std::exp(-mean);
  double prod = rng.Uniform();
  int k = 0;
  while (prod > limit && k < 64) {
    prod *= rng.Uniform();
    ++k;
  }
  return k;
}

LatLon Destination(LatLon from, double km, double bearing) {
  const double d = km / kEarthRadiusKm;
  const double lat1 = from.lat * std::numbers::pi / 180.0;
  const double lon1 = from.lon * std::numbers::pi / 180.0;
  const double lat2 = std::asin(std::sin(lat1) * std::cos(d) +
                                std::cos(lat1) * std::sin(d) * std::cos(bearing));
  const double lon2 =
      lon1 + std::atan2(std::sin(bearing) * std::sin(d) * std::cos(lat1),
                        std::cos(d) - std::sin(lat1) * std::sin(lat2));
  LatLon out{lat2 * 180.0 / std::numbers::pi, lon2 * 180.0 / std::numbers::pi};
  out.lat = std::clamp(out.lat, -90.0, 90.0);
  while (out.lon > 180.0) out.lon -= 360.0;
  while (out.lon < -180.0) out.lon += 360.0;
  return out;
}

struct Town {
  std::string label;
  LatLon at;
};

// A latent person: everything a network profile is derived from.
struct Person {
  std::string forename;
  std::string surname;
  size_t town = 0;
  uint64_t photo = 0;
  std::vector<uint32_t> friend_pool;  // friend-universe members
};

class Generator {
 public:
  explicit Generator(const GenConfig& config) : c_(config) {
    const uint64_t seed = c_.seed;
    forenames_ = c_.forename_list.empty()
                     ? MakePool(seed, "forename-pool", c_.forenames, 2, 2)
                     : c_.forename_list;
    surnames_ = c_.surname_list.empty()
                    ? MakePool(seed, "surname-pool", c_.surnames, 2, 3)
                    : c_.surname_list;
    if (c_.full_names > 0) {
      // Heavy tail over whole names: exact twins are common while random
      // pairs rarely share just one part.
      Rng nrng(seed, "full-name-pool");
      std::set<std::pair<size_t, size_t>> seen;
      while (full_pool_.size() < c_.full_names) {
        const std::pair<size_t, size_t> fs{nrng.UniformInt(forenames_.size()),
                                           nrng.UniformInt(surnames_.size())};
        if (seen.insert(fs).second) full_pool_.push_back(fs);
      }
      full_zipf_ = DiscreteSampler::Zipf(full_pool_.size(), c_.zipf_exponent);
    } else {
      forename_zipf_ =
          DiscreteSampler::Zipf(forenames_.size(), c_.zipf_exponent);
      surname_zipf_ = DiscreteSampler::Zipf(surnames_.size(), c_.zipf_exponent);
    }

    Rng trng(seed, "towns");
    const auto labels = MakePool(seed, "town-names", c_.towns, 2, 3);
    for (size_t i = 0; i < c_.towns; ++i) {
      towns_.push_back({labels[i],
                        {35.0 + 25.0 * trng.Uniform(),
                         -10.0 + 40.0 * trng.Uniform()}});
    }
    town_zipf_ = DiscreteSampler::Zipf(c_.towns, c_.town_zipf_exponent);
    universe_ = c_.friend_universe > 0 ? c_.friend_universe : 20 * c_.n;
  }

  Person NewPerson(Rng& rng) const {
    Person p;
    std::tie(p.forename, p.surname) = DrawName(rng);
    p.town = town_zipf_.Sample(rng);
    p.photo = rng.Next();
    const int pool =
        std::max(3, static_cast<int>(std::lround(
                        rng.Exponential(std::max(c_.friends_mean, 1.0) * 1.4))));
    std::unordered_set<uint32_t> seen;
    while (static_cast<int>(p.friend_pool.size()) < pool) {
      const auto f = static_cast<uint32_t>(rng.UniformInt(universe_));
      if (seen.insert(f).second) p.friend_pool.push_back(f);
    }
    return p;
  }

  std::string RealName(const Person& p) const {
    return p.forename + " " + p.surname;
  }

  std::string Handle(const Person& p, Rng& rng, int pattern = -1) const {
    const std::string f = Lower(p.forename);
    const std::string s = Lower(p.surname);
    if (pattern < 0) pattern = static_cast<int>(rng.UniformInt(7));
    switch (pattern) {
      case 0: return f + s;
      case 1: return f + "." + s;
      case 2: return f.substr(0, 1) + s;
      case 3: return f + "_" + s;
      case 4: return s + f.substr(0, 2);
      case 5: return f + std::to_string(rng.UniformInt(9000) + 10);
      default: return Word(rng, 2) + std::to_string(rng.UniformInt(1000));
    }
  }

  Location PlaceNear(size_t town, Rng& rng) const {
    const Town& t = towns_[town];
    const LatLon at = Destination(t.at, rng.Exponential(15.0),
                                  2.0 * std::numbers::pi * rng.Uniform());
    return Location{t.label, at.lat, at.lon};
  }

  Friend FriendEntry(uint32_t member, Rng& rng) const {
    Rng m(c_.seed, "friend-universe", member);
    Friend f;
    const std::string fore = forenames_[m.UniformInt(forenames_.size())];
    const std::string sur = surnames_[m.UniformInt(surnames_.size())];
    f.screen_name = Lower(Word(m, 2)) + std::to_string(member);
    // Real names are shown on most but not all friend lists.
    if (rng.Uniform() < 0.8) f.real_name = fore + " " + sur;
    return f;
  }

  std::vector<Friend> FriendList(std::span<const uint32_t> members,
                                 Rng& rng) const {
    std::vector<Friend> out;
    for (uint32_t m : members) out.push_back(FriendEntry(m, rng));
    return out;
  }

  // A profile of `p` with no counterpart, each optional attribute present
  // with the marginal availability of its side.
  Profile FreshProfile(const Person& p, Rng& rng, bool sn1_side = false) const {
    auto avail = [&](AttributeKind k) {
      const AttributeGenConfig& a = c_.attributes[Slot(k)];
      return sn1_side ? a.availability_sn1 : a.availability_sn2;
    };
    Profile prof;
    if (rng.Bernoulli(avail(AttributeKind::kRealName))) {
      prof.real_name = RealName(p);
    }
    prof.screen_name = Handle(p, rng);
    if (rng.Bernoulli(avail(AttributeKind::kLocation))) {
      prof.location = PlaceNear(p.town, rng);
    }
    if (rng.Bernoulli(avail(AttributeKind::kPhoto))) prof.photo = p.photo;
    if (rng.Bernoulli(avail(AttributeKind::kFriends))) {
      std::vector<uint32_t> members;
      for (uint32_t f : p.friend_pool) {
        if (rng.Bernoulli(0.7)) members.push_back(f);
      }
      if (members.empty()) members.push_back(p.friend_pool.front());
      prof.friends = FriendList(members, rng);
    }
    return prof;
  }

  // Presence of an attribute on (SN1, SN2) for a matching pair.
  std::pair<bool, bool> JointPresence(AttributeKind kind, Rng& rng) const {
    const AttributeGenConfig& a = c_.attributes[Slot(kind)];
    const double p11 = JointProbability(a);
    const double p10 = a.availability_sn1 - p11;
    const double p01 = a.availability_sn2 - p11;
    const double u = rng.Uniform();
    if (u < p11) return {true, true};
    if (u < p11 + p10) return {true, false};
    if (u < p11 + p10 + p01) return {false, true};
    return {false, false};
  }

  static double JointProbability(const AttributeGenConfig& a) {
    const double a1 = a.availability_sn1, a2 = a.availability_sn2;
    const double p = a1 * a2 + a.correlation * std::sqrt(a1 * (1 - a1) *
                                                         a2 * (1 - a2));
    return std::clamp(p, std::max(0.0, a1 + a2 - 1.0), std::min(a1, a2));
  }

  bool Passes(AttributeKind kind, double raw) const {
    return PassesThreshold(kind, raw, c_.thresholds);
  }

  // SN2 real name for SN1 name `v1`, consistent or not.
  std::string MatchedRealName(const std::string& v1, bool consistent,
                              Rng& rng) const {
    for (int t = 0; t < kMaxTries; ++t) {
      std::string v;
      if (consistent) {
        v = PerturbName(v1, Geometric(rng, c_.name_edit_mean), rng.Next());
      } else {
        const auto [f, s] = DrawName(rng);
        v = f + " " + s;
      }
      if (Passes(AttributeKind::kRealName, Jaro(v1, v)) == consistent) return v;
    }
    return consistent ? v1 : Word(rng, 3) + " " + Word(rng, 3);
  }

  std::string MatchedHandle(const Person& p, const std::string& v1,
                            bool consistent, Rng& rng) const {
    for (int t = 0; t < kMaxTries; ++t) {
      const std::string v =
          consistent
              ? PerturbName(v1, Geometric(rng, c_.name_edit_mean), rng.Next())
              : Handle(p, rng);
      if (Passes(AttributeKind::kScreenName, Jaro(v1, v)) == consistent) {
        return v;
      }
    }
    return consistent ? v1 : Word(rng, 3) + std::to_string(rng.UniformInt(1000));
  }

  Location MatchedLocation(const Person& p, const Location& v1,
                           bool consistent, Rng& rng) const {
    const LatLon from{v1.lat, v1.lon};
    for (int t = 0; t < kMaxTries; ++t) {
      Location v;
      if (consistent) {
        const LatLon at =
            Destination(from, rng.Exponential(std::max(c_.location_jitter_km, 1e-9)),
                        2.0 * std::numbers::pi * rng.Uniform());
        v = Location{v1.label, at.lat, at.lon};
      } else {
        size_t town = town_zipf_.Sample(rng);
        if (towns_.size() > 1 && town == p.town) continue;
        v = PlaceNear(town, rng);
      }
      const double km = GeodesicKm(from, {v.lat, v.lon});
      if (Passes(AttributeKind::kLocation, km) == consistent) return v;
    }
    if (consistent) return v1;
    const LatLon far = Destination(from, 20000.0 - c_.thresholds.location_km,
                                   0.0);
    return Location{"elsewhere", far.lat, far.lon};
  }

  uint64_t MatchedPhoto(uint64_t v1, bool consistent, Rng& rng) const {
    for (int t = 0; t < kMaxTries; ++t) {
      uint64_t v = v1;
      if (consistent) {
        const int flips = Poisson(rng, c_.photo_bit_flips);
        for (int k = 0; k < flips; ++k) v ^= uint64_t{1} << rng.UniformInt(64);
      } else {
        v = rng.Next();
      }
      if (Passes(AttributeKind::kPhoto, PhotoSimilarity(v1, v)) == consistent) {
        return v;
      }
    }
    return consistent ? v1 : ~v1;
  }

  std::vector<Friend> MatchedFriends(const Person& p,
                                     const std::vector<uint32_t>& l1,
                                     const std::vector<Friend>& v1,
                                     bool consistent, Rng& rng) const {
    const int need = static_cast<int>(std::ceil(c_.thresholds.friends));
    std::vector<uint32_t> rest;
    for (uint32_t f : p.friend_pool) {
      if (std::find(l1.begin(), l1.end(), f) == l1.end()) rest.push_back(f);
    }
    std::vector<Friend> best;
    for (int t = 0; t < kMaxTries; ++t) {
      int shared = 0;
      const int n1 = static_cast<int>(l1.size());
      if (consistent) {
        for (int i = 0; i < n1; ++i) shared += rng.Bernoulli(c_.friend_overlap_rate);
        shared = std::min(std::max(shared, need), n1);
      } else {
        shared = std::min(static_cast<int>(rng.UniformInt(std::max(need, 1))), n1);
      }
      std::vector<uint32_t> members;
      for (size_t idx : rng.SampleWithoutReplacement(l1.size(), shared)) {
        members.push_back(l1[idx]);
      }
      for (uint32_t f : rest) {
        if (rng.Bernoulli(0.7)) members.push_back(f);
      }
      if (members.empty()) members.push_back(p.friend_pool.front());
      std::vector<Friend> v = FriendList(members, rng);
      if (Passes(AttributeKind::kFriends, FriendsOverlap(v1, v)) == consistent) {
        return v;
      }
      best = std::move(v);
    }
    return consistent ? v1 : best;
  }

  const std::vector<Town>& towns() const { return towns_; }
  const std::vector<std::string>& forenames() const { return forenames_; }
  const std::vector<std::string>& surnames() const { return surnames_; }
  std::pair<std::string, std::string> DrawName(Rng& rng) const {
    if (!full_pool_.empty()) {
      const auto [f, s] = full_pool_[full_zipf_.Sample(rng)];
      return {forenames_[f], surnames_[s]};
    }
    return {forenames_[forename_zipf_.Sample(rng)],
            surnames_[surname_zipf_.Sample(rng)]};
  }

 private:
  const GenConfig& c_;
  std::vector<std::string> forenames_;
  std::vector<std::string> surnames_;
  DiscreteSampler forename_zipf_;
  DiscreteSampler surname_zipf_;
  std::vector<std::pair<size_t, size_t>> full_pool_;
  DiscreteSampler full_zipf_;
  std::vector<Town> towns_;
  DiscreteSampler town_zipf_;
  size_t universe_ = 0;
};

std::string PaddedId(char prefix, size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%07zu", prefix, i);
  return buf;
}

}  // namespace

GeneratedCorpora Generate(const GenConfig& config) {
  config.Validate();
  const Generator g(config);
  const uint64_t seed = config.seed;
  auto attr = [&](AttributeKind k) -> const AttributeGenConfig& {
    return config.attributes[Slot(k)];
  };

  std::vector<Profile> sn1;
  std::vector<Profile> sn2;
  std::vector<Person> people;
  std::vector<std::pair<size_t, size_t>> matches;  // (sn1, sn2 position)
  std::vector<bool> renamed_pair;
  size_t renamed = 0;

  for (size_t i = 0; i < config.n; ++i) {
    Rng rng(seed, "sn1-person", i);
    Person person = g.NewPerson(rng);
    const bool matched = rng.Bernoulli(config.matched_fraction);

    Profile a;
    a.profile_id = PaddedId('a', i);
    a.network_id = "sn1";
    Profile b;
    b.network_id = "sn2";
    const std::string real = g.RealName(person);
    a.screen_name = g.Handle(person, rng);

    if (!matched) {
      Profile fresh = g.FreshProfile(person, rng, /*sn1_side=*/true);
      fresh.profile_id = a.profile_id;
      fresh.network_id = "sn1";
      sn1.push_back(std::move(fresh));
      people.push_back(std::move(person));
      continue;
    }

    const bool rename = rng.Bernoulli(config.rename_rate);
    auto consistent = [&](AttributeKind k) {
      return rng.Bernoulli(attr(k).consistency);
    };

    // Real name.
    {
      const auto [p1, p2] = g.JointPresence(AttributeKind::kRealName, rng);
      const bool cons = consistent(AttributeKind::kRealName);
      if (p1) a.real_name = real;
      if (p2) {
        b.real_name = p1 ? g.MatchedRealName(real, cons, rng) : real;
      }
    }
    // Screen name: always present on both sides.
    {
      const bool cons = consistent(AttributeKind::kScreenName);
      b.screen_name = g.MatchedHandle(person, a.screen_name, cons, rng);
    }
    if (rename) {
      ++renamed;
      for (int t = 0; t < kMaxTries; ++t) {
        Rng alt(seed, "rename", i * kMaxTries + t);
        Person other = g.NewPerson(alt);
        const std::string other_real = g.RealName(other);
        const std::string other_handle = g.Handle(other, alt);
        const bool real_ok =
            !a.real_name || !b.real_name ||
            Jaro(*a.real_name, other_real) < config.rename_floor;
        const bool handle_ok =
            Jaro(a.screen_name, other_handle) < config.rename_floor;
        if ((real_ok || t + 1 == kMaxTries) && handle_ok) {
          if (b.real_name) b.real_name = other_real;
          b.screen_name = other_handle;
          break;
        }
      }
    }
    // Location.
    {
      const auto [p1, p2] = g.JointPresence(AttributeKind::kLocation, rng);
      const bool cons = consistent(AttributeKind::kLocation);
      if (p1) a.location = g.PlaceNear(person.town, rng);
      if (p2) {
        b.location = p1 ? g.MatchedLocation(person, *a.location, cons, rng)
                        : g.PlaceNear(person.town, rng);
      }
    }
    // Photo.
    {
      const auto [p1, p2] = g.JointPresence(AttributeKind::kPhoto, rng);
      const bool cons = consistent(AttributeKind::kPhoto);
      if (p1) a.photo = person.photo;
      if (p2) b.photo = p1 ? g.MatchedPhoto(person.photo, cons, rng) : person.photo;
    }
    // Friends.
    {
      const auto [p1, p2] = g.JointPresence(AttributeKind::kFriends, rng);
      const bool cons = consistent(AttributeKind::kFriends);
      std::vector<uint32_t> l1;
      for (uint32_t f : person.friend_pool) {
        if (rng.Bernoulli(0.7)) l1.push_back(f);
      }
      if (l1.empty()) l1.push_back(person.friend_pool.front());
      if (p1) a.friends = g.FriendList(l1, rng);
      if (p2) {
        b.friends = p1 ? g.MatchedFriends(person, l1, *a.friends, cons, rng)
                       : g.FriendList(l1, rng);
      }
    }
    matches.emplace_back(sn1.size(), sn2.size());
    renamed_pair.push_back(rename);
    sn1.push_back(std::move(a));
    sn2.push_back(std::move(b));
    people.push_back(std::move(person));
  }

  // Unmatched SN2 population.
  const size_t filler = config.sn2_filler < 0
                            ? config.n
                            : static_cast<size_t>(config.sn2_filler);
  for (size_t j = 0; j < filler; ++j) {
    Rng rng(seed, "sn2-filler", j);
    const Person person = g.NewPerson(rng);
    Profile p = g.FreshProfile(person, rng);
    p.network_id = "sn2";
    sn2.push_back(std::move(p));
  }

  // Impersonators, drawn after and independently of the filler.
  size_t impersonators = 0;
  for (size_t i = 0; i < sn1.size(); ++i) {
    Rng rng(seed, "impersonator", i);
    if (!rng.Bernoulli(config.impersonation_rate)) continue;
    const Profile& victim = sn1[i];
    const Person decoy = g.NewPerson(rng);
    Profile p = g.FreshProfile(decoy, rng);
    p.network_id = "sn2";
    auto copy = [&](AttributeKind k) {
      return rng.Bernoulli(attr(k).fidelity);
    };
    if (copy(AttributeKind::kRealName) && victim.real_name) {
      p.real_name = victim.real_name;
    }
    if (copy(AttributeKind::kScreenName)) p.screen_name = victim.screen_name;
    if (copy(AttributeKind::kLocation) && victim.location) {
      p.location = victim.location;
    }
    if (copy(AttributeKind::kPhoto) && victim.photo) p.photo = victim.photo;
    if (copy(AttributeKind::kFriends) && victim.friends) {
      p.friends = victim.friends;
    }
    p.is_impersonator_of = victim.profile_id;
    sn2.push_back(std::move(p));
    ++impersonators;
  }

  // SN2 ids follow a random permutation so that order and ids carry no
  // information about the ground truth.
  std::vector<size_t> order(sn2.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  Rng perm(seed, "sn2-order");
  perm.Shuffle(order);
  std::vector<size_t> position(sn2.size());
  std::vector<Profile> shuffled(sn2.size());
  for (size_t k = 0; k < order.size(); ++k) {
    position[order[k]] = k;
    shuffled[k] = std::move(sn2[order[k]]);
    shuffled[k].profile_id = PaddedId('b', k);
  }

  std::vector<MatchPair> pairs;
  for (const auto& [i1, i2] : matches) {
    pairs.push_back({sn1[i1].profile_id, shuffled[position[i2]].profile_id});
  }

  GeneratedCorpora out;
  out.sn1 = Corpus(std::move(sn1), true);
  out.sn2 = Corpus(std::move(shuffled), true);
  out.gt = GroundTruth(std::move(pairs));
  out.impersonators = impersonators;
  out.renamed = renamed;

  // Achieved calibration on the generated pairs. Renamed pairs are left out
  // of the name consistency figures; their names are replacements, not
  // noisy copies.
  for (AttributeKind kind : kAllAttributes) {
    AttributeCalibration& cal = out.calibration[Slot(kind)];
    cal.expected_availability =
        kind == AttributeKind::kScreenName
            ? 1.0
            : Generator::JointProbability(attr(kind));
    cal.target_consistency = attr(kind).consistency;
  }
  std::array<size_t, kNumAttributes> present{}, passing{}, counted{};
  for (size_t k = 0; k < out.gt.size(); ++k) {
    const MatchPair& m = out.gt.pairs()[k];
    const PreparedProfile p1 = Prepare(*out.sn1.Find(m.id1));
    const PreparedProfile p2 = Prepare(*out.sn2.Find(m.id2));
    for (AttributeKind kind : kAllAttributes) {
      const auto raw = AttributeScore(kind, p1, p2);
      if (!raw) continue;
      ++present[Slot(kind)];
      const bool name = kind == AttributeKind::kRealName ||
                        kind == AttributeKind::kScreenName;
      if (name && renamed_pair[k]) continue;
      ++counted[Slot(kind)];
      passing[Slot(kind)] += PassesThreshold(kind, *raw, config.thresholds);
    }
  }
  for (size_t s = 0; s < kNumAttributes; ++s) {
    AttributeCalibration& cal = out.calibration[s];
    cal.available_pairs = present[s];
    cal.achieved_availability =
        out.gt.empty() ? 0.0
                       : static_cast<double>(present[s]) /
                             static_cast<double>(out.gt.size());
    cal.achieved_consistency =
        counted[s] == 0 ? 0.0
                        : static_cast<double>(passing[s]) /
                              static_cast<double>(counted[s]);
  }
  return out;
}

}  // namespace acidmatch
