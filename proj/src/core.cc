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

#include "acidmatch/core.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "acidmatch/error.h"
#include "acidmatch/phash.h"
#include "csv.h"
#include "json.hpp"

namespace acidmatch {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kCoordinateRange: return "coordinate_range";
    case ErrorCode::kUnresolvedId: return "unresolved_id";
    case ErrorCode::kUnresolvedLocation: return "unresolved_location";
    case ErrorCode::kDuplicatePair: return "duplicate_pair";
    case ErrorCode::kEmptyGroundTruth: return "empty_ground_truth";
    case ErrorCode::kNoAvailablePairs: return "no_available_pairs";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kNoImpersonatorLabels: return "no_impersonator_labels";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kSingleClass: return "single_class";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kIncompatibleStrategy: return "incompatible_strategy";
    case ErrorCode::kCorruptModel: return "corrupt_model";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kUndecodableImage: return "undecodable_image";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kEmptyCurve: return "empty_curve";
    case ErrorCode::kOrdering: return "ordering";
  }
  return "unknown";
}

std::string_view AttributeName(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::kRealName: return "real_name";
    case AttributeKind::kScreenName: return "screen_name";
    case AttributeKind::kLocation: return "location";
    case AttributeKind::kPhoto: return "photo";
    case AttributeKind::kFriends: return "friends";
  }
  return "";
}

std::optional<AttributeKind> ParseAttributeName(std::string_view name) {
  for (AttributeKind kind : kAllAttributes) {
    if (AttributeName(kind) == name) return kind;
  }
  return std::nullopt;
}

bool Profile::HasAttribute(AttributeKind kind) const {
  switch (kind) {
    case AttributeKind::kRealName: return real_name.has_value();
    case AttributeKind::kScreenName: return true;
    case AttributeKind::kLocation: return location.has_value();
    case AttributeKind::kPhoto: return photo.has_value();
    case AttributeKind::kFriends: return friends.has_value();
  }
  return false;
}

namespace {

void CheckCoordinates(const Location& loc, const std::string& where) {
  if (!std::isfinite(loc.lat) || loc.lat < -90.0 || loc.lat > 90.0 ||
      !std::isfinite(loc.lon) || loc.lon < -180.0 || loc.lon > 180.0) {
    throw Error(ErrorCode::kCoordinateRange,
                where + ": coordinates out of range (lat " +
                    std::to_string(loc.lat) + ", lon " +
                    std::to_string(loc.lon) + ")");
  }
}

std::string PhotoHex(uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

uint64_t ParsePhotoHex(std::string text, const std::string& where) {
  if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) text = text.substr(2);
  if (text.empty() || text.size() > 16 ||
      text.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos) {
    throw Error(ErrorCode::kParse, where + ": photo must be a 64-bit hex hash");
  }
  return std::stoull(text, nullptr, 16);
}

std::optional<std::string> OptionalString(const json& obj, const char* key,
                                          const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kParse, where + ": '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string RequiredString(const json& obj, const char* key,
                           const std::string& where) {
  auto value = OptionalString(obj, key, where);
  if (!value) {
    throw Error(ErrorCode::kParse, where + ": missing required '" +
                                       std::string(key) + "'");
  }
  return *value;
}

double RequiredNumber(const json& obj, const char* key,
                      const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw Error(ErrorCode::kParse,
                where + ": '" + key + "' must be a number");
  }
  return it->get<double>();
}

Profile ProfileFromJson(const json& obj, const std::string& where,
                        const Gazetteer* gazetteer,
                        const std::filesystem::path& base_dir) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kParse, where + ": record must be a JSON object");
  }
  Profile p;
  p.profile_id = RequiredString(obj, "profile_id", where);
  p.network_id = RequiredString(obj, "network_id", where);
  p.screen_name = RequiredString(obj, "screen_name", where);
  p.real_name = OptionalString(obj, "real_name", where);

  if (auto it = obj.find("location"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) {
      throw Error(ErrorCode::kParse, where + ": 'location' must be an object");
    }
    Location loc;
    loc.label = OptionalString(*it, "label", where).value_or("");
    const bool has_lat = it->contains("lat") && !(*it)["lat"].is_null();
    const bool has_lon = it->contains("lon") && !(*it)["lon"].is_null();
    if (has_lat && has_lon) {
      loc.lat = RequiredNumber(*it, "lat", where);
      loc.lon = RequiredNumber(*it, "lon", where);
    } else {
      std::optional<std::pair<double, double>> hit;
      if (gazetteer != nullptr) hit = gazetteer->Find(loc.label);
      if (!hit) {
        throw Error(ErrorCode::kUnresolvedLocation,
                    where + ": location '" + loc.label +
                        "' has no coordinates and is not in the gazetteer");
      }
      loc.lat = hit->first;
      loc.lon = hit->second;
    }
    CheckCoordinates(loc, where);
    p.location = std::move(loc);
  }

  if (auto it = obj.find("photo"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw Error(ErrorCode::kParse, where + ": 'photo' must be a hex string");
    }
    p.photo = ParsePhotoHex(it->get<std::string>(), where);
  } else if (auto path = OptionalString(obj, "photo_path", where)) {
    std::filesystem::path image = *path;
    if (image.is_relative()) image = base_dir / image;
    try {
      p.photo = Phash64File(image);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
  }

  if (auto it = obj.find("friends"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) {
      throw Error(ErrorCode::kParse, where + ": 'friends' must be an array");
    }
    std::vector<Friend> friends;
    friends.reserve(it->size());
    for (const json& f : *it) {
      if (!f.is_object()) {
        throw Error(ErrorCode::kParse, where + ": friend must be an object");
      }
      friends.push_back(Friend{OptionalString(f, "real_name", where),
                               RequiredString(f, "screen_name", where)});
    }
    p.friends = std::move(friends);
  }

  p.is_impersonator_of = OptionalString(obj, "is_impersonator_of", where);
  return p;
}

ordered_json ProfileToJson(const Profile& p, bool labeled) {
  ordered_json obj;
  obj["profile_id"] = p.profile_id;
  obj["network_id"] = p.network_id;
  if (p.real_name) obj["real_name"] = *p.real_name;
  obj["screen_name"] = p.screen_name;
  if (p.location) {
    obj["location"] = {{"label", p.location->label},
                       {"lat", p.location->lat},
                       {"lon", p.location->lon}};
  }
  if (p.photo) obj["photo"] = PhotoHex(*p.photo);
  if (p.friends) {
    ordered_json list = ordered_json::array();
    for (const Friend& f : *p.friends) {
      ordered_json entry;
      if (f.real_name) entry["real_name"] = *f.real_name;
      entry["screen_name"] = f.screen_name;
      list.push_back(std::move(entry));
    }
    obj["friends"] = std::move(list);
  }
  if (p.is_impersonator_of) {
    obj["is_impersonator_of"] = *p.is_impersonator_of;
  } else if (labeled) {
    obj["is_impersonator_of"] = nullptr;
  }
  return obj;
}

}  // namespace

Corpus::Corpus(std::vector<Profile> profiles, bool impersonation_labeled)
    : profiles_(std::move(profiles)),
      impersonation_labeled_(impersonation_labeled) {
  index_.reserve(profiles_.size());
  for (size_t i = 0; i < profiles_.size(); ++i) {
    const Profile& p = profiles_[i];
    if (!index_.emplace(p.profile_id, i).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "duplicate profile_id '" + p.profile_id + "'");
    }
    if (p.location) CheckCoordinates(*p.location, "profile " + p.profile_id);
    if (p.is_impersonator_of) impersonation_labeled_ = true;
  }
}

std::optional<size_t> Corpus::IndexOf(std::string_view profile_id) const {
  auto it = index_.find(std::string(profile_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Profile* Corpus::Find(std::string_view profile_id) const {
  auto i = IndexOf(profile_id);
  return i ? &profiles_[*i] : nullptr;
}

Gazetteer Gazetteer::Parse(std::istream& in) {
  csv::ExpectHeader(in, "label,lat,lon", "gazetteer");
  Gazetteer g;
  std::string line;
  size_t line_no = 1;
  while (csv::GetLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = csv::SplitLine(line);
    if (fields.size() != 3) {
      throw Error(ErrorCode::kParse, "gazetteer line " +
                                         std::to_string(line_no) +
                                         ": expected 3 fields");
    }
    Location loc{fields[0], csv::ParseDouble(fields[1], line_no),
                 csv::ParseDouble(fields[2], line_no)};
    CheckCoordinates(loc, "gazetteer line " + std::to_string(line_no));
    g.Add(loc.label, loc.lat, loc.lon);
  }
  return g;
}

Gazetteer Gazetteer::Load(const std::filesystem::path& path) {
  auto in = csv::OpenInput(path);
  return Parse(in);
}

void Gazetteer::Add(std::string label, double lat, double lon) {
  entries_[std::move(label)] = {lat, lon};
}

std::optional<std::pair<double, double>> Gazetteer::Find(
    std::string_view label) const {
  auto it = entries_.find(std::string(label));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Corpus ParseProfiles(std::istream& in, const Gazetteer* gazetteer,
                     const std::filesystem::path& base_dir) {
  std::vector<Profile> profiles;
  std::unordered_map<std::string, size_t> seen;
  bool labeled = false;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    Profile p = ProfileFromJson(obj, where, gazetteer, base_dir);
    if (obj.contains("is_impersonator_of")) labeled = true;
    if (auto [it, fresh] = seen.emplace(p.profile_id, line_no); !fresh) {
      throw Error(ErrorCode::kDuplicateId,
                  where + ": duplicate profile_id '" + p.profile_id +
                      "' (first on line " + std::to_string(it->second) + ")");
    }
    profiles.push_back(std::move(p));
  }
  return Corpus(std::move(profiles), labeled);
}

Corpus LoadProfiles(const std::filesystem::path& path,
                    const Gazetteer* gazetteer) {
  auto in = csv::OpenInput(path);
  try {
    return ParseProfiles(in, gazetteer, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void WriteProfiles(const Corpus& corpus, std::ostream& out) {
  for (const Profile& p : corpus) {
    out << ProfileToJson(p, corpus.impersonation_labeled()).dump() << '\n';
  }
}

void WriteProfiles(const Corpus& corpus, const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  WriteProfiles(corpus, out);
}

GroundTruth::GroundTruth(std::vector<MatchPair> pairs)
    : pairs_(std::move(pairs)) {
  for (const MatchPair& p : pairs_) {
    std::string key = p.id1 + '\x1f' + p.id2;
    if (!keys_.insert(std::move(key)).second) {
      throw Error(ErrorCode::kDuplicatePair,
                  "duplicate ground-truth pair (" + p.id1 + ", " + p.id2 +
                      ")");
    }
    by_id1_[p.id1].push_back(p.id2);
    sn2_ids_.insert(p.id2);
  }
}

bool GroundTruth::IsMatch(std::string_view id1, std::string_view id2) const {
  std::string key(id1);
  key.push_back('\x1f');
  key.append(id2);
  return keys_.contains(key);
}

std::span<const std::string> GroundTruth::MatchesOf(
    std::string_view id1) const {
  auto it = by_id1_.find(std::string(id1));
  if (it == by_id1_.end()) return {};
  return it->second;
}

bool GroundTruth::AtMostOneMatch() const {
  for (const auto& [id1, ids] : by_id1_) {
    if (ids.size() > 1) return false;
  }
  return true;
}

void GroundTruth::Validate(const Corpus& sn1, const Corpus& sn2) const {
  for (const MatchPair& p : pairs_) {
    if (!sn1.Contains(p.id1)) {
      throw Error(ErrorCode::kUnresolvedId,
                  "ground-truth id1 '" + p.id1 + "' not in SN1 corpus");
    }
    if (!sn2.Contains(p.id2)) {
      throw Error(ErrorCode::kUnresolvedId,
                  "ground-truth id2 '" + p.id2 + "' not in SN2 corpus");
    }
  }
}

GroundTruth ParseGroundTruth(std::istream& in, const Corpus& sn1,
                             const Corpus& sn2) {
  csv::ExpectHeader(in, "id1,id2", "ground truth");
  std::vector<MatchPair> pairs;
  std::string line;
  size_t line_no = 1;
  while (csv::GetLine(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = csv::SplitLine(line);
    const std::string where = "ground truth line " + std::to_string(line_no);
    if (fields.size() != 2) {
      throw Error(ErrorCode::kParse, where + ": expected 2 fields");
    }
    if (!sn1.Contains(fields[0])) {
      throw Error(ErrorCode::kUnresolvedId,
                  where + ": id1 '" + fields[0] + "' not in SN1 corpus");
    }
    if (!sn2.Contains(fields[1])) {
      throw Error(ErrorCode::kUnresolvedId,
                  where + ": id2 '" + fields[1] + "' not in SN2 corpus");
    }
    pairs.push_back(MatchPair{std::move(fields[0]), std::move(fields[1])});
  }
  return GroundTruth(std::move(pairs));
}

GroundTruth LoadGroundTruth(const std::filesystem::path& path,
                            const Corpus& sn1, const Corpus& sn2) {
  auto in = csv::OpenInput(path);
  return ParseGroundTruth(in, sn1, sn2);
}

void WriteGroundTruth(const GroundTruth& gt, std::ostream& out) {
  out << "id1,id2\n";
  for (const MatchPair& p : gt.pairs()) {
    out << csv::Escape(p.id1) << ',' << csv::Escape(p.id2) << '\n';
  }
}

void WriteGroundTruth(const GroundTruth& gt,
                      const std::filesystem::path& path) {
  auto out = csv::OpenOutput(path);
  WriteGroundTruth(gt, out);
}

double ThresholdConfig::Get(AttributeKind kind) const {
  switch (kind) {
    case AttributeKind::kRealName: return real_name;
    case AttributeKind::kScreenName: return screen_name;
    case AttributeKind::kLocation: return location_km;
    case AttributeKind::kPhoto: return photo;
    case AttributeKind::kFriends: return friends;
  }
  return 0.0;
}

void ThresholdConfig::Set(AttributeKind kind, double value) {
  switch (kind) {
    case AttributeKind::kRealName: real_name = value; break;
    case AttributeKind::kScreenName: screen_name = value; break;
    case AttributeKind::kLocation: location_km = value; break;
    case AttributeKind::kPhoto: photo = value; break;
    case AttributeKind::kFriends: friends = value; break;
  }
}

void ThresholdConfig::Validate() const {
  for (AttributeKind kind : kAllAttributes) {
    const double v = Get(kind);
    bool ok = std::isfinite(v);
    switch (kind) {
      case AttributeKind::kLocation:
      case AttributeKind::kFriends:
        ok = ok && v >= 0.0;
        break;
      default:
        ok = ok && v >= 0.0 && v <= 1.0;
    }
    if (!ok) {
      throw Error(ErrorCode::kInvalidConfig,
                  "threshold for " + std::string(AttributeName(kind)) +
                      " out of domain: " + std::to_string(v));
    }
  }
}

ThresholdConfig ThresholdConfig::FromJsonText(std::string_view text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("thresholds: ") + e.what());
  }
  if (!obj.is_object()) {
    throw Error(ErrorCode::kParse, "thresholds: expected a JSON object");
  }
  ThresholdConfig th;
  for (const auto& [key, value] : obj.items()) {
    std::string_view name = key;
    if (name == "location_km") name = "location";
    auto kind = ParseAttributeName(name);
    if (!kind || !value.is_number()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "thresholds: unknown or non-numeric key '" + key + "'");
    }
    th.Set(*kind, value.get<double>());
  }
  th.Validate();
  return th;
}

ThresholdConfig ThresholdConfig::Load(const std::filesystem::path& path) {
  auto in = csv::OpenInput(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return FromJsonText(buf.str());
}

std::string ThresholdConfig::ToJsonText() const {
  ordered_json obj;
  for (AttributeKind kind : kAllAttributes) {
    obj[std::string(AttributeName(kind))] = Get(kind);
  }
  return obj.dump();
}

}  // namespace acidmatch
