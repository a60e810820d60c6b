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

// Synthetic two-network corpora with controllable availability,
// consistency, name collisions and impersonators.

#ifndef ACIDMATCH_DATAGEN_H_
#define ACIDMATCH_DATAGEN_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "acidmatch/core.h"

namespace acidmatch {

struct AttributeGenConfig {
  // Presence on each side for matching profiles; filler and impersonators
  // use availability_sn2. Screen names are always present.
  double availability_sn1 = 1.0;
  double availability_sn2 = 1.0;
  // Correlation of the two presence indicators of a matching pair.
  double correlation = 0.0;
  // Share of matching pairs (attribute present on both sides) whose values
  // pass the configured thresholds.
  double consistency = 1.0;
  // Probability an impersonator copies the victim's value exactly.
  double fidelity = 0.0;
};

struct GenConfig {
  size_t n = 1000;  // SN1 profiles
  double matched_fraction = 1.0;
  // Unmatched SN2 profiles; negative means "same as n".
  long long sn2_filler = -1;
  uint64_t seed = 0;
  double impersonation_rate = 0.0;
  // Share of matching pairs whose SN2 names are replaced by names below
  // the blocking floor (Jaro < rename_floor on both fields).
  double rename_rate = 0.0;
  double rename_floor = 0.5;

  // Name pools. Explicit lists override the synthetic pool sizes.
  size_t forenames = 200;
  size_t surnames = 500;
  double zipf_exponent = 1.0;
  // When positive, whole names are drawn Zipf-distributed from this many
  // distinct (forename, surname) combinations instead of independently.
  size_t full_names = 0;
  std::vector<std::string> forename_list;
  std::vector<std::string> surname_list;

  size_t towns = 300;
  double town_zipf_exponent = 1.0;

  // Noise applied to consistent values.
  double name_edit_mean = 1.0;  // mean edit operations (geometric)
  double location_jitter_km = 10.0;
  double photo_bit_flips = 4.0;
  double friend_overlap_rate = 0.5;
  double friends_mean = 30.0;
  size_t friend_universe = 0;  // 0: 20 * n

  std::array<AttributeGenConfig, kNumAttributes> attributes;
  ThresholdConfig thresholds;

  // Throws kInvalidConfig.
  void Validate() const;
  // Unknown keys are rejected so typos do not silently fall back to
  // defaults. Throws kParse or kInvalidConfig.
  static GenConfig FromJsonText(std::string_view text);
  static GenConfig Load(const std::filesystem::path& path);
  std::string ToJsonText() const;
};

struct AttributeCalibration {
  double expected_availability = 0.0;  // P(present on both sides)
  double achieved_availability = 0.0;
  double target_consistency = 0.0;
  double achieved_consistency = 0.0;  // over pairs present on both sides
  size_t available_pairs = 0;
};

struct GeneratedCorpora {
  Corpus sn1;
  Corpus sn2;
  GroundTruth gt;
  std::array<AttributeCalibration, kNumAttributes> calibration;
  size_t impersonators = 0;
  size_t renamed = 0;
};

// Deterministic in the config (including its seed). Throws kInvalidConfig.
GeneratedCorpora Generate(const GenConfig& config);

// Applies exactly `edit_ops` random single-character edits (substitute,
// insert, delete, adjacent transpose), each of which changes the string.
std::string PerturbName(std::string_view name, int edit_ops, uint64_t seed);

// SN2 without any profile matched in `gt`; impersonators and filler stay.
Corpus RemoveMatches(const Corpus& sn2, const GroundTruth& gt);

}  // namespace acidmatch

#endif  // ACIDMATCH_DATAGEN_H_
