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

// Run manifests: what a command read, wrote and was configured with.

#ifndef ACIDMATCH_MANIFEST_H_
#define ACIDMATCH_MANIFEST_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acidmatch {

inline constexpr std::string_view kVersion = "1.0.0";

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view bytes);
// Throws kIo.
std::string Sha256File(const std::filesystem::path& path);

class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_seed(uint64_t seed) { seed_ = seed; }
  // Hash of the canonical configuration text.
  void set_config(std::string_view canonical_text);
  void AddInput(const std::filesystem::path& path);
  void AddOutput(const std::filesystem::path& path);
  // Free-form results (containment rate, calibration, ...); `json_value`
  // must be valid JSON.
  void AddResult(const std::string& key, std::string json_value);
  void AddParameter(const std::string& key, std::string value);

  // Digests every output, then writes `<dir>/<command>_manifest.json`.
  std::filesystem::path Write(const std::filesystem::path& dir) const;
  std::string ToJsonText() const;

  const std::string& command() const { return command_; }
  const std::vector<std::filesystem::path>& outputs() const {
    return outputs_;
  }

 private:
  std::string command_;
  uint64_t seed_ = 0;
  std::string config_hash_;
  std::vector<std::pair<std::string, std::string>> inputs_;  // path, digest
  std::vector<std::filesystem::path> outputs_;
  std::map<std::string, std::string> parameters_;
  std::map<std::string, std::string> results_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point started_steady_;
};

}  // namespace acidmatch

#endif  // ACIDMATCH_MANIFEST_H_
