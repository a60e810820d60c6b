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

#include "acidmatch/manifest.h"

#include <openssl/evp.h>

#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include "acidmatch/classifiers.h"
#include "acidmatch/error.h"
#include "json.hpp"

namespace acidmatch {

namespace {

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::kIo, "SHA-256 initialization failed");
    }
  }

  void Update(const void* data, size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) {
      throw Error(ErrorCode::kIo, "SHA-256 update failed");
    }
  }

  std::string HexFinal() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) {
      throw Error(ErrorCode::kIo, "SHA-256 finalization failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string Sha256Hex(std::string_view bytes) {
  Digest d;
  d.Update(bytes.data(), bytes.size());
  return d.HexFinal();
}

std::string Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  Digest d;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    if (in.gcount() > 0) d.Update(buf, static_cast<size_t>(in.gcount()));
  }
  return d.HexFinal();
}

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)),
      started_(std::chrono::system_clock::now()),
      started_steady_(std::chrono::steady_clock::now()) {}

void RunManifest::set_config(std::string_view canonical_text) {
  config_hash_ = Sha256Hex(canonical_text);
}

void RunManifest::AddInput(const std::filesystem::path& path) {
  inputs_.emplace_back(path.string(), Sha256File(path));
}

void RunManifest::AddOutput(const std::filesystem::path& path) {
  outputs_.push_back(path);
}

void RunManifest::AddResult(const std::string& key, std::string json_value) {
  results_[key] = std::move(json_value);
}

void RunManifest::AddParameter(const std::string& key, std::string value) {
  parameters_[key] = std::move(value);
}

std::string RunManifest::ToJsonText() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["command"] = command_;
  j["seed"] = seed_;
  j["config_sha256"] = config_hash_.empty() ? ordered_json(nullptr)
                                            : ordered_json(config_hash_);
  j["parameters"] = ordered_json::object();
  for (const auto& [k, v] : parameters_) j["parameters"][k] = v;
  j["inputs"] = ordered_json::array();
  for (const auto& [path, digest] : inputs_) {
    j["inputs"].push_back({{"path", path}, {"sha256", digest}});
  }
  j["outputs"] = ordered_json::array();
  for (const auto& path : outputs_) {
    j["outputs"].push_back(
        {{"path", path.string()}, {"sha256", Sha256File(path)}});
  }
  j["results"] = ordered_json::object();
  for (const auto& [k, v] : results_) {
    j["results"][k] = ordered_json::parse(v);
  }
  j["versions"] = {{"acidmatch", std::string(kVersion)},
                   {"model_format", kModelFormatVersion},
                   {"compiler", __VERSION__}};
  const std::time_t t = std::chrono::system_clock::to_time_t(started_);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
  const double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - started_steady_)
                             .count();
  j["wall_clock"] = {{"started_utc", stamp}, {"elapsed_seconds", elapsed}};
  return j.dump(2) + "\n";
}

std::filesystem::path RunManifest::Write(
    const std::filesystem::path& dir) const {
  const std::filesystem::path path = dir / (command_ + "_manifest.json");
  const std::string text = ToJsonText();
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
  return path;
}

}  // namespace acidmatch
