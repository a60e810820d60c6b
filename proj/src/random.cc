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

#include "acidmatch/random.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "acidmatch/error.h"

namespace acidmatch {

uint64_t SplitMix64(uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t StreamKey(uint64_t seed, std::string_view purpose, uint64_t index) {
  uint64_t k = SplitMix64(seed ^ 0x6a09e667f3bcc909ULL);
  k = SplitMix64(k ^ Fnv1a64(purpose));
  return SplitMix64(k ^ SplitMix64(index + 0x3c6ef372fe94f82bULL));
}

uint64_t Rng::UniformInt(uint64_t n) {
  // Rejection keeps the result exactly uniform.
  const uint64_t limit = max() - max() % n;
  uint64_t x;
  do {
    x = Next();
  } while (x >= limit);
  return x % n;
}

double Rng::Normal() {
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::Exponential(double mean) {
  return -mean * std::log1p(-Uniform());
}

std::vector<size_t> Rng::SampleWithoutReplacement(size_t n, size_t k) {
  std::vector<size_t> out;
  out.reserve(k);
  if (k * 4 >= n) {
    // Partial Fisher-Yates.
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(UniformInt(n - i));
      std::swap(idx[i], idx[j]);
      out.push_back(idx[i]);
    }
    return out;
  }
  std::unordered_set<size_t> seen;
  while (out.size() < k) {
    size_t j = static_cast<size_t>(UniformInt(n));
    if (seen.insert(j).second) out.push_back(j);
  }
  return out;
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  cdf_.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::kInvalidConfig, "sampler weights must be >= 0");
    }
    total += w;
    cdf_.push_back(total);
  }
  if (cdf_.empty() || total <= 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "sampler needs positive mass");
  }
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

DiscreteSampler DiscreteSampler::Zipf(size_t count, double exponent) {
  std::vector<double> w(count);
  for (size_t i = 0; i < count; ++i) {
    w[i] = std::pow(static_cast<double>(i + 1), -exponent);
  }
  return DiscreteSampler(w);
}

size_t DiscreteSampler::Sample(Rng& rng) const {
  const double u = rng.Uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<size_t>(it - cdf_.begin());
}

double DiscreteSampler::Probability(size_t i) const {
  return i == 0 ? cdf_[0] : cdf_[i] - cdf_[i - 1];
}

}  // namespace acidmatch
