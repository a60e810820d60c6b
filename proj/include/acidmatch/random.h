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

// Seeded random streams.
//
// Every consumer of randomness derives its own stream from the run seed, a
// purpose tag and a counter (for example the index of the profile being
// generated). Streams never share state, so the order in which work is
// scheduled cannot change any drawn value. Distributions are implemented here
// rather than taken from <random> because the standard leaves their
// algorithms unspecified, and outputs must be identical across toolchains.

#ifndef ACIDMATCH_RANDOM_H_
#define ACIDMATCH_RANDOM_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace acidmatch {

uint64_t SplitMix64(uint64_t x);

// 64-bit FNV-1a, used to turn purpose tags into stream keys.
uint64_t Fnv1a64(std::string_view bytes);

uint64_t StreamKey(uint64_t seed, std::string_view purpose, uint64_t index);

class Rng {
 public:
  using result_type = uint64_t;

  Rng(uint64_t seed, std::string_view purpose, uint64_t index = 0)
      : state_(StreamKey(seed, purpose, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return Next(); }

  uint64_t Next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return SplitMix64(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);

  bool Bernoulli(double p) { return Uniform() < p; }

  double Normal();

  // Exponential with the given mean.
  double Exponential(double mean);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // k distinct indices from [0, n), in draw order. Requires k <= n.
  std::vector<size_t> SampleWithoutReplacement(size_t n, size_t k);

 private:
  uint64_t state_;
};

// Samples indices according to fixed nonnegative weights.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> weights);

  // Zipf weights 1/(i+1)^exponent over `count` items.
  static DiscreteSampler Zipf(size_t count, double exponent);

  size_t Sample(Rng& rng) const;
  size_t size() const { return cdf_.size(); }
  double Probability(size_t i) const;

 private:
  std::vector<double> cdf_;
};

}  // namespace acidmatch

#endif  // ACIDMATCH_RANDOM_H_
