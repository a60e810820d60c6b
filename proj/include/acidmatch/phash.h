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

// 64-bit DCT perceptual hash. The recipe is normative; docs/phash.md spells
// it out step by step.

#ifndef ACIDMATCH_PHASH_H_
#define ACIDMATCH_PHASH_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace acidmatch {

// 8-bit image, row-major, 1 (gray) or 3 (RGB) interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;
};

// Decodes PNG or binary/ASCII PNM (P2, P3, P5, P6). Throws
// kUndecodableImage on anything else, including truncated input.
Image DecodeImage(std::span<const uint8_t> bytes);

inline constexpr int kPhashResize = 32;
inline constexpr int kPhashBlock = 8;

// Area-average resize to 32x32, Rec.601 luma, orthonormal 2-D DCT-II, then
// one bit per coefficient of the low-frequency 8x8 block: bit (8*u + v) is set
// when coefficient (u, v) is above the median of the 63 non-DC coefficients
// by more than rounding noise.
uint64_t Phash64(const Image& image);
uint64_t Phash64(std::span<const uint8_t> bytes);
uint64_t Phash64File(const std::filesystem::path& path);

}  // namespace acidmatch

#endif  // ACIDMATCH_PHASH_H_
