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

#include "acidmatch/phash.h"

#include <gtest/gtest.h>
#include <png.h>

#include <bit>
#include <cmath>
#include <string>

#include "acidmatch/error.h"

namespace acidmatch {
namespace {

// Golden hashes come from a numpy/scipy implementation (box-filter resize
// to 32x32, BT.601 luma, orthonormal DCT-II, median of the 63 AC terms).

Image Rgb50x40() {
  Image img{50, 40, 3, {}};
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 50; ++x) {
      img.pixels.push_back(static_cast<uint8_t>((7 * x + 3 * y) % 256));
      img.pixels.push_back(static_cast<uint8_t>((x * x + y) % 256));
      img.pixels.push_back(static_cast<uint8_t>((x * y) % 256));
    }
  }
  return img;
}

std::vector<uint8_t> Gray33x47Pgm() {
  const std::string header = "P5\n# test\n33 47\n255\n";
  std::vector<uint8_t> bytes(header.begin(), header.end());
  for (int y = 0; y < 47; ++y) {
    for (int x = 0; x < 33; ++x) {
      bytes.push_back(static_cast<uint8_t>((x * 11 + y * y * 3) % 256));
    }
  }
  return bytes;
}

Image Wave64() {
  Image img{64, 64, 1, {}};
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      img.pixels.push_back(static_cast<uint8_t>(
          std::lround(128 + 100 * std::sin(x / 5.0) * std::cos(y / 7.0))));
    }
  }
  return img;
}

std::vector<uint8_t> EncodePng(const Image& img) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = img.width;
  png.height = img.height;
  png.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  EXPECT_TRUE(png_image_write_to_memory(&png, nullptr, &size, 0,
                                        img.pixels.data(), 0, nullptr));
  std::vector<uint8_t> out(size);
  EXPECT_TRUE(png_image_write_to_memory(&png, out.data(), &size, 0,
                                        img.pixels.data(), 0, nullptr));
  out.resize(size);
  return out;
}

TEST(PhashTest, MatchesGoldenValues) {
  EXPECT_EQ(Phash64(Rgb50x40()), 0x3eeece9c6a4c9881ULL);
  EXPECT_EQ(Phash64(Gray33x47Pgm()), 0xd85ad0bbd298d239ULL);
  EXPECT_EQ(Phash64(Wave64()), 0x1ee11fa11f1ea01fULL);
}

TEST(PhashTest, FlatImages) {
  // Every AC term is zero, so only a positive DC term can set a bit.
  EXPECT_EQ(Phash64(Image{8, 8, 1, std::vector<uint8_t>(64, 0)}), 0u);
  EXPECT_EQ(Phash64(Image{8, 8, 3, std::vector<uint8_t>(192, 255)}), 1u);
}

TEST(PhashTest, DecodersAgree) {
  const Image rgb = Rgb50x40();
  EXPECT_EQ(Phash64(EncodePng(rgb)), Phash64(rgb));

  const std::string header = "P6\n50 40\n255\n";
  std::vector<uint8_t> ppm(header.begin(), header.end());
  ppm.insert(ppm.end(), rgb.pixels.begin(), rgb.pixels.end());
  EXPECT_EQ(Phash64(ppm), Phash64(rgb));

  // Plain-text netpbm.
  std::string p2 = "P2\n2 2\n255\n0 64\n128 255\n";
  const Image small = DecodeImage(
      std::span(reinterpret_cast<const uint8_t*>(p2.data()), p2.size()));
  EXPECT_EQ(small.pixels, (std::vector<uint8_t>{0, 64, 128, 255}));
}

TEST(PhashTest, RobustToSmallPerturbations) {
  Image a = Wave64();
  Image b = a;
  for (uint8_t& p : b.pixels) p = static_cast<uint8_t>(std::min(255, p + 3));
  EXPECT_LE(std::popcount(Phash64(a) ^ Phash64(b)), 4);
}

TEST(PhashTest, RejectsGarbage) {
  const std::vector<uint8_t> junk = {'G', 'I', 'F', '8', '9', 'a'};
  try {
    Phash64(junk);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndecodableImage);
  }
  const std::string truncated = "P5\n4 4\n255\n\x01\x02";
  EXPECT_THROW(DecodeImage(std::span(
                   reinterpret_cast<const uint8_t*>(truncated.data()),
                   truncated.size())),
               Error);
}

}  // namespace
}  // namespace acidmatch
