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

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "acidmatch/error.h"

namespace acidmatch {

namespace {

[[noreturn]] void Undecodable(const std::string& why) {
  throw Error(ErrorCode::kUndecodableImage, "undecodable image: " + why);
}

bool IsPng(std::span<const uint8_t> bytes) {
  static constexpr uint8_t kSig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return bytes.size() >= 8 && std::equal(kSig, kSig + 8, bytes.begin());
}

Image DecodePng(std::span<const uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    Undecodable(png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image img;
  img.width = static_cast<int>(png.width);
  img.height = static_cast<int>(png.height);
  img.channels = 3;
  img.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string why = png.message;
    png_image_free(&png);
    Undecodable(why);
  }
  return img;
}

// Minimal netpbm reader for P2/P3/P5/P6 with maxval <= 255.
class PnmReader {
 public:
  explicit PnmReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  Image Read() {
    if (bytes_.size() < 2 || bytes_[0] != 'P') Undecodable("unknown format");
    const char kind = static_cast<char>(bytes_[1]);
    if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
      Undecodable("unsupported netpbm variant");
    }
    pos_ = 2;
    Image img;
    img.width = ReadHeaderInt();
    img.height = ReadHeaderInt();
    const int maxval = ReadHeaderInt();
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255) {
      Undecodable("bad netpbm header");
    }
    img.channels = (kind == '3' || kind == '6') ? 3 : 1;
    const size_t count =
        static_cast<size_t>(img.width) * img.height * img.channels;
    img.pixels.resize(count);
    if (kind == '5' || kind == '6') {
      ++pos_;  // single whitespace after maxval
      if (pos_ + count > bytes_.size()) Undecodable("truncated pixel data");
      for (size_t i = 0; i < count; ++i) {
        img.pixels[i] = Scale(bytes_[pos_ + i], maxval);
      }
    } else {
      for (size_t i = 0; i < count; ++i) {
        img.pixels[i] = Scale(ReadHeaderInt(), maxval);
      }
    }
    return img;
  }

 private:
  static uint8_t Scale(int v, int maxval) {
    if (v < 0 || v > maxval) Undecodable("sample out of range");
    return static_cast<uint8_t>((v * 255 + maxval / 2) / maxval);
  }

  int ReadHeaderInt() {
    for (;;) {
      if (pos_ >= bytes_.size()) Undecodable("truncated header");
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
    long value = 0;
    size_t digits = 0;
    while (pos_ < bytes_.size() &&
           std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 30)) Undecodable("header value too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) Undecodable("expected integer");
    return static_cast<int>(value);
  }

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

// Box-filter resample of one channel to kPhashResize x kPhashResize. Each
// output cell averages the source pixels it covers, weighted by overlap area.
std::vector<double> AreaResize(const Image& img, int channel) {
  constexpr int kN = kPhashResize;
  std::vector<double> out(kN * kN, 0.0);
  const double sx = static_cast<double>(img.width) / kN;
  const double sy = static_cast<double>(img.height) / kN;
  for (int oy = 0; oy < kN; ++oy) {
    const double y0 = oy * sy;
    const double y1 = (oy + 1) * sy;
    for (int ox = 0; ox < kN; ++ox) {
      const double x0 = ox * sx;
      const double x1 = (ox + 1) * sx;
      double acc = 0.0;
      for (int y = static_cast<int>(std::floor(y0));
           y < std::min(img.height, static_cast<int>(std::ceil(y1))); ++y) {
        const double wy = std::min(y1, y + 1.0) - std::max(y0, double(y));
        if (wy <= 0.0) continue;
        for (int x = static_cast<int>(std::floor(x0));
             x < std::min(img.width, static_cast<int>(std::ceil(x1))); ++x) {
          const double wx = std::min(x1, x + 1.0) - std::max(x0, double(x));
          if (wx <= 0.0) continue;
          const size_t idx =
              (static_cast<size_t>(y) * img.width + x) * img.channels + channel;
          acc += wx * wy * img.pixels[idx];
        }
      }
      out[oy * kN + ox] = acc / (sx * sy);
    }
  }
  return out;
}

}  // namespace

Image DecodeImage(std::span<const uint8_t> bytes) {
  if (IsPng(bytes)) return DecodePng(bytes);
  return PnmReader(bytes).Read();
}

uint64_t Phash64(const Image& image) {
  constexpr int kN = kPhashResize;
  constexpr int kB = kPhashBlock;
  if (image.width <= 0 || image.height <= 0 ||
      (image.channels != 1 && image.channels != 3) ||
      image.pixels.size() != static_cast<size_t>(image.width) * image.height *
                                 image.channels) {
    Undecodable("inconsistent image buffer");
  }

  // 1. Resize, 2. luma.
  std::vector<double> gray;
  if (image.channels == 1) {
    gray = AreaResize(image, 0);
  } else {
    const std::vector<double> r = AreaResize(image, 0);
    const std::vector<double> g = AreaResize(image, 1);
    const std::vector<double> b = AreaResize(image, 2);
    gray.resize(kN * kN);
    for (int i = 0; i < kN * kN; ++i) {
      gray[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    }
  }

  // 3. Orthonormal DCT-II; only the low-frequency block is needed.
  std::array<std::array<double, kN>, kB> basis{};
  for (int u = 0; u < kB; ++u) {
    const double scale = u == 0 ? std::sqrt(1.0 / kN) : std::sqrt(2.0 / kN);
    for (int x = 0; x < kN; ++x) {
      basis[u][x] =
          scale * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * kN));
    }
  }
  // Rows first: tmp[y][v] = sum_x gray[y][x] * basis[v][x].
  std::array<std::array<double, kB>, kN> tmp{};
  for (int y = 0; y < kN; ++y) {
    for (int v = 0; v < kB; ++v) {
      double acc = 0.0;
      for (int x = 0; x < kN; ++x) acc += gray[y * kN + x] * basis[v][x];
      tmp[y][v] = acc;
    }
  }
  std::array<double, kB * kB> coeff{};
  for (int u = 0; u < kB; ++u) {
    for (int v = 0; v < kB; ++v) {
      double acc = 0.0;
      for (int y = 0; y < kN; ++y) acc += tmp[y][v] * basis[u][y];
      coeff[u * kB + v] = acc;
    }
  }

  // 4. Median of the 63 AC coefficients (an exact middle element).
  std::array<double, kB * kB - 1> ac{};
  std::copy(coeff.begin() + 1, coeff.end(), ac.begin());
  std::nth_element(ac.begin(), ac.begin() + ac.size() / 2, ac.end());
  const double median = ac[ac.size() / 2];

  // Coefficients within rounding noise of the median count as ties, so flat
  // regions do not hash to arbitrary bits.
  double scale = 1.0;
  for (double c : coeff) scale = std::max(scale, std::abs(c));
  const double cut = median + 1e-9 * scale;
  uint64_t hash = 0;
  for (int k = 0; k < kB * kB; ++k) {
    if (coeff[k] > cut) hash |= uint64_t{1} << k;
  }
  return hash;
}

uint64_t Phash64(std::span<const uint8_t> bytes) {
  return Phash64(DecodeImage(bytes));
}

uint64_t Phash64File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open image " + path.string());
  }
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return Phash64(bytes);
}

}  // namespace acidmatch
