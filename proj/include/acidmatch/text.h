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

#ifndef ACIDMATCH_TEXT_H_
#define ACIDMATCH_TEXT_H_

#include <string>
#include <string_view>

namespace acidmatch {

// Invalid sequences decode to U+FFFD.
std::u32string DecodeUtf8(std::string_view bytes);
std::string EncodeUtf8(std::u32string_view text);

// Simple (one-to-one) case folding for Latin, Greek and Cyrillic.
char32_t FoldCase(char32_t c);

bool IsSpace(char32_t c);

// Decoded, case-folded, with leading and trailing whitespace removed. This
// is the canonical form used for every string comparison.
std::u32string NormalizeForComparison(std::string_view text);

}  // namespace acidmatch

#endif  // ACIDMATCH_TEXT_H_
