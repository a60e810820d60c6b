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

// Internal helpers for the small CSV dialect used by every tabular file:
// comma separated, optional double quotes, first row is a header.

#ifndef ACIDMATCH_SRC_CSV_H_
#define ACIDMATCH_SRC_CSV_H_

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "acidmatch/error.h"

namespace acidmatch::csv {

inline std::vector<std::string> SplitLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Reads a line, stripping a trailing carriage return.
inline bool GetLine(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline double ParseDouble(const std::string& text, size_t line_no) {
  try {
    size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                       ": expected a number, got '" + text +
                                       "'");
  }
}

// Throws kParse unless the header matches exactly.
inline void ExpectHeader(std::istream& in, std::string_view expected,
                         std::string_view what) {
  std::string line;
  if (!GetLine(in, line)) {
    throw Error(ErrorCode::kParse,
                std::string(what) + ": missing header '" +
                    std::string(expected) + "'");
  }
  if (line != expected) {
    throw Error(ErrorCode::kParse, std::string(what) + ": line 1: expected header '" +
                                       std::string(expected) + "', got '" +
                                       line + "'");
  }
}

inline std::ifstream OpenInput(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

inline std::ofstream OpenOutput(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

}  // namespace acidmatch::csv

#endif  // ACIDMATCH_SRC_CSV_H_
