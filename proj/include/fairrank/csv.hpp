// Copyright 2026 The fairrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>
#include <unicode/utf8.h>

#include <charconv>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "fairrank/core.hpp"

namespace fairrank::csv {

/// True if `s` is well-formed UTF-8.
inline bool valid_utf8(std::string_view s) {
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    UChar32 c;
    U8_NEXT(p, i, len, c);
    if (c < 0) return false;
  }
  return true;
}

/// One data row with its 1-based line number in the source.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Reads a headered CSV stream. Fields may be double-quoted; a backslash
/// escapes the next character inside fields. Blank lines are skipped. The
/// header must match `expected_header` exactly.
inline std::vector<Row> read(std::istream& in, const std::vector<std::string>& expected_header,
                             std::string_view source_name) {
  using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (boost::algorithm::trim_copy(line).empty()) continue;
    if (!valid_utf8(line)) {
      throw InputError(std::string(source_name) + ": row " + std::to_string(lineno) +
                       ": invalid UTF-8");
    }
    std::vector<std::string> fields;
    try {
      Tokenizer tok(line);
      for (auto& f : tok) fields.push_back(f);
    } catch (const boost::escaped_list_error& e) {
      throw InputError(std::string(source_name) + ": row " + std::to_string(lineno) +
                       ": malformed CSV (" + e.what() + ")");
    }
    if (!have_header) {
      for (auto& f : fields) boost::algorithm::trim(f);
      if (fields != expected_header) {
        std::string want;
        for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
        throw InputError(std::string(source_name) + ": expected header '" + want + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != expected_header.size()) {
      throw InputError(std::string(source_name) + ": row " + std::to_string(lineno) +
                       ": expected " + std::to_string(expected_header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    for (auto& f : fields) boost::algorithm::trim(f);
    rows.push_back(Row{lineno, std::move(fields)});
  }
  if (!have_header) {
    throw InputError(std::string(source_name) + ": missing header row");
  }
  return rows;
}

/// Splits on `sep`, trimming items and dropping empty ones.
inline std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    auto item = boost::algorithm::trim_copy(std::string(s.substr(start, end - start)));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace fairrank::csv
