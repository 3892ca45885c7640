// Copyright 2026 The residyn Authors
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

#ifndef RESIDYN_CSV_HPP_
#define RESIDYN_CSV_HPP_

#include <string>
#include <vector>

#include "residyn/common.hpp"

namespace residyn {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

// Strict double parse of a whole field. Throws DataError.
double parse_double(const std::string& field, const std::string& context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const;  // -1 if absent
};

// Reads a delimited text file. The delimiter is detected from the first line
// (comma, semicolon, tab, or whitespace). With has_header=false the first line
// is treated as data and synthetic names c0..c{m-1} are used.
CsvTable read_delimited(const std::string& path, bool has_header = true);

// Writes a headered CSV of doubles in full round-trip precision.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Mat& values);

// Reads a headered CSV of doubles (no empty cells allowed).
std::pair<std::vector<std::string>, Mat> read_csv_matrix(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace residyn

#endif  // RESIDYN_CSV_HPP_
