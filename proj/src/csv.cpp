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

#include "residyn/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace residyn {

std::string format_double(double v) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& context) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw DataError(context + ": cannot parse number '" + field + "'");
  return value;
}

int CsvTable::col(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

char detect_delim(const std::string& line) {
  for (char d : {',', ';', '\t'})
    if (line.find(d) != std::string::npos) return d;
  return ' ';
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

}  // namespace

CsvTable read_delimited(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvTable table;
  std::string line;
  char delim = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (first) {
      delim = detect_delim(line);
      first = false;
      auto fields = split_line(line, delim);
      for (auto& f : fields) f = trim(f);
      if (has_header) {
        table.header = fields;
        continue;
      }
      table.header.resize(fields.size());
      for (size_t i = 0; i < fields.size(); ++i)
        table.header[i] = "c" + std::to_string(i);
      table.rows.push_back(fields);
      continue;
    }
    auto fields = split_line(line, delim);
    for (auto& f : fields) f = trim(f);
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Mat& values) {
  if (static_cast<int>(header.size()) != values.cols())
    throw DataError("write_csv: header/column count mismatch for " + path);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out << ',';
      out << format_double(values(r, c));
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

std::pair<std::vector<std::string>, Mat> read_csv_matrix(const std::string& path) {
  CsvTable table = read_delimited(path, true);
  const size_t cols = table.header.size();
  Mat values(static_cast<Eigen::Index>(table.rows.size()),
             static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != cols)
      throw DataError(path + ": row " + std::to_string(r) + " has " +
                      std::to_string(table.rows[r].size()) + " fields, expected " +
                      std::to_string(cols));
    for (size_t c = 0; c < cols; ++c)
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(table.rows[r][c], path);
  }
  return {table.header, values};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace residyn
