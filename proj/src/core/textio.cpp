/*
 * Copyright 2026 the elmpc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/textio.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "core/error.hpp"

namespace elmpc {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that still round-trips; keeps the
  // files readable without giving up bit-exact reload.
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == v) return probe;
  }
  return buf;
}

void write_matrix(std::ostream& os, const std::string& name, const Mat& m) {
  os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  require(end && *end == '\0' && errno != ERANGE, Errc::parse_error,
          "bad number: '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  require(end && *end == '\0' && errno != ERANGE, Errc::parse_error,
          "bad integer: '" + tok + "'");
  return v;
}

Mat read_matrix(std::istream& is, const std::string& expect_name) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
          "unexpected end of file before matrix " + expect_name);
  auto toks = split_ws(line);
  require(toks.size() == 4 && toks[0] == "matrix" && toks[1] == expect_name,
          Errc::parse_error, "expected 'matrix " + expect_name + "' header");
  long rows = parse_long(toks[2]);
  long cols = parse_long(toks[3]);
  require(rows >= 0 && cols >= 0, Errc::parse_error,
          "negative matrix shape for " + expect_name);
  Mat m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    require(static_cast<bool>(std::getline(is, line)), Errc::parse_error,
            "truncated matrix " + expect_name);
    auto vals = split_ws(line);
    require(static_cast<long>(vals.size()) == cols, Errc::parse_error,
            "row width mismatch in matrix " + expect_name);
    for (long j = 0; j < cols; ++j) m(i, j) = parse_double(vals[j]);
  }
  return m;
}

void write_csv(const std::string& path, const Mat& data,
               const std::vector<std::string>& columns,
               const std::vector<std::string>& comments) {
  require(static_cast<Index>(columns.size()) == data.cols(),
          Errc::dimension_mismatch, "write_csv: column name count");
  std::ofstream os(path);
  require(os.good(), Errc::io_error, "cannot open for write: " + path);
  for (const auto& c : comments) os << "# " << c << '\n';
  for (size_t j = 0; j < columns.size(); ++j) {
    if (j) os << ',';
    os << columns[j];
  }
  os << '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      if (j) os << ',';
      os << format_double(data(i, j));
    }
    os << '\n';
  }
  os.flush();
  require(os.good(), Errc::io_error, "write failed: " + path);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace

CsvData read_csv(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), Errc::io_error, "cannot open: " + path);
  std::string line;
  CsvData out;
  std::vector<std::vector<double>> rows;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] == '#') continue;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      out.columns = cells;
      have_header = true;
      continue;
    }
    require(cells.size() == out.columns.size(), Errc::parse_error,
            "ragged CSV row in " + path);
    std::vector<double> row(cells.size());
    for (size_t j = 0; j < cells.size(); ++j) row[j] = parse_double(cells[j]);
    rows.push_back(std::move(row));
  }
  require(have_header, Errc::parse_error, "CSV has no header row: " + path);
  out.values.resize(static_cast<Index>(rows.size()),
                    static_cast<Index>(out.columns.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      out.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

} // namespace elmpc
