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

// Plain-text numeric serialization.  Doubles are printed with %.17g, which
// round-trips IEEE binary64 exactly, so save/load is bit-preserving.
//
// Matrix block format (row-major):
//   matrix <name> <rows> <cols>
//   <cols space-separated values per row line>

#ifndef ELMPC_CORE_TEXTIO_HPP
#define ELMPC_CORE_TEXTIO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace elmpc {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

void write_matrix(std::ostream& os, const std::string& name, const Mat& m);

// Reads the next matrix block; the name must match.
Mat read_matrix(std::istream& is, const std::string& expect_name);

// Whole-line tokenizer used by the parsers; splits on spaces/tabs.
std::vector<std::string> split_ws(const std::string& line);

double parse_double(const std::string& tok);
long parse_long(const std::string& tok);

// CSV with optional leading '#' comment lines and one header row.
void write_csv(const std::string& path, const Mat& data,
               const std::vector<std::string>& columns,
               const std::vector<std::string>& comments);

struct CsvData {
  Mat values;
  std::vector<std::string> columns;
};

CsvData read_csv(const std::string& path);

} // namespace elmpc

#endif
