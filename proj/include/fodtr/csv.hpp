/*
 * Copyright 2026 The fodtr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fodtr::csv {

/// Shortest decimal text that parses back to exactly the same double.
std::string format(double value);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

/// Reads a line, stripping a trailing '\r'. Returns false at end of input.
bool getline(std::istream& in, std::string& line);

/// Joins fields with commas.
std::string join(const std::vector<std::string>& fields);

}  // namespace fodtr::csv
