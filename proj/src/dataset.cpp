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

#include "fodtr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"

namespace fodtr {

Dataset::Dataset(Eigen::Index n)
    : s(Eigen::VectorXi::Zero(n)),
      w1(Eigen::VectorXi::Zero(n)),
      w2(Eigen::VectorXd::Zero(n)),
      v11(Eigen::VectorXi::Zero(n)),
      v12(Eigen::VectorXi::Zero(n)),
      v13(Eigen::VectorXi::Zero(n)),
      v2(Eigen::VectorXi::Constant(n, kMissing)),
      a(Eigen::VectorXi::Zero(n)),
      y(Eigen::VectorXi::Zero(n)) {}

Observation Dataset::row(Eigen::Index i) const {
  Observation obs;
  obs.s = s[i];
  obs.w1 = w1[i];
  obs.w2 = w2[i];
  obs.v11 = v11[i];
  obs.v12 = v12[i];
  obs.v13 = v13[i];
  if (v2[i] != kMissing) obs.v2 = v2[i];
  obs.a = a[i];
  obs.y = y[i];
  return obs;
}

void Dataset::set_row(Eigen::Index i, const Observation& obs) {
  s[i] = obs.s;
  w1[i] = obs.w1;
  w2[i] = obs.w2;
  v11[i] = obs.v11;
  v12[i] = obs.v12;
  v13[i] = obs.v13;
  v2[i] = obs.v2.value_or(kMissing);
  a[i] = obs.a;
  y[i] = obs.y;
}

std::vector<int> Dataset::v2_levels() const {
  std::set<int> levels;
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (v2[i] != kMissing) levels.insert(v2[i]);
  }
  return {levels.begin(), levels.end()};
}

Dataset Dataset::subset(std::span<const Eigen::Index> rows) const {
  Dataset out(static_cast<Eigen::Index>(rows.size()));
  const bool latent = v2_latent.size() == size();
  if (latent) out.v2_latent.resize(out.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = rows[k];
    const auto j = static_cast<Eigen::Index>(k);
    out.set_row(j, row(i));
    if (latent) out.v2_latent[j] = v2_latent[i];
  }
  return out;
}

void Dataset::validate() const {
  const Eigen::Index n = size();
  auto fail = [](Eigen::Index i, const std::string& msg) {
    throw DataError("row " + std::to_string(i + 1) + ": " + msg);
  };
  auto binary = [&](const Eigen::VectorXi& col, Eigen::Index i, const char* name) {
    if (col[i] != 0 && col[i] != 1) fail(i, std::string(name) + " must be 0 or 1");
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    binary(s, i, "s");
    binary(w1, i, "w1");
    binary(v11, i, "v11");
    binary(v12, i, "v12");
    binary(v13, i, "v13");
    binary(a, i, "a");
    binary(y, i, "y");
    if (!std::isfinite(w2[i])) fail(i, "w2 must be finite");
    if (s[i] == 1 && v2[i] == kMissing) fail(i, "v2 missing for a record with s = 1");
    if (s[i] == 0 && v2[i] != kMissing) fail(i, "v2 present for a record with s = 0");
    if (v2[i] != kMissing && v2[i] < 0) fail(i, "v2 must be a non-negative level");
  }
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  out << kDatasetHeader << '\n';
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out << data.s[i] << ',' << data.w1[i] << ',' << csv::format(data.w2[i]) << ','
        << data.v11[i] << ',' << data.v12[i] << ',' << data.v13[i] << ',';
    if (data.v2[i] != kMissing) out << data.v2[i];
    out << ',' << data.a[i] << ',' << data.y[i] << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!csv::getline(in, line)) throw DataError("empty dataset file");
  if (line != kDatasetHeader) {
    throw DataError("unexpected header '" + line + "', expected '" + std::string(kDatasetHeader) + "'");
  }
  std::vector<Observation> rows;
  std::size_t row_number = 0;
  while (csv::getline(in, line)) {
    if (line.empty()) continue;
    ++row_number;
    const auto fields = csv::split(line);
    const std::string where = "row " + std::to_string(row_number);
    if (fields.size() != 9) {
      throw DataError(where + ": expected 9 fields, found " + std::to_string(fields.size()));
    }
    try {
      Observation obs;
      obs.s = static_cast<int>(csv::parse_int(fields[0], "s"));
      obs.w1 = static_cast<int>(csv::parse_int(fields[1], "w1"));
      obs.w2 = csv::parse_double(fields[2], "w2");
      obs.v11 = static_cast<int>(csv::parse_int(fields[3], "v11"));
      obs.v12 = static_cast<int>(csv::parse_int(fields[4], "v12"));
      obs.v13 = static_cast<int>(csv::parse_int(fields[5], "v13"));
      if (!fields[6].empty()) obs.v2 = static_cast<int>(csv::parse_int(fields[6], "v2"));
      obs.a = static_cast<int>(csv::parse_int(fields[7], "a"));
      obs.y = static_cast<int>(csv::parse_int(fields[8], "y"));
      rows.push_back(obs);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  Dataset data(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) data.set_row(static_cast<Eigen::Index>(i), rows[i]);
  data.validate();
  return data;
}

}  // namespace fodtr
