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

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace fodtr {

inline constexpr int kMissing = -1;
inline constexpr std::string_view kDatasetHeader = "s,w1,w2,v11,v12,v13,v2,a,y";

/// One fused-trial record. V2 is only measured in trial S = 1.
struct Observation {
  int s = 0;
  int w1 = 0;
  double w2 = 0.0;
  int v11 = 0;
  int v12 = 0;
  int v13 = 0;
  std::optional<int> v2;
  int a = 0;
  int y = 0;
};

/// Index of the V1 pattern (v11, v12, v13) in [0, 8).
inline int v1_cell_index(int v11, int v12, int v13) { return 4 * v11 + 2 * v12 + v13; }

/// Column-major store of fused-trial records. `v2` holds kMissing wherever
/// the modifier was not measured; `v2_latent` is only populated by the
/// simulator and must never be read by estimators.
struct Dataset {
  Eigen::VectorXi s;
  Eigen::VectorXi w1;
  Eigen::VectorXd w2;
  Eigen::VectorXi v11;
  Eigen::VectorXi v12;
  Eigen::VectorXi v13;
  Eigen::VectorXi v2;
  Eigen::VectorXi a;
  Eigen::VectorXi y;
  Eigen::VectorXi v2_latent;

  Dataset() = default;
  explicit Dataset(Eigen::Index n);

  Eigen::Index size() const { return s.size(); }
  Observation row(Eigen::Index i) const;
  void set_row(Eigen::Index i, const Observation& obs);

  int v1_cell(Eigen::Index i) const { return v1_cell_index(v11[i], v12[i], v13[i]); }
  bool v2_observed(Eigen::Index i) const { return v2[i] != kMissing; }

  /// Sorted distinct observed V2 values.
  std::vector<int> v2_levels() const;

  /// Rows in the given order; latent V2 travels along when present.
  Dataset subset(std::span<const Eigen::Index> rows) const;

  /// Throws DataError naming the 1-based data row on the first violation:
  /// non-binary indicator, or V2 present iff S = 1 broken.
  void validate() const;
};

void write_dataset_csv(const Dataset& data, std::ostream& out);

/// Parses the `s,w1,w2,v11,v12,v13,v2,a,y` schema and validates it.
Dataset read_dataset_csv(std::istream& in);

}  // namespace fodtr
