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
#include <cstdint>
#include <vector>

namespace fodtr {

/// Random balanced partition of {0, ..., n-1} into J prediction sets.
struct FoldPlan {
  int folds = 0;
  std::vector<int> assignment;  // record index -> fold id

  Eigen::Index size() const { return static_cast<Eigen::Index>(assignment.size()); }
  /// Prediction set D_j.
  std::vector<Eigen::Index> holdout(int fold) const;
  /// Training set T_j, the complement of D_j.
  std::vector<Eigen::Index> training(int fold) const;
  std::vector<Eigen::Index> sizes() const;
};

/// Shuffles the indices with a counter-based stream and deals them out
/// round-robin, so fold sizes differ by at most one. Requires 2 <= J <= n.
FoldPlan make_folds(Eigen::Index n, int folds, std::uint64_t seed);

/// Cross-fitting fold count by sample size: 20 up to n = 500, 10 up to
/// n = 2500, 2 above.
int fold_schedule(Eigen::Index n);

}  // namespace fodtr
