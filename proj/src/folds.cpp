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

#include "fodtr/folds.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fodtr/error.hpp"
#include "fodtr/random.hpp"

namespace fodtr {

std::vector<Eigen::Index> FoldPlan::holdout(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

std::vector<Eigen::Index> FoldPlan::training(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

std::vector<Eigen::Index> FoldPlan::sizes() const {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(folds), 0);
  for (const int f : assignment) ++out[static_cast<std::size_t>(f)];
  return out;
}

FoldPlan make_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("fold count must be >= 2, got " + std::to_string(folds));
  if (folds > n) {
    throw ConfigError("fold count " + std::to_string(folds) + " exceeds sample size " + std::to_string(n));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  CounterStream rng(seed, StreamDomain::kFoldShuffle, 0);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  FoldPlan plan;
  plan.folds = folds;
  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    plan.assignment[static_cast<std::size_t>(order[k])] = static_cast<int>(k % static_cast<std::size_t>(folds));
  }
  return plan;
}

int fold_schedule(Eigen::Index n) {
  if (n <= 500) return static_cast<int>(std::min<Eigen::Index>(20, std::max<Eigen::Index>(2, n)));
  if (n <= 2500) return 10;
  return 2;
}

}  // namespace fodtr
