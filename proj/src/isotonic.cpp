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

#include "fodtr/isotonic.hpp"

#include <algorithm>
#include <numeric>

#include "fodtr/error.hpp"

namespace fodtr {

StepFunction::StepFunction(std::vector<double> edges, std::vector<double> levels)
    : edges_(std::move(edges)), levels_(std::move(levels)) {
  if (edges_.size() != levels_.size()) throw Error("step function edges/levels size mismatch");
}

double StepFunction::operator()(double x) const {
  if (levels_.empty()) return x;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  if (it == edges_.begin()) return levels_.front();
  return levels_[static_cast<std::size_t>(it - edges_.begin()) - 1];
}

StepFunction fit_isotonic(std::span<const double> raw, std::span<const double> outcomes) {
  if (raw.size() != outcomes.size()) throw Error("isotonic: raw and outcome lengths differ");
  if (raw.empty()) throw Error("isotonic: no points");
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return raw[i] < raw[j]; });

  struct Block {
    double edge;
    double sum;
    double weight;
    double mean() const { return sum / weight; }
  };
  std::vector<Block> blocks;
  blocks.reserve(raw.size());
  for (std::size_t k = 0; k < order.size();) {
    const double x = raw[order[k]];
    Block b{x, 0.0, 0.0};
    for (; k < order.size() && raw[order[k]] == x; ++k) {
      b.sum += outcomes[order[k]];
      b.weight += 1.0;
    }
    blocks.push_back(b);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() >= blocks.back().mean()) {
      Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().weight += top.weight;
    }
  }
  std::vector<double> edges, levels;
  for (const Block& b : blocks) {
    edges.push_back(b.edge);
    levels.push_back(b.mean());
  }
  return StepFunction(std::move(edges), std::move(levels));
}

Eigen::VectorXd isotonic_fitted(std::span<const double> raw, std::span<const double> outcomes) {
  const StepFunction f = fit_isotonic(raw, outcomes);
  Eigen::VectorXd out(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) out[static_cast<Eigen::Index>(i)] = f(raw[i]);
  return out;
}

}  // namespace fodtr
