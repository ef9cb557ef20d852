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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fodtr/dataset.hpp"

namespace fodtr {

enum class Expansion { kMainEffects, kSaturated };

/// Which dataset columns enter a regression and how. Binary columns either
/// enter as main effects or are fully crossed (every interaction among them);
/// continuous columns always enter linearly.
struct DesignSpec {
  std::vector<std::string> binary;
  std::vector<std::string> continuous;
  Expansion expansion = Expansion::kSaturated;

  /// Non-empty subsets of the binary columns used as terms, as bitmasks
  /// (bit k = binary[k]). Saturated gives all 2^k - 1 of them.
  std::vector<std::uint32_t> term_masks() const;
  std::vector<std::string> term_names() const;
  std::size_t coefficient_count() const;  // intercept + terms + continuous

  bool operator==(const DesignSpec&) const = default;
};

/// Design rows compressed to (binary pattern, continuous values). Every
/// binary-derived term is a function of the pattern alone, which lets the
/// solvers work per pattern instead of per expanded column.
struct FeatureFrame {
  int binary_count = 0;
  std::vector<std::uint32_t> pattern;
  Eigen::MatrixXd continuous;

  Eigen::Index rows() const { return static_cast<Eigen::Index>(pattern.size()); }
  FeatureFrame subset(std::span<const Eigen::Index> rows) const;
};

/// Looks up columns by name ("s", "w1", "w2", "v11", "v12", "v13", "v2",
/// "a", "y"). `set_a` evaluates the frame at a counterfactual treatment.
FeatureFrame build_frame(const Dataset& data, const DesignSpec& spec,
                         std::optional<int> set_a = std::nullopt);

/// Dense expanded design [1, terms..., continuous...] for diagnostics and
/// least squares.
Eigen::MatrixXd expand(const FeatureFrame& frame, std::span<const std::uint32_t> masks);

}  // namespace fodtr
