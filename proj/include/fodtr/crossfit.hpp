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
#include <string_view>
#include <vector>

#include "fodtr/dataset.hpp"
#include "fodtr/design.hpp"
#include "fodtr/folds.hpp"
#include "fodtr/learners.hpp"
#include "fodtr/nuisance.hpp"

namespace fodtr {

struct LearnerConfig {
  LassoOptions lasso;
  double clip = kDefaultClip;
  bool calibrate = true;
  int workers = 1;  // folds fitted concurrently
  std::uint64_t seed = 1;
};

/// Cross-fitted, calibrated but unclipped probabilities of a binary response.
struct CrossFitted {
  Eigen::MatrixXd predictions;  // n x evaluation points
  std::vector<CalibratedLearner> learners;  // one per fold
  std::vector<std::string> warnings;
};

/// For each fold j, fits an L1-logistic learner on the records of T_j with
/// `eligible` set, calibrates it on its own cross-validated predictions, and
/// predicts every record of D_j at each entry of `evaluate_at` (a counterfactual
/// treatment, or nullopt for the observed data). `stream` separates the seeds
/// of different nuisances.
CrossFitted cross_fit(const Dataset& data, const FoldPlan& folds, const DesignSpec& design,
                      const Eigen::VectorXd& response, const std::vector<char>& eligible,
                      std::span<const std::optional<int>> evaluate_at, const LearnerConfig& config,
                      std::string_view name, std::uint64_t stream);

/// Designs of the nuisance learners: fully crossed binaries with W2 linear.
DesignSpec propensity_design();   // g and P(S = 1 | V1, W) and P(A | S = 1, V1, W)
DesignSpec outcome_design();      // m, b and P(Y = 1 | A, S = 1, V1, W)

/// Cross-fitted g, m, b, r for every record. b is fitted for each requested
/// V2 level (all observed levels when `levels` is empty); with two levels, one
/// learner is fitted and the other level is its complement. Calibration runs
/// before clipping to [clip, 1 - clip]; r is the clipped product of its
/// calibrated factors.
NuisanceFits fit_nuisances(const Dataset& data, const FoldPlan& folds, std::vector<int> levels,
                           const LearnerConfig& config);

}  // namespace fodtr
