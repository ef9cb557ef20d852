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

#include <filesystem>
#include <string>
#include <vector>

#include "fodtr/config.hpp"
#include "fodtr/dataset.hpp"
#include "fodtr/drlearner.hpp"
#include "fodtr/folds.hpp"
#include "fodtr/metrics.hpp"
#include "fodtr/nuisance.hpp"
#include "fodtr/policyvalue.hpp"
#include "fodtr/rules.hpp"

namespace fodtr {

/// Everything `estimate` computes from one dataset.
struct EstimateResult {
  FoldPlan folds;
  NuisanceFits nuisances;
  CpeModel model;
  CpeModel cate_v1;
  std::vector<RuleDecision> decisions;
  std::vector<PolicyValueEstimate> policy;
  std::vector<PolicyContrast> contrasts;
  std::vector<std::string> warnings;
};

/// Seeds for folds and learners both derive from the configured seed, so the
/// DR-learner and the plugin see the same fold plan.
EstimateResult run_estimate(const Dataset& data, const RunConfig& config);

/// Command bodies. Each writes its outputs and `run_config.txt` into the
/// configured output directory.
void cmd_simulate(const RunConfig& config);
void cmd_truth(const RunConfig& config);
void cmd_estimate(const RunConfig& config);
void cmd_study(const RunConfig& config);

}  // namespace fodtr
