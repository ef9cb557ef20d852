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
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "fodtr/dataset.hpp"
#include "fodtr/drlearner.hpp"

namespace fodtr {

enum class DecisionStatus { kDecisive, kAmbiguous };

std::string_view to_string(DecisionStatus status);

/// Treatment decision for one subject. With V2 observed the bounds collapse
/// to the point estimate; otherwise they are the min and max of the estimated
/// CPE over the V2 levels.
struct RuleDecision {
  Eigen::Index index = 0;
  double lower = 0.0;
  double upper = 0.0;
  DecisionStatus status = DecisionStatus::kDecisive;
  int d1 = 0;  // ambiguous subjects treated
  int d0 = 0;  // ambiguous subjects not treated
  std::optional<int> d_opt;  // only when V2 was observed
};

/// Positive CPE means treat; an estimate of exactly zero assigns arm 0.
inline int treat_if_positive(double cpe) { return cpe > 0.0 ? 1 : 0; }

RuleDecision decide(const CpeModel& model, const Observation& subject, Eigen::Index index = 0);

/// decide() for every record; every observed V2 level must have a surface.
std::vector<RuleDecision> decide_all(const CpeModel& model, const Dataset& data);

struct DecisionSummary {
  std::size_t total = 0;
  std::size_t decisive = 0;
  std::size_t ambiguous = 0;
  double decisive_share = 0.0;
  double ambiguous_share = 0.0;
};

DecisionSummary decision_summary(const std::vector<RuleDecision>& decisions);

enum class RuleCompletion { kTreatAmbiguous, kWithholdAmbiguous };

/// Per-record arm under d1 or d0.
Eigen::VectorXi assignment(const std::vector<RuleDecision>& decisions, RuleCompletion completion);

inline constexpr std::string_view kDecisionsHeader = "i,status,lower,upper,d1,d0";

void write_decisions_csv(const std::vector<RuleDecision>& decisions, std::ostream& out);

}  // namespace fodtr
