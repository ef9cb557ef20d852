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
#include <string>
#include <string_view>
#include <vector>

#include "fodtr/crossfit.hpp"
#include "fodtr/dataset.hpp"
#include "fodtr/folds.hpp"

namespace fodtr {

/// Population over which E[Y_d] is evaluated. Treatment is randomized only
/// inside trial S = 1, so rules that treat anyone outside it are estimable
/// only within that trial.
enum class PolicyStratum { kTrialOne, kPooled };

std::string_view to_string(PolicyStratum stratum);
PolicyStratum parse_stratum(std::string_view text);

/// Cross-fitted g and m for rule evaluation. g is calibrated but unclipped so
/// that positivity can be checked against the clip floor.
struct PolicyNuisances {
  PolicyStratum stratum = PolicyStratum::kTrialOne;
  std::vector<char> in_sample;  // records entering the estimate
  Eigen::MatrixXd g;            // n x 2, unclipped
  Eigen::MatrixXd m;            // n x 2, clipped
  double clip = kDefaultClip;
  std::vector<std::string> warnings;
};

/// Within S = 1 both learners train on trial-1 records; pooled, S enters both
/// designs as one more crossed binary.
PolicyNuisances fit_policy_nuisances(const Dataset& data, const FoldPlan& folds,
                                     PolicyStratum stratum, const LearnerConfig& config);

struct PolicyValueEstimate {
  std::string rule;
  double psi = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double mean_eif = 0.0;   // after targeting
  double tolerance = 0.0;  // 1 / (sqrt(n) log n)
  int iterations = 0;
  Eigen::VectorXd eif;     // over in-sample records, in record order
};

/// TMLE of E[Y_d] for a per-record arm assignment `rule`: logistic fluctuation
/// logit m*_d = logit m_d + eps with weights 1(A = d) / g(d), iterated until the
/// mean EIF falls below 1 / (sqrt(n) log n) or 20 steps. Throws
/// PositivityError listing the records whose g(d) is below the clip floor.
PolicyValueEstimate tmle_policy_value(const Dataset& data, const Eigen::VectorXi& rule,
                                      const PolicyNuisances& nuisances, std::string rule_name);

/// Relative risk of `rule` against `reference` on the log scale, with a
/// delta-method interval from the two EIFs. Percent decrease is 100 (1 - RR).
struct PolicyContrast {
  std::string rule;
  std::string reference;
  double log_rr = 0.0;
  double se = 0.0;
  double rr = 0.0;
  double rr_lo = 0.0;
  double rr_hi = 0.0;
  double percent_decrease = 0.0;
  double percent_lo = 0.0;
  double percent_hi = 0.0;
};

PolicyContrast contrast(const PolicyValueEstimate& rule, const PolicyValueEstimate& reference);

inline constexpr std::string_view kPolicyHeader = "rule,psi,se,lo,hi";
inline constexpr std::string_view kContrastHeader =
    "rule,reference,rr,rr_lo,rr_hi,percent_decrease,percent_lo,percent_hi";

void write_policy_csv(const std::vector<PolicyValueEstimate>& estimates, std::ostream& out);
void write_contrasts_csv(const std::vector<PolicyContrast>& contrasts, std::ostream& out);

}  // namespace fodtr
