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
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fodtr/crossfit.hpp"
#include "fodtr/dgp.hpp"
#include "fodtr/drlearner.hpp"

namespace fodtr {

/// Bias and RMSE of one estimator, integrated over P(v1, v2). Per cell,
/// bias = |mean_k(est - truth)| and rmse = sqrt(mean_k((est - truth)^2)).
struct EstimatorSummary {
  std::string estimator;
  double bias = 0.0;
  double rmse = 0.0;
  std::array<double, 16> cell_mean{};   // mean estimate
  std::array<double, 16> cell_bias{};
  std::array<double, 16> cell_rmse{};
};

/// `estimates` is K x 16 in truth-table cell order.
EstimatorSummary summarize_estimator(std::string name, const Eigen::MatrixXd& estimates,
                                     const TruthTable& truth);

struct StudyConfig {
  DgpParams params;         // mechanism; n and seed are set per replicate
  std::int64_t n = 500;
  int replicates = 200;
  int folds = 0;            // 0 picks fold_schedule(n)
  std::uint64_t seed = 1;   // master seed
  int workers = 1;          // replicates in flight
  LearnerConfig learner;
  SecondStage second_stage = SecondStage::kCellMeans;
};

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
};

struct SimReport {
  std::int64_t n = 0;
  int replicates = 0;
  int folds = 0;
  int failed = 0;
  bool valid = true;  // failures at most 1% of replicates
  std::vector<EstimatorSummary> estimators;
  std::vector<ReplicateRecord> ledger;
  double wall_seconds = 0.0;  // informational, never written to CSV
};

/// Seed of replicate k under a master seed; each replicate derives its data,
/// fold and learner seeds from it.
std::uint64_t replicate_seed(std::uint64_t master, int k);

/// K independent datasets, each estimated by the DR-learner and the plugin
/// over one shared fold plan. Replicates that throw are excluded and counted.
SimReport run_replications(const StudyConfig& config, const TruthTable& truth);

inline constexpr std::string_view kStudyHeader = "n,estimator,bias,rmse";
inline constexpr std::string_view kStudyCellsHeader =
    "n,estimator,v11,v12,v13,v2,prob,truth,mean_estimate,bias,rmse";
inline constexpr std::string_view kSeedLedgerHeader = "n,replicate,seed,status";

void write_study_csv(const std::vector<SimReport>& reports, std::ostream& out);
void write_study_cells_csv(const std::vector<SimReport>& reports, const TruthTable& truth,
                           std::ostream& out);
void write_seed_ledger_csv(const std::vector<SimReport>& reports, std::ostream& out);

}  // namespace fodtr
