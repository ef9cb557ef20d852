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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fodtr/dataset.hpp"
#include "fodtr/learners.hpp"
#include "fodtr/nuisance.hpp"

namespace fodtr {

/// Uncentered efficient influence function of kappa(a, v2) per record:
///   phi_b = 1(A=a, Y=1, S=1) / r(a) * (1(V2=v2) m(a) - b(a,v2) m(a))
///   phi_m = 1(A=a) / g(a) * (Y b(a,v2) - b(a,v2) m(a))
///   xi    = phi_b + phi_m + b(a,v2) m(a)
struct PseudoOutcome {
  int arm = 0;
  int v2_level = 0;
  Eigen::VectorXd xi;
  Eigen::VectorXd phi_b;
  Eigen::VectorXd phi_m;
  Eigen::VectorXd plug;
};

/// Throws when any g(a) or r(a) lies below the clip floor of `fits`.
PseudoOutcome compute_pseudo_outcome(const Dataset& data, const NuisanceFits& fits, int a,
                                     int v2_level);

enum class SecondStage { kCellMeans, kLeastSquares };

std::string_view to_string(SecondStage stage);
SecondStage parse_second_stage(std::string_view text);

/// Regression surfaces on V1. For each fitted V2 level, `treated` estimates
/// f(1, v1, v2) and `control` f(0, v1, v2); a model without a control surface
/// regressed the contrast directly. A model with no levels ignores V2.
struct CpeModel {
  struct Surface {
    FittedLearner treated;
    std::optional<FittedLearner> control;
  };

  std::string estimator;
  SecondStage second_stage = SecondStage::kCellMeans;
  std::vector<int> levels;
  std::vector<Surface> surfaces;

  bool uses_v2() const { return !levels.empty(); }
  bool has_level(int v2) const;
  /// Estimated contrast at every record's V1, for the given V2 level.
  Eigen::VectorXd predict(const Dataset& data, int v2) const;
  /// Estimated contrast in one V1 cell (index 4 v11 + 2 v12 + v13).
  double predict_cell(int v1_cell, int v2) const;
  /// Arm-specific surface f(a, v1, v2) in one cell; requires a control surface.
  double predict_arm_cell(int a, int v1_cell, int v2) const;

 private:
  const Surface& surface(int v2) const;
};

/// The second-stage design: the three V1 indicators.
DesignSpec v1_design(SecondStage stage);

/// Regresses xi(1, v2) and xi(0, v2) on V1 for every level in `pseudo`.
CpeModel fit_cpe(const Dataset& data, const std::vector<std::array<PseudoOutcome, 2>>& pseudo,
                 SecondStage stage);

/// Pseudo-outcomes for both arms at every fitted V2 level, then fit_cpe.
CpeModel fit_dr_learner(const Dataset& data, const NuisanceFits& fits, SecondStage stage);

/// Regresses b(1, v2) m(1) - b(0, v2) m(0) on V1.
CpeModel fit_plugin(const Dataset& data, const NuisanceFits& fits, SecondStage stage);

/// CATE on V1 alone with the usual pseudo-outcome 1(A=a)/g(a) (Y - m(a)) + m(a).
CpeModel fit_cate_v1_only(const Dataset& data, const NuisanceFits& fits, SecondStage stage);

/// Mean and standard error of a per-record quantity within each V1 cell.
struct CellSummary {
  std::array<double, 8> mean{};
  std::array<double, 8> std_error{};
  std::array<std::int64_t, 8> count{};
};

CellSummary summarize_by_cell(const Dataset& data, const Eigen::VectorXd& values);

/// Second-order remainder -C'_b - C'_m + C'_kappa per record, with the
/// unprimed nuisances taken from `truth` and the primed ones from `perturbed`:
///   C'_b     = m' (r - r') / r' (b - b')
///   C'_m     = b' (g - g') / g' (m - m')
///   C'_kappa = (b - b') (m - m')
Eigen::VectorXd remainder_terms(const NuisanceFits& truth, const NuisanceFits& perturbed, int a,
                                int v2_level);

/// Monte-Carlo estimate of Rem(a, v1, v2) in every V1 cell.
CellSummary remainder_diagnostic(const Dataset& data, const NuisanceFits& truth,
                                 const NuisanceFits& perturbed, int a, int v2_level);

inline constexpr std::string_view kCpeHeader = "v11,v12,v13,v2,tau_tilde_hat";

/// One row per (V1 cell, fitted V2 level); a model without V2 reports v2 empty.
void write_cpe_csv(const CpeModel& model, std::ostream& out);

}  // namespace fodtr
