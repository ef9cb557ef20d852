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

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fodtr/dataset.hpp"

namespace fodtr {

/// P(V_1k = 1 | W) = expit(intercept + w1 * W1 + w2 * W2).
struct CovariateModel {
  double intercept = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
};

/// Linear predictor over (V1, W); shared by the V2 and trial-membership models.
struct ModifierModel {
  double intercept = 0.0;
  double v11 = 0.0;
  double v12 = 0.0;
  double v13 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
};

/// Linear predictor of the outcome model, including the A interactions.
struct OutcomeModel {
  double intercept = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double a = 0.0;
  double v11 = 0.0;
  double v12 = 0.0;
  double v13 = 0.0;
  double v11_a = 0.0;
  double v12_a = 0.0;
  double v13_a = 0.0;
  double v2 = 0.0;
  double v2_a = 0.0;
};

/// Simulation mechanism of the fused-trial study. Defaults are the published
/// coefficients.
struct DgpParams {
  std::uint64_t seed = 1;
  std::int64_t n = 1000;

  double p_w1 = 0.33;
  double w2_shape_a = 2.0;
  double w2_shape_b = 2.0;
  CovariateModel v11{0.5, -0.2, 0.15};
  CovariateModel v12{-0.3, 0.1, -0.6};
  CovariateModel v13{0.1, 0.3, 0.2};
  ModifierModel v2{-0.5, 0.6, -0.4, 0.3, 0.1, -0.2};
  ModifierModel trial{0.0, 0.2, -0.4, 0.3, 0.5, -0.3};
  double p_treat_in_trial = 0.5;
  OutcomeModel outcome{-1.5, 0.3, -0.4, 0.1, 0.5, -0.8, 0.2, 1.0, -1.2, 0.5, 0.9, 1.2};

  /// Zeroes every coefficient that involves A in the outcome model.
  DgpParams& remove_treatment_effect();
  /// Zeroes every slope of every structural equation, keeping intercepts.
  DgpParams& intercepts_only();

  /// Sets a coefficient by dotted name, e.g. "outcome.v2_a" or "trial.w1".
  /// Throws ConfigError on unknown names.
  void set(const std::string& name, double value);
  static std::vector<std::string> coefficient_names();

  void validate() const;
};

/// Covariates of one unit with the structural probabilities evaluated at them.
struct UnitProbabilities {
  double p_trial = 0.0;        // P(S = 1 | V1, W)
  double p_v2 = 0.0;           // P(V2 = 1 | V1, W)
  double p_y[2][2] = {};       // P(Y = 1 | A = a, V1, V2 = v, W), indexed [a][v]
};

UnitProbabilities unit_probabilities(const DgpParams& params, int w1, double w2, int v11,
                                     int v12, int v13);

/// Nuisance functions implied by the mechanism at one (W, V1).
struct TrueNuisances {
  double g[2] = {};     // P(A = a | V1, W)
  double m[2] = {};     // E[Y | A = a, V1, W]
  double b[2][2] = {};  // P(V2 = v | Y = 1, A = a, V1, W, S = 1), indexed [a][v]
  double r[2] = {};     // P(Y = 1, A = a, S = 1 | V1, W)
  double p_trial = 0.0;
  double g_in_trial[2] = {};  // P(A = a | S = 1, V1, W)
};

TrueNuisances true_nuisances(const DgpParams& params, int w1, double w2, int v11, int v12,
                             int v13);

/// Draws n i.i.d. records. V2 is generated for everyone, kept in
/// `v2_latent`, and exposed in `v2` only where S = 1.
Dataset sample_dataset(const DgpParams& params);

/// One row of the truth table, keyed by (v11, v12, v13, v2).
struct TruthCell {
  int v11 = 0;
  int v12 = 0;
  int v13 = 0;
  int v2 = 0;
  double prob = 0.0;   // P(v1, v2)
  double cate = 0.0;   // tau(v1, v2)
  double cpe = 0.0;    // tau-tilde(v1, v2)
  double f_treated = 0.0;  // f-tilde(1, v1, v2)
  double f_control = 0.0;  // f-tilde(0, v1, v2)
  double prob_se = 0.0;
  double cate_se = 0.0;
  double cpe_se = 0.0;
  double f_treated_se = 0.0;
  double f_control_se = 0.0;
  std::uint64_t count = 0;

  /// Largest of the reported standard errors; this is the `mc_se` column.
  double mc_se() const;
  int v1_cell() const { return v1_cell_index(v11, v12, v13); }
};

struct TruthTable {
  /// 16 rows in canonical order: index = 8*v11 + 4*v12 + 2*v13 + v2.
  std::array<TruthCell, 16> cells;
  std::uint64_t replicates = 0;

  const TruthCell& cell(int v11, int v12, int v13, int v2) const {
    return cells[static_cast<std::size_t>(8 * v11 + 4 * v12 + 2 * v13 + v2)];
  }
  const TruthCell& cell(int v1_cell, int v2) const {
    return cells[static_cast<std::size_t>(2 * v1_cell + v2)];
  }
  /// kappa(a, v2) = P(Y_a = 1, V2 = v2).
  double kappa(int a, int v2) const;
  /// P(V1 = v1).
  double v1_prob(int v1_cell) const;
};

inline constexpr std::string_view kTruthHeader = "v11,v12,v13,v2,prob,cate,cpe,mc_se";

/// Brute-force Monte-Carlo truth: simulates (W, V1, V2) with both potential
/// outcomes driven by one shared uniform. Shards across `workers` threads on
/// disjoint counter streams and merges integer counts, so the result does not
/// depend on the worker count.
TruthTable oracle_truth(const DgpParams& params, std::uint64_t replicates, int workers = 1);

void write_truth_csv(const TruthTable& table, std::ostream& out);

/// Arm assignment as a function of (v1 cell, v2).
using CellRule = std::function<int(int v1_cell, int v2)>;

struct PolicyTruth {
  double value = 0.0;     // E[Y_d] (or E[Y_d | S = 1])
  double std_error = 0.0;
};

/// Monte-Carlo E[Y_d] under a (V1, V2)-rule, optionally within trial S = 1.
/// Uses the exact outcome probabilities per simulated unit.
PolicyTruth oracle_policy_value(const DgpParams& params, const CellRule& rule,
                                std::uint64_t replicates, bool trial_one_only, int workers = 1);

}  // namespace fodtr
