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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fodtr/design.hpp"
#include "fodtr/folds.hpp"
#include "fodtr/isotonic.hpp"

namespace fodtr {

inline constexpr double kDefaultClip = 0.01;

struct LassoOptions {
  int lambda_count = 50;
  double lambda_min_ratio = 1e-4;
  int cv_folds = 10;
  double tolerance = 1e-7;   // max |coefficient change| between sweeps
  int max_sweeps = 10000;    // per penalty value
  // Stop the path once the deviance stops moving (glmnet's fdev/devmax
  // rules); later grid points reuse the last fit.
  bool truncate_path = true;
  bool record_objective = false;
};

/// Coefficients of a logistic model on a compressed design.
struct LogisticModel {
  int binary_count = 0;
  std::vector<std::uint32_t> masks;
  double intercept = 0.0;
  Eigen::VectorXd terms;       // one per mask
  Eigen::VectorXd continuous;  // one per continuous column
  double lambda = 0.0;

  /// Linear predictor for every binary pattern (size 2^binary_count).
  Eigen::VectorXd pattern_logits() const;
  Eigen::VectorXd predict(const FeatureFrame& frame) const;
};

/// Mean response per binary pattern, with the global mean for unseen ones.
struct CellMeansModel {
  std::map<std::uint32_t, double> means;
  std::map<std::uint32_t, double> counts;
  double global_mean = 0.0;

  Eigen::VectorXd predict(const FeatureFrame& frame) const;
};

/// Ordinary least squares on the expanded design.
struct LinearModel {
  std::vector<std::uint32_t> masks;
  Eigen::VectorXd coefficients;  // [intercept, terms..., continuous...]

  Eigen::VectorXd predict(const FeatureFrame& frame) const;
};

enum class LearnerKind { kLogisticLasso, kCellMeans, kLeastSquares };

std::string_view to_string(LearnerKind kind);

/// An immutable fitted regression plus the design it was trained on.
struct FittedLearner {
  DesignSpec design;
  std::variant<LogisticModel, CellMeansModel, LinearModel> model;

  LearnerKind kind() const;
  Eigen::VectorXd predict(const FeatureFrame& frame) const;
};

/// Base learner followed by an isotonic map and clipping to [clip, 1 - clip].
struct CalibratedLearner {
  FittedLearner base;
  StepFunction calibration;
  double clip = kDefaultClip;

  /// Calibrated but unclipped predictions.
  Eigen::VectorXd predict_unclipped(const FeatureFrame& frame) const;
  Eigen::VectorXd predict(const FeatureFrame& frame) const;
};

/// Penalized path on a fixed grid. `coefficients[k]` is the solution at
/// `lambdas[k]`, laid out as [intercept, terms..., continuous...].
struct LassoPath {
  std::vector<double> lambdas;
  std::vector<Eigen::VectorXd> coefficients;
  std::vector<double> deviance;
  int fitted = 0;  // grid points actually solved before truncation
  bool stalled = false;  // a penalty hit the sweep cap and ended the path
  double lambda_max = 0.0;
  double null_deviance = 0.0;
  /// Penalized objective after every outer iteration, when requested.
  std::vector<std::vector<double>> objective_trace;
};

/// Smallest penalty at which every slope is zero.
double logistic_lambda_max(const FeatureFrame& frame, const Eigen::VectorXd& y,
                           std::span<const std::uint32_t> masks);

/// 50 (by default) log-spaced values from lambda_max down to
/// lambda_min_ratio * lambda_max.
std::vector<double> default_lambda_grid(const FeatureFrame& frame, const Eigen::VectorXd& y,
                                        std::span<const std::uint32_t> masks,
                                        const LassoOptions& options = {});

/// Coordinate-descent solution path of the L1-penalized logistic likelihood
///   (1/n) sum_i NLL_i + lambda * sum_j sd_j |beta_j|
/// with warm starts. Penalty factors sd_j standardize each column; the
/// intercept is never penalized.
LassoPath logistic_lasso_path(const FeatureFrame& frame, const Eigen::VectorXd& y,
                              std::span<const std::uint32_t> masks, std::span<const double> lambdas,
                              const LassoOptions& options = {});

struct LassoFit {
  FittedLearner learner;
  /// Cross-validated (out-of-fold) predictions at the selected penalty.
  Eigen::VectorXd out_of_fold;
  std::vector<double> lambdas;
  std::vector<double> cv_deviance;
  int selected = 0;
  bool degenerate = false;  // single-class response, intercept-only fit
};

/// L1-penalized logistic regression with the penalty chosen by K-fold
/// cross-validated deviance. An empty `lambdas` uses the default grid.
LassoFit fit_logistic_lasso(const FeatureFrame& frame, const Eigen::VectorXd& y,
                            const DesignSpec& design, std::span<const double> lambdas,
                            int cv_folds, std::uint64_t seed, const LassoOptions& options = {});

/// Same, with an explicit cross-validation partition.
LassoFit fit_logistic_lasso(const FeatureFrame& frame, const Eigen::VectorXd& y,
                            const DesignSpec& design, std::span<const double> lambdas,
                            const FoldPlan& plan, const LassoOptions& options = {});

/// Per-pattern means of a real response.
FittedLearner fit_cell_means(const FeatureFrame& frame, const Eigen::VectorXd& y,
                             const DesignSpec& design);

FittedLearner fit_least_squares(const FeatureFrame& frame, const Eigen::VectorXd& y,
                                const DesignSpec& design);

/// PAV calibration of `base` using held-out raw predictions and outcomes.
CalibratedLearner isotonic_calibrate(std::span<const double> raw, std::span<const double> outcomes,
                                     FittedLearner base, double clip = kDefaultClip);

/// Versioned plain-text snapshot; doubles are written in shortest
/// round-trip form, so a reloaded learner predicts bit-identically.
std::string serialize(const FittedLearner& learner);
std::string serialize(const CalibratedLearner& learner);
FittedLearner deserialize_learner(std::string_view text);
CalibratedLearner deserialize_calibrated(std::string_view text);

}  // namespace fodtr
