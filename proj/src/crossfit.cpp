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

#include "fodtr/crossfit.hpp"

#include <algorithm>
#include <string>

#include "fodtr/error.hpp"
#include "fodtr/parallel.hpp"
#include "fodtr/random.hpp"

namespace fodtr {
namespace {

enum Stream : std::uint64_t { kStreamG = 1, kStreamM, kStreamB, kStreamROutcome, kStreamRTreatment, kStreamRTrial };

Eigen::MatrixXd clip_matrix(const Eigen::MatrixXd& x, double clip) {
  return x.cwiseMax(clip).cwiseMin(1.0 - clip);
}

// Two arm columns from a learner of P(event = 1): column 1 is the learner,
// column 0 its complement.
Eigen::MatrixXd arms_from_binary(const Eigen::VectorXd& p1) {
  Eigen::MatrixXd out(p1.size(), 2);
  out.col(1) = p1;
  out.col(0) = (1.0 - p1.array()).matrix();
  return out;
}

}  // namespace

DesignSpec propensity_design() {
  return {{"v11", "v12", "v13", "w1"}, {"w2"}, Expansion::kSaturated};
}

DesignSpec outcome_design() {
  return {{"a", "v11", "v12", "v13", "w1"}, {"w2"}, Expansion::kSaturated};
}

CrossFitted cross_fit(const Dataset& data, const FoldPlan& folds, const DesignSpec& design,
                      const Eigen::VectorXd& response, const std::vector<char>& eligible,
                      std::span<const std::optional<int>> evaluate_at, const LearnerConfig& config,
                      std::string_view name, std::uint64_t stream) {
  const Eigen::Index n = data.size();
  if (folds.size() != n) throw Error(std::string(name) + ": fold plan does not match the data");
  if (response.size() != n || static_cast<Eigen::Index>(eligible.size()) != n) {
    throw Error(std::string(name) + ": response or eligibility length mismatch");
  }
  const FeatureFrame observed = build_frame(data, design);
  std::vector<FeatureFrame> frames;
  for (const auto& at : evaluate_at) frames.push_back(at ? build_frame(data, design, at) : observed);

  CrossFitted out;
  out.predictions.resize(n, static_cast<Eigen::Index>(evaluate_at.size()));
  out.learners.resize(static_cast<std::size_t>(folds.folds));
  std::vector<std::vector<std::string>> warnings(static_cast<std::size_t>(folds.folds));

  parallel_for(static_cast<std::size_t>(folds.folds), config.workers, [&](std::size_t j) {
    const int fold = static_cast<int>(j);
    std::vector<Eigen::Index> train;
    for (const Eigen::Index i : folds.training(fold)) {
      if (eligible[static_cast<std::size_t>(i)]) train.push_back(i);
    }
    if (train.size() < 2) {
      throw Error(std::string(name) + ": fold " + std::to_string(fold + 1) +
                  " has fewer than two training records");
    }
    const FeatureFrame train_frame = observed.subset(train);
    Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) y[static_cast<Eigen::Index>(k)] = response[train[k]];

    const std::uint64_t seed = derive_seed(config.seed, stream * 1024 + j);
    LassoFit fit = fit_logistic_lasso(train_frame, y, design, {}, config.lasso.cv_folds, seed, config.lasso);
    if (fit.degenerate) {
      warnings[j].push_back(std::string(name) + ": fold " + std::to_string(fold + 1) +
                            ": single-class response, intercept-only fit");
    }
    CalibratedLearner learner;
    if (config.calibrate) {
      learner = isotonic_calibrate(std::span(fit.out_of_fold.data(), static_cast<std::size_t>(fit.out_of_fold.size())),
                                   std::span(y.data(), static_cast<std::size_t>(y.size())),
                                   std::move(fit.learner), config.clip);
    } else {
      learner = {std::move(fit.learner), StepFunction{}, config.clip};
    }
    const std::vector<Eigen::Index> holdout = folds.holdout(fold);
    for (std::size_t e = 0; e < frames.size(); ++e) {
      const Eigen::VectorXd p = learner.predict_unclipped(frames[e].subset(holdout));
      for (std::size_t k = 0; k < holdout.size(); ++k) {
        out.predictions(holdout[k], static_cast<Eigen::Index>(e)) = p[static_cast<Eigen::Index>(k)];
      }
    }
    out.learners[j] = std::move(learner);
  });
  for (auto& w : warnings) out.warnings.insert(out.warnings.end(), w.begin(), w.end());
  return out;
}

NuisanceFits fit_nuisances(const Dataset& data, const FoldPlan& folds, std::vector<int> levels,
                           const LearnerConfig& config) {
  const Eigen::Index n = data.size();
  if (n == 0) throw Error("nuisances: empty data");
  const std::vector<int> observed_levels = data.v2_levels();
  if (levels.empty()) levels = observed_levels;
  for (const int v : levels) {
    if (std::find(observed_levels.begin(), observed_levels.end(), v) == observed_levels.end()) {
      throw Error("nuisances: V2 level " + std::to_string(v) + " is not among the observed values");
    }
  }
  // Every fold needs responders in trial 1 under both arms to learn b.
  for (int j = 0; j < folds.folds; ++j) {
    int seen[2] = {0, 0};
    for (const Eigen::Index i : folds.training(j)) {
      if (data.y[i] == 1 && data.s[i] == 1) ++seen[data.a[i]];
    }
    for (int a = 0; a < 2; ++a) {
      if (seen[a] == 0) {
        throw Error("nuisances: fold " + std::to_string(j + 1) + ", arm " + std::to_string(a) +
                    ": no training records with Y = 1 and S = 1 for b");
      }
    }
  }

  const std::vector<char> everyone(static_cast<std::size_t>(n), 1);
  std::vector<char> trial(static_cast<std::size_t>(n)), responders(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    trial[static_cast<std::size_t>(i)] = data.s[i] == 1;
    responders[static_cast<std::size_t>(i)] = data.s[i] == 1 && data.y[i] == 1;
  }
  const std::optional<int> observed_only[] = {std::nullopt};
  const std::optional<int> both_arms[] = {0, 1};
  const DesignSpec g_design = propensity_design();
  const DesignSpec y_design = outcome_design();

  NuisanceFits fits;
  fits.levels = levels;
  fits.clip = config.clip;
  fits.calibrated.fill(config.calibrate);
  fits.fold.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) fits.fold[i] = folds.assignment[static_cast<std::size_t>(i)];
  auto keep_warnings = [&](const CrossFitted& c) {
    fits.warnings.insert(fits.warnings.end(), c.warnings.begin(), c.warnings.end());
  };

  const Eigen::VectorXd a = data.a.cast<double>();
  const Eigen::VectorXd y = data.y.cast<double>();
  const Eigen::VectorXd s = data.s.cast<double>();

  const CrossFitted g = cross_fit(data, folds, g_design, a, everyone, observed_only, config, "g", kStreamG);
  keep_warnings(g);
  fits.g = clip_matrix(arms_from_binary(g.predictions.col(0)), config.clip);

  const CrossFitted m = cross_fit(data, folds, y_design, y, everyone, both_arms, config, "m", kStreamM);
  keep_warnings(m);
  fits.m = clip_matrix(m.predictions, config.clip);

  auto fit_b_level = [&](int level, std::uint64_t stream) {
    Eigen::VectorXd indicator(n);
    for (Eigen::Index i = 0; i < n; ++i) indicator[i] = data.v2[i] == level ? 1.0 : 0.0;
    CrossFitted b = cross_fit(data, folds, y_design, indicator, responders, both_arms, config,
                              "b(v2=" + std::to_string(level) + ")", stream);
    keep_warnings(b);
    return b.predictions;
  };
  if (levels.size() == 2 && observed_levels.size() == 2) {
    const Eigen::MatrixXd upper = fit_b_level(levels[1], kStreamB);
    const Eigen::MatrixXd lower = (1.0 - upper.array()).matrix();
    fits.b = {clip_matrix(lower, config.clip), clip_matrix(upper, config.clip)};
  } else {
    for (std::size_t k = 0; k < levels.size(); ++k) {
      fits.b.push_back(clip_matrix(fit_b_level(levels[k], kStreamB + 64 * (k + 1)), config.clip));
    }
  }

  const CrossFitted r_outcome =
      cross_fit(data, folds, y_design, y, trial, both_arms, config, "r:outcome", kStreamROutcome);
  keep_warnings(r_outcome);
  const CrossFitted r_treatment =
      cross_fit(data, folds, g_design, a, trial, observed_only, config, "r:treatment", kStreamRTreatment);
  keep_warnings(r_treatment);
  const CrossFitted r_trial =
      cross_fit(data, folds, g_design, s, everyone, observed_only, config, "r:trial", kStreamRTrial);
  keep_warnings(r_trial);

  fits.r_outcome = r_outcome.predictions;
  fits.r_treatment = arms_from_binary(r_treatment.predictions.col(0));
  fits.r_trial = r_trial.predictions.col(0);
  fits.r = clip_matrix((fits.r_outcome.array() * fits.r_treatment.array()).colwise() * fits.r_trial.array(),
                       config.clip);
  return fits;
}

}  // namespace fodtr
