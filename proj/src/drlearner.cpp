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

#include "fodtr/drlearner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"

namespace fodtr {
namespace {

// Positivity tolerance: clipped values sitting exactly on the floor pass.
constexpr double kFloorSlack = 1e-12;

FeatureFrame cell_frame(int v1_cell) {
  const int v11 = (v1_cell >> 2) & 1;
  const int v12 = (v1_cell >> 1) & 1;
  const int v13 = v1_cell & 1;
  FeatureFrame f;
  f.binary_count = 3;
  f.pattern = {static_cast<std::uint32_t>(v11 | (v12 << 1) | (v13 << 2))};
  f.continuous.resize(1, 0);
  return f;
}

FittedLearner regress(const FeatureFrame& frame, const Eigen::VectorXd& y, SecondStage stage) {
  const DesignSpec design = v1_design(stage);
  return stage == SecondStage::kCellMeans ? fit_cell_means(frame, y, design)
                                          : fit_least_squares(frame, y, design);
}

void check_floor(const Eigen::MatrixXd& x, int a, double floor, std::string_view name) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double v = x(i, a);
    if (!(v >= floor - kFloorSlack) || !(v > 0.0)) {
      throw PositivityError("pseudo-outcome: " + std::string(name) + "(" + std::to_string(a) +
                                ") = " + csv::format(v) + " below the floor " + csv::format(floor) +
                                " at record " + std::to_string(i + 1),
                            {static_cast<std::size_t>(i)});
    }
  }
}

}  // namespace

PseudoOutcome compute_pseudo_outcome(const Dataset& data, const NuisanceFits& fits, int a,
                                     int v2_level) {
  if (a != 0 && a != 1) throw Error("pseudo-outcome: arm must be 0 or 1");
  const Eigen::Index n = data.size();
  if (fits.size() != n) throw Error("pseudo-outcome: nuisances do not cover every record");
  const Eigen::MatrixXd& b = fits.b_at(v2_level);
  check_floor(fits.g, a, fits.clip, "g");
  check_floor(fits.r, a, fits.clip, "r");

  PseudoOutcome out;
  out.arm = a;
  out.v2_level = v2_level;
  out.xi.resize(n);
  out.phi_b.resize(n);
  out.phi_m.resize(n);
  out.plug.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = fits.m(i, a);
    const double bv = b(i, a);
    const double bm = bv * m;
    const bool treated = data.a[i] == a;
    const bool responder = treated && data.y[i] == 1 && data.s[i] == 1;
    out.phi_b[i] = responder ? ((data.v2[i] == v2_level ? m : 0.0) - bm) / fits.r(i, a) : 0.0;
    out.phi_m[i] = treated ? (data.y[i] * bv - bm) / fits.g(i, a) : 0.0;
    out.plug[i] = bm;
    out.xi[i] = out.phi_b[i] + out.phi_m[i] + out.plug[i];
  }
  return out;
}

std::string_view to_string(SecondStage stage) {
  return stage == SecondStage::kCellMeans ? "cell_means" : "least_squares";
}

SecondStage parse_second_stage(std::string_view text) {
  if (text == "cell_means") return SecondStage::kCellMeans;
  if (text == "least_squares") return SecondStage::kLeastSquares;
  throw ConfigError("second_stage must be cell_means or least_squares, got '" + std::string(text) + "'");
}

DesignSpec v1_design(SecondStage stage) {
  return {{"v11", "v12", "v13"},
          {},
          stage == SecondStage::kCellMeans ? Expansion::kSaturated : Expansion::kMainEffects};
}

bool CpeModel::has_level(int v2) const {
  return std::find(levels.begin(), levels.end(), v2) != levels.end();
}

const CpeModel::Surface& CpeModel::surface(int v2) const {
  if (surfaces.empty()) throw Error("CPE model: not fitted");
  if (!uses_v2()) return surfaces.front();
  const auto it = std::find(levels.begin(), levels.end(), v2);
  if (it == levels.end()) throw Error("CPE model: no surface for V2 level " + std::to_string(v2));
  return surfaces[static_cast<std::size_t>(it - levels.begin())];
}

Eigen::VectorXd CpeModel::predict(const Dataset& data, int v2) const {
  const Surface& s = surface(v2);
  const FeatureFrame frame = build_frame(data, v1_design(second_stage));
  Eigen::VectorXd out = s.treated.predict(frame);
  if (s.control) out -= s.control->predict(frame);
  return out;
}

double CpeModel::predict_cell(int v1_cell, int v2) const {
  const Surface& s = surface(v2);
  const FeatureFrame frame = cell_frame(v1_cell);
  double out = s.treated.predict(frame)[0];
  if (s.control) out -= s.control->predict(frame)[0];
  return out;
}

double CpeModel::predict_arm_cell(int a, int v1_cell, int v2) const {
  const Surface& s = surface(v2);
  if (!s.control) throw Error("CPE model: arm surfaces are not available for a contrast fit");
  const FeatureFrame frame = cell_frame(v1_cell);
  return (a == 1 ? s.treated : *s.control).predict(frame)[0];
}

CpeModel fit_cpe(const Dataset& data, const std::vector<std::array<PseudoOutcome, 2>>& pseudo,
                 SecondStage stage) {
  if (pseudo.empty()) throw Error("fit_cpe: no pseudo-outcomes");
  const FeatureFrame frame = build_frame(data, v1_design(stage));
  CpeModel model;
  model.estimator = "drlearner";
  model.second_stage = stage;
  for (const auto& pair : pseudo) {
    if (pair[0].arm != 0 || pair[1].arm != 1 || pair[0].v2_level != pair[1].v2_level) {
      throw Error("fit_cpe: pseudo-outcomes must be (arm 0, arm 1) at one V2 level");
    }
    model.levels.push_back(pair[0].v2_level);
    model.surfaces.push_back({regress(frame, pair[1].xi, stage), regress(frame, pair[0].xi, stage)});
  }
  return model;
}

CpeModel fit_dr_learner(const Dataset& data, const NuisanceFits& fits, SecondStage stage) {
  std::vector<std::array<PseudoOutcome, 2>> pseudo;
  for (const int v : fits.levels) {
    pseudo.push_back({compute_pseudo_outcome(data, fits, 0, v), compute_pseudo_outcome(data, fits, 1, v)});
  }
  return fit_cpe(data, pseudo, stage);
}

CpeModel fit_plugin(const Dataset& data, const NuisanceFits& fits, SecondStage stage) {
  if (fits.size() != data.size()) throw Error("plugin: nuisances do not cover every record");
  const FeatureFrame frame = build_frame(data, v1_design(stage));
  CpeModel model;
  model.estimator = "plugin";
  model.second_stage = stage;
  for (const int v : fits.levels) {
    const Eigen::MatrixXd& b = fits.b_at(v);
    const Eigen::VectorXd contrast =
        (b.col(1).array() * fits.m.col(1).array() - b.col(0).array() * fits.m.col(0).array()).matrix();
    model.levels.push_back(v);
    model.surfaces.push_back({regress(frame, contrast, stage), std::nullopt});
  }
  return model;
}

CpeModel fit_cate_v1_only(const Dataset& data, const NuisanceFits& fits, SecondStage stage) {
  const Eigen::Index n = data.size();
  if (fits.size() != n) throw Error("CATE: nuisances do not cover every record");
  const FeatureFrame frame = build_frame(data, v1_design(stage));
  CpeModel model;
  model.estimator = "cate_v1";
  model.second_stage = stage;
  std::array<Eigen::VectorXd, 2> pseudo;
  for (int a = 0; a < 2; ++a) {
    check_floor(fits.g, a, fits.clip, "g");
    pseudo[a].resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = fits.m(i, a);
      pseudo[a][i] = data.a[i] == a ? (data.y[i] - m) / fits.g(i, a) + m : m;
    }
  }
  model.surfaces.push_back({regress(frame, pseudo[1], stage), regress(frame, pseudo[0], stage)});
  return model;
}

CellSummary summarize_by_cell(const Dataset& data, const Eigen::VectorXd& values) {
  if (values.size() != data.size()) throw Error("cell summary: length mismatch");
  std::array<double, 8> sum{}, sum_sq{};
  CellSummary out;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const auto c = static_cast<std::size_t>(data.v1_cell(i));
    sum[c] += values[i];
    sum_sq[c] += values[i] * values[i];
    ++out.count[c];
  }
  for (std::size_t c = 0; c < 8; ++c) {
    const auto k = static_cast<double>(out.count[c]);
    if (k == 0) {
      out.mean[c] = std::nan("");
      out.std_error[c] = std::nan("");
      continue;
    }
    out.mean[c] = sum[c] / k;
    const double var = k > 1 ? std::max(0.0, (sum_sq[c] - k * out.mean[c] * out.mean[c]) / (k - 1)) : 0.0;
    out.std_error[c] = std::sqrt(var / k);
  }
  return out;
}

Eigen::VectorXd remainder_terms(const NuisanceFits& truth, const NuisanceFits& perturbed, int a,
                                int v2_level) {
  const Eigen::Index n = truth.size();
  if (perturbed.size() != n) throw Error("remainder: nuisance sets differ in size");
  const Eigen::MatrixXd& b = truth.b_at(v2_level);
  const Eigen::MatrixXd& bp = perturbed.b_at(v2_level);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double db = b(i, a) - bp(i, a);
    const double dm = truth.m(i, a) - perturbed.m(i, a);
    const double c_b = perturbed.m(i, a) * (truth.r(i, a) - perturbed.r(i, a)) / perturbed.r(i, a) * db;
    const double c_m = bp(i, a) * (truth.g(i, a) - perturbed.g(i, a)) / perturbed.g(i, a) * dm;
    const double c_kappa = db * dm;
    out[i] = -c_b - c_m + c_kappa;
  }
  return out;
}

CellSummary remainder_diagnostic(const Dataset& data, const NuisanceFits& truth,
                                 const NuisanceFits& perturbed, int a, int v2_level) {
  return summarize_by_cell(data, remainder_terms(truth, perturbed, a, v2_level));
}

void write_cpe_csv(const CpeModel& model, std::ostream& out) {
  out << kCpeHeader << '\n';
  const std::vector<int> levels = model.uses_v2() ? model.levels : std::vector<int>{0};
  for (int cell = 0; cell < 8; ++cell) {
    for (const int v : levels) {
      out << ((cell >> 2) & 1) << ',' << ((cell >> 1) & 1) << ',' << (cell & 1) << ','
          << (model.uses_v2() ? std::to_string(v) : std::string()) << ','
          << csv::format(model.predict_cell(cell, v)) << '\n';
    }
  }
}

}  // namespace fodtr
