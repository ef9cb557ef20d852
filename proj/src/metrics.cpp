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

#include "fodtr/metrics.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"
#include "fodtr/folds.hpp"
#include "fodtr/parallel.hpp"
#include "fodtr/random.hpp"

namespace fodtr {
namespace {

enum : std::uint64_t { kDataSeed = 0, kFoldSeed = 1, kLearnerSeed = 2 };

struct ReplicateResult {
  bool ok = false;
  std::string error;
  std::array<double, 16> dr{};
  std::array<double, 16> plugin{};
};

std::array<double, 16> cell_estimates(const CpeModel& model) {
  std::array<double, 16> out{};
  for (int cell = 0; cell < 8; ++cell) {
    for (int v = 0; v < 2; ++v) out[static_cast<std::size_t>(2 * cell + v)] = model.predict_cell(cell, v);
  }
  return out;
}

}  // namespace

EstimatorSummary summarize_estimator(std::string name, const Eigen::MatrixXd& estimates,
                                     const TruthTable& truth) {
  if (estimates.cols() != 16) throw Error("summary: expected 16 cells");
  if (estimates.rows() == 0) throw Error("summary: no replicates");
  EstimatorSummary s;
  s.estimator = std::move(name);
  const double k = static_cast<double>(estimates.rows());
  for (std::size_t c = 0; c < 16; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const double target = truth.cells[c].cpe;
    double err = 0.0;
    double sq = 0.0;
    double sum = 0.0;
    for (Eigen::Index r = 0; r < estimates.rows(); ++r) {
      const double e = estimates(r, col) - target;
      sum += estimates(r, col);
      err += e;
      sq += e * e;
    }
    s.cell_mean[c] = sum / k;
    s.cell_bias[c] = std::abs(err / k);
    s.cell_rmse[c] = std::sqrt(sq / k);
    s.bias += s.cell_bias[c] * truth.cells[c].prob;
    s.rmse += s.cell_rmse[c] * truth.cells[c].prob;
  }
  return s;
}

std::uint64_t replicate_seed(std::uint64_t master, int k) {
  return derive_seed(master, static_cast<std::uint64_t>(k), StreamDomain::kReplicate);
}

SimReport run_replications(const StudyConfig& config, const TruthTable& truth) {
  if (config.n < 2) throw ConfigError("n must be >= 2 for a study");
  if (config.replicates < 1) throw ConfigError("replicates must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  SimReport report;
  report.n = config.n;
  report.replicates = config.replicates;
  report.folds = config.folds > 0 ? config.folds : fold_schedule(config.n);

  std::vector<ReplicateResult> results(static_cast<std::size_t>(config.replicates));
  report.ledger.resize(results.size());
  parallel_for(results.size(), config.workers, [&](std::size_t k) {
    const std::uint64_t seed = replicate_seed(config.seed, static_cast<int>(k));
    report.ledger[k] = {static_cast<int>(k), seed, false, {}};
    ReplicateResult& out = results[k];
    try {
      DgpParams params = config.params;
      params.n = config.n;
      params.seed = derive_seed(seed, kDataSeed);
      const Dataset data = sample_dataset(params);
      const FoldPlan folds = make_folds(data.size(), report.folds, derive_seed(seed, kFoldSeed));
      LearnerConfig learner = config.learner;
      learner.seed = derive_seed(seed, kLearnerSeed);
      learner.workers = 1;
      const NuisanceFits fits = fit_nuisances(data, folds, {0, 1}, learner);
      out.dr = cell_estimates(fit_dr_learner(data, fits, config.second_stage));
      out.plugin = cell_estimates(fit_plugin(data, fits, config.second_stage));
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  std::vector<Eigen::Index> kept;
  for (std::size_t k = 0; k < results.size(); ++k) {
    report.ledger[k].ok = results[k].ok;
    report.ledger[k].error = results[k].error;
    if (results[k].ok) {
      kept.push_back(static_cast<Eigen::Index>(k));
    } else {
      ++report.failed;
    }
  }
  report.valid = report.failed * 100 <= config.replicates;
  if (!kept.empty()) {
    Eigen::MatrixXd dr(static_cast<Eigen::Index>(kept.size()), 16);
    Eigen::MatrixXd plugin(dr.rows(), 16);
    for (Eigen::Index r = 0; r < dr.rows(); ++r) {
      const ReplicateResult& res = results[static_cast<std::size_t>(kept[static_cast<std::size_t>(r)])];
      for (Eigen::Index c = 0; c < 16; ++c) {
        dr(r, c) = res.dr[static_cast<std::size_t>(c)];
        plugin(r, c) = res.plugin[static_cast<std::size_t>(c)];
      }
    }
    report.estimators.push_back(summarize_estimator("drlearner", dr, truth));
    report.estimators.push_back(summarize_estimator("plugin", plugin, truth));
  } else {
    report.valid = false;
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_study_csv(const std::vector<SimReport>& reports, std::ostream& out) {
  out << kStudyHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& e : r.estimators) {
      out << r.n << ',' << e.estimator << ',' << csv::format(e.bias) << ',' << csv::format(e.rmse) << '\n';
    }
  }
}

void write_study_cells_csv(const std::vector<SimReport>& reports, const TruthTable& truth,
                           std::ostream& out) {
  out << kStudyCellsHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& e : r.estimators) {
      for (std::size_t c = 0; c < 16; ++c) {
        const TruthCell& t = truth.cells[c];
        out << r.n << ',' << e.estimator << ',' << t.v11 << ',' << t.v12 << ',' << t.v13 << ',' << t.v2
            << ',' << csv::format(t.prob) << ',' << csv::format(t.cpe) << ','
            << csv::format(e.cell_mean[c]) << ',' << csv::format(e.cell_bias[c]) << ','
            << csv::format(e.cell_rmse[c]) << '\n';
      }
    }
  }
}

void write_seed_ledger_csv(const std::vector<SimReport>& reports, std::ostream& out) {
  out << kSeedLedgerHeader << '\n';
  for (const auto& r : reports) {
    for (const auto& l : r.ledger) {
      out << r.n << ',' << l.replicate << ',' << l.seed << ',' << (l.ok ? "ok" : "failed") << '\n';
    }
  }
}

}  // namespace fodtr
