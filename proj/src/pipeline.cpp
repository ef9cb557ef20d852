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

#include "fodtr/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include "fodtr/error.hpp"
#include "fodtr/random.hpp"

namespace fodtr {
namespace {

enum : std::uint64_t { kFoldSeed = 1, kLearnerSeed = 2 };

std::filesystem::path output_dir(const RunConfig& config) {
  const std::filesystem::path dir = config.text("out");
  if (dir.empty()) throw ConfigError("out must name an output directory");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

void write_run_config(const RunConfig& config, const std::filesystem::path& dir) {
  auto out = open_output(dir / "run_config.txt");
  config.write_resolved(out);
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

EstimateResult run_estimate(const Dataset& data, const RunConfig& config) {
  data.validate();
  const std::uint64_t seed = config.unsigned_integer("seed");
  const auto requested = config.integer("folds");
  const int folds = requested > 0 ? static_cast<int>(requested) : fold_schedule(data.size());
  if (folds > data.size()) {
    throw ConfigError("folds must not exceed the number of records (" + std::to_string(data.size()) + ")");
  }
  EstimateResult r;
  r.folds = make_folds(data.size(), folds, derive_seed(seed, kFoldSeed));
  LearnerConfig learner = config.learner();
  learner.seed = derive_seed(seed, kLearnerSeed);
  const SecondStage stage = config.second_stage();

  r.nuisances = fit_nuisances(data, r.folds, {}, learner);
  r.warnings = r.nuisances.warnings;
  r.model = config.text("estimator") == "plugin" ? fit_plugin(data, r.nuisances, stage)
                                                  : fit_dr_learner(data, r.nuisances, stage);
  r.cate_v1 = fit_cate_v1_only(data, r.nuisances, stage);
  r.decisions = decide_all(r.model, data);

  const PolicyNuisances pn = fit_policy_nuisances(data, r.folds, config.stratum(), learner);
  r.warnings.insert(r.warnings.end(), pn.warnings.begin(), pn.warnings.end());
  const Eigen::Index n = data.size();
  const std::vector<RuleDecision> cate_decisions = decide_all(r.cate_v1, data);
  r.policy.push_back(tmle_policy_value(data, assignment(r.decisions, RuleCompletion::kTreatAmbiguous), pn, "d1"));
  r.policy.push_back(tmle_policy_value(data, assignment(r.decisions, RuleCompletion::kWithholdAmbiguous), pn, "d0"));
  r.policy.push_back(tmle_policy_value(data, assignment(cate_decisions, RuleCompletion::kTreatAmbiguous), pn, "cate_v1"));
  r.policy.push_back(tmle_policy_value(data, Eigen::VectorXi::Ones(n), pn, "all_1"));
  r.policy.push_back(tmle_policy_value(data, Eigen::VectorXi::Zero(n), pn, "all_0"));
  for (std::size_t learned = 0; learned < 2; ++learned) {
    for (std::size_t other = 2; other < r.policy.size(); ++other) {
      r.contrasts.push_back(contrast(r.policy[learned], r.policy[other]));
    }
  }
  return r;
}

void cmd_simulate(const RunConfig& config) {
  config.validate();
  const Dataset data = sample_dataset(config.dgp());
  const auto dir = output_dir(config);
  auto out = open_output(dir / "data.csv");
  write_dataset_csv(data, out);
  write_run_config(config, dir);
}

void cmd_truth(const RunConfig& config) {
  config.validate();
  const TruthTable truth = oracle_truth(config.dgp(), config.unsigned_integer("oracle_replicates"),
                                        static_cast<int>(config.integer("workers")));
  const auto dir = output_dir(config);
  auto out = open_output(dir / "truth.csv");
  write_truth_csv(truth, out);
  write_run_config(config, dir);
}

void cmd_estimate(const RunConfig& config) {
  config.validate();
  const std::string input = config.text("input");
  if (input.empty()) throw ConfigError("input must name a dataset CSV");
  std::ifstream in(input, std::ios::binary);
  if (!in) throw Error("cannot open input '" + input + "'");
  const Dataset data = read_dataset_csv(in);
  const EstimateResult r = run_estimate(data, config);
  warn(r.warnings);

  const auto dir = output_dir(config);
  {
    auto out = open_output(dir / "cpe.csv");
    write_cpe_csv(r.model, out);
  }
  {
    auto out = open_output(dir / "decisions.csv");
    write_decisions_csv(r.decisions, out);
  }
  {
    auto out = open_output(dir / "nuisances.csv");
    write_nuisances_csv(r.nuisances, static_cast<int>(config.integer("v2_level")), out);
  }
  {
    auto out = open_output(dir / "policy.csv");
    write_policy_csv(r.policy, out);
  }
  {
    auto out = open_output(dir / "contrasts.csv");
    write_contrasts_csv(r.contrasts, out);
  }
  {
    auto out = open_output(dir / "models.txt");
    for (std::size_t k = 0; k < r.model.surfaces.size(); ++k) {
      const auto& s = r.model.surfaces[k];
      out << "# " << r.model.estimator << " v2=" << r.model.levels[k] << " treated\n" << serialize(s.treated);
      if (s.control) out << "# " << r.model.estimator << " v2=" << r.model.levels[k] << " control\n" << serialize(*s.control);
    }
  }
  write_run_config(config, dir);
  const DecisionSummary summary = decision_summary(r.decisions);
  std::cerr << "decisive " << summary.decisive << " (" << summary.decisive_share << "), ambiguous "
            << summary.ambiguous << " (" << summary.ambiguous_share << ")\n";
}

void cmd_study(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const int workers = static_cast<int>(config.integer("workers"));
  const DgpParams params = config.dgp();
  const TruthTable truth = oracle_truth(params, config.unsigned_integer("oracle_replicates"), workers);

  std::vector<SimReport> reports;
  for (const auto n : config.integer_list("sizes")) {
    StudyConfig sc;
    sc.params = params;
    sc.n = n;
    sc.replicates = static_cast<int>(config.integer("replicates"));
    sc.folds = static_cast<int>(config.integer("folds"));
    sc.seed = config.unsigned_integer("seed");
    sc.workers = workers;
    sc.learner = config.learner();
    sc.second_stage = config.second_stage();
    reports.push_back(run_replications(sc, truth));
    const SimReport& r = reports.back();
    std::cerr << "n=" << n << ": " << r.replicates - r.failed << "/" << r.replicates << " replicates in "
              << r.wall_seconds << " s" << (r.valid ? "" : " (INVALID: more than 1% failed)") << '\n';
  }
  const auto dir = output_dir(config);
  {
    auto out = open_output(dir / "study.csv");
    write_study_csv(reports, out);
  }
  {
    auto out = open_output(dir / "study_cells.csv");
    write_study_cells_csv(reports, truth, out);
  }
  {
    auto out = open_output(dir / "seeds.csv");
    write_seed_ledger_csv(reports, out);
  }
  {
    auto out = open_output(dir / "truth.csv");
    write_truth_csv(truth, out);
  }
  write_run_config(config, dir);
  std::cerr << "study finished in "
            << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
  for (const auto& r : reports) {
    if (!r.valid) throw Error("study at n=" + std::to_string(r.n) + " is invalid: " +
                              std::to_string(r.failed) + " of " + std::to_string(r.replicates) +
                              " replicates failed");
  }
}

}  // namespace fodtr
