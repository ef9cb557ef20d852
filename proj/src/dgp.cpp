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

#include "fodtr/dgp.hpp"

#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"
#include "fodtr/parallel.hpp"
#include "fodtr/random.hpp"
#include "fodtr/special.hpp"

namespace fodtr {
namespace {

// Records per oracle shard. Fixed so that floating-point merges happen in the
// same order whatever the worker count.
constexpr std::uint64_t kShardSize = 1u << 16;

double covariate_eta(const CovariateModel& m, int w1, double w2) {
  return m.intercept + m.w1 * w1 + m.w2 * w2;
}

double modifier_eta(const ModifierModel& m, int w1, double w2, int v11, int v12, int v13) {
  return m.intercept + m.v11 * v11 + m.v12 * v12 + m.v13 * v13 + m.w1 * w1 + m.w2 * w2;
}

double outcome_eta(const OutcomeModel& m, int a, int w1, double w2, int v11, int v12, int v13,
                   int v2) {
  return m.intercept + m.w1 * w1 + m.w2 * w2 + m.a * a + m.v11 * v11 + m.v12 * v12 +
         m.v13 * v13 + (m.v11_a * v11 + m.v12_a * v12 + m.v13_a * v13) * a + m.v2 * v2 +
         m.v2_a * v2 * a;
}

std::map<std::string, double*> coefficient_table(DgpParams& p) {
  std::map<std::string, double*> t;
  t["w1.p"] = &p.p_w1;
  t["w2.shape_a"] = &p.w2_shape_a;
  t["w2.shape_b"] = &p.w2_shape_b;
  for (auto [name, model] : {std::pair<const char*, CovariateModel*>{"v11", &p.v11},
                             {"v12", &p.v12},
                             {"v13", &p.v13}}) {
    const std::string prefix = name;
    t[prefix + ".intercept"] = &model->intercept;
    t[prefix + ".w1"] = &model->w1;
    t[prefix + ".w2"] = &model->w2;
  }
  for (auto [name, model] :
       {std::pair<const char*, ModifierModel*>{"v2", &p.v2}, {"trial", &p.trial}}) {
    const std::string prefix = name;
    t[prefix + ".intercept"] = &model->intercept;
    t[prefix + ".v11"] = &model->v11;
    t[prefix + ".v12"] = &model->v12;
    t[prefix + ".v13"] = &model->v13;
    t[prefix + ".w1"] = &model->w1;
    t[prefix + ".w2"] = &model->w2;
  }
  t["treatment.p"] = &p.p_treat_in_trial;
  auto& o = p.outcome;
  t["outcome.intercept"] = &o.intercept;
  t["outcome.w1"] = &o.w1;
  t["outcome.w2"] = &o.w2;
  t["outcome.a"] = &o.a;
  t["outcome.v11"] = &o.v11;
  t["outcome.v12"] = &o.v12;
  t["outcome.v13"] = &o.v13;
  t["outcome.v11_a"] = &o.v11_a;
  t["outcome.v12_a"] = &o.v12_a;
  t["outcome.v13_a"] = &o.v13_a;
  t["outcome.v2"] = &o.v2;
  t["outcome.v2_a"] = &o.v2_a;
  return t;
}

// Exogenous draws of one unit in a fixed order, shared by the sampler and
// the oracle so both see the same (W, V1, V2) for a given stream.
struct Unit {
  int w1, v11, v12, v13, v2, s;
  double w2;
  double u_treat, u_outcome;
};

Unit draw_unit(const DgpParams& p, CounterStream& rng) {
  Unit u{};
  u.w1 = rng.uniform() < p.p_w1 ? 1 : 0;
  u.w2 = beta_quantile(rng.uniform(), p.w2_shape_a, p.w2_shape_b);
  u.v11 = rng.uniform() < expit(covariate_eta(p.v11, u.w1, u.w2)) ? 1 : 0;
  u.v12 = rng.uniform() < expit(covariate_eta(p.v12, u.w1, u.w2)) ? 1 : 0;
  u.v13 = rng.uniform() < expit(covariate_eta(p.v13, u.w1, u.w2)) ? 1 : 0;
  u.v2 = rng.uniform() < expit(modifier_eta(p.v2, u.w1, u.w2, u.v11, u.v12, u.v13)) ? 1 : 0;
  u.s = rng.uniform() < expit(modifier_eta(p.trial, u.w1, u.w2, u.v11, u.v12, u.v13)) ? 1 : 0;
  u.u_treat = rng.uniform();
  u.u_outcome = rng.uniform();
  return u;
}

}  // namespace

DgpParams& DgpParams::remove_treatment_effect() {
  outcome.a = outcome.v11_a = outcome.v12_a = outcome.v13_a = outcome.v2_a = 0.0;
  return *this;
}

DgpParams& DgpParams::intercepts_only() {
  for (auto* m : {&v11, &v12, &v13}) m->w1 = m->w2 = 0.0;
  for (auto* m : {&v2, &trial}) m->v11 = m->v12 = m->v13 = m->w1 = m->w2 = 0.0;
  const double intercept = outcome.intercept;
  outcome = OutcomeModel{};
  outcome.intercept = intercept;
  return *this;
}

void DgpParams::set(const std::string& name, double value) {
  auto table = coefficient_table(*this);
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown DGP coefficient '" + name + "'");
  *it->second = value;
}

std::vector<std::string> DgpParams::coefficient_names() {
  DgpParams scratch;
  std::vector<std::string> names;
  for (const auto& [name, ptr] : coefficient_table(scratch)) names.push_back(name);
  return names;
}

void DgpParams::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (!(p_w1 >= 0.0 && p_w1 <= 1.0)) throw ConfigError("w1.p must lie in [0, 1]");
  if (!(p_treat_in_trial >= 0.0 && p_treat_in_trial <= 1.0)) {
    throw ConfigError("treatment.p must lie in [0, 1]");
  }
  if (!(w2_shape_a > 0.0 && w2_shape_b > 0.0)) throw ConfigError("w2 shapes must be positive");
}

UnitProbabilities unit_probabilities(const DgpParams& p, int w1, double w2, int v11, int v12,
                                     int v13) {
  UnitProbabilities out;
  out.p_trial = expit(modifier_eta(p.trial, w1, w2, v11, v12, v13));
  out.p_v2 = expit(modifier_eta(p.v2, w1, w2, v11, v12, v13));
  for (int a = 0; a < 2; ++a) {
    for (int v = 0; v < 2; ++v) {
      out.p_y[a][v] = expit(outcome_eta(p.outcome, a, w1, w2, v11, v12, v13, v));
    }
  }
  return out;
}

TrueNuisances true_nuisances(const DgpParams& p, int w1, double w2, int v11, int v12, int v13) {
  const UnitProbabilities u = unit_probabilities(p, w1, w2, v11, v12, v13);
  TrueNuisances t;
  t.p_trial = u.p_trial;
  t.g_in_trial[1] = p.p_treat_in_trial;
  t.g_in_trial[0] = 1.0 - p.p_treat_in_trial;
  t.g[1] = p.p_treat_in_trial * u.p_trial;
  t.g[0] = 1.0 - t.g[1];
  for (int a = 0; a < 2; ++a) {
    const double joint1 = u.p_y[a][1] * u.p_v2;
    const double joint0 = u.p_y[a][0] * (1.0 - u.p_v2);
    t.m[a] = joint0 + joint1;
    t.b[a][1] = joint1 / t.m[a];
    t.b[a][0] = joint0 / t.m[a];
    // Y is independent of S given (A, V1, W), so P(Y=1 | A, S=1, V1, W) = m.
    t.r[a] = t.m[a] * t.g_in_trial[a] * u.p_trial;
  }
  return t;
}

Dataset sample_dataset(const DgpParams& params) {
  params.validate();
  Dataset data(params.n);
  data.v2_latent.resize(params.n);
  for (Eigen::Index i = 0; i < params.n; ++i) {
    CounterStream rng(params.seed, StreamDomain::kSampleRecord, static_cast<std::uint64_t>(i));
    const Unit u = draw_unit(params, rng);
    const int a = u.u_treat < params.p_treat_in_trial * u.s ? 1 : 0;
    const double py = expit(outcome_eta(params.outcome, a, u.w1, u.w2, u.v11, u.v12, u.v13, u.v2));
    data.s[i] = u.s;
    data.w1[i] = u.w1;
    data.w2[i] = u.w2;
    data.v11[i] = u.v11;
    data.v12[i] = u.v12;
    data.v13[i] = u.v13;
    data.v2_latent[i] = u.v2;
    data.v2[i] = u.s == 1 ? u.v2 : kMissing;
    data.a[i] = a;
    data.y[i] = u.u_outcome < py ? 1 : 0;
  }
  return data;
}

double TruthCell::mc_se() const { return std::max({prob_se, cate_se, cpe_se}); }

double TruthTable::kappa(int a, int v2) const {
  double total = 0.0;
  for (int c = 0; c < 8; ++c) {
    const TruthCell& cell_ref = cell(c, v2);
    total += (a == 1 ? cell_ref.f_treated : cell_ref.f_control) * v1_prob(c);
  }
  return total;
}

double TruthTable::v1_prob(int v1_cell) const {
  return cell(v1_cell, 0).prob + cell(v1_cell, 1).prob;
}

TruthTable oracle_truth(const DgpParams& params, std::uint64_t replicates, int workers) {
  params.validate();
  if (replicates < 1000000) throw ConfigError("oracle replicates must be >= 1000000");

  struct Counts {
    std::array<std::uint64_t, 16> n{}, y1{}, y0{}, y10{};
  };
  const std::uint64_t shards = (replicates + kShardSize - 1) / kShardSize;
  std::vector<Counts> shard_counts(shards);
  parallel_for(shards, workers, [&](std::size_t shard) {
    Counts& c = shard_counts[shard];
    const std::uint64_t begin = shard * kShardSize;
    const std::uint64_t end = std::min(replicates, begin + kShardSize);
    for (std::uint64_t i = begin; i < end; ++i) {
      CounterStream rng(params.seed, StreamDomain::kOracleRecord, i);
      const Unit u = draw_unit(params, rng);
      const int y1 = u.u_outcome < expit(outcome_eta(params.outcome, 1, u.w1, u.w2, u.v11, u.v12,
                                                     u.v13, u.v2))
                         ? 1 : 0;
      const int y0 = u.u_outcome < expit(outcome_eta(params.outcome, 0, u.w1, u.w2, u.v11, u.v12,
                                                     u.v13, u.v2))
                         ? 1 : 0;
      const std::size_t k = static_cast<std::size_t>(8 * u.v11 + 4 * u.v12 + 2 * u.v13 + u.v2);
      ++c.n[k];
      c.y1[k] += y1;
      c.y0[k] += y0;
      c.y10[k] += y1 * y0;
    }
  });
  Counts total;
  for (const Counts& c : shard_counts) {
    for (std::size_t k = 0; k < 16; ++k) {
      total.n[k] += c.n[k];
      total.y1[k] += c.y1[k];
      total.y0[k] += c.y0[k];
      total.y10[k] += c.y10[k];
    }
  }

  TruthTable table;
  table.replicates = replicates;
  const double reps = static_cast<double>(replicates);
  for (std::size_t k = 0; k < 16; ++k) {
    TruthCell& cell = table.cells[k];
    cell.v11 = static_cast<int>(k >> 3) & 1;
    cell.v12 = static_cast<int>(k >> 2) & 1;
    cell.v13 = static_cast<int>(k >> 1) & 1;
    cell.v2 = static_cast<int>(k) & 1;
    cell.count = total.n[k];
    if (total.n[k] == 0) {
      throw Error("oracle cell (v11=" + std::to_string(cell.v11) + ", v12=" +
                  std::to_string(cell.v12) + ", v13=" + std::to_string(cell.v13) +
                  ", v2=" + std::to_string(cell.v2) + ") has zero occupancy");
    }
    const double n_cell = static_cast<double>(total.n[k]);
    const double n_v1 = static_cast<double>(total.n[k] + total.n[k ^ 1u]);
    const double y1 = static_cast<double>(total.y1[k]);
    const double y0 = static_cast<double>(total.y0[k]);
    const double discordant = y1 + y0 - 2.0 * static_cast<double>(total.y10[k]);

    cell.prob = n_cell / reps;
    cell.prob_se = std::sqrt(cell.prob * (1.0 - cell.prob) / reps);

    cell.cate = (y1 - y0) / n_cell;
    cell.cate_se = std::sqrt(std::max(0.0, discordant / n_cell - cell.cate * cell.cate) / n_cell);

    cell.f_treated = y1 / n_v1;
    cell.f_control = y0 / n_v1;
    cell.f_treated_se = std::sqrt(cell.f_treated * (1.0 - cell.f_treated) / n_v1);
    cell.f_control_se = std::sqrt(cell.f_control * (1.0 - cell.f_control) / n_v1);
    cell.cpe = (y1 - y0) / n_v1;
    cell.cpe_se = std::sqrt(std::max(0.0, discordant / n_v1 - cell.cpe * cell.cpe) / n_v1);
  }
  return table;
}

void write_truth_csv(const TruthTable& table, std::ostream& out) {
  out << kTruthHeader << '\n';
  for (const TruthCell& c : table.cells) {
    out << c.v11 << ',' << c.v12 << ',' << c.v13 << ',' << c.v2 << ',' << csv::format(c.prob)
        << ',' << csv::format(c.cate) << ',' << csv::format(c.cpe) << ','
        << csv::format(c.mc_se()) << '\n';
  }
}

PolicyTruth oracle_policy_value(const DgpParams& params, const CellRule& rule,
                                std::uint64_t replicates, bool trial_one_only, int workers) {
  params.validate();
  if (replicates == 0) throw ConfigError("replicates must be positive");
  struct Sums {
    double num = 0, den = 0, num2 = 0, den2 = 0, cross = 0;
  };
  const std::uint64_t shards = (replicates + kShardSize - 1) / kShardSize;
  std::vector<Sums> shard_sums(shards);
  parallel_for(shards, workers, [&](std::size_t shard) {
    Sums& s = shard_sums[shard];
    const std::uint64_t begin = shard * kShardSize;
    const std::uint64_t end = std::min(replicates, begin + kShardSize);
    for (std::uint64_t i = begin; i < end; ++i) {
      CounterStream rng(params.seed, StreamDomain::kOracleRecord, i);
      const Unit u = draw_unit(params, rng);
      const int arm = rule(v1_cell_index(u.v11, u.v12, u.v13), u.v2);
      const double py = expit(outcome_eta(params.outcome, arm, u.w1, u.w2, u.v11, u.v12, u.v13, u.v2));
      const double weight = trial_one_only
                                ? expit(modifier_eta(params.trial, u.w1, u.w2, u.v11, u.v12, u.v13))
                                : 1.0;
      const double x = weight * py;
      s.num += x;
      s.den += weight;
      s.num2 += x * x;
      s.den2 += weight * weight;
      s.cross += x * weight;
    }
  });
  Sums t;
  for (const Sums& s : shard_sums) {
    t.num += s.num;
    t.den += s.den;
    t.num2 += s.num2;
    t.den2 += s.den2;
    t.cross += s.cross;
  }
  const double n = static_cast<double>(replicates);
  const double mean_num = t.num / n;
  const double mean_den = t.den / n;
  const double ratio = mean_num / mean_den;
  const double var_num = t.num2 / n - mean_num * mean_num;
  const double var_den = t.den2 / n - mean_den * mean_den;
  const double cov = t.cross / n - mean_num * mean_den;
  const double var_ratio = (var_num - 2.0 * ratio * cov + ratio * ratio * var_den) /
                           (mean_den * mean_den * n);
  return {ratio, std::sqrt(std::max(0.0, var_ratio))};
}

}  // namespace fodtr
