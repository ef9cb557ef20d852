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

#include "fodtr/policyvalue.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"
#include "fodtr/random.hpp"
#include "fodtr/special.hpp"

namespace fodtr {
namespace {

constexpr int kMaxTargetingSteps = 20;
constexpr double kZ = 1.959963984540054;
constexpr std::uint64_t kPolicyStream = 32;

double sample_sd(const Eigen::VectorXd& x) {
  const auto n = static_cast<double>(x.size());
  if (n < 2) return 0.0;
  return std::sqrt((x.array() - x.mean()).square().sum() / (n - 1));
}

}  // namespace

std::string_view to_string(PolicyStratum stratum) {
  return stratum == PolicyStratum::kTrialOne ? "s1" : "pooled";
}

PolicyStratum parse_stratum(std::string_view text) {
  if (text == "s1") return PolicyStratum::kTrialOne;
  if (text == "pooled") return PolicyStratum::kPooled;
  throw ConfigError("stratum must be s1 or pooled, got '" + std::string(text) + "'");
}

PolicyNuisances fit_policy_nuisances(const Dataset& data, const FoldPlan& folds,
                                     PolicyStratum stratum, const LearnerConfig& config) {
  const Eigen::Index n = data.size();
  PolicyNuisances out;
  out.stratum = stratum;
  out.clip = config.clip;
  out.in_sample.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.in_sample[static_cast<std::size_t>(i)] = stratum == PolicyStratum::kPooled || data.s[i] == 1;
  }
  DesignSpec g_design = propensity_design();
  DesignSpec m_design = outcome_design();
  if (stratum == PolicyStratum::kPooled) {
    g_design.binary.insert(g_design.binary.begin(), "s");
    m_design.binary.insert(m_design.binary.begin(), "s");
  }
  const std::optional<int> observed_only[] = {std::nullopt};
  const std::optional<int> both_arms[] = {0, 1};
  LearnerConfig cfg = config;
  cfg.seed = derive_seed(config.seed, kPolicyStream);
  const CrossFitted g = cross_fit(data, folds, g_design, data.a.cast<double>(), out.in_sample,
                                  observed_only, cfg, "policy g", 1);
  const CrossFitted m = cross_fit(data, folds, m_design, data.y.cast<double>(), out.in_sample,
                                  both_arms, cfg, "policy m", 2);
  out.g.resize(n, 2);
  out.g.col(1) = g.predictions.col(0);
  out.g.col(0) = (1.0 - g.predictions.col(0).array()).matrix();
  out.m = m.predictions.cwiseMax(config.clip).cwiseMin(1.0 - config.clip);
  out.warnings = g.warnings;
  out.warnings.insert(out.warnings.end(), m.warnings.begin(), m.warnings.end());
  return out;
}

PolicyValueEstimate tmle_policy_value(const Dataset& data, const Eigen::VectorXi& rule,
                                      const PolicyNuisances& nuisances, std::string rule_name) {
  const Eigen::Index n_all = data.size();
  if (rule.size() != n_all || nuisances.g.rows() != n_all) {
    throw Error("policy value: rule or nuisances do not cover every record");
  }
  std::vector<Eigen::Index> rows;
  std::vector<std::size_t> violations;
  for (Eigen::Index i = 0; i < n_all; ++i) {
    if (!nuisances.in_sample[static_cast<std::size_t>(i)]) continue;
    const int d = rule[i];
    if (d != 0 && d != 1) throw Error("policy value: rule must assign arm 0 or 1");
    if (!(nuisances.g(i, d) >= nuisances.clip)) violations.push_back(static_cast<std::size_t>(i));
    rows.push_back(i);
  }
  if (!violations.empty()) {
    std::string list;
    for (std::size_t k = 0; k < violations.size() && k < 20; ++k) {
      list += (k ? ", " : "") + std::to_string(violations[k] + 1);
    }
    if (violations.size() > 20) list += ", ...";
    throw PositivityError("policy value for rule '" + rule_name + "': g(d) below " +
                              csv::format(nuisances.clip) + " for " + std::to_string(violations.size()) +
                              " records (" + list + ")",
                          std::move(violations));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n < 2) throw Error("policy value: fewer than two records in the evaluation stratum");

  Eigen::VectorXd weight(n), y(n), logit_m(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = rows[static_cast<std::size_t>(k)];
    const int d = rule[i];
    const double g = std::min(nuisances.g(i, d), 1.0 - nuisances.clip);
    weight[k] = data.a[i] == d ? 1.0 / g : 0.0;
    y[k] = data.y[i];
    logit_m[k] = logit(nuisances.m(i, d));
  }

  PolicyValueEstimate out;
  out.rule = std::move(rule_name);
  const double dn = static_cast<double>(n);
  out.tolerance = 1.0 / (std::sqrt(dn) * std::log(dn));
  double eps = 0.0;
  Eigen::VectorXd fitted(n);
  auto refresh = [&] {
    for (Eigen::Index k = 0; k < n; ++k) fitted[k] = expit(logit_m[k] + eps);
  };
  auto score = [&] { return (weight.array() * (y - fitted).array()).mean(); };
  refresh();
  double s = score();
  while (std::abs(s) >= out.tolerance && out.iterations < kMaxTargetingSteps) {
    const double info = (weight.array() * fitted.array() * (1.0 - fitted.array())).mean();
    if (!(info > 0.0)) break;
    double step = s / info;
    // Halve the Newton step until the weighted score shrinks.
    for (int h = 0; h < 30; ++h) {
      const double keep = eps;
      eps += step;
      refresh();
      const double s_new = score();
      if (std::abs(s_new) < std::abs(s)) {
        s = s_new;
        break;
      }
      eps = keep;
      step *= 0.5;
      refresh();
    }
    ++out.iterations;
  }
  out.psi = fitted.mean();
  out.eif = (weight.array() * (y - fitted).array() + fitted.array() - out.psi).matrix();
  out.mean_eif = out.eif.mean();
  out.se = sample_sd(out.eif) / std::sqrt(dn);
  out.lo = out.psi - kZ * out.se;
  out.hi = out.psi + kZ * out.se;
  return out;
}

PolicyContrast contrast(const PolicyValueEstimate& rule, const PolicyValueEstimate& reference) {
  if (rule.eif.size() != reference.eif.size()) throw Error("contrast: estimates use different records");
  if (!(rule.psi > 0.0 && reference.psi > 0.0)) throw Error("contrast: risks must be positive");
  PolicyContrast c;
  c.rule = rule.rule;
  c.reference = reference.rule;
  c.log_rr = std::log(rule.psi) - std::log(reference.psi);
  const Eigen::VectorXd eif = rule.eif / rule.psi - reference.eif / reference.psi;
  c.se = sample_sd(eif) / std::sqrt(static_cast<double>(eif.size()));
  c.rr = std::exp(c.log_rr);
  c.rr_lo = std::exp(c.log_rr - kZ * c.se);
  c.rr_hi = std::exp(c.log_rr + kZ * c.se);
  c.percent_decrease = 100.0 * (1.0 - c.rr);
  c.percent_lo = 100.0 * (1.0 - c.rr_hi);
  c.percent_hi = 100.0 * (1.0 - c.rr_lo);
  return c;
}

void write_policy_csv(const std::vector<PolicyValueEstimate>& estimates, std::ostream& out) {
  out << kPolicyHeader << '\n';
  for (const auto& e : estimates) {
    out << e.rule << ',' << csv::format(e.psi) << ',' << csv::format(e.se) << ',' << csv::format(e.lo)
        << ',' << csv::format(e.hi) << '\n';
  }
}

void write_contrasts_csv(const std::vector<PolicyContrast>& contrasts, std::ostream& out) {
  out << kContrastHeader << '\n';
  for (const auto& c : contrasts) {
    out << c.rule << ',' << c.reference << ',' << csv::format(c.rr) << ',' << csv::format(c.rr_lo)
        << ',' << csv::format(c.rr_hi) << ',' << csv::format(c.percent_decrease) << ','
        << csv::format(c.percent_lo) << ',' << csv::format(c.percent_hi) << '\n';
  }
}

}  // namespace fodtr
