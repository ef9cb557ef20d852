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

#include "fodtr/rules.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"

namespace fodtr {

std::string_view to_string(DecisionStatus status) {
  return status == DecisionStatus::kDecisive ? "decisive" : "ambiguous";
}

RuleDecision decide(const CpeModel& model, const Observation& subject, Eigen::Index index) {
  const int cell = v1_cell_index(subject.v11, subject.v12, subject.v13);
  RuleDecision d;
  d.index = index;
  if (!model.uses_v2()) {
    d.lower = d.upper = model.predict_cell(cell, 0);
    d.d1 = d.d0 = treat_if_positive(d.lower);
    return d;
  }
  if (subject.v2) {
    if (!model.has_level(*subject.v2)) {
      throw Error("decide: model has no surface for V2 level " + std::to_string(*subject.v2));
    }
    d.lower = d.upper = model.predict_cell(cell, *subject.v2);
    d.d_opt = treat_if_positive(d.lower);
    d.d1 = d.d0 = *d.d_opt;
    return d;
  }
  if (model.levels.size() < 2) {
    throw Error("decide: bounds for a missing V2 need surfaces for every V2 level");
  }
  d.lower = d.upper = model.predict_cell(cell, model.levels.front());
  for (const int v : model.levels) {
    const double t = model.predict_cell(cell, v);
    d.lower = std::min(d.lower, t);
    d.upper = std::max(d.upper, t);
  }
  if ((d.lower > 0.0) == (d.upper > 0.0)) {
    d.d1 = d.d0 = treat_if_positive(d.upper);
  } else {
    d.status = DecisionStatus::kAmbiguous;
    d.d1 = 1;
    d.d0 = 0;
  }
  return d;
}

std::vector<RuleDecision> decide_all(const CpeModel& model, const Dataset& data) {
  if (model.uses_v2()) {
    for (const int v : data.v2_levels()) {
      if (!model.has_level(v)) throw Error("decide: model has no surface for V2 level " + std::to_string(v));
    }
  }
  std::vector<RuleDecision> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) out.push_back(decide(model, data.row(i), i));
  return out;
}

DecisionSummary decision_summary(const std::vector<RuleDecision>& decisions) {
  if (decisions.empty()) throw Error("decision summary: no decisions");
  DecisionSummary s;
  s.total = decisions.size();
  for (const auto& d : decisions) {
    if (d.status == DecisionStatus::kDecisive) {
      ++s.decisive;
    } else {
      ++s.ambiguous;
    }
  }
  s.decisive_share = static_cast<double>(s.decisive) / static_cast<double>(s.total);
  s.ambiguous_share = static_cast<double>(s.ambiguous) / static_cast<double>(s.total);
  return s;
}

Eigen::VectorXi assignment(const std::vector<RuleDecision>& decisions, RuleCompletion completion) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(decisions.size()));
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] =
        completion == RuleCompletion::kTreatAmbiguous ? decisions[k].d1 : decisions[k].d0;
  }
  return out;
}

void write_decisions_csv(const std::vector<RuleDecision>& decisions, std::ostream& out) {
  out << kDecisionsHeader << '\n';
  for (const auto& d : decisions) {
    out << (d.index + 1) << ',' << to_string(d.status) << ',' << csv::format(d.lower) << ','
        << csv::format(d.upper) << ',' << d.d1 << ',' << d.d0 << '\n';
  }
}

}  // namespace fodtr
