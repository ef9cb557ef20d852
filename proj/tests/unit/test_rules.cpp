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

#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "fodtr/crossfit.hpp"
#include "fodtr/dgp.hpp"
#include "fodtr/error.hpp"
#include "fodtr/rules.hpp"
#include "support/oracles.hpp"

namespace fodtr {
namespace {

// Contrast surfaces with prescribed values per (v1 cell, v2).
CpeModel surfaces(const std::map<int, std::array<double, 2>>& values, std::vector<int> levels = {0, 1}) {
  CpeModel model;
  model.estimator = "fixed";
  model.levels = levels;
  for (const int v2 : levels) {
    CellMeansModel means;
    for (const auto& [cell, tau] : values) {
      const int v11 = (cell >> 2) & 1, v12 = (cell >> 1) & 1, v13 = cell & 1;
      means.means[static_cast<std::uint32_t>(v11 | (v12 << 1) | (v13 << 2))] = tau[v2];
      means.counts[static_cast<std::uint32_t>(v11 | (v12 << 1) | (v13 << 2))] = 1;
    }
    model.surfaces.push_back({FittedLearner{v1_design(SecondStage::kCellMeans), means}, std::nullopt});
  }
  return model;
}

Observation subject(int cell, std::optional<int> v2) {
  Observation o;
  o.v11 = (cell >> 2) & 1;
  o.v12 = (cell >> 1) & 1;
  o.v13 = cell & 1;
  o.s = v2 ? 1 : 0;
  o.v2 = v2;
  return o;
}

TEST(Decide, SameSignBoundsAreDecisive) {
  const CpeModel model = surfaces({{5, {0.2, 0.5}}});
  const RuleDecision d = decide(model, subject(5, std::nullopt));
  EXPECT_EQ(d.status, DecisionStatus::kDecisive);
  EXPECT_EQ(d.d1, 1);
  EXPECT_EQ(d.d0, 1);
  EXPECT_DOUBLE_EQ(d.lower, 0.2);
  EXPECT_DOUBLE_EQ(d.upper, 0.5);
  EXPECT_FALSE(d.d_opt.has_value());
}

TEST(Decide, NegativeBoundsWithholdTreatment) {
  const CpeModel model = surfaces({{2, {-0.4, -0.1}}});
  const RuleDecision d = decide(model, subject(2, std::nullopt));
  EXPECT_EQ(d.status, DecisionStatus::kDecisive);
  EXPECT_EQ(d.d1, 0);
  EXPECT_EQ(d.d0, 0);
}

TEST(Decide, SignChangeIsAmbiguous) {
  const CpeModel model = surfaces({{1, {-0.1, 0.3}}});
  const RuleDecision d = decide(model, subject(1, std::nullopt));
  EXPECT_EQ(d.status, DecisionStatus::kAmbiguous);
  EXPECT_EQ(d.d1, 1);
  EXPECT_EQ(d.d0, 0);
}

TEST(Decide, ObservedModifierUsesPointEstimate) {
  const CpeModel model = surfaces({{3, {0.04, -0.029}}});
  const RuleDecision d = decide(model, subject(3, 1));
  ASSERT_TRUE(d.d_opt.has_value());
  EXPECT_EQ(*d.d_opt, 0);
  EXPECT_EQ(d.d1, 0);
  EXPECT_EQ(d.d0, 0);
  EXPECT_EQ(d.lower, d.upper);
  EXPECT_EQ(d.status, DecisionStatus::kDecisive);
}

TEST(Decide, ZeroGoesToControl) {
  EXPECT_EQ(treat_if_positive(0.0), 0);
  const CpeModel model = surfaces({{0, {0.0, 0.2}}, {7, {0.0, 0.0}}});
  const RuleDecision tie = decide(model, subject(0, std::nullopt));
  EXPECT_EQ(tie.status, DecisionStatus::kAmbiguous);
  const RuleDecision flat = decide(model, subject(7, std::nullopt));
  EXPECT_EQ(flat.status, DecisionStatus::kDecisive);
  EXPECT_EQ(flat.d1, 0);
  EXPECT_EQ(*decide(model, subject(0, 0)).d_opt, 0);
}

TEST(Decide, MissingLevelRejected) {
  const CpeModel partial = surfaces({{4, {0.1, 0.2}}}, {1});
  EXPECT_THROW(decide(partial, subject(4, 0)), Error);
  EXPECT_THROW(decide(partial, subject(4, std::nullopt)), Error);
  EXPECT_NO_THROW(decide(partial, subject(4, 1)));
}

TEST(Summary, AllDecisive) {
  const CpeModel model = surfaces({{5, {0.2, 0.5}}});
  const std::vector<RuleDecision> ds{decide(model, subject(5, std::nullopt)), decide(model, subject(5, 1))};
  const DecisionSummary s = decision_summary(ds);
  EXPECT_EQ(s.ambiguous_share, 0.0);
  EXPECT_EQ(s.decisive_share, 1.0);
}

TEST(Summary, ThreeToOne) {
  const CpeModel model = surfaces({{5, {0.2, 0.5}}, {1, {-0.1, 0.3}}});
  std::vector<RuleDecision> ds;
  for (int k = 0; k < 3; ++k) ds.push_back(decide(model, subject(5, std::nullopt)));
  ds.push_back(decide(model, subject(1, std::nullopt)));
  const DecisionSummary s = decision_summary(ds);
  EXPECT_EQ(s.decisive, 3u);
  EXPECT_EQ(s.ambiguous, 1u);
  EXPECT_DOUBLE_EQ(s.decisive_share, 0.75);
  EXPECT_DOUBLE_EQ(s.ambiguous_share, 0.25);
}

TEST(Summary, EmptyRejected) { EXPECT_THROW(decision_summary({}), Error); }

class FittedRules : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    DgpParams p;
    p.n = 10'000;
    p.seed = 31;
    data_ = new Dataset(sample_dataset(p));
    fits_ = new NuisanceFits(fit_nuisances(*data_, make_folds(p.n, fold_schedule(p.n), 2), {}, {}));
    model_ = new CpeModel(fit_dr_learner(*data_, *fits_, SecondStage::kCellMeans));
    decisions_ = new std::vector<RuleDecision>(decide_all(*model_, *data_));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete fits_;
    delete model_;
    delete decisions_;
  }
  static Dataset* data_;
  static NuisanceFits* fits_;
  static CpeModel* model_;
  static std::vector<RuleDecision>* decisions_;
};
Dataset* FittedRules::data_ = nullptr;
NuisanceFits* FittedRules::fits_ = nullptr;
CpeModel* FittedRules::model_ = nullptr;
std::vector<RuleDecision>* FittedRules::decisions_ = nullptr;

TEST_F(FittedRules, CompletionsAgreeExactlyOnDecisive) {
  const Eigen::VectorXi d1 = assignment(*decisions_, RuleCompletion::kTreatAmbiguous);
  const Eigen::VectorXi d0 = assignment(*decisions_, RuleCompletion::kWithholdAmbiguous);
  for (std::size_t k = 0; k < decisions_->size(); ++k) {
    const RuleDecision& d = (*decisions_)[k];
    const auto i = static_cast<Eigen::Index>(k);
    ASSERT_LE(d.lower, d.upper);
    ASSERT_EQ(d.status == DecisionStatus::kDecisive, (d.lower > 0) == (d.upper > 0));
    ASSERT_EQ(d1[i] == d0[i], d.status == DecisionStatus::kDecisive);
    if (data_->v2_observed(i)) {
      ASSERT_EQ(d.lower, d.upper);
      ASSERT_TRUE(d.d_opt.has_value());
    }
  }
}

TEST_F(FittedRules, RevealingModifierKeepsDecisionsInsideBounds) {
  Dataset revealed = *data_;
  revealed.v2 = revealed.v2_latent;
  const CpeModel refit = fit_dr_learner(revealed, *fits_, SecondStage::kCellMeans);
  const auto after = decide_all(refit, revealed);
  for (std::size_t k = 0; k < after.size(); ++k) {
    const RuleDecision& before = (*decisions_)[k];
    ASSERT_TRUE(after[k].d_opt.has_value());
    ASSERT_GE(after[k].lower, before.lower);
    ASSERT_LE(after[k].upper, before.upper);
    ASSERT_TRUE(*after[k].d_opt == before.d0 || *after[k].d_opt == before.d1);
  }
}

TEST_F(FittedRules, DecisiveShareTracksOracle) {
  const testing::ExactTruth truth = testing::exact_truth(DgpParams{});
  // A cell whose true CPE sits within 3 SEs of zero at this n can land on
  // either side; its S = 0 records make up the sampling slack.
  std::array<double, 8> se{};
  for (int v2 = 0; v2 <= 1; ++v2) {
    const CellSummary s = summarize_by_cell(
        *data_, compute_pseudo_outcome(*data_, *fits_, 1, v2).xi - compute_pseudo_outcome(*data_, *fits_, 0, v2).xi);
    for (int c = 0; c < 8; ++c) se[c] = std::max(se[c], s.std_error[c]);
  }
  double expected = 0.0, slack = 0.0;
  for (Eigen::Index i = 0; i < data_->size(); ++i) {
    const int c = data_->v1_cell(i);
    const bool constant = (truth.cpe[2 * c] > 0) == (truth.cpe[2 * c + 1] > 0);
    const bool unresolved = std::min(std::abs(truth.cpe[2 * c]), std::abs(truth.cpe[2 * c + 1])) < 3 * se[c];
    expected += data_->v2_observed(i) || constant;
    slack += !data_->v2_observed(i) && unresolved;
  }
  const double n = static_cast<double>(data_->size());
  expected /= n;
  slack /= n;
  EXPECT_GT(slack, 0.0);
  const DecisionSummary s = decision_summary(*decisions_);
  EXPECT_NEAR(s.decisive_share, expected, slack);
}

TEST(OracleRules, ProxySignMatchesEffectSign) {
  const testing::ExactTruth truth = testing::exact_truth(DgpParams{});
  for (int c = 0; c < 16; ++c) EXPECT_EQ(treat_if_positive(truth.cpe[c]), treat_if_positive(truth.cate[c])) << c;
}

TEST(DecisionsCsv, HeaderAndRows) {
  const CpeModel model = surfaces({{1, {-0.1, 0.3}}, {5, {0.2, 0.5}}});
  std::vector<RuleDecision> ds{decide(model, subject(1, std::nullopt), 0), decide(model, subject(5, 1), 1)};
  std::ostringstream out;
  write_decisions_csv(ds, out);
  EXPECT_EQ(out.str(),
            "i,status,lower,upper,d1,d0\n"
            "1,ambiguous,-0.1,0.3,1,0\n"
            "2,decisive,0.5,0.5,1,1\n");
}

}  // namespace
}  // namespace fodtr
