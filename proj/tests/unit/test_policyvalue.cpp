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

#include <cmath>
#include <sstream>

#include "fodtr/dgp.hpp"
#include "fodtr/error.hpp"
#include "fodtr/folds.hpp"
#include "fodtr/policyvalue.hpp"
#include "fodtr/special.hpp"
#include "support/oracles.hpp"

namespace fodtr {
namespace {

Dataset simulate(std::int64_t n, std::uint64_t seed, const DgpParams& base = {}) {
  DgpParams p = base;
  p.n = n;
  p.seed = seed;
  return sample_dataset(p);
}

Eigen::VectorXi constant_rule(const Dataset& d, int arm) { return Eigen::VectorXi::Constant(d.size(), arm); }

void expect_targeted(const PolicyValueEstimate& e) {
  EXPECT_LT(std::abs(e.mean_eif), e.tolerance) << e.rule;
  EXPECT_GE(e.psi, 0.0);
  EXPECT_LE(e.psi, 1.0);
  EXPECT_LE(e.lo, e.psi);
  EXPECT_GE(e.hi, e.psi);
}

TEST(Tmle, NoEffectRecoversOutcomeRate) {
  DgpParams p;
  p.intercepts_only();
  const double rate = expit(p.outcome.intercept);
  const Dataset d = simulate(5000, 1, p);
  const PolicyNuisances nuis = fit_policy_nuisances(d, make_folds(d.size(), 10, 2), PolicyStratum::kTrialOne, {});
  for (int arm = 0; arm <= 1; ++arm) {
    const PolicyValueEstimate e = tmle_policy_value(d, constant_rule(d, arm), nuis, "static");
    expect_targeted(e);
    EXPECT_LE(e.lo, rate);
    EXPECT_GE(e.hi, rate);
  }
}

class DefaultTenThousand : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(simulate(10'000, 3));
    nuis_ = new PolicyNuisances(
        fit_policy_nuisances(*data_, make_folds(data_->size(), 10, 4), PolicyStratum::kTrialOne, {}));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete nuis_;
  }
  static Dataset* data_;
  static PolicyNuisances* nuis_;
};
Dataset* DefaultTenThousand::data_ = nullptr;
PolicyNuisances* DefaultTenThousand::nuis_ = nullptr;

TEST_F(DefaultTenThousand, StaticRuleMatchesOracle) {
  const PolicyValueEstimate e = tmle_policy_value(*data_, constant_rule(*data_, 1), *nuis_, "all_1");
  expect_targeted(e);
  const double truth = testing::exact_policy_value(DgpParams{}, [](int, int) { return 1; }, true);
  EXPECT_NEAR(e.psi, truth, 3 * e.se);
}

TEST_F(DefaultTenThousand, OracleRuleBeatsStaticRules) {
  const testing::ExactTruth truth = testing::exact_truth(DgpParams{});
  Eigen::VectorXi rule(data_->size());
  for (Eigen::Index i = 0; i < data_->size(); ++i) {
    const int v2 = data_->v2_observed(i) ? data_->v2[i] : 0;
    rule[i] = truth.cpe[2 * data_->v1_cell(i) + v2] > 0 ? 1 : 0;
  }
  const PolicyValueEstimate best = tmle_policy_value(*data_, rule, *nuis_, "oracle");
  expect_targeted(best);
  for (int arm = 0; arm <= 1; ++arm) {
    const PolicyValueEstimate fixed = tmle_policy_value(*data_, constant_rule(*data_, arm), *nuis_, "static");
    EXPECT_GE(best.psi, fixed.psi - 3 * fixed.se) << arm;
  }
}

TEST_F(DefaultTenThousand, EifHasZeroMeanAfterTargeting) {
  for (int arm = 0; arm <= 1; ++arm) {
    const PolicyValueEstimate e = tmle_policy_value(*data_, constant_rule(*data_, arm), *nuis_, "static");
    EXPECT_LT(std::abs(e.mean_eif), e.tolerance);
    const double n = static_cast<double>(e.eif.size());
    EXPECT_DOUBLE_EQ(e.tolerance, 1.0 / (std::sqrt(n) * std::log(n)));
    EXPECT_LE(e.iterations, 20);
  }
}

TEST_F(DefaultTenThousand, StratumRestrictsRecords) {
  const PolicyValueEstimate e = tmle_policy_value(*data_, constant_rule(*data_, 0), *nuis_, "all_0");
  EXPECT_EQ(e.eif.size(), data_->s.sum());
}

TEST_F(DefaultTenThousand, ContrastArithmetic) {
  const PolicyValueEstimate one = tmle_policy_value(*data_, constant_rule(*data_, 1), *nuis_, "all_1");
  const PolicyValueEstimate zero = tmle_policy_value(*data_, constant_rule(*data_, 0), *nuis_, "all_0");
  const PolicyContrast c = contrast(one, zero);
  EXPECT_NEAR(c.rr, one.psi / zero.psi, 1e-12);
  EXPECT_NEAR(c.percent_decrease, 100 * (1 - one.psi / zero.psi), 1e-10);
  EXPECT_LE(c.rr_lo, c.rr);
  EXPECT_GE(c.rr_hi, c.rr);
  EXPECT_LE(c.percent_lo, c.percent_decrease);
  EXPECT_GE(c.percent_hi, c.percent_decrease);
  const PolicyContrast self = contrast(one, one);
  EXPECT_DOUBLE_EQ(self.rr, 1.0);
  EXPECT_EQ(self.se, 0.0);
}

TEST(Tmle, RobustToWrongOutcomeModelWithKnownRandomization) {
  const Dataset d = simulate(100'000, 5);
  PolicyNuisances nuis;
  nuis.stratum = PolicyStratum::kTrialOne;
  nuis.in_sample.resize(static_cast<std::size_t>(d.size()));
  nuis.g = Eigen::MatrixXd::Constant(d.size(), 2, 0.5);
  nuis.m = Eigen::MatrixXd(d.size(), 2);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    nuis.in_sample[static_cast<std::size_t>(i)] = d.s[i] == 1;
    // Wrong but bounded outcome regression.
    nuis.m(i, 0) = 0.2 + 0.3 * d.w2[i];
    nuis.m(i, 1) = 0.7 - 0.4 * d.v12[i];
  }
  const PolicyValueEstimate e = tmle_policy_value(d, constant_rule(d, 1), nuis, "all_1");
  expect_targeted(e);
  const double truth = testing::exact_policy_value(DgpParams{}, [](int, int) { return 1; }, true);
  EXPECT_NEAR(e.psi, truth, 3 * e.se);
}

TEST(Tmle, PooledStratumRejectsUntreatableRecords) {
  const Dataset d = simulate(2000, 6);
  const PolicyNuisances nuis = fit_policy_nuisances(d, make_folds(d.size(), 5, 1), PolicyStratum::kPooled, {});
  try {
    tmle_policy_value(d, constant_rule(d, 1), nuis, "all_1");
    FAIL() << "expected PositivityError";
  } catch (const PositivityError& e) {
    ASSERT_FALSE(e.records().empty());
    for (const std::size_t i : e.records()) EXPECT_EQ(d.s[static_cast<Eigen::Index>(i)], 0);
    EXPECT_NE(std::string(e.what()).find("all_1"), std::string::npos);
  }
  // Withholding treatment is estimable everywhere.
  expect_targeted(tmle_policy_value(d, constant_rule(d, 0), nuis, "all_0"));
}

TEST(Tmle, StratumNames) {
  EXPECT_EQ(parse_stratum("s1"), PolicyStratum::kTrialOne);
  EXPECT_EQ(parse_stratum("pooled"), PolicyStratum::kPooled);
  EXPECT_EQ(to_string(PolicyStratum::kPooled), "pooled");
  EXPECT_THROW(parse_stratum("s0"), ConfigError);
}

TEST(PolicyCsv, Headers) {
  PolicyValueEstimate a;
  a.rule = "d1";
  a.psi = 0.5;
  a.se = 0.01;
  a.lo = 0.48;
  a.hi = 0.52;
  std::ostringstream out;
  write_policy_csv({a}, out);
  EXPECT_EQ(out.str(), "rule,psi,se,lo,hi\nd1,0.5,0.01,0.48,0.52\n");
  std::ostringstream cout_;
  write_contrasts_csv({}, cout_);
  EXPECT_EQ(cout_.str(), std::string(kContrastHeader) + "\n");
}

}  // namespace
}  // namespace fodtr
