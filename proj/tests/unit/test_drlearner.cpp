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

#include "fodtr/crossfit.hpp"
#include "fodtr/dgp.hpp"
#include "fodtr/drlearner.hpp"
#include "fodtr/error.hpp"
#include "fodtr/folds.hpp"
#include "support/oracles.hpp"

namespace fodtr {
namespace {

Dataset simulate(std::int64_t n, std::uint64_t seed, const DgpParams& base = {}) {
  DgpParams p = base;
  p.n = n;
  p.seed = seed;
  return sample_dataset(p);
}

const testing::ExactTruth& exact() {
  static const testing::ExactTruth t = testing::exact_truth(DgpParams{});
  return t;
}

// One million records with the generating mechanism's own nuisances.
class OracleMillion : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(simulate(1'000'000, 21));
    fits_ = new NuisanceFits(oracle_nuisances(*data_, DgpParams{}));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete fits_;
  }
  static Dataset* data_;
  static NuisanceFits* fits_;
};
Dataset* OracleMillion::data_ = nullptr;
NuisanceFits* OracleMillion::fits_ = nullptr;

// 10^5 records with cross-fitted nuisances.
class Estimated : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(simulate(100'000, 22));
    fits_ = new NuisanceFits(fit_nuisances(*data_, make_folds(data_->size(), 2, 3), {}, {}));
    oracle_ = new NuisanceFits(oracle_nuisances(*data_, DgpParams{}));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete fits_;
    delete oracle_;
  }
  static Dataset* data_;
  static NuisanceFits* fits_;
  static NuisanceFits* oracle_;
};
Dataset* Estimated::data_ = nullptr;
NuisanceFits* Estimated::fits_ = nullptr;
NuisanceFits* Estimated::oracle_ = nullptr;

TEST(PseudoOutcome, ExactDecomposition) {
  const Dataset d = simulate(3000, 1);
  const NuisanceFits fits = fit_nuisances(d, make_folds(d.size(), 5, 2), {}, {});
  for (int a = 0; a <= 1; ++a) {
    for (int v2 = 0; v2 <= 1; ++v2) {
      const PseudoOutcome p = compute_pseudo_outcome(d, fits, a, v2);
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        ASSERT_EQ(p.xi[i], p.phi_b[i] + p.phi_m[i] + p.plug[i]);
        if (d.a[i] != a || d.y[i] != 1 || d.s[i] != 1) ASSERT_EQ(p.phi_b[i], 0.0);
        if (d.a[i] != a) {
          ASSERT_EQ(p.phi_m[i], 0.0);
          ASSERT_EQ(p.xi[i], p.plug[i]);
        }
        ASSERT_EQ(p.plug[i], fits.b_at(v2)(i, a) * fits.m(i, a));
      }
    }
  }
}

TEST(PseudoOutcome, ZeroModifierProbability) {
  const Dataset d = simulate(2000, 2);
  NuisanceFits fits = oracle_nuisances(d, DgpParams{});
  for (auto& b : fits.b) b.setZero();
  for (int a = 0; a <= 1; ++a) {
    const PseudoOutcome p = compute_pseudo_outcome(d, fits, a, 1);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double indicator = d.a[i] == a && d.y[i] == 1 && d.s[i] == 1 ? 1.0 : 0.0;
      const double modifier = d.v2[i] == 1 ? 1.0 : 0.0;
      ASSERT_DOUBLE_EQ(p.xi[i], indicator / fits.r(i, a) * modifier * fits.m(i, a));
    }
  }
}

TEST(PseudoOutcome, PositivityFloorEnforced) {
  const Dataset d = simulate(500, 3);
  NuisanceFits fits = fit_nuisances(d, make_folds(d.size(), 2, 2), {}, {});
  fits.r(7, 1) = 0.001;
  try {
    compute_pseudo_outcome(d, fits, 1, 1);
    FAIL() << "expected PositivityError";
  } catch (const PositivityError& e) {
    ASSERT_EQ(e.records().size(), 1u);
    EXPECT_EQ(e.records()[0], 7u);
  }
}

TEST_F(OracleMillion, EifMeanEqualsKappa) {
  for (int a = 0; a <= 1; ++a) {
    for (int v2 = 0; v2 <= 1; ++v2) {
      const PseudoOutcome p = compute_pseudo_outcome(*data_, *fits_, a, v2);
      const double n = static_cast<double>(p.xi.size());
      const double mean = p.xi.mean();
      const double se = std::sqrt((p.xi.array() - mean).square().sum() / (n - 1) / n);
      EXPECT_NEAR(mean, exact().kappa[a][v2], 3 * se) << "a=" << a << " v2=" << v2;
    }
  }
}

struct Regime {
  const char* name;
  std::initializer_list<Nuisance> corrupted;
};

// Lemma-2 pairs: (g, b), (r, m) or (b, m) correct.
const Regime kRobustRegimes[] = {
    {"g,b correct", {Nuisance::kM, Nuisance::kR}},
    {"r,m correct", {Nuisance::kG, Nuisance::kB}},
    {"b,m correct", {Nuisance::kG, Nuisance::kR}},
};

TEST_F(OracleMillion, DoubleRobustCellMeans) {
  for (const Regime& regime : kRobustRegimes) {
    const NuisanceFits bent = distort(*fits_, *data_, regime.corrupted, 0.3);
    for (int a = 0; a <= 1; ++a) {
      for (int v2 = 0; v2 <= 1; ++v2) {
        const CellSummary s = summarize_by_cell(*data_, compute_pseudo_outcome(*data_, bent, a, v2).xi);
        for (int cell = 0; cell < 8; ++cell) {
          EXPECT_NEAR(s.mean[cell], exact().f[a][2 * cell + v2], 3 * s.std_error[cell])
              << regime.name << " a=" << a << " v2=" << v2 << " cell=" << cell;
        }
      }
    }
  }
}

TEST_F(OracleMillion, RemainderVanishesInRobustRegimes) {
  EXPECT_TRUE(remainder_terms(*fits_, *fits_, 1, 1).isZero(0.0));
  for (const Regime& regime : kRobustRegimes) {
    const NuisanceFits bent = distort(*fits_, *data_, regime.corrupted, 0.3);
    for (int a = 0; a <= 1; ++a) {
      const CellSummary rem = remainder_diagnostic(*data_, *fits_, bent, a, 1);
      for (int cell = 0; cell < 8; ++cell) {
        EXPECT_NEAR(rem.mean[cell], 0.0, 3 * rem.std_error[cell] + 1e-15) << regime.name;
      }
    }
  }
}

TEST_F(OracleMillion, RemainderNonzeroWhenEverythingIsWrong) {
  const NuisanceFits bent =
      distort(*fits_, *data_, {Nuisance::kG, Nuisance::kM, Nuisance::kB, Nuisance::kR}, 0.3);
  int clear = 0;
  for (int a = 0; a <= 1; ++a) {
    const CellSummary rem = remainder_diagnostic(*data_, *fits_, bent, a, 1);
    for (int cell = 0; cell < 8; ++cell) clear += std::abs(rem.mean[cell]) > 5 * rem.std_error[cell];
  }
  EXPECT_GE(clear, 8);
}

// The (g, m) pairing does not remove the b-remainder.
TEST_F(OracleMillion, RemainderNonzeroWithOnlyGAndMCorrect) {
  const NuisanceFits bent = distort(*fits_, *data_, {Nuisance::kB, Nuisance::kR}, 0.3);
  const CellSummary rem = remainder_diagnostic(*data_, *fits_, bent, 1, 1);
  int clear = 0;
  for (int cell = 0; cell < 8; ++cell) clear += std::abs(rem.mean[cell]) > 5 * rem.std_error[cell];
  EXPECT_GE(clear, 4);
}

TEST_F(OracleMillion, RemainderIsTheBiasOfXi) {
  const NuisanceFits bent =
      distort(*fits_, *data_, {Nuisance::kG, Nuisance::kM, Nuisance::kB, Nuisance::kR}, 0.3);
  for (int a = 0; a <= 1; ++a) {
    const Eigen::VectorXd total =
        compute_pseudo_outcome(*data_, bent, a, 1).xi + remainder_terms(*fits_, bent, a, 1);
    const CellSummary s = summarize_by_cell(*data_, total);
    for (int cell = 0; cell < 8; ++cell) {
      EXPECT_NEAR(s.mean[cell], exact().f[a][2 * cell + 1], 3 * s.std_error[cell]) << a << cell;
    }
  }
}

TEST(Remainder, ShiftedModifierAndOutcome) {
  const Dataset d = simulate(20000, 4);
  const NuisanceFits truth = oracle_nuisances(d, DgpParams{});
  NuisanceFits shifted = truth;
  for (auto& b : shifted.b) b.array() += 0.1;
  shifted.m.array() += 0.1;
  const CellSummary rem = remainder_diagnostic(d, truth, shifted, 1, 0);
  // Direct evaluation of (b - b')(m - m').
  for (int cell = 0; cell < 8; ++cell) EXPECT_NEAR(rem.mean[cell], 0.01, 1e-12);
}

TEST_F(Estimated, PublishedCellPositiveModifier) {
  const CpeModel model = fit_dr_learner(*data_, *fits_, SecondStage::kCellMeans);
  EXPECT_NEAR(model.predict_cell(v1_cell_index(1, 0, 1), 1), 0.257, 0.05);
}

TEST_F(Estimated, PublishedCellNegativeEffect) {
  const CpeModel model = fit_dr_learner(*data_, *fits_, SecondStage::kCellMeans);
  EXPECT_NEAR(model.predict_cell(v1_cell_index(0, 1, 1), 0), -0.029, 0.04);
}

TEST_F(Estimated, ConstantPseudoOutcomeGivesZero) {
  std::vector<std::array<PseudoOutcome, 2>> pseudo(1);
  for (int a = 0; a <= 1; ++a) {
    PseudoOutcome& p = pseudo[0][a];
    p.arm = a;
    p.v2_level = 1;
    p.xi = Eigen::VectorXd::Constant(data_->size(), 0.37);
  }
  const CpeModel model = fit_cpe(*data_, pseudo, SecondStage::kCellMeans);
  for (int cell = 0; cell < 8; ++cell) EXPECT_EQ(model.predict_cell(cell, 1), 0.0);
}

TEST_F(Estimated, PluginMatchesDrWithOracleNuisances) {
  const CpeModel dr = fit_dr_learner(*data_, *oracle_, SecondStage::kCellMeans);
  const CpeModel plug = fit_plugin(*data_, *oracle_, SecondStage::kCellMeans);
  for (int v2 = 0; v2 <= 1; ++v2) {
    for (int cell = 0; cell < 8; ++cell) {
      EXPECT_LT(std::abs(dr.predict_cell(cell, v2) - plug.predict_cell(cell, v2)), 0.02);
    }
  }
}

TEST_F(Estimated, OracleEfficiency) {
  const CpeModel est = fit_dr_learner(*data_, *fits_, SecondStage::kCellMeans);
  const CpeModel orc = fit_dr_learner(*data_, *oracle_, SecondStage::kCellMeans);
  for (int v2 = 0; v2 <= 1; ++v2) {
    const CellSummary s = summarize_by_cell(
        *data_, compute_pseudo_outcome(*data_, *oracle_, 1, v2).xi - compute_pseudo_outcome(*data_, *oracle_, 0, v2).xi);
    for (int cell = 0; cell < 8; ++cell) {
      EXPECT_NEAR(est.predict_cell(cell, v2), orc.predict_cell(cell, v2), 2 * s.std_error[cell]);
    }
  }
}

TEST_F(Estimated, CateIgnoringModifierMatchesAveragedTruth) {
  const CpeModel model = fit_cate_v1_only(*data_, *fits_, SecondStage::kCellMeans);
  EXPECT_FALSE(model.uses_v2());
  const auto& t = exact();
  for (int cell = 0; cell < 8; ++cell) {
    const double p0 = t.prob[2 * cell], p1 = t.prob[2 * cell + 1];
    const double target = (p0 * t.cate[2 * cell] + p1 * t.cate[2 * cell + 1]) / (p0 + p1);
    EXPECT_NEAR(model.predict_cell(cell, 0), target, 0.03) << cell;
  }
}

TEST_F(Estimated, ArmSurfacesAndConstantWithinCell) {
  const CpeModel model = fit_dr_learner(*data_, *fits_, SecondStage::kCellMeans);
  const Eigen::VectorXd pred = model.predict(*data_, 1);
  ASSERT_TRUE(pred.allFinite());
  for (Eigen::Index i = 0; i < data_->size(); ++i) {
    ASSERT_EQ(pred[i], model.predict_cell(data_->v1_cell(i), 1));
  }
  for (int cell = 0; cell < 8; ++cell) {
    EXPECT_DOUBLE_EQ(model.predict_cell(cell, 1),
                     model.predict_arm_cell(1, cell, 1) - model.predict_arm_cell(0, cell, 1));
  }
  EXPECT_THROW(model.predict_cell(0, 2), Error);
}

TEST_F(Estimated, LeastSquaresSecondStage) {
  const CpeModel model = fit_dr_learner(*data_, *fits_, SecondStage::kLeastSquares);
  const auto& t = exact();
  double weighted = 0.0;
  for (int c = 0; c < 16; ++c) weighted += t.prob[c] * std::abs(model.predict_cell(c / 2, c % 2) - t.cpe[c]);
  // Main effects cannot represent the interactions exactly, but stay close.
  EXPECT_LT(weighted, 0.05);
}

TEST(CpeSigns, AgreeWithTruthAtTenThousand) {
  const Dataset d = simulate(10'000, 5);
  const NuisanceFits fits = fit_nuisances(d, make_folds(d.size(), fold_schedule(d.size()), 1), {}, {});
  const CpeModel model = fit_dr_learner(d, fits, SecondStage::kCellMeans);
  for (int c = 0; c < 16; ++c) {
    const double truth = exact().cpe[c];
    if (std::abs(truth) > 0.05) EXPECT_EQ(model.predict_cell(c / 2, c % 2) > 0, truth > 0) << c;
  }
}

TEST(NoEffect, PluginAndCateNearZero) {
  DgpParams p;
  p.remove_treatment_effect();
  const Dataset d = simulate(10'000, 6, p);
  const NuisanceFits fits = fit_nuisances(d, make_folds(d.size(), 2, 1), {}, {});
  const CpeModel plug = fit_plugin(d, fits, SecondStage::kCellMeans);
  const CpeModel cate = fit_cate_v1_only(d, fits, SecondStage::kCellMeans);
  for (int v2 = 0; v2 <= 1; ++v2) {
    // Pseudo-outcome spread gives the sampling scale of a cell contrast.
    const CellSummary s = summarize_by_cell(
        d, compute_pseudo_outcome(d, fits, 1, v2).xi - compute_pseudo_outcome(d, fits, 0, v2).xi);
    for (int cell = 0; cell < 8; ++cell) {
      EXPECT_NEAR(plug.predict_cell(cell, v2), 0.0, 3 * s.std_error[cell]) << cell;
    }
  }
  for (int cell = 0; cell < 8; ++cell) {
    const CellSummary s = summarize_by_cell(
        d, compute_pseudo_outcome(d, fits, 1, 0).xi + compute_pseudo_outcome(d, fits, 1, 1).xi -
               compute_pseudo_outcome(d, fits, 0, 0).xi - compute_pseudo_outcome(d, fits, 0, 1).xi);
    EXPECT_NEAR(cate.predict_cell(cell, 0), 0.0, 3 * s.std_error[cell] / fits.g.col(1).mean()) << cell;
  }
}

TEST(CateV1, UntreatedRecordsContributeOutcomeRegression) {
  const Dataset d = simulate(4000, 7);
  NuisanceFits fits = oracle_nuisances(d, DgpParams{});
  // Make m constant so the fitted arm-1 surface reveals the pseudo-outcome.
  fits.m.setConstant(0.4);
  Dataset untreated = d;
  untreated.a.setZero();
  untreated.s.setZero();
  untreated.v2.setConstant(kMissing);
  const CpeModel model = fit_cate_v1_only(untreated, fits, SecondStage::kCellMeans);
  for (int cell = 0; cell < 8; ++cell) EXPECT_NEAR(model.predict_arm_cell(1, cell, 0), 0.4, 1e-12);
}

TEST(CpeCsv, SixteenRows) {
  const Dataset d = simulate(2000, 8);
  const NuisanceFits fits = fit_nuisances(d, make_folds(d.size(), 2, 1), {}, {});
  std::ostringstream out;
  write_cpe_csv(fit_dr_learner(d, fits, SecondStage::kCellMeans), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kCpeHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 16);
}

TEST(SecondStage, ParseNames) {
  EXPECT_EQ(parse_second_stage("cell_means"), SecondStage::kCellMeans);
  EXPECT_EQ(parse_second_stage("least_squares"), SecondStage::kLeastSquares);
  EXPECT_THROW(parse_second_stage("xgboost"), ConfigError);
}

}  // namespace
}  // namespace fodtr
