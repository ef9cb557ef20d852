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
#include "fodtr/special.hpp"
#include "support/oracles.hpp"

namespace fodtr {
namespace {

using testing::exact_truth;
using testing::kPublishedTruth;

DgpParams with_n(std::int64_t n, std::uint64_t seed = 1) {
  DgpParams p;
  p.n = n;
  p.seed = seed;
  return p;
}

const TruthTable& default_oracle() {
  static const TruthTable table = oracle_truth(DgpParams{}, 2'000'000);
  return table;
}

TEST(DgpParams, DefaultsArePublishedCoefficients) {
  const DgpParams p;
  EXPECT_EQ(p.p_w1, 0.33);
  EXPECT_EQ(p.v11.intercept, 0.5);
  EXPECT_EQ(p.v12.w2, -0.6);
  EXPECT_EQ(p.v2.v11, 0.6);
  EXPECT_EQ(p.trial.intercept, 0.0);
  EXPECT_EQ(p.trial.w1, 0.5);
  EXPECT_EQ(p.p_treat_in_trial, 0.5);
  EXPECT_EQ(p.outcome.intercept, -1.5);
  EXPECT_EQ(p.outcome.v12_a, -1.2);
  EXPECT_EQ(p.outcome.v2_a, 1.2);
}

TEST(DgpParams, SetByName) {
  DgpParams p;
  p.set("outcome.v2_a", 0.0);
  EXPECT_EQ(p.outcome.v2_a, 0.0);
  p.set("trial.w1", 0.25);
  EXPECT_EQ(p.trial.w1, 0.25);
  EXPECT_THROW(p.set("outcome.nope", 1.0), ConfigError);
}

TEST(SampleDataset, RejectsZeroN) { EXPECT_THROW(sample_dataset(with_n(0)), Error); }

TEST(SampleDataset, InterceptOnlyModifierRate) {
  DgpParams p = with_n(1'000'000, 3);
  p.intercepts_only();
  const Dataset d = sample_dataset(p);
  const double rate = d.v2_latent.cast<double>().mean();
  const double target = expit(-0.5);
  EXPECT_NEAR(target, 0.3775, 5e-5);
  EXPECT_NEAR(rate, target, 3 * std::sqrt(target * (1 - target) / 1e6));
}

TEST(SampleDataset, TreatmentRandomizedWithinTrial) {
  const Dataset d = sample_dataset(with_n(1'000'000, 4));
  const double n = static_cast<double>(d.size());
  const double trial = d.s.cast<double>().sum();
  const double treated = (d.s.array() * d.a.array()).cast<double>().sum();
  // Binomial(trial, 0.5) given the trial count.
  EXPECT_NEAR(treated / n, 0.5 * trial / n, 3 * std::sqrt(0.25 * trial) / n);
}

TEST(SampleDataset, PublishedCellProbability) {
  const Dataset d = sample_dataset(with_n(10'000'000, 5));
  std::int64_t hits = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    hits += d.v11[i] == 0 && d.v12[i] == 1 && d.v13[i] == 1 && d.v2_latent[i] == 0;
  }
  EXPECT_NEAR(static_cast<double>(hits) / d.size(), 0.052, 0.005);
}

TEST(SampleDataset, NoTreatmentOutsideTrial) {
  const Dataset d = sample_dataset(with_n(200'000, 6));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d.s[i] == 0) ASSERT_EQ(d.a[i], 0) << "row " << i;
  }
}

TEST(SampleDataset, ModifierObservedExactlyInTrialOne) {
  const Dataset d = sample_dataset(with_n(50'000, 7));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    ASSERT_EQ(d.v2_observed(i), d.s[i] == 1);
    if (d.s[i] == 1) ASSERT_EQ(d.v2[i], d.v2_latent[i]);
  }
}

TEST(SampleDataset, SameSeedBitIdentical) {
  const Dataset a = sample_dataset(with_n(5000, 8));
  const Dataset b = sample_dataset(with_n(5000, 8));
  std::ostringstream sa, sb;
  write_dataset_csv(a, sa);
  write_dataset_csv(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_TRUE(a.w2 == b.w2);
}

TEST(SampleDataset, DifferentSeedsAgreeOnCellFrequencies) {
  const Dataset a = sample_dataset(with_n(200'000, 9));
  const Dataset b = sample_dataset(with_n(200'000, 10));
  EXPECT_FALSE(a.w2 == b.w2);
  for (int cell = 0; cell < 16; ++cell) {
    double fa = 0, fb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      fa += 2 * a.v1_cell(i) + a.v2_latent[i] == cell;
      fb += 2 * b.v1_cell(i) + b.v2_latent[i] == cell;
    }
    fa /= a.size();
    fb /= b.size();
    const double pooled = 0.5 * (fa + fb);
    const double se = std::sqrt(2 * pooled * (1 - pooled) / a.size());
    EXPECT_NEAR(fa, fb, 4 * se) << "cell " << cell;
  }
}

TEST(SampleDataset, WorkerFreeRecordStreams) {
  // Record i depends only on (seed, i): a longer sample extends a shorter one.
  const Dataset shorter = sample_dataset(with_n(1000, 11));
  const Dataset longer = sample_dataset(with_n(3000, 11));
  EXPECT_TRUE(shorter.w2 == longer.w2.head(1000));
  EXPECT_TRUE(shorter.y == longer.y.head(1000));
}

TEST(Dataset, CsvRoundTrip) {
  const Dataset d = sample_dataset(with_n(500, 12));
  std::ostringstream out;
  write_dataset_csv(d, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), kDatasetHeader);
  std::istringstream in(out.str());
  const Dataset back = read_dataset_csv(in);
  std::ostringstream again;
  write_dataset_csv(back, again);
  EXPECT_EQ(out.str(), again.str());
  EXPECT_TRUE(back.w2 == d.w2);
}

TEST(Dataset, MissingModifierInTrialOneNamesRow) {
  std::istringstream in(
      "s,w1,w2,v11,v12,v13,v2,a,y\n"
      "0,1,0.5,1,0,1,,0,0\n"
      "1,0,0.25,0,0,1,,1,1\n");
  try {
    read_dataset_csv(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(TrueNuisances, ConsistentWithStructuralEquations) {
  const DgpParams p;
  const testing::Structural st{p};
  const TrueNuisances t = true_nuisances(p, 1, 0.3, 1, 0, 1);
  const int cell = 5;
  const double ps = st.modifier(p.trial, cell, 1, 0.3);
  const double pv2 = st.modifier(p.v2, cell, 1, 0.3);
  EXPECT_NEAR(t.p_trial, ps, 1e-15);
  EXPECT_NEAR(t.g[1], 0.5 * ps, 1e-15);
  EXPECT_NEAR(t.g[0], 1 - 0.5 * ps, 1e-15);
  for (int a = 0; a <= 1; ++a) {
    const double y1 = st.outcome(a, cell, 1, 1, 0.3), y0 = st.outcome(a, cell, 0, 1, 0.3);
    const double m = pv2 * y1 + (1 - pv2) * y0;
    EXPECT_NEAR(t.m[a], m, 1e-15);
    EXPECT_NEAR(t.b[a][1], pv2 * y1 / m, 1e-14);
    EXPECT_NEAR(t.b[a][0] + t.b[a][1], 1.0, 1e-14);
    EXPECT_NEAR(t.r[a], ps * 0.5 * m, 1e-15);
  }
}

TEST(OracleTruth, AgreesWithQuadrature) {
  const TruthTable& table = default_oracle();
  const testing::ExactTruth exact = exact_truth(DgpParams{});
  double total = 0.0;
  for (int c = 0; c < 16; ++c) {
    const TruthCell& cell = table.cells[c];
    EXPECT_NEAR(cell.prob, exact.prob[c], 4 * cell.prob_se) << c;
    EXPECT_NEAR(cell.cate, exact.cate[c], 4 * cell.cate_se) << c;
    EXPECT_NEAR(cell.cpe, exact.cpe[c], 4 * cell.cpe_se) << c;
    EXPECT_NEAR(cell.f_treated, exact.f[1][c], 4 * cell.f_treated_se) << c;
    EXPECT_NEAR(cell.f_control, exact.f[0][c], 4 * cell.f_control_se) << c;
    total += cell.prob;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(OracleTruth, PublishedRows) {
  const TruthTable& table = default_oracle();
  for (const auto& row : kPublishedTruth) {
    const TruthCell& cell = table.cell(row.v11, row.v12, row.v13, row.v2);
    // The published values carry three decimals.
    EXPECT_NEAR(cell.prob, row.prob, 3 * cell.prob_se + 5e-4);
    EXPECT_NEAR(cell.cate, row.cate, 3 * cell.cate_se + 5e-4);
    EXPECT_NEAR(cell.cpe, row.cpe, 3 * cell.cpe_se + 5e-4);
  }
  const TruthCell& c1011 = table.cell(1, 0, 1, 1);
  EXPECT_NEAR(c1011.prob, 0.133, 3 * c1011.mc_se() + 5e-4);
  EXPECT_NEAR(c1011.cate, 0.443, 3 * c1011.mc_se() + 5e-4);
  EXPECT_NEAR(c1011.cpe, 0.257, 3 * c1011.mc_se() + 5e-4);
  const TruthCell& c0000 = table.cell(0, 0, 0, 0);
  EXPECT_NEAR(c0000.cate, 0.014, 3 * c0000.mc_se() + 5e-4);
  EXPECT_NEAR(c0000.cpe, 0.009, 3 * c0000.mc_se() + 5e-4);
}

// The published table is itself a simulation estimate, off the exact values
// by up to ~0.003.
TEST(OracleTruth, QuadratureMatchesPublished) {
  const testing::ExactTruth exact = exact_truth(DgpParams{});
  for (const auto& row : kPublishedTruth) {
    const int c = testing::cell_of(row);
    EXPECT_NEAR(exact.prob[c], row.prob, 0.005) << c;
    EXPECT_NEAR(exact.cate[c], row.cate, 0.01) << c;
    EXPECT_NEAR(exact.cpe[c], row.cpe, 0.01) << c;
  }
}

TEST(OracleTruth, NoTreatmentEffect) {
  DgpParams p;
  p.remove_treatment_effect();
  const TruthTable table = oracle_truth(p, 1'000'000);
  for (const TruthCell& cell : table.cells) {
    EXPECT_NEAR(cell.cate, 0.0, 3 * cell.mc_se() + 1e-15);
    EXPECT_NEAR(cell.cpe, 0.0, 3 * cell.mc_se() + 1e-15);
  }
}

TEST(OracleTruth, SignAgreementAndShrinkage) {
  const TruthTable table = oracle_truth(DgpParams{}, 10'000'000);
  for (const TruthCell& cell : table.cells) {
    if (std::abs(cell.cate) > 3 * cell.cate_se) {
      EXPECT_EQ(cell.cate > 0, cell.cpe > 0) << cell.v1_cell() << "," << cell.v2;
    }
    EXPECT_LE(std::abs(cell.cpe), std::abs(cell.cate)) << cell.v1_cell() << "," << cell.v2;
    EXPECT_GE(cell.prob, 0.0);
    EXPECT_LE(cell.prob, 1.0);
  }
}

TEST(OracleTruth, ProbabilitiesSumToOne) {
  const TruthTable& table = default_oracle();
  double total = 0.0, se = 0.0;
  for (const TruthCell& cell : table.cells) {
    total += cell.prob;
    se = std::max(se, cell.mc_se());
  }
  EXPECT_NEAR(total, 1.0, 3 * se);
}

TEST(OracleTruth, IndependentOfWorkerCount) {
  const TruthTable one = oracle_truth(DgpParams{}, 1'000'000, 1);
  const TruthTable three = oracle_truth(DgpParams{}, 1'000'000, 3);
  for (int c = 0; c < 16; ++c) {
    EXPECT_EQ(one.cells[c].count, three.cells[c].count);
    EXPECT_EQ(one.cells[c].cate, three.cells[c].cate);
    EXPECT_EQ(one.cells[c].cpe, three.cells[c].cpe);
  }
}

TEST(OracleTruth, RejectsTooFewReplicates) {
  EXPECT_THROW(oracle_truth(DgpParams{}, 999'999), Error);
}

TEST(OracleTruth, EmptyCellIsNamed) {
  DgpParams p;
  p.v11.intercept = -800.0;
  try {
    oracle_truth(p, 1'000'000);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("v11=1, v12=0, v13=0, v2=0"), std::string::npos) << e.what();
  }
}

TEST(OracleTruth, KappaAndMarginals) {
  const TruthTable& table = default_oracle();
  const testing::ExactTruth exact = exact_truth(DgpParams{});
  for (int a = 0; a <= 1; ++a) {
    for (int v2 = 0; v2 <= 1; ++v2) EXPECT_NEAR(table.kappa(a, v2), exact.kappa[a][v2], 2e-3);
  }
  for (int cell = 0; cell < 8; ++cell) EXPECT_NEAR(table.v1_prob(cell), exact.v1_prob[cell], 2e-3);
}

TEST(OraclePolicyValue, MatchesQuadrature) {
  const DgpParams p;
  auto treat = [](int, int) { return 1; };
  const testing::ExactTruth exact = exact_truth(p);
  auto sign_rule = [&](int cell, int v2) { return exact.cpe[2 * cell + v2] > 0 ? 1 : 0; };
  for (bool trial : {false, true}) {
    const PolicyTruth all = oracle_policy_value(p, treat, 1'000'000, trial);
    EXPECT_NEAR(all.value, testing::exact_policy_value(p, treat, trial), 4 * all.std_error);
    const PolicyTruth opt = oracle_policy_value(p, sign_rule, 1'000'000, trial);
    EXPECT_NEAR(opt.value, testing::exact_policy_value(p, sign_rule, trial), 4 * opt.std_error);
  }
}

TEST(TruthCsv, Header) {
  std::ostringstream out;
  write_truth_csv(default_oracle(), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kTruthHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 16);
}

}  // namespace
}  // namespace fodtr
