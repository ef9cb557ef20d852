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

#pragma once

#include <Eigen/Core>
#include <array>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fodtr/dataset.hpp"
#include "fodtr/dgp.hpp"

namespace fodtr {

enum class Nuisance { kG = 0, kM = 1, kB = 2, kR = 3 };

/// Per-record nuisance predictions. Matrices are n x 2 with column a.
///   g(a) = P(A = a | V1, W)
///   m(a) = E[Y | A = a, V1, W]
///   b(a, v2) = P(V2 = v2 | Y = 1, A = a, V1, W, S = 1)
///   r(a) = P(Y = 1, A = a, S = 1 | V1, W), the product of the three factors
struct NuisanceFits {
  std::vector<int> levels;
  Eigen::MatrixXd g;
  Eigen::MatrixXd m;
  std::vector<Eigen::MatrixXd> b;  // one per entry of `levels`
  Eigen::MatrixXd r;
  Eigen::MatrixXd r_outcome;    // P(Y = 1 | A = a, S = 1, V1, W)
  Eigen::MatrixXd r_treatment;  // P(A = a | S = 1, V1, W)
  Eigen::VectorXd r_trial;      // P(S = 1 | V1, W)
  Eigen::VectorXi fold;         // fold that predicted each record, -1 if none
  double clip = 0.0;
  std::array<bool, 4> calibrated{};
  std::vector<std::string> warnings;

  Eigen::Index size() const { return g.rows(); }
  /// b at one V2 level; throws if that level was not fitted.
  const Eigen::MatrixXd& b_at(int v2) const;
};

/// Exact nuisances from the generating mechanism, evaluated per record.
NuisanceFits oracle_nuisances(const Dataset& data, const DgpParams& params);

/// Multiplies the chosen components by a bounded factor that depends on
/// (W, V1) only, 1 + strength * cos(3 w2 + v1 cell + w1), and keeps the
/// result inside (0.005, 0.995). r is distorted directly, not via factors.
NuisanceFits distort(const NuisanceFits& fits, const Dataset& data,
                     std::initializer_list<Nuisance> components, double strength);

inline constexpr std::string_view kNuisanceHeader = "i,fold,a,ghat,mhat,bhat,rhat";

/// Two rows per record (a = 0, 1); `bhat` is reported at `v2_level`.
void write_nuisances_csv(const NuisanceFits& fits, int v2_level, std::ostream& out);

}  // namespace fodtr
