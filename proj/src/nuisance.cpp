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

#include "fodtr/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"

namespace fodtr {

const Eigen::MatrixXd& NuisanceFits::b_at(int v2) const {
  const auto it = std::find(levels.begin(), levels.end(), v2);
  if (it == levels.end()) throw Error("nuisances: V2 level " + std::to_string(v2) + " was not fitted");
  return b[static_cast<std::size_t>(it - levels.begin())];
}

NuisanceFits oracle_nuisances(const Dataset& data, const DgpParams& params) {
  const Eigen::Index n = data.size();
  NuisanceFits fits;
  fits.levels = {0, 1};
  fits.g.resize(n, 2);
  fits.m.resize(n, 2);
  fits.r.resize(n, 2);
  fits.r_outcome.resize(n, 2);
  fits.r_treatment.resize(n, 2);
  fits.r_trial.resize(n);
  fits.b.assign(2, Eigen::MatrixXd(n, 2));
  fits.fold = Eigen::VectorXi::Constant(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const TrueNuisances t = true_nuisances(params, data.w1[i], data.w2[i], data.v11[i], data.v12[i],
                                           data.v13[i]);
    for (int a = 0; a < 2; ++a) {
      fits.g(i, a) = t.g[a];
      fits.m(i, a) = t.m[a];
      fits.r(i, a) = t.r[a];
      // Y does not depend on S given (A, V1, W) in this mechanism.
      fits.r_outcome(i, a) = t.m[a];
      fits.r_treatment(i, a) = t.g_in_trial[a];
      for (int v = 0; v < 2; ++v) fits.b[static_cast<std::size_t>(v)](i, a) = t.b[a][v];
    }
    fits.r_trial[i] = t.p_trial;
  }
  return fits;
}

NuisanceFits distort(const NuisanceFits& fits, const Dataset& data,
                     std::initializer_list<Nuisance> components, double strength) {
  NuisanceFits out = fits;
  const Eigen::Index n = fits.size();
  Eigen::VectorXd factor(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    factor[i] = 1.0 + strength * std::cos(3.0 * data.w2[i] + data.v1_cell(i) + data.w1[i]);
  }
  auto apply = [&](Eigen::MatrixXd& x) {
    x = (x.array().colwise() * factor.array()).cwiseMax(0.005).cwiseMin(0.995).matrix();
  };
  for (const Nuisance c : components) {
    switch (c) {
      case Nuisance::kG: apply(out.g); break;
      case Nuisance::kM: apply(out.m); break;
      case Nuisance::kB:
        for (auto& b : out.b) apply(b);
        break;
      case Nuisance::kR: apply(out.r); break;
    }
  }
  return out;
}

void write_nuisances_csv(const NuisanceFits& fits, int v2_level, std::ostream& out) {
  const Eigen::MatrixXd& b = fits.b_at(v2_level);
  out << kNuisanceHeader << '\n';
  for (Eigen::Index i = 0; i < fits.size(); ++i) {
    for (int a = 0; a < 2; ++a) {
      out << (i + 1) << ',' << fits.fold[i] << ',' << a << ',' << csv::format(fits.g(i, a)) << ','
          << csv::format(fits.m(i, a)) << ',' << csv::format(b(i, a)) << ','
          << csv::format(fits.r(i, a)) << '\n';
    }
  }
}

}  // namespace fodtr
