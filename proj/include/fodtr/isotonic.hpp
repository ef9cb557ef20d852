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
#include <span>
#include <vector>

namespace fodtr {

/// Non-decreasing, right-continuous step function. value(x) is the level of
/// the last block whose lower edge is <= x; inputs below the first edge take
/// the first level.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> edges, std::vector<double> levels);

  double operator()(double x) const;
  template <typename Derived>
  Eigen::VectorXd operator()(const Eigen::MatrixBase<Derived>& x) const {
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = (*this)(x[i]);
    return out;
  }

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& levels() const { return levels_; }
  bool empty() const { return levels_.empty(); }

 private:
  std::vector<double> edges_;
  std::vector<double> levels_;
};

/// Pool-adjacent-violators fit of `outcomes` on `raw`. Tied raw values are
/// pooled first; the returned function's levels are the block means, which
/// minimize squared error among non-decreasing fits.
StepFunction fit_isotonic(std::span<const double> raw, std::span<const double> outcomes);

/// Fitted values of the isotonic regression at each input point.
Eigen::VectorXd isotonic_fitted(std::span<const double> raw, std::span<const double> outcomes);

}  // namespace fodtr
