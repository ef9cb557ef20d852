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

#include <algorithm>
#include <cmath>

namespace fodtr {

/// Inverse logit. Saturates to 0 or 1 instead of overflowing.
template <typename Scalar>
inline Scalar expit(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
inline Scalar logit(Scalar p) {
  return std::log(p / (Scalar(1) - p));
}

template <typename Scalar>
inline Scalar clamp_probability(Scalar p, Scalar eps) {
  return std::clamp(p, eps, Scalar(1) - eps);
}

/// Regularized incomplete beta function I_x(a, b), evaluated by the modified
/// Lentz continued fraction on whichever tail converges fastest.
double regularized_incomplete_beta(double x, double a, double b);

/// Density of Beta(a, b) at x.
double beta_density(double x, double a, double b);

/// Inverse CDF of Beta(a, b): the root of I_x(a, b) = u on [0, 1], found by
/// Newton steps safeguarded by a shrinking bisection bracket.
double beta_quantile(double u, double a, double b, double tol = 1e-12);

}  // namespace fodtr
