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

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fodtr/error.hpp"
#include "fodtr/folds.hpp"
#include "fodtr/learners.hpp"
#include "fodtr/special.hpp"

namespace fodtr {
namespace {

constexpr double kWeightFloor = 1e-5;
constexpr double kProbFloor = 1e-10;
constexpr double kDevianceStall = 1e-5;
constexpr double kDevianceRatioMax = 0.999;
constexpr Eigen::Index kProductBlock = 256;
constexpr int kMinPathPoints = 5;


double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

// Adds, for every mask m, the sum over all supersets of m (zeta transform
// over supersets).
void superset_sums(std::vector<double>& values, int bits) {
  const std::size_t size = values.size();
  for (int b = 0; b < bits; ++b) {
    const std::size_t bit = std::size_t{1} << b;
    for (std::size_t m = 0; m < size; ++m) {
      if (!(m & bit)) values[m] += values[m | bit];
    }
  }
}

// Adds, for every mask m, the sum over all subsets of m.
void subset_sums(std::vector<double>& values, int bits) {
  const std::size_t size = values.size();
  for (int b = 0; b < bits; ++b) {
    const std::size_t bit = std::size_t{1} << b;
    for (std::size_t m = 0; m < size; ++m) {
      if (m & bit) values[m] += values[m ^ bit];
    }
  }
}

double mean_of(const Eigen::VectorXd& y) { return y.size() ? y.mean() : 0.0; }

bool single_class(const Eigen::VectorXd& y) {
  const double ybar = mean_of(y);
  return ybar <= 0.0 || ybar >= 1.0;
}

double null_intercept(double ybar) { return logit(clamp_probability(ybar, 1e-5)); }

// Penalized logistic likelihood on a pattern-compressed design. Binary terms
// are indicator products over a bitmask, so the linear predictor, gradient
// and Hessian all reduce to per-pattern sums plus subset/superset transforms;
// one pass over the rows costs O(n), independent of the number of terms.
class LogisticEngine {
 public:
  LogisticEngine(const FeatureFrame& frame, const Eigen::VectorXd& y,
                 std::span<const std::uint32_t> masks)
      : bits_(frame.binary_count),
        patterns_(std::size_t{1} << frame.binary_count),
        masks_(masks.begin(), masks.end()),
        terms_(static_cast<int>(masks.size())),
        conts_(static_cast<int>(frame.continuous.cols())),
        n_(frame.rows()),
        pattern_(frame.pattern),
        continuous_(frame.continuous),
        y_(y) {
    if (y_.size() != n_) throw Error("logistic: response length does not match design rows");
    if (n_ == 0) throw Error("logistic: empty training data");
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (y_[i] != 0.0 && y_[i] != 1.0) throw Error("logistic: response must be 0/1");
    }
    const int p = dimension();
    penalty_ = Eigen::VectorXd::Zero(p);
    active_.assign(static_cast<std::size_t>(p), true);
    std::vector<double> counts(patterns_, 0.0);
    for (const std::uint32_t pat : pattern_) counts[pat] += 1.0;
    superset_sums(counts, bits_);
    for (int k = 0; k < terms_; ++k) {
      const double q = counts[masks_[static_cast<std::size_t>(k)]] / static_cast<double>(n_);
      penalty_[1 + k] = std::sqrt(std::max(0.0, q * (1.0 - q)));
    }
    for (int c = 0; c < conts_; ++c) {
      const auto col = continuous_.col(c);
      const double mu = col.mean();
      penalty_[1 + terms_ + c] = std::sqrt(std::max(0.0, (col.array() - mu).square().mean()));
    }
    for (int j = 1; j < p; ++j) {
      if (penalty_[j] < 1e-10) active_[static_cast<std::size_t>(j)] = false;
    }
    drop_aliased_terms();
    ybar_ = y_.mean();
    degenerate_ = ybar_ <= 0.0 || ybar_ >= 1.0;
    grad_ = Eigen::VectorXd::Zero(p);
    hess_ = Eigen::MatrixXd::Zero(p, p);
    eta_.resize(n_);
    if (!degenerate_) {
      evaluate(null_coefficients());
      lambda_max_ = 0.0;
      for (int j = 1; j < p; ++j) {
        if (active_[static_cast<std::size_t>(j)]) {
          lambda_max_ = std::max(lambda_max_, std::abs(grad_[j]) / penalty_[j]);
        }
      }
      null_deviance_ = 2.0 * static_cast<double>(n_) * loss_;
    }
  }

  int dimension() const { return 1 + terms_ + conts_; }
  double lambda_max() const { return lambda_max_; }
  double null_deviance() const { return null_deviance_; }
  bool degenerate() const { return degenerate_; }

  Eigen::VectorXd null_coefficients() const {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(dimension());
    beta[0] = null_intercept(ybar_);
    return beta;
  }

  double penalty(const Eigen::VectorXd& beta) const {
    return (penalty_.array() * beta.array().abs()).sum();
  }

  double deviance(const Eigen::VectorXd& beta) {
    evaluate(beta);
    return 2.0 * static_cast<double>(n_) * loss_;
  }

  Eigen::VectorXd solve(double lambda, Eigen::VectorXd beta, const LassoOptions& options,
                        std::vector<double>* trace) {
    if (degenerate_ || lambda >= lambda_max_) return null_coefficients();
    const int p = dimension();
    evaluate(beta);
    double objective = loss_ + lambda * penalty(beta);
    if (trace) trace->push_back(objective);
    int sweeps = 0;
    double last_change = 0.0;
    Eigen::VectorXd delta(p), hd(p);
    for (;;) {
      // Coordinate descent on the penalized quadratic model at beta. Once the
      // sweeps settle on a support, the model is minimized exactly on it.
      delta.setZero();
      hd.setZero();
      for (;;) {
        double max_change = 0.0;
        for (int j = 0; j < p; ++j) {
          if (!active_[static_cast<std::size_t>(j)]) continue;
          const double hjj = hess_(j, j);
          if (hjj <= 0.0) continue;
          const double current = beta[j] + delta[j];
          const double partial = grad_[j] + hd[j] - hjj * delta[j];
          const double target = soft_threshold(hjj * beta[j] - partial, lambda * penalty_[j]) / hjj;
          const double step = target - current;
          if (step != 0.0) {
            delta[j] += step;
            hd.noalias() += hess_.col(j) * step;
            max_change = std::max(max_change, std::abs(step));
          }
        }
        if (++sweeps > options.max_sweeps) {
          throw ConvergenceError("logistic lasso did not converge within " +
                                     std::to_string(options.max_sweeps) +
                                     " sweeps at lambda=" + std::to_string(lambda) +
                                     "; last objective change " + std::to_string(last_change),
                                 last_change);
        }
        if (max_change < options.tolerance) break;
        if (support_step(lambda, beta, delta, hd)) break;
      }
      if (delta.cwiseAbs().maxCoeff() < options.tolerance) break;

      // Step-halving keeps the true objective non-increasing.
      double scale = 1.0;
      Eigen::VectorXd candidate = beta + delta;
      evaluate(candidate);
      double candidate_objective = loss_ + lambda * penalty(candidate);
      for (int halving = 0; candidate_objective > objective && halving < 40; ++halving) {
        scale *= 0.5;
        candidate = beta + scale * delta;
        evaluate(candidate);
        candidate_objective = loss_ + lambda * penalty(candidate);
      }
      if (candidate_objective > objective) {
        evaluate(beta);
        break;
      }
      const double change = (candidate - beta).cwiseAbs().maxCoeff();
      last_change = objective - candidate_objective;
      beta = std::move(candidate);
      objective = candidate_objective;
      if (trace) trace->push_back(objective);
      if (change < options.tolerance) break;
    }
    return beta;
  }

 private:
  // Terms whose indicator column is a linear combination of the intercept and
  // earlier (lower-order) terms over the observed patterns are left out.
  void drop_aliased_terms() {
    std::vector<std::uint32_t> observed;
    {
      std::vector<bool> seen(patterns_, false);
      for (const std::uint32_t pat : pattern_) seen[pat] = true;
      for (std::size_t m = 0; m < patterns_; ++m) {
        if (seen[m]) observed.push_back(static_cast<std::uint32_t>(m));
      }
    }
    const auto rows = static_cast<Eigen::Index>(observed.size());
    std::vector<Eigen::VectorXd> basis;
    auto absorb = [&](Eigen::VectorXd col) {
      for (const auto& q : basis) col -= q.dot(col) * q;
      const double norm = col.norm();
      if (norm < 1e-8) return false;
      basis.push_back(col / norm);
      return true;
    };
    absorb(Eigen::VectorXd::Ones(rows));
    for (int k = 0; k < terms_; ++k) {
      if (!active_[static_cast<std::size_t>(1 + k)]) continue;
      const std::uint32_t mask = masks_[static_cast<std::size_t>(k)];
      Eigen::VectorXd col(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        col[r] = (observed[static_cast<std::size_t>(r)] & mask) == mask ? 1.0 : 0.0;
      }
      if (!absorb(std::move(col))) active_[static_cast<std::size_t>(1 + k)] = false;
    }
  }

  // Feature-sign search on the quadratic model: minimize with the current
  // signs fixed; if a coordinate would change sign, stop where it first hits
  // zero and drop it. Each step lowers the model objective. Returns true when
  // the optimality conditions of the zero coordinates also hold.
  bool support_step(double lambda, const Eigen::VectorXd& beta, Eigen::VectorXd& delta,
                    Eigen::VectorXd& hd) {
    const int p = dimension();
    Eigen::VectorXd current = beta + delta;
    bool moved = false;
    for (int round = 0; round <= p; ++round) {
      std::vector<int> support;
      for (int j = 0; j < p; ++j) {
        if (active_[static_cast<std::size_t>(j)] && (j == 0 || current[j] != 0.0)) support.push_back(j);
      }
      const auto k = static_cast<Eigen::Index>(support.size());
      Eigen::MatrixXd h(k, k);
      Eigen::VectorXd rhs(k);
      for (Eigen::Index u = 0; u < k; ++u) {
        const int j = support[static_cast<std::size_t>(u)];
        const double sign = current[j] > 0.0 ? 1.0 : -1.0;
        rhs[u] = hess_.row(j).dot(beta) - grad_[j] - (j == 0 ? 0.0 : lambda * penalty_[j] * sign);
        for (Eigen::Index v = 0; v < k; ++v) h(u, v) = hess_(j, support[static_cast<std::size_t>(v)]);
      }
      const Eigen::LLT<Eigen::MatrixXd> llt(h);
      if (llt.info() != Eigen::Success) break;
      const Eigen::VectorXd solved = llt.solve(rhs);
      if (!solved.allFinite()) break;
      double t = 1.0;
      int blocking = -1;
      for (Eigen::Index u = 0; u < k; ++u) {
        const int j = support[static_cast<std::size_t>(u)];
        if (j == 0 || (solved[u] > 0.0) == (current[j] > 0.0)) continue;
        const double cross = current[j] / (current[j] - solved[u]);
        if (cross < t) {
          t = cross;
          blocking = j;
        }
      }
      for (Eigen::Index u = 0; u < k; ++u) {
        const int j = support[static_cast<std::size_t>(u)];
        current[j] += t * (solved[u] - current[j]);
      }
      moved = true;
      if (blocking < 0) {
        for (int j = 1; j < p; ++j) {
          if (!active_[static_cast<std::size_t>(j)]) continue;
          if (std::find(support.begin(), support.end(), j) == support.end()) current[j] = 0.0;
        }
        break;
      }
      current[blocking] = 0.0;
    }
    if (!moved) return false;
    delta = current - beta;
    hd.noalias() = hess_ * delta;
    const Eigen::VectorXd model_grad = grad_ + hd;
    for (int j = 1; j < p; ++j) {
      if (!active_[static_cast<std::size_t>(j)] || current[j] != 0.0) continue;
      if (std::abs(model_grad[j]) > lambda * penalty_[j] * (1.0 + 1e-9)) return false;
    }
    return true;
  }

  // Loss, gradient and Hessian of the mean negative log-likelihood at beta.
  void evaluate(const Eigen::VectorXd& beta) {
    if (has_eval_ && beta.size() == eval_beta_.size() && beta == eval_beta_) return;
    theta_.assign(patterns_, 0.0);
    theta_[0] = beta[0];
    for (int k = 0; k < terms_; ++k) theta_[masks_[static_cast<std::size_t>(k)]] += beta[1 + k];
    subset_sums(theta_, bits_);

    w_.assign(patterns_, 0.0);
    r_.assign(patterns_, 0.0);
    wx_.assign(patterns_ * static_cast<std::size_t>(conts_), 0.0);
    Eigen::VectorXd rx = Eigen::VectorXd::Zero(conts_);
    Eigen::MatrixXd wxx = Eigen::MatrixXd::Zero(conts_, conts_);
    const Eigen::Index k_cont = conts_;
    for (Eigen::Index i = 0; i < n_; ++i) eta_[i] = theta_[pattern_[static_cast<std::size_t>(i)]];
    if (k_cont > 0) eta_.matrix().noalias() += continuous_ * beta.tail(k_cont);
    // One exponential serves both the mean and the log-partition term.
    const Eigen::ArrayXd e = (-eta_.abs()).exp();
    const Eigen::ArrayXd inv = (1.0 + e).inverse();
    mu_ = (eta_ >= 0.0).select(inv, e * inv);
    // Sum of log1p(e) as logs of block products; each factor lies in (1, 2].
    double log_partition = 0.0;
    for (Eigen::Index start = 0; start < n_; start += kProductBlock) {
      const Eigen::Index len = std::min(kProductBlock, n_ - start);
      log_partition += std::log((1.0 + e.segment(start, len)).prod());
    }
    const double loss = (eta_.max(0.0) - y_.array() * eta_).sum() + log_partition;
    weight_ = (mu_ * (1.0 - mu_)).max(kWeightFloor);
    resid_ = y_.array() - mu_;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const std::uint32_t pat = pattern_[static_cast<std::size_t>(i)];
      w_[pat] += weight_[i];
      r_[pat] += resid_[i];
    }
    for (Eigen::Index c = 0; c < k_cont; ++c) {
      double* slot = wx_.data() + static_cast<std::size_t>(c) * patterns_;
      for (Eigen::Index i = 0; i < n_; ++i) {
        slot[pattern_[static_cast<std::size_t>(i)]] += weight_[i] * continuous_(i, c);
      }
      rx[c] = continuous_.col(c).dot(resid_.matrix());
      for (Eigen::Index d = 0; d <= c; ++d) {
        wxx(c, d) = (weight_ * continuous_.col(c).array() * continuous_.col(d).array()).sum();
      }
    }
    superset_sums(w_, bits_);
    superset_sums(r_, bits_);
    for (int c = 0; c < conts_; ++c) {
      std::vector<double> slice(wx_.begin() + static_cast<std::ptrdiff_t>(c * patterns_),
                                wx_.begin() + static_cast<std::ptrdiff_t>((c + 1) * patterns_));
      superset_sums(slice, bits_);
      std::copy(slice.begin(), slice.end(), wx_.begin() + static_cast<std::ptrdiff_t>(c * patterns_));
    }

    const double inv_n = 1.0 / static_cast<double>(n_);
    loss_ = loss * inv_n;
    auto mask_of = [&](int j) -> std::uint32_t {
      return j == 0 ? 0u : masks_[static_cast<std::size_t>(j - 1)];
    };
    const int binary_dim = 1 + terms_;
    for (int j = 0; j < binary_dim; ++j) {
      const std::uint32_t mj = mask_of(j);
      grad_[j] = -r_[mj] * inv_n;
      for (int k = 0; k <= j; ++k) {
        hess_(j, k) = hess_(k, j) = w_[mj | mask_of(k)] * inv_n;
      }
      for (int c = 0; c < conts_; ++c) {
        hess_(j, binary_dim + c) = hess_(binary_dim + c, j) =
            wx_[static_cast<std::size_t>(c) * patterns_ + mj] * inv_n;
      }
    }
    for (int c = 0; c < conts_; ++c) {
      grad_[binary_dim + c] = -rx[c] * inv_n;
      for (int d = 0; d <= c; ++d) {
        hess_(binary_dim + c, binary_dim + d) = hess_(binary_dim + d, binary_dim + c) = wxx(c, d) * inv_n;
      }
    }
    eval_beta_ = beta;
    has_eval_ = true;
  }

  int bits_;
  std::size_t patterns_;
  std::vector<std::uint32_t> masks_;
  int terms_;
  int conts_;
  Eigen::Index n_;
  const std::vector<std::uint32_t>& pattern_;
  const Eigen::MatrixXd& continuous_;
  const Eigen::VectorXd& y_;

  Eigen::VectorXd penalty_;
  std::vector<bool> active_;
  double ybar_ = 0.0;
  bool degenerate_ = false;
  double lambda_max_ = 0.0;
  double null_deviance_ = 0.0;

  std::vector<double> theta_, w_, r_, wx_;
  Eigen::ArrayXd eta_, mu_, weight_, resid_;
  double loss_ = 0.0;
  Eigen::VectorXd grad_;
  Eigen::MatrixXd hess_;
  Eigen::VectorXd eval_beta_;
  bool has_eval_ = false;
};

LogisticModel model_from(const Eigen::VectorXd& beta, std::span<const std::uint32_t> masks,
                         int binary_count, double lambda) {
  LogisticModel m;
  m.binary_count = binary_count;
  m.masks.assign(masks.begin(), masks.end());
  const auto k = static_cast<Eigen::Index>(masks.size());
  m.intercept = beta[0];
  m.terms = beta.segment(1, k);
  m.continuous = beta.tail(beta.size() - 1 - k);
  m.lambda = lambda;
  return m;
}

double binomial_deviance(double y, double p) {
  p = clamp_probability(p, kProbFloor);
  return -2.0 * (y * std::log(p) + (1.0 - y) * std::log1p(-p));
}

}  // namespace

Eigen::VectorXd LogisticModel::pattern_logits() const {
  std::vector<double> theta(std::size_t{1} << binary_count, 0.0);
  theta[0] = intercept;
  for (std::size_t k = 0; k < masks.size(); ++k) theta[masks[k]] += terms[static_cast<Eigen::Index>(k)];
  subset_sums(theta, binary_count);
  return Eigen::Map<Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
}

Eigen::VectorXd LogisticModel::predict(const FeatureFrame& frame) const {
  if (frame.binary_count != binary_count || frame.continuous.cols() != continuous.size()) {
    throw Error("logistic model: design shape mismatch at prediction time");
  }
  const Eigen::VectorXd theta = pattern_logits();
  Eigen::VectorXd out(frame.rows());
  for (Eigen::Index i = 0; i < frame.rows(); ++i) {
    double eta = theta[frame.pattern[static_cast<std::size_t>(i)]];
    eta += frame.continuous.row(i).dot(continuous);
    out[i] = expit(eta);
  }
  return out;
}

double logistic_lambda_max(const FeatureFrame& frame, const Eigen::VectorXd& y,
                           std::span<const std::uint32_t> masks) {
  return LogisticEngine(frame, y, masks).lambda_max();
}

std::vector<double> default_lambda_grid(const FeatureFrame& frame, const Eigen::VectorXd& y,
                                        std::span<const std::uint32_t> masks,
                                        const LassoOptions& options) {
  double lmax = logistic_lambda_max(frame, y, masks);
  if (!(lmax > 0.0)) lmax = 1e-8;
  const int count = std::max(options.lambda_count, 1);
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    grid[static_cast<std::size_t>(k)] = lmax * std::pow(options.lambda_min_ratio, frac);
  }
  return grid;
}

LassoPath logistic_lasso_path(const FeatureFrame& frame, const Eigen::VectorXd& y,
                              std::span<const std::uint32_t> masks, std::span<const double> lambdas,
                              const LassoOptions& options) {
  if (lambdas.empty()) throw Error("logistic lasso: empty lambda grid");
  for (const double l : lambdas) {
    if (!(l > 0.0)) throw Error("logistic lasso: lambda grid must be strictly positive");
  }
  LogisticEngine engine(frame, y, masks);
  LassoPath path;
  path.lambdas.assign(lambdas.begin(), lambdas.end());
  path.lambda_max = engine.lambda_max();
  path.null_deviance = engine.null_deviance();
  Eigen::VectorXd beta = engine.null_coefficients();
  double previous_ratio = 0.0;
  bool truncated = false;
  bool solved_below_max = false;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!truncated) {
      std::vector<double>* trace = nullptr;
      if (options.record_objective) trace = &path.objective_trace.emplace_back();
      try {
        beta = engine.solve(lambdas[k], beta, options, trace);
        ++path.fitted;
        solved_below_max = solved_below_max || lambdas[k] < path.lambda_max;
      } catch (const ConvergenceError&) {
        // As glmnet does, keep the solutions for the larger penalties.
        if (!options.truncate_path || !solved_below_max) throw;
        truncated = true;
        path.stalled = true;
      }
    }
    const double dev = engine.degenerate() ? 0.0 : engine.deviance(beta);
    path.coefficients.push_back(beta);
    path.deviance.push_back(dev);
    if (options.truncate_path && !truncated && !engine.degenerate() && path.null_deviance > 0.0) {
      const double ratio = 1.0 - dev / path.null_deviance;
      if (static_cast<int>(k) + 1 >= kMinPathPoints &&
          (ratio - previous_ratio < kDevianceStall || ratio > kDevianceRatioMax)) {
        truncated = true;
      }
      previous_ratio = ratio;
    }
  }
  return path;
}

LassoFit fit_logistic_lasso(const FeatureFrame& frame, const Eigen::VectorXd& y,
                            const DesignSpec& design, std::span<const double> lambdas, int cv_folds,
                            std::uint64_t seed, const LassoOptions& options) {
  const Eigen::Index n = frame.rows();
  if (n < 2) {
    FoldPlan single;
    single.folds = 1;
    single.assignment.assign(static_cast<std::size_t>(n), 0);
    return fit_logistic_lasso(frame, y, design, lambdas, single, options);
  }
  const int folds = static_cast<int>(std::min<Eigen::Index>(std::max(cv_folds, 2), n));
  return fit_logistic_lasso(frame, y, design, lambdas, make_folds(n, folds, seed), options);
}

LassoFit fit_logistic_lasso(const FeatureFrame& frame, const Eigen::VectorXd& y,
                            const DesignSpec& design, std::span<const double> lambdas,
                            const FoldPlan& plan, const LassoOptions& options) {
  const Eigen::Index n = frame.rows();
  if (frame.binary_count != static_cast<int>(design.binary.size()) ||
      frame.continuous.cols() != static_cast<Eigen::Index>(design.continuous.size())) {
    throw Error("logistic lasso: frame does not match design");
  }
  if (y.size() != n) throw Error("logistic lasso: response length mismatch");
  if (n == 0) throw Error("logistic lasso: empty training data");
  const std::vector<std::uint32_t> masks = design.term_masks();
  const auto p = static_cast<Eigen::Index>(1 + masks.size() + design.continuous.size());

  LassoFit fit;
  if (single_class(y)) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta[0] = null_intercept(mean_of(y));
    fit.learner = {design, model_from(beta, masks, frame.binary_count, 0.0)};
    fit.out_of_fold = Eigen::VectorXd::Constant(n, expit(beta[0]));
    fit.degenerate = true;
    return fit;
  }

  std::vector<double> grid(lambdas.begin(), lambdas.end());
  if (grid.empty()) grid = default_lambda_grid(frame, y, masks, options);
  const auto L = grid.size();
  fit.lambdas = grid;
  fit.cv_deviance.assign(L, 0.0);
  Eigen::MatrixXd oof(n, static_cast<Eigen::Index>(L));

  if (n < 2) throw Error("logistic lasso: need at least two rows for cross-validation");
  if (plan.size() != n) throw Error("logistic lasso: fold plan does not match the data");
  for (int f = 0; f < plan.folds; ++f) {
    const auto train = plan.training(f);
    const auto test = plan.holdout(f);
    const FeatureFrame train_frame = frame.subset(train);
    const FeatureFrame test_frame = frame.subset(test);
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) y_train[static_cast<Eigen::Index>(k)] = y[train[k]];

    std::vector<Eigen::VectorXd> preds(L);
    if (single_class(y_train)) {
      const double p0 = expit(null_intercept(mean_of(y_train)));
      for (auto& pr : preds) pr = Eigen::VectorXd::Constant(test_frame.rows(), p0);
    } else {
      const LassoPath path = logistic_lasso_path(train_frame, y_train, masks, grid, options);
      for (std::size_t k = 0; k < L; ++k) {
        if (k > 0 && path.coefficients[k] == path.coefficients[k - 1]) {
          preds[k] = preds[k - 1];
        } else {
          preds[k] = model_from(path.coefficients[k], masks, frame.binary_count, grid[k]).predict(test_frame);
        }
      }
    }
    for (std::size_t k = 0; k < L; ++k) {
      for (std::size_t t = 0; t < test.size(); ++t) {
        const double pr = preds[k][static_cast<Eigen::Index>(t)];
        oof(test[t], static_cast<Eigen::Index>(k)) = pr;
        fit.cv_deviance[k] += binomial_deviance(y[test[t]], pr);
      }
    }
  }
  for (auto& d : fit.cv_deviance) d /= static_cast<double>(n);
  fit.selected = static_cast<int>(std::min_element(fit.cv_deviance.begin(), fit.cv_deviance.end()) -
                                   fit.cv_deviance.begin());
  const auto sel = static_cast<std::size_t>(fit.selected);
  const LassoPath full = logistic_lasso_path(frame, y, masks, std::span(grid).first(sel + 1), options);
  fit.learner = {design, model_from(full.coefficients.back(), masks, frame.binary_count, grid[sel])};
  fit.out_of_fold = oof.col(fit.selected);
  return fit;
}

}  // namespace fodtr
