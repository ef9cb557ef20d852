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

#include <Eigen/QR>
#include <algorithm>
#include <sstream>
#include <string>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"
#include "fodtr/learners.hpp"

namespace fodtr {
namespace {

constexpr std::string_view kLearnerMagic = "fodtr-learner v1";
constexpr std::string_view kCalibratedMagic = "fodtr-calibrated v1";

template <typename Range>
std::string join_numbers(std::string_view key, const Range& values) {
  std::string out(key);
  for (const auto v : values) {
    out += ' ';
    out += csv::format(static_cast<double>(v));
  }
  return out;
}

std::string join_words(std::string_view key, const std::vector<std::string>& words) {
  std::string out(key);
  for (const auto& w : words) out += ' ' + w;
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Line-oriented reader for the snapshot format: "key token token ...".
class Reader {
 public:
  explicit Reader(std::string_view text) : in_(std::string(text)) {}

  std::vector<std::string> expect(std::string_view key) {
    std::string line;
    if (!csv::getline(in_, line)) throw DataError("learner snapshot: missing '" + std::string(key) + "'");
    std::istringstream words(line);
    std::string head;
    words >> head;
    if (head != key) {
      throw DataError("learner snapshot: expected '" + std::string(key) + "', found '" + head + "'");
    }
    std::vector<std::string> out;
    for (std::string w; words >> w;) out.push_back(w);
    return out;
  }

  std::vector<double> numbers(std::string_view key) {
    std::vector<double> out;
    for (const auto& w : expect(key)) out.push_back(csv::parse_double(w, key));
    return out;
  }

  double number(std::string_view key) {
    const auto v = numbers(key);
    if (v.size() != 1) throw DataError("learner snapshot: '" + std::string(key) + "' takes one value");
    return v.front();
  }

  void magic(std::string_view expected) {
    std::string line;
    if (!csv::getline(in_, line) || line != expected) {
      throw DataError("learner snapshot: bad header, expected '" + std::string(expected) + "'");
    }
  }

  std::string rest() {
    std::ostringstream out;
    out << in_.rdbuf();
    return out.str();
  }

 private:
  std::istringstream in_;
};

std::vector<std::uint32_t> to_masks(const std::vector<double>& values) {
  std::vector<std::uint32_t> out;
  for (const double v : values) out.push_back(static_cast<std::uint32_t>(v));
  return out;
}

}  // namespace

Eigen::VectorXd CellMeansModel::predict(const FeatureFrame& frame) const {
  Eigen::VectorXd out(frame.rows());
  for (Eigen::Index i = 0; i < frame.rows(); ++i) {
    const auto it = means.find(frame.pattern[static_cast<std::size_t>(i)]);
    out[i] = it == means.end() ? global_mean : it->second;
  }
  return out;
}

Eigen::VectorXd LinearModel::predict(const FeatureFrame& frame) const {
  return expand(frame, masks) * coefficients;
}

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kLogisticLasso: return "logistic_lasso";
    case LearnerKind::kCellMeans: return "cell_means";
    case LearnerKind::kLeastSquares: return "least_squares";
  }
  return "unknown";
}

LearnerKind FittedLearner::kind() const {
  return static_cast<LearnerKind>(model.index());
}

Eigen::VectorXd FittedLearner::predict(const FeatureFrame& frame) const {
  return std::visit([&](const auto& m) { return m.predict(frame); }, model);
}

Eigen::VectorXd CalibratedLearner::predict_unclipped(const FeatureFrame& frame) const {
  return calibration(base.predict(frame));
}

Eigen::VectorXd CalibratedLearner::predict(const FeatureFrame& frame) const {
  return predict_unclipped(frame).cwiseMax(clip).cwiseMin(1.0 - clip);
}

FittedLearner fit_cell_means(const FeatureFrame& frame, const Eigen::VectorXd& y,
                             const DesignSpec& design) {
  if (frame.rows() == 0) throw Error("cell means: empty training data");
  if (y.size() != frame.rows()) throw Error("cell means: response length mismatch");
  CellMeansModel m;
  std::map<std::uint32_t, double> sums;
  for (Eigen::Index i = 0; i < frame.rows(); ++i) {
    const auto pat = frame.pattern[static_cast<std::size_t>(i)];
    sums[pat] += y[i];
    m.counts[pat] += 1.0;
  }
  for (const auto& [pat, s] : sums) m.means[pat] = s / m.counts[pat];
  m.global_mean = y.mean();
  return {design, std::move(m)};
}

FittedLearner fit_least_squares(const FeatureFrame& frame, const Eigen::VectorXd& y,
                                const DesignSpec& design) {
  if (frame.rows() == 0) throw Error("least squares: empty training data");
  if (y.size() != frame.rows()) throw Error("least squares: response length mismatch");
  LinearModel m;
  m.masks = design.term_masks();
  const Eigen::MatrixXd x = expand(frame, m.masks);
  // Rank-revealing QR returns a basic solution when cells are empty.
  m.coefficients = x.colPivHouseholderQr().solve(y);
  return {design, std::move(m)};
}

CalibratedLearner isotonic_calibrate(std::span<const double> raw, std::span<const double> outcomes,
                                     FittedLearner base, double clip) {
  if (!(clip >= 0.0 && clip < 0.5)) throw Error("isotonic calibration: clip must lie in [0, 0.5)");
  return {std::move(base), fit_isotonic(raw, outcomes), clip};
}

std::string serialize(const FittedLearner& learner) {
  std::ostringstream out;
  const DesignSpec& d = learner.design;
  out << kLearnerMagic << '\n'
      << "kind " << to_string(learner.kind()) << '\n'
      << join_words("binary", d.binary) << '\n'
      << join_words("continuous", d.continuous) << '\n'
      << "expansion " << (d.expansion == Expansion::kSaturated ? "saturated" : "main") << '\n';
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LogisticModel>) {
          out << "binary_count " << m.binary_count << '\n'
              << join_numbers("masks", m.masks) << '\n'
              << "intercept " << csv::format(m.intercept) << '\n'
              << join_numbers("terms", to_std(m.terms)) << '\n'
              << join_numbers("slopes", to_std(m.continuous)) << '\n'
              << "lambda " << csv::format(m.lambda) << '\n';
        } else if constexpr (std::is_same_v<T, CellMeansModel>) {
          out << "global_mean " << csv::format(m.global_mean) << '\n'
              << "cells " << m.means.size() << '\n';
          for (const auto& [pat, mean] : m.means) {
            out << "cell " << pat << ' ' << csv::format(mean) << ' ' << csv::format(m.counts.at(pat))
                << '\n';
          }
        } else {
          out << join_numbers("masks", m.masks) << '\n'
              << join_numbers("coefficients", to_std(m.coefficients)) << '\n';
        }
      },
      learner.model);
  out << "end\n";
  return out.str();
}

std::string serialize(const CalibratedLearner& learner) {
  std::ostringstream out;
  out << kCalibratedMagic << '\n'
      << "clip " << csv::format(learner.clip) << '\n'
      << join_numbers("edges", learner.calibration.edges()) << '\n'
      << join_numbers("levels", learner.calibration.levels()) << '\n'
      << serialize(learner.base);
  return out.str();
}

FittedLearner deserialize_learner(std::string_view text) {
  Reader r(text);
  r.magic(kLearnerMagic);
  const auto kind = r.expect("kind");
  if (kind.size() != 1) throw DataError("learner snapshot: bad kind line");
  FittedLearner out;
  out.design.binary = r.expect("binary");
  out.design.continuous = r.expect("continuous");
  const auto expansion = r.expect("expansion");
  if (expansion.size() != 1 || (expansion[0] != "saturated" && expansion[0] != "main")) {
    throw DataError("learner snapshot: bad expansion");
  }
  out.design.expansion = expansion[0] == "saturated" ? Expansion::kSaturated : Expansion::kMainEffects;
  if (kind[0] == to_string(LearnerKind::kLogisticLasso)) {
    LogisticModel m;
    m.binary_count = static_cast<int>(r.number("binary_count"));
    m.masks = to_masks(r.numbers("masks"));
    m.intercept = r.number("intercept");
    m.terms = to_eigen(r.numbers("terms"));
    m.continuous = to_eigen(r.numbers("slopes"));
    m.lambda = r.number("lambda");
    if (m.terms.size() != static_cast<Eigen::Index>(m.masks.size())) {
      throw DataError("learner snapshot: term count does not match masks");
    }
    out.model = std::move(m);
  } else if (kind[0] == to_string(LearnerKind::kCellMeans)) {
    CellMeansModel m;
    m.global_mean = r.number("global_mean");
    const auto cells = static_cast<std::size_t>(r.number("cells"));
    for (std::size_t k = 0; k < cells; ++k) {
      const auto v = r.numbers("cell");
      if (v.size() != 3) throw DataError("learner snapshot: bad cell line");
      const auto pat = static_cast<std::uint32_t>(v[0]);
      m.means[pat] = v[1];
      m.counts[pat] = v[2];
    }
    out.model = std::move(m);
  } else if (kind[0] == to_string(LearnerKind::kLeastSquares)) {
    LinearModel m;
    m.masks = to_masks(r.numbers("masks"));
    m.coefficients = to_eigen(r.numbers("coefficients"));
    out.model = std::move(m);
  } else {
    throw DataError("learner snapshot: unknown kind '" + kind[0] + "'");
  }
  r.expect("end");
  return out;
}

CalibratedLearner deserialize_calibrated(std::string_view text) {
  Reader r(text);
  r.magic(kCalibratedMagic);
  CalibratedLearner out;
  out.clip = r.number("clip");
  auto edges = r.numbers("edges");
  auto levels = r.numbers("levels");
  out.calibration = StepFunction(std::move(edges), std::move(levels));
  out.base = deserialize_learner(r.rest());
  return out;
}

}  // namespace fodtr
