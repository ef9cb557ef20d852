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

#include "fodtr/design.hpp"

#include <bit>

#include "fodtr/error.hpp"

namespace fodtr {

std::vector<std::uint32_t> DesignSpec::term_masks() const {
  const auto k = static_cast<std::uint32_t>(binary.size());
  if (k > 16) throw ConfigError("at most 16 binary design columns are supported");
  std::vector<std::uint32_t> masks;
  if (expansion == Expansion::kMainEffects) {
    for (std::uint32_t j = 0; j < k; ++j) masks.push_back(1u << j);
    return masks;
  }
  // Ordered by interaction order, then lexicographically by bits.
  for (int order = 1; order <= static_cast<int>(k); ++order) {
    for (std::uint32_t m = 1; m < (1u << k); ++m) {
      if (std::popcount(m) == order) masks.push_back(m);
    }
  }
  return masks;
}

std::vector<std::string> DesignSpec::term_names() const {
  std::vector<std::string> names;
  for (const std::uint32_t m : term_masks()) {
    std::string name;
    for (std::size_t j = 0; j < binary.size(); ++j) {
      if (m & (1u << j)) {
        if (!name.empty()) name += ':';
        name += binary[j];
      }
    }
    names.push_back(name);
  }
  return names;
}

std::size_t DesignSpec::coefficient_count() const {
  return 1 + term_masks().size() + continuous.size();
}

FeatureFrame FeatureFrame::subset(std::span<const Eigen::Index> rows) const {
  FeatureFrame out;
  out.binary_count = binary_count;
  out.pattern.resize(rows.size());
  out.continuous.resize(static_cast<Eigen::Index>(rows.size()), continuous.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.pattern[k] = pattern[static_cast<std::size_t>(rows[k])];
    out.continuous.row(static_cast<Eigen::Index>(k)) = continuous.row(rows[k]);
  }
  return out;
}

namespace {

Eigen::VectorXi binary_column(const Dataset& data, const std::string& name,
                              std::optional<int> set_a) {
  if (name == "s") return data.s;
  if (name == "w1") return data.w1;
  if (name == "v11") return data.v11;
  if (name == "v12") return data.v12;
  if (name == "v13") return data.v13;
  if (name == "y") return data.y;
  if (name == "a") return set_a ? Eigen::VectorXi::Constant(data.size(), *set_a) : data.a;
  if (name == "v2") {
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      if (data.v2[i] == kMissing) throw DataError("design uses v2 but it is missing in row " + std::to_string(i + 1));
    }
    return data.v2;
  }
  throw ConfigError("unknown binary design column '" + name + "'");
}

Eigen::VectorXd continuous_column(const Dataset& data, const std::string& name,
                                  std::optional<int> set_a) {
  if (name == "w2") return data.w2;
  return binary_column(data, name, set_a).cast<double>();
}

}  // namespace

FeatureFrame build_frame(const Dataset& data, const DesignSpec& spec, std::optional<int> set_a) {
  const Eigen::Index n = data.size();
  FeatureFrame frame;
  frame.binary_count = static_cast<int>(spec.binary.size());
  frame.pattern.assign(static_cast<std::size_t>(n), 0u);
  for (std::size_t j = 0; j < spec.binary.size(); ++j) {
    const Eigen::VectorXi col = binary_column(data, spec.binary[j], set_a);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (col[i] != 0 && col[i] != 1) {
        throw DataError("column '" + spec.binary[j] + "' is not binary in row " + std::to_string(i + 1));
      }
      if (col[i]) frame.pattern[static_cast<std::size_t>(i)] |= 1u << j;
    }
  }
  frame.continuous.resize(n, static_cast<Eigen::Index>(spec.continuous.size()));
  for (std::size_t c = 0; c < spec.continuous.size(); ++c) {
    frame.continuous.col(static_cast<Eigen::Index>(c)) = continuous_column(data, spec.continuous[c], set_a);
  }
  return frame;
}

Eigen::MatrixXd expand(const FeatureFrame& frame, std::span<const std::uint32_t> masks) {
  const Eigen::Index n = frame.rows();
  const auto k = static_cast<Eigen::Index>(masks.size());
  Eigen::MatrixXd x(n, 1 + k + frame.continuous.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::uint32_t p = frame.pattern[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const std::uint32_t m = masks[static_cast<std::size_t>(j)];
      x(i, 1 + j) = (p & m) == m ? 1.0 : 0.0;
    }
  }
  x.rightCols(frame.continuous.cols()) = frame.continuous;
  return x;
}

}  // namespace fodtr
