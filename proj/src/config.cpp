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

#include "fodtr/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "fodtr/csv.hpp"
#include "fodtr/error.hpp"

#ifndef FODTR_VERSION
#define FODTR_VERSION "0.0.0"
#endif

namespace fodtr {
namespace {

constexpr std::string_view kDgpPrefix = "dgp.";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

const ConfigKey* find_key(std::string_view name) {
  for (const auto& k : RunConfig::keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

bool is_dgp_key(const std::string& key) { return key.rfind(kDgpPrefix, 0) == 0; }

}  // namespace

std::string_view version() { return FODTR_VERSION; }

const std::vector<ConfigKey>& RunConfig::keys() {
  static const std::vector<ConfigKey> table = {
      {"n", "1000", "records to simulate"},
      {"seed", "1", "master seed"},
      {"replicates", "200", "study replicates per sample size"},
      {"oracle_replicates", "10000000", "Monte-Carlo draws for the truth oracle"},
      {"sizes", "500,1000,2500,10000", "study sample sizes"},
      {"folds", "0", "cross-fitting folds; 0 follows the sample-size schedule"},
      {"cv_folds", "10", "folds for choosing the LASSO penalty"},
      {"lambda_count", "50", "LASSO penalty grid size"},
      {"lambda_min_ratio", "0.0001", "smallest penalty as a fraction of lambda_max"},
      {"calibrate", "true", "isotonic calibration of nuisance learners"},
      {"clip", "0.01", "probability clip floor"},
      {"workers", "1", "worker threads"},
      {"estimator", "drlearner", "drlearner or plugin"},
      {"second_stage", "cell_means", "cell_means or least_squares"},
      {"stratum", "s1", "policy evaluation population: s1 or pooled"},
      {"v2_level", "1", "V2 level reported in nuisances.csv"},
      {"zero_effect", "false", "remove every treatment term from the outcome model"},
      {"input", "", "dataset CSV for estimate"},
      {"out", "out", "output directory"},
  };
  return table;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[std::string(k.name)] = std::string(k.default_value);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (is_dgp_key(key)) {
    DgpParams probe;
    probe.set(key.substr(kDgpPrefix.size()), 0.0);  // rejects unknown coefficient names
    values_[key] = value;
    return;
  }
  if (!find_key(key)) throw ConfigError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

void RunConfig::load(std::istream& in, std::string_view source) {
  std::string line;
  int number = 0;
  while (csv::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(number) + ": expected key = value");
    }
    set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  load(in, path);
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string RunConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::integer(const std::string& key) const {
  const std::string v = text(key);
  try {
    return csv::parse_int(v, key);
  } catch (const DataError&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t RunConfig::unsigned_integer(const std::string& key) const {
  const std::string v = text(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double RunConfig::real(const std::string& key) const {
  const std::string v = text(key);
  try {
    return csv::parse_double(v, key);
  } catch (const DataError&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool RunConfig::boolean(const std::string& key) const {
  const std::string v = text(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::int64_t> RunConfig::integer_list(const std::string& key) const {
  const std::string v = text(key);
  std::vector<std::int64_t> out;
  for (const auto field : csv::split(v)) {
    const std::string f = trim(field);
    try {
      out.push_back(csv::parse_int(f, key));
    } catch (const DataError&) {
      throw ConfigError(key + ": expected a comma-separated list of integers, got '" + v + "'");
    }
  }
  return out;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };
  require(integer("n") >= 1, "n must be >= 1");
  (void)unsigned_integer("seed");
  require(integer("replicates") >= 1, "replicates must be >= 1");
  require(integer("oracle_replicates") >= 1000000, "oracle_replicates must be >= 1000000");
  const auto sizes = integer_list("sizes");
  require(!sizes.empty(), "sizes must list at least one sample size");
  for (const auto s : sizes) require(s >= 2, "sizes: every sample size must be >= 2");
  const auto folds = integer("folds");
  require(folds == 0 || folds >= 2, "folds must be 0 (automatic) or >= 2");
  require(integer("cv_folds") >= 2, "cv_folds must be >= 2");
  require(integer("lambda_count") >= 1, "lambda_count must be >= 1");
  const double ratio = real("lambda_min_ratio");
  require(ratio > 0.0 && ratio < 1.0, "lambda_min_ratio must lie in (0, 1)");
  (void)boolean("calibrate");
  const double clip = real("clip");
  require(clip >= 0.0 && clip < 0.5, "clip must lie in [0, 0.5)");
  require(integer("workers") >= 1, "workers must be >= 1");
  const std::string estimator = text("estimator");
  require(estimator == "drlearner" || estimator == "plugin", "estimator must be drlearner or plugin");
  (void)second_stage();
  (void)stratum();
  (void)integer("v2_level");
  (void)boolean("zero_effect");
  dgp().validate();
}

DgpParams RunConfig::dgp() const {
  DgpParams p;
  p.n = integer("n");
  p.seed = unsigned_integer("seed");
  if (boolean("zero_effect")) p.remove_treatment_effect();
  for (const auto& [key, value] : values_) {
    if (is_dgp_key(key)) p.set(key.substr(kDgpPrefix.size()), real(key));
  }
  return p;
}

LearnerConfig RunConfig::learner() const {
  LearnerConfig c;
  c.lasso.cv_folds = static_cast<int>(integer("cv_folds"));
  c.lasso.lambda_count = static_cast<int>(integer("lambda_count"));
  c.lasso.lambda_min_ratio = real("lambda_min_ratio");
  c.calibrate = boolean("calibrate");
  c.clip = real("clip");
  c.workers = static_cast<int>(integer("workers"));
  c.seed = unsigned_integer("seed");
  return c;
}

SecondStage RunConfig::second_stage() const { return parse_second_stage(text("second_stage")); }

PolicyStratum RunConfig::stratum() const { return parse_stratum(text("stratum")); }

void RunConfig::write_resolved(std::ostream& out) const {
  out << "# fodtr " << version() << '\n';
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
}

}  // namespace fodtr
