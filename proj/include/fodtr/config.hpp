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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fodtr/crossfit.hpp"
#include "fodtr/dgp.hpp"
#include "fodtr/drlearner.hpp"
#include "fodtr/policyvalue.hpp"

namespace fodtr {

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;
  std::string_view help;
};

/// Flat key=value run configuration. Values are kept as text and parsed on
/// access; parse failures name the offending key. Keys of the form
/// `dgp.<coefficient>` override the generating mechanism.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<ConfigKey>& keys();

  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Lines `key = value`; blank lines and `#` comments are skipped.
  void load(std::istream& in, std::string_view source);
  void load_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<std::int64_t> integer_list(const std::string& key) const;

  /// Checks every typed key once so errors surface before any work starts.
  void validate() const;

  DgpParams dgp() const;
  LearnerConfig learner() const;
  SecondStage second_stage() const;
  PolicyStratum stratum() const;

  /// Every key with its resolved value, sorted, preceded by the tool version.
  void write_resolved(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string_view version();

}  // namespace fodtr
