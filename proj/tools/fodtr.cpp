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

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "fodtr/config.hpp"
#include "fodtr/error.hpp"
#include "fodtr/pipeline.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

struct Command {
  CLI::App* app = nullptr;
  std::string config_file;
  std::map<std::string, std::string> flags;
  std::vector<std::string> overrides;
  std::function<void(const fodtr::RunConfig&)> body;
};

void add_command(CLI::App& root, std::vector<Command>& commands, const std::string& name,
                 const std::string& help, std::function<void(const fodtr::RunConfig&)> body) {
  Command& c = commands.emplace_back();
  c.app = root.add_subcommand(name, help);
  c.body = std::move(body);
}

void bind_options(Command& c) {
  c.app->add_option("--config", c.config_file, "key = value configuration file");
  for (const auto& key : fodtr::RunConfig::keys()) {
    const std::string name(key.name);
    c.app->add_option("--" + name, c.flags[name], std::string(key.help));
  }
  c.app->add_option("--set", c.overrides, "extra key=value pairs, e.g. dgp.outcome.v2_a=0");
}

fodtr::RunConfig resolve(const Command& c) {
  fodtr::RunConfig config;
  if (!c.config_file.empty()) config.load_file(c.config_file);
  for (const auto& [name, value] : c.flags) {
    if (c.app->count("--" + name) > 0) config.set(name, value);
  }
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw fodtr::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App root{"Optimal treatment rules from fused trials with a missing effect modifier"};
  root.set_version_flag("--version", std::string(fodtr::version()));
  root.require_subcommand(1);

  std::vector<Command> commands;
  commands.reserve(4);
  add_command(root, commands, "simulate", "draw a dataset from the simulation mechanism", fodtr::cmd_simulate);
  add_command(root, commands, "truth", "Monte-Carlo truth table of the mechanism", fodtr::cmd_truth);
  add_command(root, commands, "estimate", "CPE, decisions and policy values for a dataset CSV", fodtr::cmd_estimate);
  add_command(root, commands, "study", "replicated simulation study", fodtr::cmd_study);
  for (auto& c : commands) bind_options(c);

  try {
    root.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return root.exit(e);
  } catch (const CLI::ParseError& e) {
    root.exit(e);
    return kConfigExit;
  }

  for (const auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      c.body(resolve(c));
      return 0;
    } catch (const fodtr::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigExit;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kRuntimeExit;
    }
  }
  return kConfigExit;
}
