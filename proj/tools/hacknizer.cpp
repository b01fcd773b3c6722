/*
 * Copyright 2026 The Hacknizer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hacknizer/harness/node.hpp"
#include "hacknizer/harness/scenario.hpp"
#include "hacknizer/harness/system.hpp"
#include "hacknizer/saga/saga.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

using namespace hacknizer;

int run(const std::string& service, const std::string& config_path) {
  auto values = harness::load_config(config_path);
  if (!values.ok()) {
    std::cerr << "error: " << values.error().to_string() << "\n";
    return 2;
  }
  auto config = harness::node_config(service, *values);
  if (!config.ok()) {
    std::cerr << "error: " << config.error().to_string() << "\n";
    return 2;
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return harness::run_node(*config, g_stop, std::cerr);
}

int sim(const std::string& scenario_path, std::uint64_t seed, const std::string& faults_path) {
  auto scenario = harness::load_json_file(scenario_path);
  if (!scenario.ok()) {
    std::cerr << "error: " << scenario.error().to_string() << "\n";
    return 2;
  }
  auto system = harness::System::compose(harness::SystemTopology::standard(seed));
  if (!system.ok()) {
    std::cerr << "error: " << system.error().to_string() << "\n";
    return 2;
  }
  if (!faults_path.empty()) {
    std::ifstream in(faults_path);
    std::stringstream text;
    text << in.rdbuf();
    auto faults = harness::parse_fault_file(text.str());
    if (!in || !faults.ok()) {
      std::cerr << "error: cannot load faults from " << faults_path
                << (faults.ok() ? "" : ": " + faults.error().to_string()) << "\n";
      return 2;
    }
    for (const auto& fault : *faults) (void)(*system)->inject_fault(fault);
  }
  auto result = harness::run_scenario(**system, *scenario);
  if (!result.ok()) {
    std::cerr << "scenario failed: " << result.error().to_string() << "\n";
    return 1;
  }
  auto tail = (*system)->drain();
  if (!tail.ok()) {
    std::cerr << "drain failed: " << tail.error().to_string() << "\n";
    return 1;
  }
  Json out{{"seed", seed},
           {"requests", result->requests},
           {"drained", harness::to_json(result->drained)},
           {"broker", chassis::to_json((*system)->broker().counters())},
           {"transcript", result->transcript}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hacknizer: hackathon platform as event-sourced services"};
  app.require_subcommand(1);

  std::string service;
  std::string config;
  auto* run_cmd = app.add_subcommand("run", "Run one service (or the broker) as a process");
  run_cmd->add_option("--service", service, "user|hackathon|team|page|saga|query|gateway|broker")
      ->required();
  run_cmd->add_option("--config", config, "Flat key=value config file")->required();

  std::string scenario;
  std::uint64_t seed = 1;
  std::string faults;
  auto* sim_cmd = app.add_subcommand("sim", "Run a scenario on the simulated clock");
  sim_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  sim_cmd->add_option("--seed", seed, "Seed for ids and faults");
  sim_cmd->add_option("--faults", faults, "JSON array of fault specs");

  auto* sagas_cmd = app.add_subcommand("sagas", "Inspect the saga catalog");
  bool print = false;
  sagas_cmd->add_flag("--print", print, "Print the catalog as JSON")->required();

  CLI11_PARSE(app, argc, argv);

  if (*run_cmd) return run(service, config);
  if (*sim_cmd) return sim(scenario, seed, faults);
  std::cout << hacknizer::saga::catalog_json().dump(2) << "\n";
  return 0;
}
