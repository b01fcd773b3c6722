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

#pragma once

#include <map>
#include <string>
#include <vector>

#include "hacknizer/harness/system.hpp"

namespace hacknizer::harness {

// A scripted client session against the gateway. A scenario is a JSON
// object with a "steps" array; each step is one of
//
//   {"login": "alice", "email": "...", "password": "..."}
//   {"as": "alice", "method": "POST", "path": "/api/...", "body": {...},
//    "expect": 202, "save": {"hk": "/resource_id"},
//    "expect_json": {"/status": "Completed"}}
//   {"drain": true}
//   {"restart_gateway": true}
//
// "${name}" in paths and body strings expands to saved variables; a login
// saves "<alias>.token" and "<alias>.user_id". A step whose "expect" or
// "expect_json" does not hold stops the run with InvalidInput.
struct ScenarioRun {
  std::map<std::string, std::string> vars;
  std::vector<Json> transcript;  // {step, method, path, status, body}
  DrainReport drained;           // sum of every drain step
  int requests = 0;
};

Result<ScenarioRun> run_scenario(System& system, const Json& scenario);
Result<Json> load_json_file(const std::string& path);

}  // namespace hacknizer::harness
