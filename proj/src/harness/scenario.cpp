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

#include "hacknizer/harness/scenario.hpp"

#include <fstream>
#include <sstream>

namespace hacknizer::harness {

namespace {

Result<std::string> expand(const std::string& text, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find("${", pos);
    if (open == std::string::npos) {
      out += text.substr(pos);
      break;
    }
    auto close = text.find('}', open);
    if (close == std::string::npos) return make_error(ErrorCode::kInvalidInput, "unclosed ${ in " + text);
    out += text.substr(pos, open - pos);
    const std::string name = text.substr(open + 2, close - open - 2);
    auto it = vars.find(name);
    if (it == vars.end()) return make_error(ErrorCode::kInvalidInput, "unset variable " + name);
    out += it->second;
    pos = close + 1;
  }
  return out;
}

Result<Json> expand_json(const Json& value, const std::map<std::string, std::string>& vars) {
  if (value.is_string()) {
    auto text = expand(value.get<std::string>(), vars);
    if (!text.ok()) return text.error();
    return Json(*text);
  }
  if (value.is_array() || value.is_object()) {
    Json out = value;
    for (auto it = out.begin(); it != out.end(); ++it) {
      auto expanded = expand_json(*it, vars);
      if (!expanded.ok()) return expanded.error();
      *it = std::move(*expanded);
    }
    return out;
  }
  return value;
}

void add(DrainReport& total, const DrainReport& r) {
  total.delivered += r.delivered;
  total.dropped += r.dropped;
  total.duplicated += r.duplicated;
  total.delayed += r.delayed;
  total.redelivered += r.redelivered;
  total.dead_lettered += r.dead_lettered;
  total.duplicates_skipped += r.duplicates_skipped;
  total.timers_fired += r.timers_fired;
  total.steps += r.steps;
  total.clock_ms = r.clock_ms;
}

std::string as_text(const Json& value) {
  return value.is_string() ? value.get<std::string>() : value.dump();
}

}  // namespace

Result<Json> load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::kInvalidConfig, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json parsed = Json::parse(buffer.str(), nullptr, false);
  if (parsed.is_discarded()) return make_error(ErrorCode::kInvalidConfig, path + ": not JSON");
  return parsed;
}

Result<ScenarioRun> run_scenario(System& system, const Json& scenario) {
  if (!scenario.is_object() || !scenario.contains("steps") || !scenario["steps"].is_array()) {
    return make_error(ErrorCode::kInvalidInput, "scenario needs a steps array");
  }
  ScenarioRun run;
  if (scenario.contains("vars")) {
    for (const auto& [key, value] : scenario["vars"].items()) run.vars[key] = as_text(value);
  }
  int index = 0;
  for (const Json& raw : scenario["steps"]) {
    ++index;
    auto fail = [&](const std::string& why) {
      return make_error(ErrorCode::kInvalidInput, "step " + std::to_string(index) + ": " + why);
    };
    auto expanded = expand_json(raw, run.vars);
    if (!expanded.ok()) return fail(expanded.error().message);
    const Json& step = *expanded;

    if (step.value("drain", false)) {
      auto report = system.drain();
      if (!report.ok()) return fail(report.error().to_string());
      add(run.drained, *report);
      continue;
    }

    if (step.value("restart_gateway", false)) {
      if (auto restarted = system.restart_gateway(); !restarted.ok()) {
        return fail(restarted.error().to_string());
      }
      continue;
    }

    if (step.contains("login")) {
      const std::string alias = step["login"];
      auto response = system.request("POST", "/api/auth/login",
                                     {{"email", step.value("email", "")},
                                      {"password", step.value("password", "")}});
      ++run.requests;
      run.transcript.push_back({{"step", index}, {"login", alias}, {"status", response.status}});
      if (response.status != 200) return fail("login " + alias + " -> " + response.body.dump());
      run.vars[alias + ".token"] = response.body["token"];
      run.vars[alias + ".user_id"] = response.body["user_id"];
      continue;
    }

    const std::string method = step.value("method", "GET");
    const std::string path = step.value("path", "");
    std::string token;
    if (step.contains("as") && !step["as"].is_null()) {
      auto it = run.vars.find(step["as"].get<std::string>() + ".token");
      if (it == run.vars.end()) return fail("no session for " + as_text(step["as"]));
      token = it->second;
    }
    std::map<std::string, std::string> query;
    if (step.contains("query")) {
      for (const auto& [key, value] : step["query"].items()) query[key] = as_text(value);
    }
    auto response = system.request(method, path, step.value("body", Json()), token, query);
    ++run.requests;
    run.transcript.push_back({{"step", index},
                              {"method", method},
                              {"path", path},
                              {"status", response.status},
                              {"body", response.body}});
    if (step.contains("expect") && step["expect"].get<int>() != response.status) {
      return fail(method + " " + path + " expected " + step["expect"].dump() + ", got " +
                  std::to_string(response.status) + " " + response.body.dump());
    }
    if (step.contains("expect_json")) {
      for (const auto& [pointer, expected] : step["expect_json"].items()) {
        Json::json_pointer ptr(pointer);
        if (!response.body.contains(ptr) || response.body[ptr] != expected) {
          return fail(method + " " + path + ": " + pointer + " expected " + expected.dump() +
                      " in " + response.body.dump());
        }
      }
    }
    if (step.contains("save")) {
      for (const auto& [name, pointer] : step["save"].items()) {
        Json::json_pointer ptr(pointer.get<std::string>());
        if (!response.body.contains(ptr)) return fail("nothing at " + pointer.dump());
        run.vars[name] = as_text(response.body[ptr]);
      }
    }
  }
  return run;
}

}  // namespace hacknizer::harness
