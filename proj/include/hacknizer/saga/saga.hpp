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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hacknizer/chassis/aggregate.hpp"
#include "hacknizer/chassis/clock.hpp"

namespace hacknizer::saga {

inline constexpr std::string_view kContext = "saga";
inline constexpr std::string_view kRegistrationSaga = "ParticipantRegistrationSaga";
inline constexpr std::string_view kWinnerSaga = "WinnerDeclarationSaga";

// Command templates are JSON. A string value starting with '$' is resolved
// against the running saga:
//   $saga_id  $saga_token  $reservation_id  $input.<key>
struct CommandTemplate {
  std::string context;
  std::string command_type;
  std::string target;
  Json body = Json::object();
  bool with_actor = false;
};

struct StepDefinition {
  std::string name;
  CommandTemplate command;
  std::vector<std::string> success_replies;
  std::vector<std::string> failure_replies;  // CommandRejected always fails
  std::optional<CommandTemplate> compensation;
  std::vector<std::string> compensation_replies;
  chassis::Millis timeout_ms = 1000;
  bool read_only = false;
};

struct SagaDefinition {
  std::string saga_type;
  std::vector<std::string> required_input;
  std::vector<StepDefinition> steps;
  int max_retries = 3;

  const StepDefinition* find_step(std::string_view name) const;
};

// The built-in catalog, parsed from an embedded declarative table.
const std::vector<SagaDefinition>& saga_catalog();
const SagaDefinition* find_saga(std::string_view saga_type);
Json catalog_json();

Result<SagaDefinition> saga_definition_from_json(const Json& json);
Json to_json(const SagaDefinition& definition);

enum class SagaStatus { kRunning, kCompensating, kCompleted, kAborted };
std::string_view to_string(SagaStatus status);

enum class StepPhase { kForward, kCompensate };
std::string_view to_string(StepPhase phase);

// pending | succeeded | failed | timed_out
struct StepLog {
  std::string step;
  StepPhase phase = StepPhase::kForward;
  std::string outcome = "pending";
  std::string reply_type;
  Json reply = Json::object();
  int attempts = 0;
  std::string command_id;
  chassis::Millis dispatched_at = 0;
  bool operator==(const StepLog&) const = default;
};

struct SagaInstance {
  bool created = false;
  std::string saga_id;
  std::string saga_type;
  Json input = Json::object();
  SagaStatus status = SagaStatus::kRunning;
  std::vector<StepLog> log;
  std::vector<std::string> compensation_plan;
  std::string failure_reason;

  StepLog* find(StepPhase phase, std::string_view step);
  const StepLog* find(StepPhase phase, std::string_view step) const;
  const StepLog* find_by_command(std::string_view command_id) const;
  bool operator==(const SagaInstance&) const = default;
};

chassis::AggregateDefinition<SagaInstance> saga_definition();
Json to_json(const SagaInstance& instance);

std::string step_command_id(std::string_view saga_id, StepPhase phase, std::string_view step);
std::string reservation_id_for_saga(std::string_view saga_id);

}  // namespace hacknizer::saga
