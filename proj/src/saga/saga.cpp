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

#include "hacknizer/saga/saga.hpp"

#include <algorithm>

namespace hacknizer::saga {

using chassis::EventEnvelope;

namespace {

// The saga catalog. Steps run in order; a compensation undoes its step when
// a later step fails (or the step itself timed out and may have landed).
constexpr const char* kCatalog = R"json([
  {
    "saga_type": "ParticipantRegistrationSaga",
    "required_input": ["hackathon_id", "user_id"],
    "max_retries": 3,
    "steps": [
      {
        "name": "reserve_registration_slot",
        "command": {"context": "hackathon", "command_type": "ReserveRegistrationSlot",
                    "target": "$input.hackathon_id", "body": {}},
        "success_replies": ["SlotReserved"],
        "compensation": {"context": "hackathon", "command_type": "ReleaseRegistrationSlot",
                         "target": "$input.hackathon_id",
                         "body": {"reservation_id": "$reservation_id"}},
        "compensation_replies": ["SlotReleased"],
        "timeout_ms": 1000
      },
      {
        "name": "confirm_participant",
        "command": {"context": "team", "command_type": "ConfirmParticipant",
                    "target": "$input.hackathon_id",
                    "body": {"user_id": "$input.user_id", "reservation_id": "$reservation_id"}},
        "success_replies": ["ParticipantRegistered"],
        "timeout_ms": 1000
      }
    ]
  },
  {
    "saga_type": "WinnerDeclarationSaga",
    "required_input": ["hackathon_id", "team_id", "award_id", "actor"],
    "max_retries": 3,
    "steps": [
      {
        "name": "verify_hackathon_ended",
        "command": {"context": "hackathon", "command_type": "VerifyHackathonEnded",
                    "target": "$input.hackathon_id", "body": {"award_id": "$input.award_id"},
                    "with_actor": true},
        "success_replies": ["HackathonEndedVerified"],
        "read_only": true,
        "timeout_ms": 1000
      },
      {
        "name": "verify_submission",
        "command": {"context": "team", "command_type": "VerifySubmission",
                    "target": "$input.team_id",
                    "body": {"hackathon_id": "$input.hackathon_id", "saga_token": "$saga_token"}},
        "success_replies": ["SubmissionVerified"],
        "failure_replies": ["NoSubmission"],
        "read_only": true,
        "timeout_ms": 1000
      },
      {
        "name": "record_winner",
        "command": {"context": "hackathon", "command_type": "RecordWinner",
                    "target": "$input.hackathon_id",
                    "body": {"team_id": "$input.team_id", "award_id": "$input.award_id",
                             "saga_token": "$saga_token"}},
        "success_replies": ["WinnerDeclared"],
        "timeout_ms": 1000
      }
    ]
  }
])json";

std::vector<std::string> strings(const Json& json, const char* key) {
  std::vector<std::string> out;
  if (json.contains(key) && json[key].is_array()) {
    for (const auto& item : json[key]) out.push_back(item.get<std::string>());
  }
  return out;
}

Result<CommandTemplate> template_from_json(const Json& json) {
  if (!json.is_object()) return make_error(ErrorCode::kInvalidInput, "command template");
  CommandTemplate t{json.value("context", ""), json.value("command_type", ""),
                    json.value("target", ""), json.value("body", Json::object()),
                    json.value("with_actor", false)};
  if (t.context.empty() || t.command_type.empty() || t.target.empty()) {
    return make_error(ErrorCode::kInvalidInput, "command template needs context/type/target");
  }
  return t;
}

Json template_json(const CommandTemplate& t) {
  return {{"context", t.context}, {"command_type", t.command_type}, {"target", t.target},
          {"body", t.body},       {"with_actor", t.with_actor}};
}

StepPhase phase_from_string(std::string_view name) {
  return name == "compensate" ? StepPhase::kCompensate : StepPhase::kForward;
}

}  // namespace

const StepDefinition* SagaDefinition::find_step(std::string_view name) const {
  for (const auto& step : steps) {
    if (step.name == name) return &step;
  }
  return nullptr;
}

Result<SagaDefinition> saga_definition_from_json(const Json& json) {
  SagaDefinition def;
  def.saga_type = json.value("saga_type", "");
  def.required_input = strings(json, "required_input");
  def.max_retries = json.value("max_retries", 3);
  if (def.saga_type.empty()) return make_error(ErrorCode::kInvalidInput, "saga_type");
  for (const auto& s : json.value("steps", Json::array())) {
    StepDefinition step;
    step.name = s.value("name", "");
    auto command = template_from_json(s.value("command", Json()));
    if (!command.ok()) return command.error();
    step.command = *command;
    step.success_replies = strings(s, "success_replies");
    step.failure_replies = strings(s, "failure_replies");
    if (s.contains("compensation")) {
      auto compensation = template_from_json(s["compensation"]);
      if (!compensation.ok()) return compensation.error();
      step.compensation = *compensation;
    }
    step.compensation_replies = strings(s, "compensation_replies");
    step.timeout_ms = s.value("timeout_ms", chassis::Millis{1000});
    step.read_only = s.value("read_only", false);
    if (step.name.empty() || step.success_replies.empty()) {
      return make_error(ErrorCode::kInvalidInput, "step needs a name and success replies");
    }
    def.steps.push_back(std::move(step));
  }
  if (def.steps.empty()) return make_error(ErrorCode::kInvalidInput, "saga without steps");
  return def;
}

Json to_json(const SagaDefinition& def) {
  Json steps = Json::array();
  for (const auto& step : def.steps) {
    Json s{{"name", step.name},
           {"command", template_json(step.command)},
           {"success_replies", step.success_replies},
           {"failure_replies", step.failure_replies},
           {"timeout_ms", step.timeout_ms},
           {"read_only", step.read_only}};
    if (step.compensation) {
      s["compensation"] = template_json(*step.compensation);
      s["compensation_replies"] = step.compensation_replies;
    }
    steps.push_back(std::move(s));
  }
  return {{"saga_type", def.saga_type},
          {"required_input", def.required_input},
          {"max_retries", def.max_retries},
          {"steps", steps}};
}

const std::vector<SagaDefinition>& saga_catalog() {
  static const std::vector<SagaDefinition> catalog = [] {
    std::vector<SagaDefinition> out;
    for (const auto& entry : Json::parse(kCatalog)) out.push_back(saga_definition_from_json(entry).value());
    return out;
  }();
  return catalog;
}

const SagaDefinition* find_saga(std::string_view saga_type) {
  for (const auto& def : saga_catalog()) {
    if (def.saga_type == saga_type) return &def;
  }
  return nullptr;
}

Json catalog_json() {
  Json out = Json::array();
  for (const auto& def : saga_catalog()) out.push_back(to_json(def));
  return out;
}

std::string_view to_string(SagaStatus status) {
  switch (status) {
    case SagaStatus::kRunning: return "Running";
    case SagaStatus::kCompensating: return "Compensating";
    case SagaStatus::kCompleted: return "Completed";
    case SagaStatus::kAborted: return "Aborted";
  }
  return "Running";
}

std::string_view to_string(StepPhase phase) {
  return phase == StepPhase::kForward ? "forward" : "compensate";
}

StepLog* SagaInstance::find(StepPhase phase, std::string_view step) {
  for (auto& entry : log) {
    if (entry.phase == phase && entry.step == step) return &entry;
  }
  return nullptr;
}

const StepLog* SagaInstance::find(StepPhase phase, std::string_view step) const {
  return const_cast<SagaInstance*>(this)->find(phase, step);
}

const StepLog* SagaInstance::find_by_command(std::string_view command_id) const {
  for (const auto& entry : log) {
    if (entry.command_id == command_id) return &entry;
  }
  return nullptr;
}

chassis::AggregateDefinition<SagaInstance> saga_definition() {
  return {std::string(kContext), SagaInstance{}, [](SagaInstance s, const EventEnvelope& e) {
            const Json& p = e.payload;
            const StepPhase phase = phase_from_string(p.value("phase", "forward"));
            const std::string step = p.value("step", "");
            if (e.event_type == "SagaStarted") {
              s.created = true;
              s.saga_id = e.stream_id;
              s.saga_type = p.value("saga_type", "");
              s.input = p.value("input", Json::object());
            } else if (e.event_type == "StepDispatched") {
              StepLog* entry = s.find(phase, step);
              if (entry == nullptr) {
                s.log.push_back(StepLog{step, phase});
                entry = &s.log.back();
              }
              entry->outcome = "pending";
              entry->attempts = p.value("attempt", 1);
              entry->command_id = p.value("command_id", "");
              entry->dispatched_at = e.occurred_at;
            } else if (e.event_type == "StepReplied") {
              if (StepLog* entry = s.find(phase, step)) {
                entry->outcome = p.value("outcome", "failed");
                entry->reply_type = p.value("reply_type", "");
                entry->reply = p.value("reply", Json::object());
              }
            } else if (e.event_type == "StepTimedOut") {
              StepLog* entry = s.find(phase, step);
              if (entry != nullptr && p.value("final", false)) entry->outcome = "timed_out";
            } else if (e.event_type == "SagaCompensating") {
              s.status = SagaStatus::kCompensating;
              s.failure_reason = p.value("reason", "");
              s.compensation_plan = p.value("steps", std::vector<std::string>{});
            } else if (e.event_type == "SagaCompleted") {
              s.status = SagaStatus::kCompleted;
            } else if (e.event_type == "SagaAborted") {
              s.status = SagaStatus::kAborted;
              s.failure_reason = p.value("reason", s.failure_reason);
            }
            return s;
          }};
}

Json to_json(const SagaInstance& s) {
  Json log = Json::array();
  for (const auto& entry : s.log) {
    log.push_back({{"step", entry.step},
                   {"phase", to_string(entry.phase)},
                   {"outcome", entry.outcome},
                   {"reply_type", entry.reply_type},
                   {"reply", entry.reply},
                   {"attempts", entry.attempts}});
  }
  return {{"saga_id", s.saga_id},
          {"saga_type", s.saga_type},
          {"input", s.input},
          {"correlation_id", s.saga_id},
          {"status", to_string(s.status)},
          {"steps", log},
          {"failure_reason", s.failure_reason}};
}

std::string step_command_id(std::string_view saga_id, StepPhase phase, std::string_view step) {
  return std::string(saga_id) + (phase == StepPhase::kForward ? ":" : ":undo:") +
         std::string(step);
}

std::string reservation_id_for_saga(std::string_view saga_id) {
  return "rsv-" + std::string(saga_id);
}

}  // namespace hacknizer::saga
