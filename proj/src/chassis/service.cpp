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

#include "hacknizer/chassis/service.hpp"

namespace hacknizer::chassis {

EventEnvelope to_envelope(const Command& command, IdGenerator& ids, const Clock& clock) {
  EventEnvelope envelope;
  envelope.event_id = ids.next();
  envelope.stream_id = command.target;
  envelope.stream_type = std::string(kCommandStreamType);
  envelope.sequence = 1;
  envelope.event_type = command.command_type;
  envelope.payload = Json{{"command_id", command.command_id}, {"body", command.body}};
  if (command.actor) envelope.payload["actor"] = to_json(*command.actor);
  envelope.occurred_at = clock.now_ms();
  envelope.correlation_id = command.correlation_id;
  envelope.causation_id = command.command_id;
  return envelope;
}

Result<Command> command_from_envelope(const EventEnvelope& envelope) {
  const Json& payload = envelope.payload;
  if (!payload.contains("command_id") || !payload["command_id"].is_string() ||
      payload["command_id"].get<std::string>().empty()) {
    return make_error(ErrorCode::kInvalidInput, "command without command_id");
  }
  Command command;
  command.command_id = payload["command_id"].get<std::string>();
  command.command_type = envelope.event_type;
  command.target = envelope.stream_id;
  command.correlation_id = envelope.correlation_id;
  command.body = payload.value("body", Json::object());
  if (!command.body.is_object()) {
    return make_error(ErrorCode::kInvalidInput, "command body must be an object");
  }
  if (payload.contains("actor")) {
    auto actor = principal_from_json(payload["actor"]);
    if (!actor.ok()) return make_error(ErrorCode::kInvalidInput, actor.error().message);
    command.actor = std::move(actor).value();
  }
  return command;
}

std::string command_stream_id(std::string_view command_id) {
  return "cmd-" + std::string(command_id);
}

bool is_transient(ErrorCode code) {
  return code == ErrorCode::kVersionConflict || code == ErrorCode::kBrokerUnavailable ||
         code == ErrorCode::kStorageError;
}

Result<std::vector<EventEnvelope>> CommandService::append(const std::string& stream_id,
                                                          std::uint64_t expected_version,
                                                          std::vector<NewEvent> events,
                                                          const AppendContext& context) {
  auto version = env_.store->append_to_stream(stream_id, expected_version, std::move(events),
                                              context);
  if (!version.ok()) return version.error();
  return env_.store->load_stream(stream_id, expected_version);
}

HandlerOutcome CommandService::handle_command(const EventEnvelope& envelope) {
  auto parsed = command_from_envelope(envelope);
  std::string command_id = parsed.ok() ? parsed->command_id : envelope.event_id;
  AppendContext context{envelope.correlation_id, command_id};

  auto prior = env_.store->find_by_causation(command_id);
  if (!prior.empty()) {
    for (const auto& recorded : prior) {
      if (!env_.store->republish(recorded).ok()) return HandlerOutcome::kRetry;
    }
    return HandlerOutcome::kAck;
  }

  NewEvent outcome_event;
  if (!parsed.ok()) {
    outcome_event = NewEvent{std::string(kCommandRejected),
                             Json{{"command_type", envelope.event_type},
                                  {"target", envelope.stream_id},
                                  {"error", to_string(parsed.code())},
                                  {"message", parsed.error().message}}};
  } else {
    auto result = execute(*parsed);
    if (!result.ok() && is_transient(result.code())) return HandlerOutcome::kRetry;
    if (result.ok()) {
      for (const auto& replay : result->replayed) {
        if (!env_.store->republish(replay).ok()) return HandlerOutcome::kRetry;
      }
      if (!result->events.empty() || !result->replayed.empty()) {
        (void)env_.store->flush_outbox();
        return HandlerOutcome::kAck;
      }
      outcome_event = NewEvent{
          result->reply_type.empty() ? std::string(kCommandCompleted) : result->reply_type,
          Json{{"command_type", parsed->command_type},
               {"target", parsed->target},
               {"result", result->result}}};
    } else {
      outcome_event = NewEvent{std::string(kCommandRejected),
                               Json{{"command_type", parsed->command_type},
                                    {"target", parsed->target},
                                    {"error", to_string(result.code())},
                                    {"message", result.error().message}}};
    }
  }

  auto recorded = env_.store->append_to_stream(command_stream_id(command_id), 0,
                                               {std::move(outcome_event)}, context);
  if (!recorded.ok() && recorded.code() != ErrorCode::kVersionConflict) {
    return HandlerOutcome::kRetry;
  }
  (void)env_.store->flush_outbox();
  return HandlerOutcome::kAck;
}

}  // namespace hacknizer::chassis
