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

#include "hacknizer/chassis/auth.hpp"
#include "hacknizer/chassis/bus.hpp"
#include "hacknizer/chassis/clock.hpp"
#include "hacknizer/chassis/event_store.hpp"
#include "hacknizer/chassis/ids.hpp"
#include "hacknizer/chassis/scheduler.hpp"

namespace hacknizer::chassis {

inline constexpr std::string_view kCommandStreamType = "command";
inline constexpr std::string_view kCommandRejected = "CommandRejected";
inline constexpr std::string_view kCommandCompleted = "CommandCompleted";

// A request for a state change addressed to one bounded context. On the bus
// it travels as an envelope on `<context>.commands`: stream_id is the target
// aggregate (so commands for one aggregate stay ordered), event_type is the
// command name, and the payload carries command_id, actor and body.
//
// command_id is stable across re-sends; the envelope's event_id is not.
struct Command {
  std::string command_id;
  std::string command_type;
  std::string target;
  std::string correlation_id;
  std::optional<Principal> actor;
  Json body = Json::object();

  AppendContext context() const { return AppendContext{correlation_id, command_id}; }
};

EventEnvelope to_envelope(const Command& command, IdGenerator& ids, const Clock& clock);
Result<Command> command_from_envelope(const EventEnvelope& envelope);

// Result of executing a command against an aggregate.
//   events     envelopes appended by this execution
//   replayed   envelopes recorded earlier that answer this command
//   reply_type when nothing was appended, the outcome recorded in the
//              per-command stream `cmd-<command_id>`
struct CommandOutcome {
  std::vector<EventEnvelope> events;
  std::vector<EventEnvelope> replayed;
  std::string reply_type;
  Json result = Json::object();
};

std::string command_stream_id(std::string_view command_id);

// Errors that say "try again later" rather than "no".
bool is_transient(ErrorCode code);

// Everything a service needs from its host process.
struct ServiceEnv {
  EventStore* store = nullptr;  // null for services without a store
  MessageBus* bus = nullptr;
  const Clock* clock = nullptr;
  IdGenerator* ids = nullptr;
  Scheduler* scheduler = nullptr;
};

class Service {
 public:
  virtual ~Service() = default;

  // Also the consumer group name.
  virtual std::string name() const = 0;
  virtual std::vector<std::string> subscriptions() const = 0;
  virtual HandlerOutcome on_message(const std::string& topic, const EventEnvelope& envelope) = 0;
  // Called once after subscriptions are registered.
  virtual void start() {}
  virtual EventStore* store() { return nullptr; }
};

// Shared command-topic plumbing: parse, dedupe by command_id (re-publishing
// the recorded outcome), execute, and record rejections and no-op outcomes in
// the per-command stream.
class CommandService : public Service {
 public:
  explicit CommandService(ServiceEnv env) : env_(env) {}

  EventStore* store() override { return env_.store; }

 protected:
  HandlerOutcome handle_command(const EventEnvelope& envelope);
  virtual Result<CommandOutcome> execute(const Command& command) = 0;

  // Appends `events` and returns the stored envelopes.
  Result<std::vector<EventEnvelope>> append(const std::string& stream_id,
                                            std::uint64_t expected_version,
                                            std::vector<NewEvent> events,
                                            const AppendContext& context);

  Millis now() const { return env_.clock->now_ms(); }

  ServiceEnv env_;
};

}  // namespace hacknizer::chassis
