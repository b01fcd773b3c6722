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

#include "hacknizer/saga/saga_coordinator.hpp"

#include <algorithm>

#include "hacknizer/chassis/auth.hpp"

namespace hacknizer::saga {

using chassis::AppendContext;
using chassis::EventEnvelope;
using chassis::NewEvent;

namespace {

bool contains(const std::vector<std::string>& list, const std::string& value) {
  return std::find(list.begin(), list.end(), value) != list.end();
}

bool resolved(const StepLog* entry) { return entry != nullptr && entry->outcome != "pending"; }

}  // namespace

SagaCoordinator::SagaCoordinator(chassis::ServiceEnv env, SagaCoordinatorOptions options)
    : CommandService(env), options_(std::move(options)), sagas_(*env.store, saga_definition()) {
  env_.store->attach_publisher(env_.bus);
}

std::vector<std::string> SagaCoordinator::subscriptions() const {
  return {chassis::commands_topic(kContext), chassis::events_topic("hackathon"),
          chassis::events_topic("team")};
}

SagaStats SagaCoordinator::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

chassis::HandlerOutcome SagaCoordinator::on_message(const std::string& topic,
                                                    const EventEnvelope& envelope) {
  if (topic == chassis::commands_topic(kContext)) return handle_command(envelope);
  auto handled = on_step_reply(envelope);
  if (!handled.ok() && chassis::is_transient(handled.code())) {
    return chassis::HandlerOutcome::kRetry;
  }
  return chassis::HandlerOutcome::kAck;
}

void SagaCoordinator::start() {
  for (const auto& saga_id : env_.store->stream_ids()) {
    auto loaded = sagas_.load(saga_id);
    if (!loaded.ok() || !loaded->state.created) continue;
    const SagaInstance& saga = loaded->state;
    if (saga.status == SagaStatus::kCompleted || saga.status == SagaStatus::kAborted) continue;
    const SagaDefinition* def = find_saga(saga.saga_type);
    if (def == nullptr) continue;
    bool waiting = false;
    for (const auto& entry : saga.log) {
      if (entry.outcome != "pending") continue;
      if (const StepDefinition* step = def->find_step(entry.step)) {
        arm_timer(saga_id, entry.phase, *step, entry.attempts, entry.dispatched_at);
        waiting = true;
      }
    }
    if (!waiting) (void)advance(saga_id);
  }
}

Result<std::string> SagaCoordinator::start_saga(const AppendContext& context,
                                                const std::string& saga_id,
                                                const std::string& saga_type, const Json& input) {
  const SagaDefinition* def = find_saga(saga_type);
  if (def == nullptr) return make_error(ErrorCode::kInvalidInput, "unknown saga_type");
  if (saga_id.empty()) return make_error(ErrorCode::kInvalidInput, "saga_id");
  if (!input.is_object()) return make_error(ErrorCode::kInvalidInput, "input must be an object");
  for (const auto& key : def->required_input) {
    const bool present = input.contains(key) &&
                         ((input[key].is_string() && !input[key].get<std::string>().empty()) ||
                          input[key].is_object());
    if (!present) return make_error(ErrorCode::kInvalidInput, "input." + key);
  }
  if (input.contains("actor")) {
    auto actor = chassis::principal_from_json(input["actor"]);
    if (!actor.ok()) return make_error(ErrorCode::kInvalidInput, "input.actor");
  }
  auto started = append(saga_id, 0,
                        {NewEvent{"SagaStarted", {{"saga_type", saga_type}, {"input", input}}}},
                        AppendContext{saga_id, context.causation_id});
  if (!started.ok()) {
    if (started.code() == ErrorCode::kVersionConflict) {
      return make_error(ErrorCode::kDuplicateId, saga_id);
    }
    return started.error();
  }
  if (auto next = advance(saga_id); !next.ok() && !chassis::is_transient(next.code())) {
    return next.error();
  }
  return saga_id;
}

Status SagaCoordinator::record(const std::string& saga_id, std::uint64_t version, NewEvent event,
                               const std::string& causation_id) {
  auto appended = append(saga_id, version, {std::move(event)}, AppendContext{saga_id, causation_id});
  if (!appended.ok()) return appended.error();
  return ok_status();
}

chassis::Millis SagaCoordinator::timeout_for(const StepDefinition& step, int attempt) const {
  return step.timeout_ms << std::min(attempt - 1, 16);
}

void SagaCoordinator::arm_timer(const std::string& saga_id, StepPhase phase,
                                const StepDefinition& step, int attempt,
                                chassis::Millis dispatched_at) {
  if (env_.scheduler == nullptr) return;
  disarm_timer(saga_id, phase, step.name);
  auto id = env_.scheduler->schedule_at(
      dispatched_at + timeout_for(step, attempt),
      [this, saga_id, phase, name = step.name, attempt] {
        {
          std::lock_guard lock(mu_);
          timers_.erase({saga_id, phase, name});
        }
        (void)on_step_timeout(saga_id, phase, name, attempt);
      });
  std::lock_guard lock(mu_);
  timers_[{saga_id, phase, step.name}] = id;
}

void SagaCoordinator::disarm_timer(const std::string& saga_id, StepPhase phase,
                                   const std::string& step) {
  if (env_.scheduler == nullptr) return;
  std::lock_guard lock(mu_);
  auto it = timers_.find({saga_id, phase, step});
  if (it == timers_.end()) return;
  env_.scheduler->cancel(it->second);
  timers_.erase(it);
}

Result<Json> SagaCoordinator::resolve(const Json& value, const SagaInstance& saga) const {
  if (value.is_object()) {
    Json out = Json::object();
    for (const auto& [key, item] : value.items()) {
      auto resolved_item = resolve(item, saga);
      if (!resolved_item.ok()) return resolved_item.error();
      out[key] = std::move(resolved_item).value();
    }
    return out;
  }
  if (!value.is_string()) return value;
  const std::string text = value.get<std::string>();
  if (text.empty() || text[0] != '$') return value;
  if (text == "$saga_id") return Json(saga.saga_id);
  if (text == "$saga_token") return Json(chassis::saga_token(options_.saga_secret, saga.saga_id));
  if (text == "$reservation_id") return Json(reservation_id_for_saga(saga.saga_id));
  if (text.rfind("$input.", 0) == 0) {
    const std::string key = text.substr(7);
    if (!saga.input.contains(key)) return make_error(ErrorCode::kInvalidInput, "input." + key);
    return saga.input[key];
  }
  return make_error(ErrorCode::kInvalidInput, "unknown placeholder " + text);
}

Status SagaCoordinator::dispatch(const SagaInstance& saga, std::uint64_t version,
                                 const SagaDefinition&, const StepDefinition& step,
                                 StepPhase phase, int attempt) {
  const CommandTemplate& tmpl =
      phase == StepPhase::kForward ? step.command : *step.compensation;
  const std::string command_id = step_command_id(saga.saga_id, phase, step.name);
  auto recorded = record(saga.saga_id, version,
                         NewEvent{"StepDispatched", {{"phase", to_string(phase)},
                                                     {"step", step.name},
                                                     {"attempt", attempt},
                                                     {"command_id", command_id}}},
                         saga.saga_id);
  if (!recorded.ok()) return recorded;

  chassis::Command command;
  command.command_id = command_id;
  command.command_type = tmpl.command_type;
  command.correlation_id = saga.saga_id;
  auto target = resolve(Json(tmpl.target), saga);
  auto body = resolve(tmpl.body, saga);
  if (target.ok() && body.ok()) {
    command.target = target->is_string() ? target->get<std::string>() : target->dump();
    command.body = std::move(body).value();
    if (tmpl.with_actor && saga.input.contains("actor")) {
      auto actor = chassis::principal_from_json(saga.input["actor"]);
      if (actor.ok()) command.actor = std::move(actor).value();
    }
    // A failed publish is recovered by the step timer, like a lost reply.
    (void)env_.bus->publish(chassis::commands_topic(tmpl.context),
                            chassis::to_envelope(command, *env_.ids, *env_.clock));
  }
  arm_timer(saga.saga_id, phase, step, attempt, now());
  return ok_status();
}

Status SagaCoordinator::advance(const std::string& saga_id) {
  for (int guard = 0; guard < 64; ++guard) {
    auto loaded = sagas_.load(saga_id);
    if (!loaded.ok()) return loaded.error();
    const SagaInstance& saga = loaded->state;
    if (!saga.created) return make_error(ErrorCode::kUnknownSaga, saga_id);
    const SagaDefinition* def = find_saga(saga.saga_type);
    if (def == nullptr) return make_error(ErrorCode::kUnknownSaga, saga.saga_type);
    const std::uint64_t version = loaded->version;

    if (saga.status == SagaStatus::kRunning) {
      const StepDefinition* current = nullptr;
      const StepLog* entry = nullptr;
      for (const auto& step : def->steps) {
        entry = saga.find(StepPhase::kForward, step.name);
        if (entry == nullptr || entry->outcome != "succeeded") {
          current = &step;
          break;
        }
      }
      if (current == nullptr) {
        return record(saga_id, version, NewEvent{"SagaCompleted", Json::object()}, saga_id);
      }
      if (entry == nullptr) {
        return dispatch(saga, version, *def, *current, StepPhase::kForward, 1);
      }
      if (entry->outcome == "pending") return ok_status();

      // The step failed or gave up. Undo, newest first, every earlier step
      // that succeeded plus this one if it timed out (it may have landed).
      std::vector<std::string> plan;
      for (auto it = def->steps.rbegin(); it != def->steps.rend(); ++it) {
        if (!it->compensation) continue;
        const StepLog* done = saga.find(StepPhase::kForward, it->name);
        if (done == nullptr) continue;
        if (done->outcome == "succeeded" || done->outcome == "timed_out") {
          plan.push_back(it->name);
        }
      }
      std::string reason = current->name + ": " +
                           (entry->outcome == "timed_out"
                                ? std::string("timed out")
                                : entry->reply.value("error", entry->reply_type));
      if (plan.empty()) {
        return record(saga_id, version, NewEvent{"SagaAborted", {{"reason", reason}}}, saga_id);
      }
      auto compensating = record(saga_id, version,
                                 NewEvent{"SagaCompensating", {{"reason", reason}, {"steps", plan}}},
                                 saga_id);
      if (!compensating.ok()) return compensating;
      continue;
    }

    if (saga.status == SagaStatus::kCompensating) {
      bool dispatched_or_waiting = false;
      for (const auto& name : saga.compensation_plan) {
        const StepLog* entry = saga.find(StepPhase::kCompensate, name);
        if (resolved(entry)) continue;
        if (entry == nullptr) {
          const StepDefinition* step = def->find_step(name);
          auto sent = dispatch(saga, version, *def, *step, StepPhase::kCompensate, 1);
          if (!sent.ok()) return sent;
        }
        dispatched_or_waiting = true;
        break;
      }
      if (dispatched_or_waiting) return ok_status();
      return record(saga_id, version,
                    NewEvent{"SagaAborted", {{"reason", saga.failure_reason}}}, saga_id);
    }
    return ok_status();
  }
  return make_error(ErrorCode::kTimeout, "saga " + saga_id + " did not settle");
}

Status SagaCoordinator::on_step_reply(const EventEnvelope& reply) {
  if (reply.correlation_id.empty()) return make_error(ErrorCode::kUnknownSaga, "no correlation");
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto loaded = sagas_.load(reply.correlation_id);
    if (!loaded.ok()) return loaded.error();
    const SagaInstance& saga = loaded->state;
    if (!saga.created) {
      std::lock_guard lock(mu_);
      ++stats_.unknown_sagas;
      return make_error(ErrorCode::kUnknownSaga, reply.correlation_id);
    }
    const StepLog* entry = saga.find_by_command(reply.causation_id);
    if (entry == nullptr) {
      // Events caused by something other than a step command (e.g. the slot
      // consumption following a registration) are not replies.
      return make_error(ErrorCode::kStaleReply, "not a step reply");
    }
    const SagaDefinition* def = find_saga(saga.saga_type);
    const StepDefinition* step = def ? def->find_step(entry->step) : nullptr;
    if (step == nullptr) return make_error(ErrorCode::kUnknownSaga, saga.saga_type);

    std::string outcome;
    const auto& success = entry->phase == StepPhase::kForward ? step->success_replies
                                                              : step->compensation_replies;
    if (reply.event_type == chassis::kCommandRejected ||
        contains(step->failure_replies, reply.event_type)) {
      outcome = "failed";
    } else if (contains(success, reply.event_type)) {
      outcome = "succeeded";
    } else {
      return make_error(ErrorCode::kStaleReply, "unexpected " + reply.event_type);
    }
    const bool live = entry->outcome == "pending" &&
                      (saga.status == SagaStatus::kRunning) == (entry->phase == StepPhase::kForward);
    if (!live) {
      std::lock_guard lock(mu_);
      ++stats_.stale_replies;
      return make_error(ErrorCode::kStaleReply, entry->step + " already " + entry->outcome);
    }
    // Outcome records carry their answer under "result"; domain events are
    // the answer themselves.
    Json body = reply.payload;
    if (reply.event_type != chassis::kCommandRejected && body.contains("result") &&
        body["result"].is_object()) {
      body = body["result"];
    }
    auto recorded = record(saga.saga_id, loaded->version,
                           NewEvent{"StepReplied", {{"phase", to_string(entry->phase)},
                                                    {"step", entry->step},
                                                    {"outcome", outcome},
                                                    {"reply_type", reply.event_type},
                                                    {"reply", body},
                                                    {"event_id", reply.event_id}}},
                           reply.event_id);
    if (!recorded.ok()) {
      if (recorded.code() == ErrorCode::kVersionConflict) continue;
      return recorded;
    }
    disarm_timer(saga.saga_id, entry->phase, entry->step);
    return advance(saga.saga_id);
  }
  return make_error(ErrorCode::kVersionConflict, reply.correlation_id);
}

Status SagaCoordinator::on_step_timeout(const std::string& saga_id, StepPhase phase,
                                        const std::string& step_name, int attempt) {
  auto loaded = sagas_.load(saga_id);
  if (!loaded.ok()) return loaded.error();
  const SagaInstance& saga = loaded->state;
  if (!saga.created) return make_error(ErrorCode::kUnknownSaga, saga_id);
  const StepLog* entry = saga.find(phase, step_name);
  if (entry == nullptr || entry->outcome != "pending" || entry->attempts != attempt) {
    return ok_status();
  }
  const SagaDefinition* def = find_saga(saga.saga_type);
  const StepDefinition* step = def->find_step(step_name);
  const bool final = attempt > def->max_retries;
  auto recorded = record(saga_id, loaded->version,
                         NewEvent{"StepTimedOut", {{"phase", to_string(phase)},
                                                   {"step", step_name},
                                                   {"attempt", attempt},
                                                   {"final", final}}},
                         saga_id);
  if (!recorded.ok()) return recorded;
  if (!final) {
    auto reloaded = sagas_.load(saga_id);
    if (!reloaded.ok()) return reloaded.error();
    return dispatch(reloaded->state, reloaded->version, *def, *step, phase, attempt + 1);
  }
  return advance(saga_id);
}

Result<chassis::CommandOutcome> SagaCoordinator::execute(const chassis::Command& command) {
  if (command.command_type != "StartSaga") {
    return make_error(ErrorCode::kInvalidInput, "unknown command " + command.command_type);
  }
  Json input = command.body.value("input", Json::object());
  if (command.actor && input.is_object() && !input.contains("actor")) {
    input["actor"] = chassis::to_json(*command.actor);
  }
  auto started = start_saga(command.context(), command.target,
                            command.body.value("saga_type", ""), input);
  if (!started.ok()) return started.error();
  chassis::CommandOutcome outcome;
  outcome.events = env_.store->load_stream(command.target, 0);
  outcome.result = Json{{"saga_id", *started}};
  return outcome;
}

}  // namespace hacknizer::saga
