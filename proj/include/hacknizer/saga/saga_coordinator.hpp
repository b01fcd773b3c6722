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
#include <mutex>
#include <string>
#include <tuple>

#include "hacknizer/chassis/service.hpp"
#include "hacknizer/saga/saga.hpp"

namespace hacknizer::saga {

struct SagaCoordinatorOptions {
  std::string saga_secret;
};

struct SagaStats {
  std::size_t stale_replies = 0;
  std::size_t unknown_sagas = 0;
};

// Orchestrates the catalog sagas. Each instance is an event-sourced stream
// keyed by saga_id; step replies are recognised by correlation_id == saga_id
// and causation_id == the step's command id.
class SagaCoordinator final : public chassis::CommandService {
 public:
  SagaCoordinator(chassis::ServiceEnv env, SagaCoordinatorOptions options);

  std::string name() const override { return std::string(kContext); }
  std::vector<std::string> subscriptions() const override;
  chassis::HandlerOutcome on_message(const std::string& topic,
                                     const chassis::EventEnvelope& envelope) override;
  // Re-arms step timers of unfinished sagas and resumes any that stopped
  // between steps.
  void start() override;

  Result<std::string> start_saga(const chassis::AppendContext& context,
                                 const std::string& saga_id, const std::string& saga_type,
                                 const Json& input);
  // UnknownSaga when no such saga; StaleReply when the reply is not for the
  // step currently awaited (duplicates included).
  Status on_step_reply(const chassis::EventEnvelope& reply);
  // Fired by the step timer.
  Status on_step_timeout(const std::string& saga_id, StepPhase phase, const std::string& step,
                         int attempt);

  Result<chassis::Loaded<SagaInstance>> load(const std::string& saga_id) {
    return sagas_.load(saga_id);
  }
  SagaStats stats() const;

 protected:
  Result<chassis::CommandOutcome> execute(const chassis::Command& command) override;

 private:
  // Decides and performs the next action for a saga until it is waiting on
  // a reply or finished.
  Status advance(const std::string& saga_id);
  Status dispatch(const SagaInstance& saga, std::uint64_t version, const SagaDefinition& def,
                  const StepDefinition& step, StepPhase phase, int attempt);
  Result<Json> resolve(const Json& value, const SagaInstance& saga) const;
  chassis::Millis timeout_for(const StepDefinition& step, int attempt) const;
  void arm_timer(const std::string& saga_id, StepPhase phase, const StepDefinition& step,
                 int attempt, chassis::Millis dispatched_at);
  void disarm_timer(const std::string& saga_id, StepPhase phase, const std::string& step);
  Status record(const std::string& saga_id, std::uint64_t version, chassis::NewEvent event,
                const std::string& causation_id);

  SagaCoordinatorOptions options_;
  chassis::Repository<SagaInstance> sagas_;
  mutable std::mutex mu_;
  SagaStats stats_;
  std::map<std::tuple<std::string, StepPhase, std::string>, chassis::Scheduler::TimerId> timers_;
};

}  // namespace hacknizer::saga
