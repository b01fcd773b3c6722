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
#include <optional>
#include <string>

#include "hacknizer/chassis/service.hpp"
#include "hacknizer/hackathon/hackathon.hpp"

namespace hacknizer::hackathon {

struct HackathonServiceOptions {
  std::string saga_secret;
  chassis::Millis reservation_ttl_ms = 60'000;
  int default_capacity = 100;
  int default_team_min = 1;
  int default_team_max = 5;
};

struct CreateHackathon {
  std::string title;
  std::string description;
  Schedule schedule;
  std::optional<int> capacity;
  std::optional<int> team_min;
  std::optional<int> team_max;
};

struct HackathonPatch {
  std::optional<std::string> title;
  std::optional<std::string> description;
  std::optional<chassis::Millis> start;
  std::optional<chassis::Millis> end;
  std::optional<int> capacity;
  std::optional<int> team_min;
  std::optional<int> team_max;

  bool empty() const {
    return !title && !description && !start && !end && !capacity && !team_min && !team_max;
  }
};

// Deterministic so a saga can compensate a reservation whose reply it never
// received.
std::string reservation_id_for(std::string_view correlation_id);

// Green bounded context: lifecycle, sponsors, awards, capacity, winner.
class HackathonService final : public chassis::CommandService {
 public:
  HackathonService(chassis::ServiceEnv env, HackathonServiceOptions options);

  std::string name() const override { return std::string(kContext); }
  std::vector<std::string> subscriptions() const override;
  chassis::HandlerOutcome on_message(const std::string& topic,
                                     const chassis::EventEnvelope& envelope) override;
  // Re-arms expiry timers for pending reservations.
  void start() override;

  using Outcome = Result<chassis::CommandOutcome>;

  Outcome create_hackathon(const chassis::AppendContext& context, const chassis::Principal& actor,
                           const std::string& hackathon_id, const CreateHackathon& input);
  Outcome edit_hackathon(const chassis::AppendContext& context, const chassis::Principal& actor,
                         const std::string& hackathon_id, const HackathonPatch& patch);
  Outcome add_sponsor(const chassis::AppendContext& context, const chassis::Principal& actor,
                      const std::string& hackathon_id, const Sponsor& sponsor);
  Outcome add_award(const chassis::AppendContext& context, const chassis::Principal& actor,
                    const std::string& hackathon_id, const Award& award);
  Outcome transition(const chassis::AppendContext& context, const chassis::Principal& actor,
                     const std::string& hackathon_id, LifecycleAction action);
  Outcome reserve_registration_slot(const chassis::AppendContext& context,
                                    const std::string& hackathon_id,
                                    const std::string& correlation_id);
  Outcome release_registration_slot(const chassis::AppendContext& context,
                                    const std::string& hackathon_id,
                                    const std::string& reservation_id);
  Outcome consume_registration_slot(const chassis::AppendContext& context,
                                    const std::string& hackathon_id,
                                    const std::string& reservation_id,
                                    const std::string& participant_id);
  Outcome expire_reservation(const std::string& hackathon_id, const std::string& reservation_id);
  // Read-only saga step: the hackathon exists, has ended, and the actor may
  // declare its winner.
  Outcome verify_ended(const chassis::AppendContext& context, const chassis::Principal& actor,
                       const std::string& hackathon_id, const std::string& award_id);
  Outcome record_winner(const chassis::AppendContext& context, const std::string& hackathon_id,
                        const std::string& team_id, const std::string& award_id,
                        const std::string& saga_id, const std::string& saga_token);

  Result<chassis::Loaded<Hackathon>> load(const std::string& hackathon_id) {
    return hackathons_.load(hackathon_id);
  }
  chassis::Repository<Hackathon>& repository() { return hackathons_; }

 protected:
  Outcome execute(const chassis::Command& command) override;

 private:
  // Loads a created hackathon, runs `decide`, appends its events, retrying on
  // version conflicts.
  template <typename Decide>
  Outcome mutate(const std::string& hackathon_id, const chassis::AppendContext& context,
                 Decide&& decide);

  void schedule_expiry(const std::string& hackathon_id, const Reservation& reservation);
  void cancel_expiry(const std::string& reservation_id);

  HackathonServiceOptions options_;
  chassis::Repository<Hackathon> hackathons_;
  std::mutex timers_mu_;
  std::map<std::string, chassis::Scheduler::TimerId> expiry_timers_;
};

}  // namespace hacknizer::hackathon
