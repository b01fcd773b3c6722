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

#include "hacknizer/hackathon/hackathon_service.hpp"

#include "hacknizer/chassis/auth.hpp"

namespace hacknizer::hackathon {

using chassis::AppendContext;
using chassis::CommandOutcome;
using chassis::EventEnvelope;
using chassis::NewEvent;
using chassis::Principal;
using chassis::Role;

namespace {

constexpr int kMaxConflictRetries = 16;

bool can_manage(const Principal& actor, const Hackathon& h) {
  return actor.has(Role::kAdmin) || actor.user_id == h.organizer_id;
}

// What a decide step yields: events to append, an earlier envelope answering
// the same request, a no-op, or an error.
struct Decision {
  std::vector<NewEvent> events;
  std::vector<EventEnvelope> replayed;
  std::string reply_type;
  Json result = Json::object();
};

Status check_bounds(int capacity, int team_min, int team_max) {
  if (capacity < 1) return make_error(ErrorCode::kInvalidCapacity, "capacity must be >= 1");
  if (team_min < 1 || team_min > team_max) {
    return make_error(ErrorCode::kInvalidTeamSize, "need 1 <= min team size <= max team size");
  }
  return ok_status();
}

std::optional<std::string> opt_string(const Json& body, const char* key) {
  if (body.contains(key) && body[key].is_string()) return body[key].get<std::string>();
  return std::nullopt;
}

template <typename T>
std::optional<T> opt_int(const Json& body, const char* key) {
  if (body.contains(key) && body[key].is_number_integer()) return body[key].get<T>();
  return std::nullopt;
}

}  // namespace

std::string reservation_id_for(std::string_view correlation_id) {
  return "rsv-" + std::string(correlation_id);
}

HackathonService::HackathonService(chassis::ServiceEnv env, HackathonServiceOptions options)
    : CommandService(env), options_(std::move(options)),
      hackathons_(*env.store, hackathon_definition()) {
  env_.store->attach_publisher(env_.bus);
}

std::vector<std::string> HackathonService::subscriptions() const {
  return {chassis::commands_topic(kContext), chassis::events_topic("team")};
}

void HackathonService::start() {
  for (const auto& stream_id : env_.store->stream_ids()) {
    if (stream_id.rfind("cmd-", 0) == 0) continue;
    auto loaded = hackathons_.load(stream_id);
    if (!loaded.ok() || !loaded->state.created) continue;
    for (const auto& [id, reservation] : loaded->state.reservations) {
      if (reservation.status == ReservationStatus::kPending) {
        schedule_expiry(stream_id, reservation);
      }
    }
  }
}

void HackathonService::schedule_expiry(const std::string& hackathon_id,
                                       const Reservation& reservation) {
  if (env_.scheduler == nullptr) return;
  auto timer = env_.scheduler->schedule_at(
      reservation.expires_at, [this, hackathon_id, id = reservation.reservation_id] {
        {
          std::lock_guard lock(timers_mu_);
          expiry_timers_.erase(id);
        }
        (void)expire_reservation(hackathon_id, id);
      });
  std::lock_guard lock(timers_mu_);
  expiry_timers_[reservation.reservation_id] = timer;
}

void HackathonService::cancel_expiry(const std::string& reservation_id) {
  if (env_.scheduler == nullptr) return;
  std::lock_guard lock(timers_mu_);
  auto it = expiry_timers_.find(reservation_id);
  if (it == expiry_timers_.end()) return;
  env_.scheduler->cancel(it->second);
  expiry_timers_.erase(it);
}

chassis::HandlerOutcome HackathonService::on_message(const std::string& topic,
                                                     const EventEnvelope& envelope) {
  if (topic == chassis::commands_topic(kContext)) return handle_command(envelope);
  if (envelope.event_type == "ParticipantRegistered") {
    const Json& p = envelope.payload;
    AppendContext context{envelope.correlation_id, envelope.event_id};
    auto consumed = consume_registration_slot(context, p.value("hackathon_id", ""),
                                              p.value("reservation_id", ""),
                                              p.value("participant_id", ""));
    if (!consumed.ok() && chassis::is_transient(consumed.code())) {
      return chassis::HandlerOutcome::kRetry;
    }
  }
  return chassis::HandlerOutcome::kAck;
}

template <typename Decide>
HackathonService::Outcome HackathonService::mutate(const std::string& hackathon_id,
                                                   const AppendContext& context,
                                                   Decide&& decide) {
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto loaded = hackathons_.load(hackathon_id);
    if (!loaded.ok()) return loaded.error();
    if (!loaded->state.created) return make_error(ErrorCode::kUnknownHackathon, hackathon_id);
    Result<Decision> decision = decide(loaded->state);
    if (!decision.ok()) return decision.error();
    if (decision->events.empty()) {
      return CommandOutcome{{}, std::move(decision->replayed), std::move(decision->reply_type),
                            std::move(decision->result)};
    }
    auto appended = append(hackathon_id, loaded->version, std::move(decision->events), context);
    if (appended.ok()) {
      return CommandOutcome{std::move(appended).value(), {}, {}, std::move(decision->result)};
    }
    if (appended.code() != ErrorCode::kVersionConflict) return appended.error();
  }
  return make_error(ErrorCode::kVersionConflict, hackathon_id);
}

HackathonService::Outcome HackathonService::create_hackathon(const AppendContext& context,
                                                             const Principal& actor,
                                                             const std::string& hackathon_id,
                                                             const CreateHackathon& input) {
  if (!actor.has(Role::kOrganizer)) {
    return make_error(ErrorCode::kForbidden, "organizer role required");
  }
  if (hackathon_id.empty() || input.title.empty()) {
    return make_error(ErrorCode::kInvalidInput, "title is required");
  }
  if (input.schedule.start >= input.schedule.end) {
    return make_error(ErrorCode::kInvalidSchedule, "start must precede end");
  }
  const int capacity = input.capacity.value_or(options_.default_capacity);
  const int team_min = input.team_min.value_or(options_.default_team_min);
  const int team_max = input.team_max.value_or(options_.default_team_max);
  if (auto bounds = check_bounds(capacity, team_min, team_max); !bounds.ok()) {
    return bounds.error();
  }
  auto appended = append(hackathon_id, 0,
                         {NewEvent{"HackathonCreated",
                                   {{"hackathon_id", hackathon_id},
                                    {"organizer_id", actor.user_id},
                                    {"title", input.title},
                                    {"description", input.description},
                                    {"start", input.schedule.start},
                                    {"end", input.schedule.end},
                                    {"capacity", capacity},
                                    {"team_min", team_min},
                                    {"team_max", team_max}}}},
                         context);
  if (!appended.ok()) {
    if (appended.code() == ErrorCode::kVersionConflict) {
      return make_error(ErrorCode::kDuplicateId, hackathon_id);
    }
    return appended.error();
  }
  return CommandOutcome{std::move(appended).value(), {}, {}, Json::object()};
}

HackathonService::Outcome HackathonService::edit_hackathon(const AppendContext& context,
                                                           const Principal& actor,
                                                           const std::string& hackathon_id,
                                                           const HackathonPatch& patch) {
  return mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    if (!can_manage(actor, h)) return make_error(ErrorCode::kForbidden, "not the organizer");
    if (h.state != LifecycleState::kDraft && h.state != LifecycleState::kRegistrationOpen) {
      return make_error(ErrorCode::kEditLocked, std::string(to_string(h.state)));
    }
    if (patch.empty()) return make_error(ErrorCode::kInvalidInput, "empty patch");
    if (patch.title && patch.title->empty()) {
      return make_error(ErrorCode::kInvalidInput, "title must not be empty");
    }
    Schedule schedule{patch.start.value_or(h.schedule.start), patch.end.value_or(h.schedule.end)};
    if (schedule.start >= schedule.end) {
      return make_error(ErrorCode::kInvalidSchedule, "start must precede end");
    }
    const int capacity = patch.capacity.value_or(h.capacity);
    if (auto bounds = check_bounds(capacity, patch.team_min.value_or(h.team_min),
                                   patch.team_max.value_or(h.team_max));
        !bounds.ok()) {
      return bounds.error();
    }
    if (capacity < h.slots_used) {
      return make_error(ErrorCode::kCapacityBelowUsage,
                        std::to_string(h.slots_used) + " slots in use");
    }
    Json payload = Json::object();
    if (patch.title) payload["title"] = *patch.title;
    if (patch.description) payload["description"] = *patch.description;
    if (patch.start) payload["start"] = *patch.start;
    if (patch.end) payload["end"] = *patch.end;
    if (patch.capacity) payload["capacity"] = *patch.capacity;
    if (patch.team_min) payload["team_min"] = *patch.team_min;
    if (patch.team_max) payload["team_max"] = *patch.team_max;
    return Decision{{NewEvent{"HackathonEdited", std::move(payload)}}};
  });
}

HackathonService::Outcome HackathonService::add_sponsor(const AppendContext& context,
                                                        const Principal& actor,
                                                        const std::string& hackathon_id,
                                                        const Sponsor& sponsor) {
  return mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    if (!can_manage(actor, h)) return make_error(ErrorCode::kForbidden, "not the organizer");
    if (h.state == LifecycleState::kWinnerDeclared) {
      return make_error(ErrorCode::kEditLocked, "winner already declared");
    }
    if (sponsor.sponsor_id.empty() || sponsor.name.empty()) {
      return make_error(ErrorCode::kInvalidInput, "sponsor needs an id and a name");
    }
    if (h.find_sponsor(sponsor.sponsor_id)) {
      return make_error(ErrorCode::kDuplicateId, sponsor.sponsor_id);
    }
    return Decision{{NewEvent{"SponsorRegistered", {{"sponsor_id", sponsor.sponsor_id},
                                                    {"name", sponsor.name},
                                                    {"tier", sponsor.tier},
                                                    {"logo", sponsor.logo}}}}};
  });
}

HackathonService::Outcome HackathonService::add_award(const AppendContext& context,
                                                      const Principal& actor,
                                                      const std::string& hackathon_id,
                                                      const Award& award) {
  return mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    if (!can_manage(actor, h)) return make_error(ErrorCode::kForbidden, "not the organizer");
    if (h.state == LifecycleState::kWinnerDeclared) {
      return make_error(ErrorCode::kEditLocked, "winner already declared");
    }
    if (award.award_id.empty() || award.title.empty()) {
      return make_error(ErrorCode::kInvalidInput, "award needs an id and a title");
    }
    if (h.find_award(award.award_id)) return make_error(ErrorCode::kDuplicateId, award.award_id);
    if (award.sponsor_id && !h.find_sponsor(*award.sponsor_id)) {
      return make_error(ErrorCode::kUnknownSponsor, *award.sponsor_id);
    }
    Json payload{{"award_id", award.award_id},
                 {"title", award.title},
                 {"description", award.description}};
    if (award.sponsor_id) payload["sponsor_id"] = *award.sponsor_id;
    return Decision{{NewEvent{"AwardRegistered", std::move(payload)}}};
  });
}

HackathonService::Outcome HackathonService::transition(const AppendContext& context,
                                                       const Principal& actor,
                                                       const std::string& hackathon_id,
                                                       LifecycleAction action) {
  return mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    if (!can_manage(actor, h)) return make_error(ErrorCode::kForbidden, "not the organizer");
    if (!next_state(h.state, action)) {
      return make_error(ErrorCode::kInvalidTransition,
                        std::string(to_string(action)) + " from " + std::string(to_string(h.state)));
    }
    return Decision{{NewEvent{std::string(lifecycle_event(action)), Json::object()}}};
  });
}

HackathonService::Outcome HackathonService::reserve_registration_slot(
    const AppendContext& context, const std::string& hackathon_id,
    const std::string& correlation_id) {
  chassis::Millis expires_at = now() + options_.reservation_ttl_ms;
  auto outcome = mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    if (correlation_id.empty()) return make_error(ErrorCode::kInvalidInput, "no correlation_id");
    if (const Reservation* existing = h.find_by_correlation(correlation_id)) {
      Decision replay;
      for (const auto& e : env_.store->load_stream(hackathon_id)) {
        if (e.event_type == "SlotReserved" &&
            e.payload.value("reservation_id", "") == existing->reservation_id) {
          replay.replayed.push_back(e);
        }
      }
      replay.result = Json{{"reservation_id", existing->reservation_id}};
      return replay;
    }
    if (h.state != LifecycleState::kRegistrationOpen) {
      return make_error(ErrorCode::kRegistrationClosed, std::string(to_string(h.state)));
    }
    if (h.slots_used >= h.capacity) {
      return make_error(ErrorCode::kCapacityExceeded,
                        std::to_string(h.slots_used) + " of " + std::to_string(h.capacity));
    }
    std::string reservation_id = reservation_id_for(correlation_id);
    return Decision{{NewEvent{"SlotReserved", {{"reservation_id", reservation_id},
                                               {"correlation_id", correlation_id},
                                               {"expires_at", expires_at}}}},
                    {},
                    {},
                    Json{{"reservation_id", reservation_id}}};
  });
  if (outcome.ok() && !outcome->events.empty()) {
    Reservation r;
    r.reservation_id = outcome->result.value("reservation_id", "");
    r.expires_at = expires_at;
    schedule_expiry(hackathon_id, r);
  }
  return outcome;
}

HackathonService::Outcome HackathonService::release_registration_slot(
    const AppendContext& context, const std::string& hackathon_id,
    const std::string& reservation_id) {
  auto outcome = mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    auto it = h.reservations.find(reservation_id);
    if (it == h.reservations.end()) {
      return make_error(ErrorCode::kUnknownReservation, reservation_id);
    }
    if (it->second.status == ReservationStatus::kConsumed) {
      // The saga gave up although its confirmation landed. Its decision
      // stands: free the slot and have the team side undo the confirmation.
      return Decision{{NewEvent{"SlotReleased",
                                {{"reservation_id", reservation_id}, {"reason", "compensated"}}},
                       NewEvent{"RegistrationRevoked",
                                {{"reservation_id", reservation_id},
                                 {"participant_id", it->second.participant_id}}}}};
    }
    if (it->second.status == ReservationStatus::kReleased) {
      Decision replay;
      for (const auto& e : env_.store->load_stream(hackathon_id)) {
        if (e.event_type == "SlotReleased" &&
            e.payload.value("reservation_id", "") == reservation_id) {
          replay.replayed.push_back(e);
        }
      }
      return replay;
    }
    return Decision{{NewEvent{"SlotReleased",
                              {{"reservation_id", reservation_id}, {"reason", "released"}}}}};
  });
  if (outcome.ok() && !outcome->events.empty()) cancel_expiry(reservation_id);
  return outcome;
}

HackathonService::Outcome HackathonService::consume_registration_slot(
    const AppendContext& context, const std::string& hackathon_id,
    const std::string& reservation_id, const std::string& participant_id) {
  auto outcome = mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    auto it = h.reservations.find(reservation_id);
    if (it == h.reservations.end()) {
      return make_error(ErrorCode::kUnknownReservation, reservation_id);
    }
    switch (it->second.status) {
      case ReservationStatus::kConsumed:
        return Decision{};
      case ReservationStatus::kReleased:
        // The saga gave up (or the reservation expired) and the slot is gone,
        // but its confirmation still landed. The release stands; ask the team
        // side to take the confirmation back.
        if (it->second.revoked) return Decision{};
        return Decision{{NewEvent{"RegistrationRevoked", {{"reservation_id", reservation_id},
                                                          {"participant_id", participant_id}}}}};
      case ReservationStatus::kPending:
        return Decision{{NewEvent{"SlotConsumed", {{"reservation_id", reservation_id},
                                                   {"participant_id", participant_id}}}}};
    }
    return Decision{};
  });
  if (outcome.ok() && !outcome->events.empty()) cancel_expiry(reservation_id);
  return outcome;
}

HackathonService::Outcome HackathonService::expire_reservation(const std::string& hackathon_id,
                                                               const std::string& reservation_id) {
  AppendContext context{reservation_id, "expiry-" + reservation_id};
  return mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    auto it = h.reservations.find(reservation_id);
    if (it == h.reservations.end() || it->second.status != ReservationStatus::kPending ||
        it->second.expires_at > now()) {
      return Decision{};
    }
    return Decision{{NewEvent{"SlotReleased",
                              {{"reservation_id", reservation_id}, {"reason", "expired"}}}}};
  });
}

HackathonService::Outcome HackathonService::verify_ended(const AppendContext& context,
                                                         const Principal& actor,
                                                         const std::string& hackathon_id,
                                                         const std::string& award_id) {
  return mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    if (!can_manage(actor, h)) return make_error(ErrorCode::kForbidden, "not the organizer");
    if (h.state == LifecycleState::kWinnerDeclared) {
      return make_error(ErrorCode::kAlreadyDeclared, hackathon_id);
    }
    if (h.state != LifecycleState::kEnded) {
      return make_error(ErrorCode::kNotEnded, std::string(to_string(h.state)));
    }
    if (!award_id.empty() && !h.find_award(award_id)) {
      return make_error(ErrorCode::kUnknownAward, award_id);
    }
    Decision verified;
    verified.reply_type = "HackathonEndedVerified";
    verified.result = Json{{"state", to_string(h.state)}};
    return verified;
  });
}

HackathonService::Outcome HackathonService::record_winner(const AppendContext& context,
                                                          const std::string& hackathon_id,
                                                          const std::string& team_id,
                                                          const std::string& award_id,
                                                          const std::string& saga_id,
                                                          const std::string& token) {
  if (!chassis::verify_saga_token(options_.saga_secret, saga_id, token)) {
    return make_error(ErrorCode::kInvalidSagaToken, "record_winner is saga-only");
  }
  return mutate(hackathon_id, context, [&](const Hackathon& h) -> Result<Decision> {
    if (h.state == LifecycleState::kWinnerDeclared) {
      return make_error(ErrorCode::kAlreadyDeclared, hackathon_id);
    }
    if (h.state != LifecycleState::kEnded) {
      return make_error(ErrorCode::kNotEnded, std::string(to_string(h.state)));
    }
    if (!h.find_award(award_id)) return make_error(ErrorCode::kUnknownAward, award_id);
    return Decision{{NewEvent{"WinnerDeclared",
                              {{"team_id", team_id}, {"award_id", award_id}, {"saga_id", saga_id}}}}};
  });
}

HackathonService::Outcome HackathonService::execute(const chassis::Command& command) {
  const Json& body = command.body;
  const std::string& id = command.target;
  const auto& type = command.command_type;
  const AppendContext context = command.context();
  auto text = [&](const char* key) { return opt_string(body, key).value_or(""); };
  auto actor = [&]() -> Result<Principal> {
    if (!command.actor) return make_error(ErrorCode::kForbidden, "no actor");
    return *command.actor;
  };

  if (type == "ReserveRegistrationSlot") {
    return reserve_registration_slot(context, id, command.correlation_id);
  }
  if (type == "ReleaseRegistrationSlot") {
    return release_registration_slot(context, id, text("reservation_id"));
  }
  if (type == "RecordWinner") {
    return record_winner(context, id, text("team_id"), text("award_id"), command.correlation_id,
                         text("saga_token"));
  }

  auto principal = actor();
  if (!principal.ok()) return principal.error();
  if (type == "CreateHackathon") {
    CreateHackathon input{text("title"), text("description"),
                          Schedule{opt_int<chassis::Millis>(body, "start").value_or(0),
                                   opt_int<chassis::Millis>(body, "end").value_or(0)},
                          opt_int<int>(body, "capacity"), opt_int<int>(body, "team_min"),
                          opt_int<int>(body, "team_max")};
    return create_hackathon(context, *principal, id, input);
  }
  if (type == "EditHackathon") {
    HackathonPatch patch{opt_string(body, "title"),         opt_string(body, "description"),
                         opt_int<chassis::Millis>(body, "start"),    opt_int<chassis::Millis>(body, "end"),
                         opt_int<int>(body, "capacity"),    opt_int<int>(body, "team_min"),
                         opt_int<int>(body, "team_max")};
    return edit_hackathon(context, *principal, id, patch);
  }
  if (type == "RegisterSponsor") {
    return add_sponsor(context, *principal, id,
                       Sponsor{text("sponsor_id"), text("name"), text("tier"), text("logo")});
  }
  if (type == "RegisterAward") {
    return add_award(context, *principal, id,
                     Award{text("award_id"), text("title"), text("description"),
                           opt_string(body, "sponsor_id")});
  }
  if (type == "TransitionHackathon") {
    auto action = action_from_string(text("action"));
    if (!action) return make_error(ErrorCode::kInvalidInput, "unknown action");
    return transition(context, *principal, id, *action);
  }
  if (type == "VerifyHackathonEnded") {
    return verify_ended(context, *principal, id, text("award_id"));
  }
  return make_error(ErrorCode::kInvalidInput, "unknown command " + type);
}

}  // namespace hacknizer::hackathon
