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

#include "hacknizer/hackathon/hackathon.hpp"

namespace hacknizer::hackathon {

using chassis::EventEnvelope;

std::string_view to_string(LifecycleState state) {
  switch (state) {
    case LifecycleState::kDraft:
      return "Draft";
    case LifecycleState::kRegistrationOpen:
      return "RegistrationOpen";
    case LifecycleState::kInProgress:
      return "InProgress";
    case LifecycleState::kEnded:
      return "Ended";
    case LifecycleState::kWinnerDeclared:
      return "WinnerDeclared";
  }
  return "Unknown";
}

std::optional<LifecycleState> state_from_string(std::string_view name) {
  for (auto state : kAllStates) {
    if (to_string(state) == name) return state;
  }
  return std::nullopt;
}

std::string_view to_string(LifecycleAction action) {
  switch (action) {
    case LifecycleAction::kOpenRegistration:
      return "open_registration";
    case LifecycleAction::kStart:
      return "start";
    case LifecycleAction::kEnd:
      return "end";
  }
  return "unknown";
}

std::optional<LifecycleAction> action_from_string(std::string_view name) {
  for (auto action : kAllActions) {
    if (to_string(action) == name) return action;
  }
  return std::nullopt;
}

std::optional<LifecycleState> next_state(LifecycleState from, LifecycleAction action) {
  switch (action) {
    case LifecycleAction::kOpenRegistration:
      if (from == LifecycleState::kDraft) return LifecycleState::kRegistrationOpen;
      break;
    case LifecycleAction::kStart:
      if (from == LifecycleState::kRegistrationOpen) return LifecycleState::kInProgress;
      break;
    case LifecycleAction::kEnd:
      if (from == LifecycleState::kInProgress) return LifecycleState::kEnded;
      break;
  }
  return std::nullopt;
}

std::string_view lifecycle_event(LifecycleAction action) {
  switch (action) {
    case LifecycleAction::kOpenRegistration:
      return "RegistrationOpened";
    case LifecycleAction::kStart:
      return "HackathonStarted";
    case LifecycleAction::kEnd:
      return "HackathonEnded";
  }
  return "";
}

const Sponsor* Hackathon::find_sponsor(std::string_view id) const {
  for (const auto& s : sponsors) {
    if (s.sponsor_id == id) return &s;
  }
  return nullptr;
}

const Award* Hackathon::find_award(std::string_view id) const {
  for (const auto& a : awards) {
    if (a.award_id == id) return &a;
  }
  return nullptr;
}

const Reservation* Hackathon::find_by_correlation(std::string_view correlation_id) const {
  for (const auto& [id, r] : reservations) {
    if (r.correlation_id == correlation_id) return &r;
  }
  return nullptr;
}

int Hackathon::pending_reservations() const {
  int n = 0;
  for (const auto& [id, r] : reservations) n += r.status == ReservationStatus::kPending;
  return n;
}

int Hackathon::consumed_reservations() const {
  int n = 0;
  for (const auto& [id, r] : reservations) n += r.status == ReservationStatus::kConsumed;
  return n;
}

namespace {

// Shared by the plain and validating folds. Returns a message describing a
// violated invariant, or empty.
std::string apply_event(Hackathon& h, const EventEnvelope& e) {
  const Json& p = e.payload;
  const std::string& type = e.event_type;
  auto lifecycle = [&](LifecycleAction action) -> std::string {
    auto next = next_state(h.state, action);
    if (!next) {
      return "illegal " + std::string(to_string(action)) + " from " +
             std::string(to_string(h.state));
    }
    h.state = *next;
    return {};
  };

  if (type == "HackathonCreated") {
    if (h.created) return "created twice";
    h.created = true;
    h.hackathon_id = p.value("hackathon_id", e.stream_id);
    h.organizer_id = p.value("organizer_id", "");
    h.title = p.value("title", "");
    h.description = p.value("description", "");
    h.schedule = {p.value("start", chassis::Millis{0}), p.value("end", chassis::Millis{0})};
    h.capacity = p.value("capacity", 0);
    h.team_min = p.value("team_min", 0);
    h.team_max = p.value("team_max", 0);
    h.state = LifecycleState::kDraft;
    return {};
  }
  if (!h.created) return type + " before HackathonCreated";

  if (type == "HackathonEdited") {
    if (h.state != LifecycleState::kDraft && h.state != LifecycleState::kRegistrationOpen) {
      return "edit while " + std::string(to_string(h.state));
    }
    if (p.contains("title")) h.title = p["title"].get<std::string>();
    if (p.contains("description")) h.description = p["description"].get<std::string>();
    if (p.contains("start")) h.schedule.start = p["start"].get<chassis::Millis>();
    if (p.contains("end")) h.schedule.end = p["end"].get<chassis::Millis>();
    if (p.contains("capacity")) h.capacity = p["capacity"].get<int>();
    if (p.contains("team_min")) h.team_min = p["team_min"].get<int>();
    if (p.contains("team_max")) h.team_max = p["team_max"].get<int>();
  } else if (type == "SponsorRegistered") {
    h.sponsors.push_back(Sponsor{p.value("sponsor_id", ""), p.value("name", ""),
                                 p.value("tier", ""), p.value("logo", "")});
  } else if (type == "AwardRegistered") {
    Award award{p.value("award_id", ""), p.value("title", ""), p.value("description", ""),
                std::nullopt};
    if (p.contains("sponsor_id") && p["sponsor_id"].is_string()) {
      award.sponsor_id = p["sponsor_id"].get<std::string>();
    }
    h.awards.push_back(std::move(award));
  } else if (type == "RegistrationOpened") {
    if (auto error = lifecycle(LifecycleAction::kOpenRegistration); !error.empty()) return error;
  } else if (type == "HackathonStarted") {
    if (auto error = lifecycle(LifecycleAction::kStart); !error.empty()) return error;
  } else if (type == "HackathonEnded") {
    if (auto error = lifecycle(LifecycleAction::kEnd); !error.empty()) return error;
  } else if (type == "SlotReserved") {
    Reservation r{p.value("reservation_id", ""), p.value("correlation_id", ""),
                  ReservationStatus::kPending, p.value("expires_at", chassis::Millis{0}), ""};
    h.reservations[r.reservation_id] = r;
    ++h.slots_used;
  } else if (type == "SlotReleased") {
    auto& r = h.reservations[p.value("reservation_id", "")];
    if (r.status == ReservationStatus::kReleased) return "released twice";
    r.status = ReservationStatus::kReleased;
    --h.slots_used;
  } else if (type == "SlotConsumed") {
    auto& r = h.reservations[p.value("reservation_id", "")];
    if (r.status == ReservationStatus::kConsumed) return "consumed twice";
    if (r.status == ReservationStatus::kReleased) return "consumed after release";
    r.status = ReservationStatus::kConsumed;
    r.participant_id = p.value("participant_id", "");
  } else if (type == "RegistrationRevoked") {
    auto& r = h.reservations[p.value("reservation_id", "")];
    if (r.status != ReservationStatus::kReleased) return "revoked while not released";
    if (r.revoked) return "revoked twice";
    r.revoked = true;
    r.participant_id = p.value("participant_id", "");
  } else if (type == "WinnerDeclared") {
    if (h.state != LifecycleState::kEnded) {
      return "winner declared while " + std::string(to_string(h.state));
    }
    h.state = LifecycleState::kWinnerDeclared;
    h.winner = Winner{p.value("team_id", ""), p.value("award_id", "")};
  }

  if (h.slots_used < 0 || h.slots_used > h.capacity) return "slots_used outside [0, capacity]";
  if (h.team_min < 1 || h.team_min > h.team_max) return "team size bounds out of order";
  if (h.winner.has_value() != (h.state == LifecycleState::kWinnerDeclared)) {
    return "winner set outside WinnerDeclared";
  }
  return {};
}

}  // namespace

chassis::AggregateDefinition<Hackathon> hackathon_definition() {
  return {std::string(kContext), Hackathon{}, [](Hackathon state, const EventEnvelope& e) {
            (void)apply_event(state, e);
            return state;
          }};
}

Result<Hackathon> validating_fold(std::span<const EventEnvelope> envelopes) {
  Hackathon state;
  for (const auto& e : envelopes) {
    if (e.stream_type != kContext) return make_error(ErrorCode::kTypeMismatch, e.stream_type);
    auto violation = apply_event(state, e);
    if (!violation.empty()) {
      return make_error(ErrorCode::kInvalidTransition,
                        e.stream_id + "#" + std::to_string(e.sequence) + ": " + violation);
    }
  }
  return state;
}

Json to_json(const Hackathon& h) {
  Json sponsors = Json::array();
  for (const auto& s : h.sponsors) {
    sponsors.push_back({{"sponsor_id", s.sponsor_id}, {"name", s.name}, {"tier", s.tier},
                        {"logo", s.logo}});
  }
  Json awards = Json::array();
  for (const auto& a : h.awards) {
    Json award{{"award_id", a.award_id}, {"title", a.title}, {"description", a.description}};
    award["sponsor_id"] = a.sponsor_id ? Json(*a.sponsor_id) : Json(nullptr);
    awards.push_back(std::move(award));
  }
  Json reservations = Json::object();
  for (const auto& [id, r] : h.reservations) {
    reservations[id] = {{"correlation_id", r.correlation_id},
                        {"status", static_cast<int>(r.status)},
                        {"expires_at", r.expires_at},
                        {"participant_id", r.participant_id}};
  }
  Json out{{"hackathon_id", h.hackathon_id},
           {"organizer_id", h.organizer_id},
           {"title", h.title},
           {"description", h.description},
           {"start", h.schedule.start},
           {"end", h.schedule.end},
           {"state", to_string(h.state)},
           {"capacity", h.capacity},
           {"slots_used", h.slots_used},
           {"team_min", h.team_min},
           {"team_max", h.team_max},
           {"sponsors", sponsors},
           {"awards", awards},
           {"reservations", reservations}};
  out["winner"] = h.winner ? Json{{"team_id", h.winner->team_id}, {"award_id", h.winner->award_id}}
                           : Json(nullptr);
  return out;
}

}  // namespace hacknizer::hackathon
