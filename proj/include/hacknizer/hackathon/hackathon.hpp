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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hacknizer/chassis/aggregate.hpp"
#include "hacknizer/chassis/clock.hpp"

namespace hacknizer::hackathon {

inline constexpr std::string_view kContext = "hackathon";

enum class LifecycleState { kDraft, kRegistrationOpen, kInProgress, kEnded, kWinnerDeclared };
enum class LifecycleAction { kOpenRegistration, kStart, kEnd };

inline constexpr LifecycleState kAllStates[] = {
    LifecycleState::kDraft, LifecycleState::kRegistrationOpen, LifecycleState::kInProgress,
    LifecycleState::kEnded, LifecycleState::kWinnerDeclared};
inline constexpr LifecycleAction kAllActions[] = {
    LifecycleAction::kOpenRegistration, LifecycleAction::kStart, LifecycleAction::kEnd};

std::string_view to_string(LifecycleState state);
std::optional<LifecycleState> state_from_string(std::string_view name);
std::string_view to_string(LifecycleAction action);
std::optional<LifecycleAction> action_from_string(std::string_view name);

// The lifecycle table. Winner declaration (Ended -> WinnerDeclared) is not an
// action; only the winner saga reaches it through record_winner.
std::optional<LifecycleState> next_state(LifecycleState from, LifecycleAction action);
// Event type recorded for a legal action.
std::string_view lifecycle_event(LifecycleAction action);

struct Schedule {
  chassis::Millis start = 0;
  chassis::Millis end = 0;
  bool operator==(const Schedule&) const = default;
};

struct Sponsor {
  std::string sponsor_id;
  std::string name;
  std::string tier;
  std::string logo;
  bool operator==(const Sponsor&) const = default;
};

struct Award {
  std::string award_id;
  std::string title;
  std::string description;
  std::optional<std::string> sponsor_id;
  bool operator==(const Award&) const = default;
};

struct Winner {
  std::string team_id;
  std::string award_id;
  bool operator==(const Winner&) const = default;
};

enum class ReservationStatus { kPending, kConsumed, kReleased };

struct Reservation {
  std::string reservation_id;
  std::string correlation_id;
  ReservationStatus status = ReservationStatus::kPending;
  chassis::Millis expires_at = 0;
  std::string participant_id;
  // A participant was confirmed on this reservation after it had been
  // released; the team side was told to undo the confirmation.
  bool revoked = false;
  bool operator==(const Reservation&) const = default;
};

struct Hackathon {
  bool created = false;
  std::string hackathon_id;
  std::string organizer_id;
  std::string title;
  std::string description;
  Schedule schedule;
  LifecycleState state = LifecycleState::kDraft;
  int capacity = 0;
  int slots_used = 0;
  int team_min = 0;
  int team_max = 0;
  std::vector<Sponsor> sponsors;
  std::vector<Award> awards;
  std::optional<Winner> winner;
  std::map<std::string, Reservation> reservations;

  const Sponsor* find_sponsor(std::string_view id) const;
  const Award* find_award(std::string_view id) const;
  const Reservation* find_by_correlation(std::string_view correlation_id) const;
  int pending_reservations() const;
  int consumed_reservations() const;

  bool operator==(const Hackathon&) const = default;
};

chassis::AggregateDefinition<Hackathon> hackathon_definition();

// Folds like hackathon_definition but fails on the first envelope that breaks
// an aggregate invariant (illegal transition, capacity overrun, winner outside
// WinnerDeclared, ...).
Result<Hackathon> validating_fold(std::span<const chassis::EventEnvelope> envelopes);

Json to_json(const Hackathon& hackathon);

}  // namespace hacknizer::hackathon
