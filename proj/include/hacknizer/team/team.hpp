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

namespace hacknizer::team {

inline constexpr std::string_view kContext = "team";

// Participant stream id; one per (hackathon, user), so appending at version 0
// is the uniqueness check.
std::string participant_id_for(std::string_view hackathon_id, std::string_view user_id);
std::string team_name_stream_id(std::string_view hackathon_id, std::string_view name);

struct Participant {
  bool registered = false;
  std::string participant_id;
  std::string hackathon_id;
  std::string user_id;
  std::string reservation_id;
  std::string correlation_id;
  std::optional<std::string> team_id;
  bool operator==(const Participant&) const = default;
};

struct Project {
  std::string title;
  std::string description;
  std::string repository;
  chassis::Millis submitted_at = 0;
  bool operator==(const Project&) const = default;
};

struct Member {
  std::string participant_id;
  std::string user_id;
  bool operator==(const Member&) const = default;
};

struct Team {
  bool created = false;
  std::string team_id;
  std::string hackathon_id;
  std::string name;
  std::vector<Member> members;
  bool disbanded = false;
  std::optional<Project> project;
  int submissions = 0;

  bool has_member(std::string_view participant_id) const;
  bool operator==(const Team&) const = default;
};

// Team-name reservation: free when empty or when the last event released it.
struct NameClaim {
  std::optional<std::string> team_id;
  bool operator==(const NameClaim&) const = default;
};

chassis::AggregateDefinition<Participant> participant_definition();
chassis::AggregateDefinition<Team> team_definition();
chassis::AggregateDefinition<NameClaim> name_claim_definition();

Json to_json(const Team& team);

// Read-only local view of hackathons, folded from hackathon.events.
struct HackathonInfo {
  std::string organizer_id;
  std::string state = "Draft";
  int team_min = 1;
  int team_max = 5;
};

class HackathonMirror {
 public:
  void apply(const chassis::EventEnvelope& envelope);
  const HackathonInfo* find(const std::string& hackathon_id) const;

 private:
  std::map<std::string, HackathonInfo> hackathons_;
};

}  // namespace hacknizer::team
