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

#include "hacknizer/team/team.hpp"

#include <algorithm>
#include <cctype>

namespace hacknizer::team {

using chassis::EventEnvelope;

std::string participant_id_for(std::string_view hackathon_id, std::string_view user_id) {
  return "pt-" + std::string(hackathon_id) + "-" + std::string(user_id);
}

std::string team_name_stream_id(std::string_view hackathon_id, std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return "teamname-" + std::string(hackathon_id) + "-" + key;
}

bool Team::has_member(std::string_view participant_id) const {
  return std::any_of(members.begin(), members.end(),
                     [&](const Member& m) { return m.participant_id == participant_id; });
}

chassis::AggregateDefinition<Participant> participant_definition() {
  return {std::string(kContext), Participant{}, [](Participant p, const EventEnvelope& e) {
            const Json& body = e.payload;
            if (e.event_type == "ParticipantRegistered") {
              p.registered = true;
              p.participant_id = body.value("participant_id", e.stream_id);
              p.hackathon_id = body.value("hackathon_id", "");
              p.user_id = body.value("user_id", "");
              p.reservation_id = body.value("reservation_id", "");
              p.correlation_id = e.correlation_id;
            } else if (e.event_type == "ParticipantAssigned") {
              p.team_id = body.value("team_id", "");
            } else if (e.event_type == "ParticipantUnassigned") {
              p.team_id.reset();
            } else if (e.event_type == "ParticipantRevoked") {
              p.registered = false;
              p.team_id.reset();
            }
            return p;
          }};
}

chassis::AggregateDefinition<Team> team_definition() {
  return {std::string(kContext), Team{}, [](Team t, const EventEnvelope& e) {
            const Json& body = e.payload;
            if (e.event_type == "TeamCreated") {
              t.created = true;
              t.team_id = body.value("team_id", e.stream_id);
              t.hackathon_id = body.value("hackathon_id", "");
              t.name = body.value("name", "");
            } else if (e.event_type == "TeamMemberJoined") {
              std::string pid = body.value("participant_id", "");
              if (!t.has_member(pid)) t.members.push_back({pid, body.value("user_id", "")});
            } else if (e.event_type == "TeamMemberLeft") {
              std::string pid = body.value("participant_id", "");
              std::erase_if(t.members, [&](const Member& m) { return m.participant_id == pid; });
            } else if (e.event_type == "TeamDisbanded") {
              t.disbanded = true;
            } else if (e.event_type == "ProjectSubmitted") {
              t.project = Project{body.value("title", ""), body.value("description", ""),
                                  body.value("repository", ""),
                                  body.value<chassis::Millis>("submitted_at", 0)};
              ++t.submissions;
            }
            return t;
          }};
}

chassis::AggregateDefinition<NameClaim> name_claim_definition() {
  return {std::string(kContext), NameClaim{}, [](NameClaim c, const EventEnvelope& e) {
            if (e.event_type == "TeamNameReserved") {
              c.team_id = e.payload.value("team_id", "");
            } else if (e.event_type == "TeamNameReleased") {
              c.team_id.reset();
            }
            return c;
          }};
}

Json to_json(const Team& team) {
  Json members = Json::array();
  for (const auto& m : team.members) {
    members.push_back({{"participant_id", m.participant_id}, {"user_id", m.user_id}});
  }
  Json out{{"team_id", team.team_id},     {"hackathon_id", team.hackathon_id},
           {"name", team.name},           {"members", members},
           {"disbanded", team.disbanded}, {"submissions", team.submissions}};
  if (team.project) {
    out["project"] = {{"title", team.project->title},
                      {"description", team.project->description},
                      {"repository", team.project->repository},
                      {"submitted_at", team.project->submitted_at}};
  } else {
    out["project"] = nullptr;
  }
  return out;
}

void HackathonMirror::apply(const EventEnvelope& e) {
  const Json& body = e.payload;
  if (e.event_type == "HackathonCreated") {
    HackathonInfo& info = hackathons_[e.stream_id];
    info.organizer_id = body.value("organizer_id", "");
    info.team_min = body.value("team_min", info.team_min);
    info.team_max = body.value("team_max", info.team_max);
    return;
  }
  auto it = hackathons_.find(e.stream_id);
  if (it == hackathons_.end()) return;
  HackathonInfo& info = it->second;
  if (e.event_type == "HackathonEdited") {
    info.team_min = body.value("team_min", info.team_min);
    info.team_max = body.value("team_max", info.team_max);
  } else if (e.event_type == "RegistrationOpened") {
    info.state = "RegistrationOpen";
  } else if (e.event_type == "HackathonStarted") {
    info.state = "InProgress";
  } else if (e.event_type == "HackathonEnded") {
    info.state = "Ended";
  } else if (e.event_type == "WinnerDeclared") {
    info.state = "WinnerDeclared";
  }
}

const HackathonInfo* HackathonMirror::find(const std::string& hackathon_id) const {
  auto it = hackathons_.find(hackathon_id);
  return it == hackathons_.end() ? nullptr : &it->second;
}

}  // namespace hacknizer::team
