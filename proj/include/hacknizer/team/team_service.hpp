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

#include <string>

#include "hacknizer/chassis/service.hpp"
#include "hacknizer/team/team.hpp"

namespace hacknizer::team {

struct TeamServiceOptions {
  std::string saga_secret;
};

struct ProjectInput {
  std::string title;
  std::string description;
  std::string repository;
};

// Blue bounded context: participants, team composition, submissions.
class TeamService final : public chassis::CommandService {
 public:
  TeamService(chassis::ServiceEnv env, TeamServiceOptions options);

  std::string name() const override { return std::string(kContext); }
  std::vector<std::string> subscriptions() const override;
  chassis::HandlerOutcome on_message(const std::string& topic,
                                     const chassis::EventEnvelope& envelope) override;

  using Outcome = Result<chassis::CommandOutcome>;

  Outcome confirm_participant(const chassis::AppendContext& context,
                              const std::string& hackathon_id, const std::string& user_id,
                              const std::string& reservation_id);
  Outcome create_team(const chassis::AppendContext& context, const chassis::Principal& actor,
                      const std::string& team_id, const std::string& hackathon_id,
                      const std::string& name);
  Outcome join_team(const chassis::AppendContext& context, const chassis::Principal& actor,
                    const std::string& team_id);
  // `user_id` names the member leaving; only that user may ask.
  Outcome leave_team(const chassis::AppendContext& context, const chassis::Principal& actor,
                     const std::string& team_id, const std::string& user_id);
  Outcome submit_project(const chassis::AppendContext& context, const chassis::Principal& actor,
                         const std::string& team_id, const ProjectInput& project);
  Outcome verify_submission(const chassis::AppendContext& context, const std::string& team_id,
                            const std::string& hackathon_id, const std::string& saga_id,
                            const std::string& saga_token);
  // Undoes a confirmation the hackathon refused to back with a slot. Drops
  // the participant from its team first. No-op unless the participant is
  // registered on `reservation_id`.
  Status revoke_participant(const chassis::AppendContext& context,
                            const std::string& participant_id,
                            const std::string& reservation_id);

  Result<chassis::Loaded<Team>> load_team(const std::string& team_id) {
    return teams_.load(team_id);
  }
  Result<chassis::Loaded<Participant>> load_participant(const std::string& participant_id) {
    return participants_.load(participant_id);
  }
  Result<chassis::Loaded<NameClaim>> load_name_claim(const std::string& stream_id) {
    return names_.load(stream_id);
  }
  const HackathonMirror& mirror() const { return mirror_; }

 protected:
  Outcome execute(const chassis::Command& command) override;

 private:
  Status teams_open(const std::string& hackathon_id) const;
  Result<chassis::Loaded<Participant>> registered_participant(const std::string& hackathon_id,
                                                              const std::string& user_id);
  // Points the participant at `team_id` (or clears it). Fails with
  // AlreadyInTeam when assigning someone who already has a team.
  Status assign(const chassis::AppendContext& context, const std::string& participant_id,
                const std::optional<std::string>& team_id);
  // Removes a member, disbanding the team (and freeing its name) when it was
  // the last one.
  Outcome remove_member(const chassis::AppendContext& context, const std::string& team_id,
                        const std::string& participant_id, const std::string& user_id);

  TeamServiceOptions options_;
  chassis::Repository<Participant> participants_;
  chassis::Repository<Team> teams_;
  chassis::Repository<NameClaim> names_;
  HackathonMirror mirror_;
};

}  // namespace hacknizer::team
