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

#include "hacknizer/team/team_service.hpp"

#include "hacknizer/chassis/auth.hpp"

namespace hacknizer::team {

using chassis::AppendContext;
using chassis::CommandOutcome;
using chassis::EventEnvelope;
using chassis::NewEvent;
using chassis::Principal;

namespace {

constexpr int kMaxConflictRetries = 16;

CommandOutcome appended(std::vector<EventEnvelope> events) {
  return CommandOutcome{std::move(events), {}, {}, Json::object()};
}

}  // namespace

TeamService::TeamService(chassis::ServiceEnv env, TeamServiceOptions options)
    : CommandService(env), options_(std::move(options)),
      participants_(*env.store, participant_definition()),
      teams_(*env.store, team_definition()),
      names_(*env.store, name_claim_definition()) {
  env_.store->attach_publisher(env_.bus);
}

std::vector<std::string> TeamService::subscriptions() const {
  return {chassis::commands_topic(kContext), chassis::events_topic("hackathon")};
}

chassis::HandlerOutcome TeamService::on_message(const std::string& topic,
                                                const EventEnvelope& envelope) {
  if (topic == chassis::commands_topic(kContext)) return handle_command(envelope);
  mirror_.apply(envelope);
  if (envelope.event_type == "RegistrationRevoked") {
    AppendContext context{envelope.correlation_id, envelope.event_id};
    auto revoked = revoke_participant(context, envelope.payload.value("participant_id", ""),
                                      envelope.payload.value("reservation_id", ""));
    if (!revoked.ok() && chassis::is_transient(revoked.code())) {
      return chassis::HandlerOutcome::kRetry;
    }
  }
  return chassis::HandlerOutcome::kAck;
}

Status TeamService::teams_open(const std::string& hackathon_id) const {
  const HackathonInfo* info = mirror_.find(hackathon_id);
  if (info == nullptr) return make_error(ErrorCode::kUnknownHackathon, hackathon_id);
  if (info->state != "RegistrationOpen" && info->state != "InProgress") {
    return make_error(ErrorCode::kTeamsClosed, info->state);
  }
  return ok_status();
}

Result<chassis::Loaded<Participant>> TeamService::registered_participant(
    const std::string& hackathon_id, const std::string& user_id) {
  auto loaded = participants_.load(participant_id_for(hackathon_id, user_id));
  if (!loaded.ok()) return loaded.error();
  if (!loaded->state.registered) {
    return make_error(ErrorCode::kNotParticipant, user_id + " in " + hackathon_id);
  }
  return loaded;
}

Status TeamService::assign(const AppendContext& context, const std::string& participant_id,
                           const std::optional<std::string>& team_id) {
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto p = participants_.load(participant_id);
    if (!p.ok()) return p.error();
    if (team_id && p->state.team_id) {
      return make_error(ErrorCode::kAlreadyInTeam, *p->state.team_id);
    }
    if (!team_id && !p->state.team_id) return ok_status();
    NewEvent event = team_id ? NewEvent{"ParticipantAssigned", {{"team_id", *team_id}}}
                             : NewEvent{"ParticipantUnassigned", {{"team_id", *p->state.team_id}}};
    auto done = append(participant_id, p->version, {std::move(event)}, context);
    if (done.ok()) return ok_status();
    if (done.code() != ErrorCode::kVersionConflict) return done.error();
  }
  return make_error(ErrorCode::kVersionConflict, participant_id);
}

TeamService::Outcome TeamService::confirm_participant(const AppendContext& context,
                                                      const std::string& hackathon_id,
                                                      const std::string& user_id,
                                                      const std::string& reservation_id) {
  if (hackathon_id.empty() || user_id.empty() || reservation_id.empty()) {
    return make_error(ErrorCode::kInvalidInput, "hackathon_id, user_id, reservation_id required");
  }
  const std::string participant_id = participant_id_for(hackathon_id, user_id);
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto existing = participants_.load(participant_id);
    if (!existing.ok()) return existing.error();
    const Participant& p = existing->state;
    if (p.registered) {
      if (p.correlation_id != context.correlation_id) {
        return make_error(ErrorCode::kAlreadyRegistered, user_id + " in " + hackathon_id);
      }
      CommandOutcome replay;
      for (const auto& e : env_.store->load_stream(participant_id, 0)) {
        if (e.event_type == "ParticipantRegistered" && e.correlation_id == context.correlation_id) {
          replay.replayed = {e};
        }
      }
      return replay;
    }
    // A revoked confirmation stays revoked; a later registration needs a
    // fresh reservation.
    if (!p.reservation_id.empty() && p.reservation_id == reservation_id) {
      return make_error(ErrorCode::kUnknownReservation, reservation_id + " was revoked");
    }
    auto done = append(participant_id, existing->version,
                       {NewEvent{"ParticipantRegistered", {{"participant_id", participant_id},
                                                           {"hackathon_id", hackathon_id},
                                                           {"user_id", user_id},
                                                           {"reservation_id", reservation_id}}}},
                       context);
    if (done.ok()) return appended(std::move(done).value());
    if (done.code() != ErrorCode::kVersionConflict) return done.error();
  }
  return make_error(ErrorCode::kVersionConflict, participant_id);
}

Status TeamService::revoke_participant(const AppendContext& context,
                                       const std::string& participant_id,
                                       const std::string& reservation_id) {
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto p = participants_.load(participant_id);
    if (!p.ok()) return p.error();
    if (!p->state.registered || p->state.reservation_id != reservation_id) return ok_status();
    if (p->state.team_id) {
      auto removed = remove_member(context, *p->state.team_id, participant_id, p->state.user_id);
      if (!removed.ok() && removed.code() != ErrorCode::kNotTeamMember) return removed.error();
      continue;  // remove_member unassigned the participant; reload
    }
    auto done = append(participant_id, p->version,
                       {NewEvent{"ParticipantRevoked", {{"reservation_id", reservation_id}}}},
                       context);
    if (done.ok()) return ok_status();
    if (done.code() != ErrorCode::kVersionConflict) return done.error();
  }
  return make_error(ErrorCode::kVersionConflict, participant_id);
}

TeamService::Outcome TeamService::create_team(const AppendContext& context,
                                              const Principal& actor, const std::string& team_id,
                                              const std::string& hackathon_id,
                                              const std::string& name) {
  if (team_id.empty() || name.empty()) {
    return make_error(ErrorCode::kInvalidInput, "team name is required");
  }
  if (auto open = teams_open(hackathon_id); !open.ok()) return open.error();
  auto participant = registered_participant(hackathon_id, actor.user_id);
  if (!participant.ok()) return participant.error();
  if (participant->state.team_id) {
    return make_error(ErrorCode::kAlreadyInTeam, *participant->state.team_id);
  }
  if (teams_.load(team_id)->version > 0) return make_error(ErrorCode::kDuplicateId, team_id);

  const std::string name_stream = team_name_stream_id(hackathon_id, name);
  auto claim = names_.load(name_stream);
  if (!claim.ok()) return claim.error();
  if (claim->state.team_id) return make_error(ErrorCode::kDuplicateTeamName, name);
  auto reserved = append(name_stream, claim->version,
                         {NewEvent{"TeamNameReserved", {{"team_id", team_id}, {"name", name}}}},
                         context);
  if (!reserved.ok()) {
    if (reserved.code() == ErrorCode::kVersionConflict) {
      return make_error(ErrorCode::kDuplicateTeamName, name);
    }
    return reserved.error();
  }
  auto release_name = [&] {
    auto now_claim = names_.load(name_stream);
    (void)append(name_stream, now_claim->version,
                 {NewEvent{"TeamNameReleased", {{"team_id", team_id}}}}, context);
  };

  const std::string& participant_id = participant->state.participant_id;
  if (auto assigned = assign(context, participant_id, team_id); !assigned.ok()) {
    release_name();
    return assigned.error();
  }
  auto created = append(team_id, 0,
                        {NewEvent{"TeamCreated", {{"team_id", team_id},
                                                  {"hackathon_id", hackathon_id},
                                                  {"name", name}}},
                         NewEvent{"TeamMemberJoined", {{"participant_id", participant_id},
                                                       {"user_id", actor.user_id}}}},
                        context);
  if (!created.ok()) {
    (void)assign(context, participant_id, std::nullopt);
    release_name();
    if (created.code() == ErrorCode::kVersionConflict) {
      return make_error(ErrorCode::kDuplicateId, team_id);
    }
    return created.error();
  }
  return appended(std::move(created).value());
}

TeamService::Outcome TeamService::join_team(const AppendContext& context, const Principal& actor,
                                            const std::string& team_id) {
  auto team = teams_.load(team_id);
  if (!team.ok()) return team.error();
  if (!team->state.created) return make_error(ErrorCode::kUnknownTeam, team_id);
  const std::string hackathon_id = team->state.hackathon_id;
  auto participant = registered_participant(hackathon_id, actor.user_id);
  if (!participant.ok()) return participant.error();
  const std::string participant_id = participant->state.participant_id;

  // Validation shared by the first check and every retry after a conflict.
  auto joinable = [&](const Team& t) -> Status {
    if (t.disbanded) return make_error(ErrorCode::kTeamDisbanded, team_id);
    if (auto open = teams_open(hackathon_id); !open.ok()) return open;
    const HackathonInfo* info = mirror_.find(hackathon_id);
    if (static_cast<int>(t.members.size()) >= info->team_max) {
      return make_error(ErrorCode::kTeamFull, std::to_string(t.members.size()) + " members");
    }
    return ok_status();
  };
  if (participant->state.team_id) {
    return make_error(ErrorCode::kAlreadyInTeam, *participant->state.team_id);
  }
  if (auto ok = joinable(team->state); !ok.ok()) return ok.error();

  // The participant stream is the lock for the one-team rule: claim it first,
  // then take a seat, giving the claim back if the seat is gone.
  if (auto assigned = assign(context, participant_id, team_id); !assigned.ok()) {
    return assigned.error();
  }
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto current = teams_.load(team_id);
    if (!current.ok()) return current.error();
    if (auto ok = joinable(current->state); !ok.ok()) {
      (void)assign(context, participant_id, std::nullopt);
      return ok.error();
    }
    auto joined = append(team_id, current->version,
                         {NewEvent{"TeamMemberJoined", {{"participant_id", participant_id},
                                                        {"user_id", actor.user_id}}}},
                         context);
    if (joined.ok()) return appended(std::move(joined).value());
    if (joined.code() != ErrorCode::kVersionConflict) {
      (void)assign(context, participant_id, std::nullopt);
      return joined.error();
    }
  }
  (void)assign(context, participant_id, std::nullopt);
  return make_error(ErrorCode::kVersionConflict, team_id);
}

TeamService::Outcome TeamService::leave_team(const AppendContext& context, const Principal& actor,
                                             const std::string& team_id,
                                             const std::string& user_id) {
  if (user_id != actor.user_id) return make_error(ErrorCode::kForbidden, "can only leave yourself");
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto team = teams_.load(team_id);
    if (!team.ok()) return team.error();
    if (!team->state.created) return make_error(ErrorCode::kUnknownTeam, team_id);
    if (team->state.disbanded) return make_error(ErrorCode::kTeamDisbanded, team_id);
    if (auto open = teams_open(team->state.hackathon_id); !open.ok()) return open.error();
    const std::string participant_id = participant_id_for(team->state.hackathon_id, user_id);
    auto outcome = remove_member(context, team_id, participant_id, user_id);
    if (!outcome.ok() && outcome.code() == ErrorCode::kVersionConflict) continue;
    return outcome;
  }
  return make_error(ErrorCode::kVersionConflict, team_id);
}

TeamService::Outcome TeamService::remove_member(const AppendContext& context,
                                                const std::string& team_id,
                                                const std::string& participant_id,
                                                const std::string& user_id) {
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto team = teams_.load(team_id);
    if (!team.ok()) return team.error();
    if (!team->state.has_member(participant_id)) {
      // Still pointed at this team (a crash between the two appends): clear it.
      auto p = participants_.load(participant_id);
      if (p.ok() && p->state.team_id == team_id) {
        if (auto cleared = assign(context, participant_id, std::nullopt); !cleared.ok()) {
          return cleared.error();
        }
      }
      return make_error(ErrorCode::kNotTeamMember, user_id);
    }
    std::vector<NewEvent> events{
        NewEvent{"TeamMemberLeft", {{"participant_id", participant_id}, {"user_id", user_id}}}};
    const bool last = team->state.members.size() == 1;
    if (last) events.push_back(NewEvent{"TeamDisbanded", Json::object()});
    auto left = append(team_id, team->version, std::move(events), context);
    if (!left.ok()) {
      if (left.code() == ErrorCode::kVersionConflict) continue;
      return left.error();
    }
    CommandOutcome outcome = appended(std::move(left).value());
    if (auto cleared = assign(context, participant_id, std::nullopt); !cleared.ok()) {
      return cleared.error();
    }
    if (last) {
      const std::string name_stream =
          team_name_stream_id(team->state.hackathon_id, team->state.name);
      auto claim = names_.load(name_stream);
      if (claim.ok() && claim->state.team_id == team_id) {
        (void)append(name_stream, claim->version,
                     {NewEvent{"TeamNameReleased", {{"team_id", team_id}}}}, context);
      }
    }
    return outcome;
  }
  return make_error(ErrorCode::kVersionConflict, team_id);
}

TeamService::Outcome TeamService::submit_project(const AppendContext& context,
                                                 const Principal& actor,
                                                 const std::string& team_id,
                                                 const ProjectInput& project) {
  if (project.title.empty()) return make_error(ErrorCode::kInvalidInput, "title is required");
  for (int attempt = 0; attempt < kMaxConflictRetries; ++attempt) {
    auto team = teams_.load(team_id);
    if (!team.ok()) return team.error();
    const Team& t = team->state;
    if (!t.created) return make_error(ErrorCode::kUnknownTeam, team_id);
    if (!t.has_member(participant_id_for(t.hackathon_id, actor.user_id))) {
      return make_error(ErrorCode::kNotTeamMember, actor.user_id);
    }
    const HackathonInfo* info = mirror_.find(t.hackathon_id);
    if (info == nullptr || info->state != "InProgress") {
      return make_error(ErrorCode::kSubmissionClosed, info ? info->state : "unknown hackathon");
    }
    if (static_cast<int>(t.members.size()) < info->team_min) {
      return make_error(ErrorCode::kTeamTooSmall, "need " + std::to_string(info->team_min));
    }
    auto submitted = append(team_id, team->version,
                            {NewEvent{"ProjectSubmitted", {{"title", project.title},
                                                           {"description", project.description},
                                                           {"repository", project.repository},
                                                           {"submitted_at", now()},
                                                           {"submitted_by", actor.user_id}}}},
                            context);
    if (submitted.ok()) return appended(std::move(submitted).value());
    if (submitted.code() != ErrorCode::kVersionConflict) return submitted.error();
  }
  return make_error(ErrorCode::kVersionConflict, team_id);
}

TeamService::Outcome TeamService::verify_submission(const AppendContext&,
                                                    const std::string& team_id,
                                                    const std::string& hackathon_id,
                                                    const std::string& saga_id,
                                                    const std::string& saga_token) {
  if (!chassis::verify_saga_token(options_.saga_secret, saga_id, saga_token)) {
    return make_error(ErrorCode::kInvalidSagaToken, "verify_submission is saga-only");
  }
  auto team = teams_.load(team_id);
  if (!team.ok()) return team.error();
  const Team& t = team->state;
  if (!t.created || (!hackathon_id.empty() && t.hackathon_id != hackathon_id)) {
    return make_error(ErrorCode::kUnknownTeam, team_id);
  }
  CommandOutcome outcome;
  outcome.result = Json{{"team_id", team_id}, {"team_name", t.name}};
  if (t.project) {
    outcome.reply_type = "SubmissionVerified";
    outcome.result["project_title"] = t.project->title;
  } else {
    outcome.reply_type = "NoSubmission";
  }
  return outcome;
}

TeamService::Outcome TeamService::execute(const chassis::Command& command) {
  const Json& body = command.body;
  const std::string& type = command.command_type;
  auto text = [&](const char* key) {
    return body.contains(key) && body[key].is_string() ? body[key].get<std::string>()
                                                       : std::string();
  };
  const AppendContext context = command.context();
  if (type == "ConfirmParticipant") {
    return confirm_participant(context, command.target, text("user_id"), text("reservation_id"));
  }
  if (type == "VerifySubmission") {
    return verify_submission(context, command.target, text("hackathon_id"),
                             command.correlation_id, text("saga_token"));
  }
  if (!command.actor) return make_error(ErrorCode::kForbidden, "no actor");
  const Principal& actor = *command.actor;
  if (type == "CreateTeam") {
    return create_team(context, actor, command.target, text("hackathon_id"), text("name"));
  }
  if (type == "JoinTeam") return join_team(context, actor, command.target);
  if (type == "LeaveTeam") return leave_team(context, actor, command.target, text("user_id"));
  if (type == "SubmitProject") {
    return submit_project(context, actor, command.target,
                          ProjectInput{text("title"), text("description"), text("repository")});
  }
  return make_error(ErrorCode::kInvalidInput, "unknown command " + type);
}

}  // namespace hacknizer::team
