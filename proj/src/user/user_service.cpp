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

#include "hacknizer/user/user_service.hpp"

#include <algorithm>
#include <cctype>

namespace hacknizer::user {

using chassis::AppendContext;
using chassis::CommandOutcome;
using chassis::EventEnvelope;
using chassis::NewEvent;
using chassis::Role;

namespace {

Json roles_json(const std::set<Role>& roles) {
  Json out = Json::array();
  for (Role role : roles) out.push_back(chassis::to_string(role));
  return out;
}

}  // namespace

chassis::AggregateDefinition<UserAccount> user_definition() {
  return {std::string(kContext), UserAccount{}, [](UserAccount state, const EventEnvelope& e) {
            const Json& p = e.payload;
            if (e.event_type == "UserRegistered") {
              state.user_id = p.value("user_id", e.stream_id);
              state.email = p.value("email", "");
              state.display_name = p.value("display_name", "");
              state.password_hash = p.value("password_hash", "");
              state.roles.clear();
              for (const auto& role : p.value("roles", Json::array())) {
                if (auto parsed = chassis::role_from_string(role.get<std::string>())) {
                  state.roles.insert(*parsed);
                }
              }
              state.active = true;
              state.registered = true;
            } else if (e.event_type == "RoleAssigned") {
              if (auto parsed = chassis::role_from_string(p.value("role", ""))) {
                state.roles.insert(*parsed);
              }
            } else if (e.event_type == "UserDeactivated") {
              state.active = false;
            }
            return state;
          }};
}

std::string normalize_email(std::string_view email) {
  std::size_t begin = 0;
  std::size_t end = email.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(email[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(email[end - 1]))) --end;
  std::string out(email.substr(begin, end - begin));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool valid_email(std::string_view normalized) {
  auto at = normalized.find('@');
  if (at == std::string_view::npos || at == 0 || at + 1 >= normalized.size()) return false;
  if (normalized.find('@', at + 1) != std::string_view::npos) return false;
  return std::none_of(normalized.begin(), normalized.end(), [](unsigned char c) {
    return std::isspace(c) || std::iscntrl(c);
  });
}

std::string email_stream_id(std::string_view normalized_email) {
  return "email-" + std::string(normalized_email);
}

UserService::UserService(chassis::ServiceEnv env, UserServiceOptions options)
    : CommandService(env), options_(std::move(options)), users_(*env.store, user_definition()) {
  env_.store->attach_publisher(env_.bus, &UserService::redact);
  // Hash compared against when the email is unknown, so both failure paths
  // cost the same.
  dummy_hash_ = chassis::hash_password("not-a-password", "hacknizer-dummy", options_.password_params)
                    .value();
}

std::vector<std::string> UserService::subscriptions() const {
  return {chassis::commands_topic(kContext)};
}

chassis::HandlerOutcome UserService::on_message(const std::string& topic,
                                                const EventEnvelope& envelope) {
  if (topic == chassis::commands_topic(kContext)) return handle_command(envelope);
  return chassis::HandlerOutcome::kAck;
}

void UserService::start() {
  if (options_.admin_email.empty()) return;
  std::string email = normalize_email(options_.admin_email);
  if (env_.store->head(email_stream_id(email)).current_version > 0) return;
  AppendContext context{"bootstrap", "bootstrap-admin"};
  auto created = register_user(context, env_.ids->next(), email, options_.admin_display_name,
                               options_.admin_password, {Role::kAdmin});
  (void)created;
}

EventEnvelope UserService::redact(EventEnvelope envelope) {
  envelope.payload.erase("password_hash");
  return envelope;
}

Result<CommandOutcome> UserService::register_user(const AppendContext& context,
                                                  const std::string& user_id,
                                                  std::string_view email,
                                                  std::string_view display_name,
                                                  std::string_view password,
                                                  std::set<Role> roles) {
  std::string normalized = normalize_email(email);
  if (!valid_email(normalized)) {
    return make_error(ErrorCode::kInvalidEmail, std::string(email));
  }
  if (password.size() < kMinPasswordLength) {
    return make_error(ErrorCode::kWeakPassword,
                      "at least " + std::to_string(kMinPasswordLength) + " characters");
  }
  if (user_id.empty()) return make_error(ErrorCode::kInvalidInput, "missing user_id");
  if (roles.empty()) roles.insert(Role::kParticipant);

  CommandOutcome outcome;
  const std::string email_stream = email_stream_id(normalized);
  auto reserved = append(email_stream, 0, {NewEvent{"EmailReserved", {{"user_id", user_id}}}},
                         context);
  if (!reserved.ok()) {
    if (reserved.code() != ErrorCode::kVersionConflict) return reserved.error();
    auto existing = env_.store->load_stream(email_stream);
    if (existing.empty() || existing.front().payload.value("user_id", "") != user_id) {
      return make_error(ErrorCode::kDuplicateEmail, normalized);
    }
  } else {
    outcome.events = std::move(reserved).value();
  }

  auto hash = chassis::hash_password(password, env_.ids->random_bytes(16),
                                     options_.password_params);
  if (!hash.ok()) return hash.error();
  auto registered = append(user_id, 0,
                           {NewEvent{"UserRegistered",
                                     {{"user_id", user_id},
                                      {"email", normalized},
                                      {"display_name", std::string(display_name)},
                                      {"password_hash", *hash},
                                      {"roles", roles_json(roles)}}}},
                           context);
  if (!registered.ok()) {
    if (registered.code() != ErrorCode::kVersionConflict) return registered.error();
    auto current = users_.load(user_id);
    if (current.ok() && current->state.registered && current->state.email == normalized) {
      outcome.replayed = env_.store->load_stream(user_id, 0);
      return outcome;
    }
    return make_error(ErrorCode::kDuplicateId, user_id);
  }
  outcome.events.insert(outcome.events.end(), registered->begin(), registered->end());
  return outcome;
}

Result<AuthToken> UserService::authenticate(std::string_view email, std::string_view password) {
  std::string normalized = normalize_email(email);
  auto index = env_.store->load_stream(email_stream_id(normalized));
  if (index.empty()) {
    (void)chassis::verify_password(password, dummy_hash_);
    return make_error(ErrorCode::kInvalidCredentials);
  }
  std::string user_id = index.front().payload.value("user_id", "");
  auto account = users_.load(user_id);
  if (!account.ok() || !account->state.registered) {
    (void)chassis::verify_password(password, dummy_hash_);
    return make_error(ErrorCode::kInvalidCredentials);
  }
  if (!chassis::verify_password(password, account->state.password_hash)) {
    return make_error(ErrorCode::kInvalidCredentials);
  }
  if (!account->state.active) return make_error(ErrorCode::kAccountInactive);
  chassis::Principal principal{user_id, account->state.roles, now() + options_.token_ttl_ms};
  return AuthToken{chassis::issue_token(principal, options_.token_secret), principal};
}

Result<CommandOutcome> UserService::assign_role(const AppendContext& context,
                                                const chassis::Principal& actor,
                                                const std::string& user_id,
                                                std::string_view role) {
  if (!actor.has(Role::kAdmin)) return make_error(ErrorCode::kForbidden, "admin role required");
  auto parsed = chassis::role_from_string(role);
  if (!parsed) return make_error(ErrorCode::kUnknownRole, std::string(role));
  for (int attempt = 0; attempt < 8; ++attempt) {
    auto account = users_.load(user_id);
    if (!account.ok()) return account.error();
    if (!account->state.registered) return make_error(ErrorCode::kUnknownUser, user_id);
    if (account->state.roles.count(*parsed) != 0) {
      CommandOutcome noop;
      noop.result = Json{{"noop", true}};
      return noop;
    }
    auto appended = append(user_id, account->version,
                           {NewEvent{"RoleAssigned", {{"role", std::string(role)}}}}, context);
    if (appended.ok()) return CommandOutcome{std::move(appended).value(), {}, {}, Json::object()};
    if (appended.code() != ErrorCode::kVersionConflict) return appended.error();
  }
  return make_error(ErrorCode::kVersionConflict, user_id);
}

Result<CommandOutcome> UserService::execute(const chassis::Command& command) {
  const Json& body = command.body;
  auto text = [&](const char* key) {
    return body.contains(key) && body[key].is_string() ? body[key].get<std::string>()
                                                       : std::string();
  };
  if (command.command_type == "RegisterUser") {
    return register_user(command.context(), command.target, text("email"),
                         text("display_name"), text("password"));
  }
  if (command.command_type == "AssignRole") {
    if (!command.actor) return make_error(ErrorCode::kForbidden, "no actor");
    return assign_role(command.context(), *command.actor, command.target, text("role"));
  }
  return make_error(ErrorCode::kInvalidInput, "unknown command " + command.command_type);
}

}  // namespace hacknizer::user
