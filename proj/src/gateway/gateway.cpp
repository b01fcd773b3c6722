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

#include "hacknizer/gateway/gateway.hpp"

#include <sstream>

#include "hacknizer/chassis/service.hpp"

namespace hacknizer::gateway {

using chassis::Principal;
using chassis::Role;
using T = Json::value_t;

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream in(path);
  std::string part;
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

bool type_matches(const Json& value, Json::value_t expected) {
  switch (expected) {
    case T::number_integer:
      return value.is_number_integer();
    case T::string:
      return value.is_string();
    case T::array:
      return value.is_array();
    case T::object:
      return value.is_object();
    default:
      return value.type() == expected;
  }
}

std::string type_name(Json::value_t type) {
  switch (type) {
    case T::number_integer: return "integer";
    case T::string: return "string";
    case T::array: return "array";
    case T::object: return "object";
    default: return "value";
  }
}

bool allowed(Access access, const std::optional<Principal>& principal) {
  switch (access) {
    case Access::kPublic:
    case Access::kAuthenticated:
      return true;
    case Access::kParticipant:
      return principal->has(Role::kParticipant);
    case Access::kOrganizer:
      return principal->has(Role::kOrganizer);
    case Access::kAdmin:
      return principal->has(Role::kAdmin);
  }
  return false;
}

}  // namespace

std::string_view to_string(Access access) {
  switch (access) {
    case Access::kPublic: return "public";
    case Access::kAuthenticated: return "authenticated";
    case Access::kParticipant: return "participant";
    case Access::kOrganizer: return "organizer";
    case Access::kAdmin: return "admin";
  }
  return "public";
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound:
    case ErrorCode::kNotPublished:
    case ErrorCode::kUnknownUser:
    case ErrorCode::kUnknownHackathon:
    case ErrorCode::kUnknownTeam:
    case ErrorCode::kUnknownPage:
    case ErrorCode::kUnknownSaga:
      return 404;
    case ErrorCode::kInvalidCredentials:
    case ErrorCode::kInvalidToken:
      return 401;
    case ErrorCode::kForbidden:
    case ErrorCode::kAccountInactive:
      return 403;
    case ErrorCode::kBrokerUnavailable:
    case ErrorCode::kStorageError:
    case ErrorCode::kTimeout:
      return 503;
    default:
      return 400;
  }
}

HttpResponse error_response(int status, const Error& error, const std::string& field) {
  Json body{{"error", to_string(error.code)}, {"message", error.message}};
  if (!field.empty()) body["field"] = field;
  return HttpResponse{status, std::move(body)};
}

const std::vector<RouteEntry>& Gateway::routes() {
  static const std::vector<RouteEntry> table = {
      {"POST", "/api/users", "user.commands", "RegisterUser", Access::kPublic,
       {{"email", T::string, true}, {"display_name", T::string, true},
        {"password", T::string, true}}},
      {"POST", "/api/auth/login", "login", "", Access::kPublic,
       {{"email", T::string, true}, {"password", T::string, true}}},
      {"POST", "/api/users/{id}/roles", "user.commands", "AssignRole", Access::kAdmin,
       {{"role", T::string, true}}},
      {"POST", "/api/hackathons", "hackathon.commands", "CreateHackathon", Access::kOrganizer,
       {{"title", T::string, true}, {"description", T::string, false},
        {"start", T::number_integer, true}, {"end", T::number_integer, true},
        {"capacity", T::number_integer, false}, {"team_min", T::number_integer, false},
        {"team_max", T::number_integer, false}}},
      {"PATCH", "/api/hackathons/{id}", "hackathon.commands", "EditHackathon", Access::kOrganizer,
       {{"title", T::string, false}, {"description", T::string, false},
        {"start", T::number_integer, false}, {"end", T::number_integer, false},
        {"capacity", T::number_integer, false}, {"team_min", T::number_integer, false},
        {"team_max", T::number_integer, false}}},
      {"POST", "/api/hackathons/{id}/sponsors", "hackathon.commands", "RegisterSponsor",
       Access::kOrganizer,
       {{"sponsor_id", T::string, false}, {"name", T::string, true}, {"tier", T::string, false},
        {"logo", T::string, false}}},
      {"POST", "/api/hackathons/{id}/awards", "hackathon.commands", "RegisterAward",
       Access::kOrganizer,
       {{"award_id", T::string, false}, {"title", T::string, true},
        {"description", T::string, false}, {"sponsor_id", T::string, false}}},
      {"POST", "/api/hackathons/{id}/transition", "hackathon.commands", "TransitionHackathon",
       Access::kOrganizer, {{"action", T::string, true}}},
      {"POST", "/api/hackathons/{id}/participants", "saga.commands", "StartSaga",
       Access::kParticipant, {}},
      {"POST", "/api/hackathons/{id}/winner", "saga.commands", "StartSaga", Access::kOrganizer,
       {{"team_id", T::string, true}, {"award_id", T::string, true}}},
      {"POST", "/api/teams", "team.commands", "CreateTeam", Access::kParticipant,
       {{"hackathon_id", T::string, true}, {"name", T::string, true}}},
      {"POST", "/api/teams/{id}/members", "team.commands", "JoinTeam", Access::kParticipant, {}},
      {"DELETE", "/api/teams/{id}/members/{pid}", "team.commands", "LeaveTeam",
       Access::kParticipant, {}},
      {"POST", "/api/teams/{id}/project", "team.commands", "SubmitProject", Access::kParticipant,
       {{"title", T::string, true}, {"description", T::string, false},
        {"repository", T::string, false}}},
      {"PATCH", "/api/pages/{id}/theme", "page.commands", "UpdateTheme", Access::kOrganizer,
       {{"primary_color", T::string, false}, {"accent_color", T::string, false},
        {"logo", T::string, false}}},
      {"PATCH", "/api/pages/{id}/sections", "page.commands", "EditSections", Access::kOrganizer,
       {{"ops", T::array, true}}},
      {"POST", "/api/pages/{id}/publish", "page.commands", "PublishPage", Access::kOrganizer, {}},
      {"GET", "/api/hackathons", "query:list_hackathons", "", Access::kPublic, {}},
      {"GET", "/api/hackathons/{id}", "query:overview", "", Access::kPublic, {}},
      {"GET", "/api/pages/{id}", "query:public_page", "", Access::kPublic, {}},
      {"GET", "/api/teams/{id}", "query:roster", "", Access::kPublic, {}},
      {"GET", "/api/me/dashboard", "query:dashboard", "", Access::kAuthenticated, {}},
      {"GET", "/api/commands/{id}", "query:command", "", Access::kPublic, {}},
      {"GET", "/api/sagas/{id}", "query:saga", "", Access::kPublic, {}},
  };
  return table;
}

Gateway::Gateway(GatewayOptions options, chassis::MessageBus& bus, QueryPort& queries,
                 LoginPort& login, const chassis::Clock& clock, chassis::IdGenerator& ids)
    : options_(std::move(options)), bus_(bus), queries_(queries), login_(login), clock_(clock),
      ids_(ids) {}

std::optional<Gateway::Match> Gateway::match(const std::string& method, const std::string& path) {
  const auto parts = split_path(path);
  for (const auto& route : routes()) {
    if (route.method != method) continue;
    const auto pattern = split_path(route.pattern);
    if (pattern.size() != parts.size()) continue;
    Match m{&route, {}};
    bool ok = true;
    for (std::size_t i = 0; i < parts.size() && ok; ++i) {
      if (pattern[i].front() == '{') {
        m.params[pattern[i].substr(1, pattern[i].size() - 2)] = parts[i];
      } else {
        ok = pattern[i] == parts[i];
      }
    }
    if (ok) return m;
  }
  return std::nullopt;
}

HttpResponse Gateway::handle(const HttpRequest& request) {
  auto found = match(request.method, request.path);
  if (!found) {
    return error_response(404, make_error(ErrorCode::kNotFound,
                                          request.method + " " + request.path));
  }
  const RouteEntry& route = *found->route;

  std::optional<Principal> principal;
  if (request.authorization) {
    const std::string& header = *request.authorization;
    constexpr std::string_view kBearer = "Bearer ";
    auto verified = header.rfind(kBearer, 0) == 0
                        ? chassis::verify_token(header.substr(kBearer.size()),
                                                options_.token_secret, clock_.now_ms())
                        : Result<Principal>(make_error(ErrorCode::kInvalidToken, "not a bearer token"));
    if (verified.ok()) {
      principal = std::move(verified).value();
    } else if (route.access != Access::kPublic) {
      return error_response(401, verified.error());
    }
  }
  if (route.access != Access::kPublic && !principal) {
    return error_response(401, make_error(ErrorCode::kInvalidToken, "missing bearer token"));
  }
  if (!allowed(route.access, principal)) {
    return error_response(403, make_error(ErrorCode::kForbidden,
                                          std::string(to_string(route.access)) + " role required"));
  }

  Json body = Json::object();
  if (!request.body.empty()) {
    body = Json::parse(request.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      return error_response(400, make_error(ErrorCode::kInvalidInput, "body must be a JSON object"),
                            "body");
    }
  }
  for (const auto& field : route.schema) {
    if (!body.contains(field.name)) {
      if (field.required) {
        return error_response(400, make_error(ErrorCode::kInvalidInput, "missing field"),
                              "body." + field.name);
      }
      continue;
    }
    if (!type_matches(body[field.name], field.type)) {
      return error_response(400, make_error(ErrorCode::kInvalidInput,
                                            "expected " + type_name(field.type)),
                            "body." + field.name);
    }
  }
  return dispatch(*found, request, body, principal);
}

HttpResponse Gateway::send(const std::string& context, const std::string& command_type,
                           const std::string& target, Json body,
                           const std::optional<Principal>& actor, Json extra,
                           const std::string& correlation_id) {
  chassis::Command command;
  command.command_id = ids_.next();
  command.command_type = command_type;
  command.target = target;
  command.correlation_id = correlation_id.empty() ? ids_.next() : correlation_id;
  command.actor = actor;
  command.body = std::move(body);
  auto published = bus_.publish(chassis::commands_topic(context),
                                 chassis::to_envelope(command, ids_, clock_));
  if (!published.ok()) return error_response(503, published.error());
  extra["command_id"] = command.command_id;
  extra["correlation_id"] = command.correlation_id;
  return HttpResponse{202, std::move(extra)};
}

HttpResponse Gateway::dispatch(const Match& m, const HttpRequest& request, const Json& body,
                               const std::optional<Principal>& principal) {
  const RouteEntry& route = *m.route;
  auto param = [&](const char* key) {
    auto it = m.params.find(key);
    return it == m.params.end() ? std::string() : it->second;
  };
  auto answer = [](Result<Json> view) {
    if (!view.ok()) return error_response(status_for(view.code()), view.error());
    return HttpResponse{200, std::move(view).value()};
  };

  if (route.target == "login") {
    auto token = login_.authenticate(body["email"].get<std::string>(),
                                     body["password"].get<std::string>());
    if (!token.ok()) return error_response(status_for(token.code()), token.error());
    Json roles = Json::array();
    for (Role role : token->principal.roles) roles.push_back(chassis::to_string(role));
    return HttpResponse{200, {{"token", token->token},
                              {"user_id", token->principal.user_id},
                              {"roles", roles},
                              {"expires_at", token->principal.expires_at}}};
  }
  if (route.target.rfind("query:", 0) == 0) {
    const std::string endpoint = route.target.substr(6);
    if (endpoint == "list_hackathons") {
      std::optional<std::string> state;
      if (auto it = request.query.find("state"); it != request.query.end()) state = it->second;
      return answer(queries_.list_hackathons(state));
    }
    if (endpoint == "overview") return answer(queries_.overview(param("id")));
    if (endpoint == "public_page") return answer(queries_.public_page(param("id")));
    if (endpoint == "roster") return answer(queries_.roster(param("id")));
    if (endpoint == "dashboard") return answer(queries_.dashboard(principal->user_id));
    if (endpoint == "saga") return answer(queries_.saga(param("id")));
    return answer(queries_.command(param("id")));
  }

  const std::string context = route.target.substr(0, route.target.find('.'));
  const std::string& type = route.command_type;
  if (type == "RegisterUser") {
    std::string user_id = ids_.next();
    return send(context, type, user_id, body, std::nullopt, {{"resource_id", user_id}});
  }
  if (type == "CreateHackathon" || type == "CreateTeam") {
    std::string id = ids_.next();
    return send(context, type, id, body, principal, {{"resource_id", id}});
  }
  if (type == "RegisterSponsor" || type == "RegisterAward") {
    const char* key = type == "RegisterSponsor" ? "sponsor_id" : "award_id";
    Json command_body = body;
    if (!command_body.contains(key)) command_body[key] = ids_.next();
    Json extra{{"resource_id", command_body[key]}};
    return send(context, type, param("id"), std::move(command_body), principal, std::move(extra));
  }
  if (type == "StartSaga") {
    const std::string saga_id = ids_.next();
    const std::string hackathon_id = param("id");
    Json input{{"hackathon_id", hackathon_id}};
    std::string saga_type;
    if (request.path.size() >= 7 && request.path.substr(request.path.size() - 7) == "/winner") {
      saga_type = "WinnerDeclarationSaga";
      input["team_id"] = body["team_id"];
      input["award_id"] = body["award_id"];
    } else {
      saga_type = "ParticipantRegistrationSaga";
      input["user_id"] = principal->user_id;
    }
    return send(context, type, saga_id, {{"saga_type", saga_type}, {"input", input}}, principal,
                {{"saga_id", saga_id}}, saga_id);
  }
  if (type == "LeaveTeam") {
    return send(context, type, param("id"), {{"user_id", param("pid")}}, principal, {});
  }
  return send(context, type, param("id"), body, principal, {});
}

}  // namespace hacknizer::gateway
