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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hacknizer/chassis/auth.hpp"
#include "hacknizer/chassis/bus.hpp"
#include "hacknizer/chassis/clock.hpp"
#include "hacknizer/chassis/ids.hpp"
#include "hacknizer/user/user_service.hpp"

namespace hacknizer::gateway {

// Read side as seen by the gateway. Implemented in-process over a
// QueryService and remotely over HTTP.
class QueryPort {
 public:
  virtual ~QueryPort() = default;
  virtual Result<Json> overview(const std::string& hackathon_id) = 0;
  virtual Result<Json> list_hackathons(const std::optional<std::string>& state) = 0;
  virtual Result<Json> public_page(const std::string& hackathon_id) = 0;
  virtual Result<Json> roster(const std::string& team_id) = 0;
  virtual Result<Json> dashboard(const std::string& user_id) = 0;
  virtual Result<Json> saga(const std::string& saga_id) = 0;
  virtual Result<Json> command(const std::string& command_id) = 0;
};

// Credential check, answered synchronously by the user service.
class LoginPort {
 public:
  virtual ~LoginPort() = default;
  virtual Result<user::AuthToken> authenticate(const std::string& email,
                                               const std::string& password) = 0;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::optional<std::string> authorization;  // raw header value
  std::string body;
};

struct HttpResponse {
  int status = 200;
  Json body = Json::object();
};

enum class Access { kPublic, kAuthenticated, kParticipant, kOrganizer, kAdmin };
std::string_view to_string(Access access);

struct FieldSpec {
  std::string name;
  Json::value_t type;
  bool required = false;
};

struct RouteEntry {
  std::string method;
  std::string pattern;       // e.g. /api/hackathons/{id}/sponsors
  std::string target;        // "<context>.commands" or "query:<endpoint>" or "login"
  std::string command_type;  // empty for queries
  Access access = Access::kPublic;
  std::vector<FieldSpec> schema;
};

struct GatewayOptions {
  std::string token_secret;
};

// Stateless HTTP front: authenticates, authorizes, validates, then either
// publishes a command (202) or answers from the read side (200).
class Gateway {
 public:
  Gateway(GatewayOptions options, chassis::MessageBus& bus, QueryPort& queries, LoginPort& login,
          const chassis::Clock& clock, chassis::IdGenerator& ids);

  HttpResponse handle(const HttpRequest& request);

  static const std::vector<RouteEntry>& routes();

 private:
  struct Match {
    const RouteEntry* route = nullptr;
    std::map<std::string, std::string> params;
  };
  using Handler = std::function<HttpResponse(const Match&, const HttpRequest&, const Json& body,
                                             const std::optional<chassis::Principal>&)>;

  static std::optional<Match> match(const std::string& method, const std::string& path);
  HttpResponse send(const std::string& context, const std::string& command_type,
                    const std::string& target, Json body,
                    const std::optional<chassis::Principal>& actor, Json extra,
                    const std::string& correlation_id = {});
  HttpResponse dispatch(const Match& match, const HttpRequest& request, const Json& body,
                        const std::optional<chassis::Principal>& principal);

  GatewayOptions options_;
  chassis::MessageBus& bus_;
  QueryPort& queries_;
  LoginPort& login_;
  const chassis::Clock& clock_;
  chassis::IdGenerator& ids_;
};

HttpResponse error_response(int status, const Error& error, const std::string& field = {});
// HTTP status for a domain error code.
int status_for(ErrorCode code);

}  // namespace hacknizer::gateway
