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

#include "hacknizer/chassis/auth.hpp"

#include "hacknizer/chassis/crypto.hpp"

namespace hacknizer::chassis {

namespace {

const std::string kTokenHeader = R"({"alg":"HS256","typ":"HKZ"})";

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kOrganizer:
      return "organizer";
    case Role::kParticipant:
      return "participant";
    case Role::kAdmin:
      return "admin";
  }
  return "unknown";
}

std::optional<Role> role_from_string(std::string_view name) {
  if (name == "organizer") return Role::kOrganizer;
  if (name == "participant") return Role::kParticipant;
  if (name == "admin") return Role::kAdmin;
  return std::nullopt;
}

Json to_json(const Principal& principal) {
  Json roles = Json::array();
  for (Role role : principal.roles) roles.push_back(to_string(role));
  return Json{{"user_id", principal.user_id}, {"roles", roles}, {"exp", principal.expires_at}};
}

Result<Principal> principal_from_json(const Json& document) {
  if (!document.is_object() || !document.contains("user_id") || !document.contains("roles") ||
      !document["user_id"].is_string() || !document["roles"].is_array()) {
    return make_error(ErrorCode::kInvalidToken, "malformed principal");
  }
  Principal principal;
  principal.user_id = document["user_id"].get<std::string>();
  for (const auto& role : document["roles"]) {
    if (!role.is_string()) return make_error(ErrorCode::kInvalidToken, "malformed role");
    auto parsed = role_from_string(role.get<std::string>());
    if (!parsed) return make_error(ErrorCode::kInvalidToken, "unknown role");
    principal.roles.insert(*parsed);
  }
  if (document.contains("exp")) {
    if (!document["exp"].is_number_integer()) {
      return make_error(ErrorCode::kInvalidToken, "malformed expiry");
    }
    principal.expires_at = document["exp"].get<Millis>();
  }
  return principal;
}

std::string issue_token(const Principal& principal, std::string_view secret) {
  std::string signing_input =
      base64url_encode(kTokenHeader) + "." + base64url_encode(canonical(to_json(principal)));
  return signing_input + "." + base64url_encode(hmac_sha256(secret, signing_input));
}

Result<Principal> verify_token(std::string_view token, std::string_view secret, Millis now) {
  auto first = token.find('.');
  auto last = token.rfind('.');
  if (first == std::string_view::npos || first == last) {
    return make_error(ErrorCode::kInvalidToken, "token must have three segments");
  }
  std::string_view signing_input = token.substr(0, last);
  auto signature = base64url_decode(token.substr(last + 1));
  if (!signature ||
      !constant_time_equal(*signature, hmac_sha256(secret, signing_input))) {
    return make_error(ErrorCode::kInvalidToken, "bad signature");
  }
  auto header = base64url_decode(token.substr(0, first));
  auto claims_text = base64url_decode(token.substr(first + 1, last - first - 1));
  if (!header || *header != kTokenHeader || !claims_text) {
    return make_error(ErrorCode::kInvalidToken, "malformed token");
  }
  auto claims = Json::parse(*claims_text, nullptr, false);
  if (claims.is_discarded()) return make_error(ErrorCode::kInvalidToken, "malformed claims");
  auto principal = principal_from_json(claims);
  if (!principal.ok()) return principal;
  if (principal->expires_at <= now) return make_error(ErrorCode::kInvalidToken, "token expired");
  return principal;
}

std::string saga_token(std::string_view secret, std::string_view saga_id) {
  return base64url_encode(hmac_sha256(secret, "saga:" + std::string(saga_id)));
}

bool verify_saga_token(std::string_view secret, std::string_view saga_id,
                       std::string_view token) {
  return constant_time_equal(saga_token(secret, saga_id), token);
}

}  // namespace hacknizer::chassis
