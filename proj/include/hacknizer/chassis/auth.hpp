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

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "hacknizer/chassis/clock.hpp"
#include "hacknizer/chassis/envelope.hpp"
#include "hacknizer/common/result.hpp"

namespace hacknizer::chassis {

enum class Role { kOrganizer, kParticipant, kAdmin };

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

// Authenticated identity. Outside tests it is only ever built from a
// verified, unexpired token.
struct Principal {
  std::string user_id;
  std::set<Role> roles;
  Millis expires_at = 0;

  bool has(Role role) const { return roles.count(role) != 0; }
  bool operator==(const Principal&) const = default;
};

Json to_json(const Principal& principal);
Result<Principal> principal_from_json(const Json& document);

// `<header>.<claims>.<signature>`, each segment base64url without padding;
// signature is HMAC-SHA256 over `<header>.<claims>`.
std::string issue_token(const Principal& principal, std::string_view secret);
Result<Principal> verify_token(std::string_view token, std::string_view secret, Millis now);

// Proof that a command was issued by the saga coordinator.
std::string saga_token(std::string_view secret, std::string_view saga_id);
bool verify_saga_token(std::string_view secret, std::string_view saga_id, std::string_view token);

}  // namespace hacknizer::chassis
