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

#include "hacknizer/chassis/aggregate.hpp"
#include "hacknizer/chassis/auth.hpp"
#include "hacknizer/chassis/crypto.hpp"
#include "hacknizer/chassis/service.hpp"

namespace hacknizer::user {

inline constexpr std::string_view kContext = "user";

// Red bounded context: accounts, credentials, roles.
struct UserAccount {
  std::string user_id;
  std::string email;
  std::string display_name;
  std::string password_hash;
  std::set<chassis::Role> roles;
  bool active = false;
  bool registered = false;
  bool operator==(const UserAccount&) const = default;
};

chassis::AggregateDefinition<UserAccount> user_definition();

struct AuthToken {
  std::string token;
  chassis::Principal principal;
};

struct UserServiceOptions {
  std::string token_secret;
  chassis::Millis token_ttl_ms = 3'600'000;
  chassis::ScryptParams password_params;
  std::string admin_email;
  std::string admin_password;
  std::string admin_display_name = "Administrator";
};

std::string normalize_email(std::string_view email);
bool valid_email(std::string_view normalized);
std::string email_stream_id(std::string_view normalized_email);

class UserService final : public chassis::CommandService {
 public:
  static constexpr std::size_t kMinPasswordLength = 8;

  UserService(chassis::ServiceEnv env, UserServiceOptions options);

  std::string name() const override { return std::string(kContext); }
  std::vector<std::string> subscriptions() const override;
  chassis::HandlerOutcome on_message(const std::string& topic,
                                     const chassis::EventEnvelope& envelope) override;
  // Creates the bootstrap admin on first start.
  void start() override;

  Result<chassis::CommandOutcome> register_user(const chassis::AppendContext& context,
                                                const std::string& user_id,
                                                std::string_view email,
                                                std::string_view display_name,
                                                std::string_view password,
                                                std::set<chassis::Role> roles = {
                                                    chassis::Role::kParticipant});

  // InvalidCredentials for both unknown email and wrong password.
  Result<AuthToken> authenticate(std::string_view email, std::string_view password);

  Result<chassis::CommandOutcome> assign_role(const chassis::AppendContext& context,
                                              const chassis::Principal& actor,
                                              const std::string& user_id,
                                              std::string_view role);

  Result<chassis::Loaded<UserAccount>> load(const std::string& user_id) {
    return users_.load(user_id);
  }
  chassis::Repository<UserAccount>& repository() { return users_; }

  // Strips credentials from envelopes leaving this service.
  static chassis::EventEnvelope redact(chassis::EventEnvelope envelope);

 protected:
  Result<chassis::CommandOutcome> execute(const chassis::Command& command) override;

 private:
  UserServiceOptions options_;
  chassis::Repository<UserAccount> users_;
  std::string dummy_hash_;
};

}  // namespace hacknizer::user
