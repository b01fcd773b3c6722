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

#include <gtest/gtest.h>

#include <thread>

#include "hacknizer/user/user_service.hpp"
#include "test_support.hpp"

namespace hacknizer::user {
namespace {

using chassis::Role;
using hacknizer::testing::ctx;
using hacknizer::testing::principal;

constexpr const char* kSecret = "unit-secret";

struct UserFixture : ::testing::Test {
  hacknizer::testing::ServiceRig rig{"user", {"user.events"}};
  UserService service{rig.env(), [] {
                        UserServiceOptions options;
                        options.token_secret = kSecret;
                        options.password_params = {4, 8, 1};
                        return options;
                      }()};

  std::string registered(const std::string& email) {
    const std::string id = "u-" + email;
    auto outcome = service.register_user(ctx("reg-" + email), id, email, "Name", "password-123");
    EXPECT_TRUE(outcome.ok()) << outcome.error().to_string();
    return id;
  }
};

TEST_F(UserFixture, FreshEmailRegistersAtVersionOne) {
  auto outcome = service.register_user(ctx("c1"), "u-1", "Ann@Example.org", "Ann", "password-123");
  ASSERT_TRUE(outcome.ok());
  EXPECT_EQ(rig.stream_types("u-1"), std::vector<std::string>{"UserRegistered"});
  EXPECT_EQ(rig.store->head("u-1").current_version, 1u);
  EXPECT_EQ(rig.store->head(email_stream_id("ann@example.org")).current_version, 1u);
  auto loaded = service.load("u-1");
  ASSERT_TRUE(loaded.ok());
  EXPECT_EQ(loaded->state.email, "ann@example.org");
  EXPECT_EQ(loaded->state.roles, std::set<Role>{Role::kParticipant});
}

TEST_F(UserFixture, SameEmailTwiceIsDuplicateAndSecondStreamAbsent) {
  registered("ann@example.org");
  auto second = service.register_user(ctx("c2"), "u-2", "ANN@example.org", "Ann", "password-123");
  ASSERT_FALSE(second.ok());
  EXPECT_EQ(second.code(), ErrorCode::kDuplicateEmail);
  EXPECT_EQ(rig.store->head("u-2").current_version, 0u);
}

TEST_F(UserFixture, ShortPasswordIsWeakAndBadEmailIsInvalid) {
  EXPECT_EQ(service.register_user(ctx("c1"), "u-1", "a@b", "A", "abc").code(),
            ErrorCode::kWeakPassword);
  EXPECT_EQ(service.register_user(ctx("c2"), "u-2", "not-an-email", "A", "password-123").code(),
            ErrorCode::kInvalidEmail);
}

TEST_F(UserFixture, CorrectCredentialsGiveVerifiableParticipantToken) {
  const std::string id = registered("ann@example.org");
  auto token = service.authenticate("ann@example.org", "password-123");
  ASSERT_TRUE(token.ok());
  auto verified = chassis::verify_token(token->token, kSecret, rig.clock.now_ms());
  ASSERT_TRUE(verified.ok());
  EXPECT_EQ(verified->user_id, id);
  EXPECT_EQ(verified->roles, std::set<Role>{Role::kParticipant});
  EXPECT_EQ(verified->expires_at, rig.clock.now_ms() + 3'600'000);
}

TEST_F(UserFixture, WrongPasswordAndUnknownEmailAreIndistinguishable) {
  registered("ann@example.org");
  auto wrong = service.authenticate("ann@example.org", "password-999");
  auto unknown = service.authenticate("nobody@example.org", "password-123");
  ASSERT_FALSE(wrong.ok());
  ASSERT_FALSE(unknown.ok());
  EXPECT_EQ(wrong.code(), ErrorCode::kInvalidCredentials);
  EXPECT_EQ(unknown.code(), ErrorCode::kInvalidCredentials);
  EXPECT_EQ(wrong.error().message, unknown.error().message);
}

TEST_F(UserFixture, AdminGrantsOrganizerOnceAndOthersAreForbidden) {
  const std::string id = registered("ann@example.org");
  auto admin = principal("admin", {Role::kAdmin});
  auto granted = service.assign_role(ctx("r1"), admin, id, "organizer");
  ASSERT_TRUE(granted.ok());
  ASSERT_EQ(granted->events.size(), 1u);
  EXPECT_EQ(granted->events[0].event_type, "RoleAssigned");

  auto again = service.assign_role(ctx("r2"), admin, id, "organizer");
  ASSERT_TRUE(again.ok());
  EXPECT_TRUE(again->events.empty());
  EXPECT_EQ(rig.store->head(id).current_version, 2u);

  auto participant = principal("someone", {Role::kParticipant});
  EXPECT_EQ(service.assign_role(ctx("r3"), participant, id, "organizer").code(),
            ErrorCode::kForbidden);
  EXPECT_EQ(service.assign_role(ctx("r4"), admin, "u-missing", "organizer").code(),
            ErrorCode::kUnknownUser);
  EXPECT_EQ(service.assign_role(ctx("r5"), admin, id, "judge").code(), ErrorCode::kUnknownRole);
}

TEST_F(UserFixture, FoldOfRegisteredThenRoleAssignedHoldsOrganizer) {
  const std::string id = registered("ann@example.org");
  ASSERT_TRUE(service.assign_role(ctx("r1"), principal("a", {Role::kAdmin}), id, "organizer").ok());
  // Hand-evaluated: participant from registration plus organizer.
  auto log = rig.store->load_stream(id, 0);
  auto state = chassis::fold_aggregate(user_definition(), std::span(log));
  ASSERT_TRUE(state.ok());
  EXPECT_EQ(state->roles, (std::set<Role>{Role::kParticipant, Role::kOrganizer}));
  EXPECT_TRUE(state->registered);
  auto empty = chassis::fold_aggregate(user_definition(), {});
  ASSERT_TRUE(empty.ok());
  EXPECT_FALSE(empty->registered);
  EXPECT_TRUE(empty->roles.empty());
}

TEST_F(UserFixture, PasswordHashNeverLeavesTheService) {
  registered("ann@example.org");
  auto published = rig.take();
  ASSERT_FALSE(published.empty());
  for (const auto& delivery : published) {
    EXPECT_FALSE(delivery.envelope.payload.contains("password_hash"));
    EXPECT_EQ(delivery.envelope.payload.dump().find("scrypt$"), std::string::npos);
  }
  bool stored = false;
  for (const auto& e : rig.store->read_all()) stored |= e.payload.contains("password_hash");
  EXPECT_TRUE(stored);
}

// Property: racing writers with one email produce exactly one account.
TEST_F(UserFixture, EmailUniquenessHoldsUnderRacingWriters) {
  for (int round = 0; round < 20; ++round) {
    const std::string email = "race" + std::to_string(round) + "@example.org";
    std::atomic<int> winners{0};
    std::vector<std::thread> writers;
    for (int w = 0; w < 4; ++w) {
      writers.emplace_back([&, w] {
        const std::string id = "u-" + std::to_string(round) + "-" + std::to_string(w);
        auto outcome = service.register_user(ctx(id), id, email, "Racer", "password-123");
        if (outcome.ok()) {
          ++winners;
        } else {
          EXPECT_EQ(outcome.code(), ErrorCode::kDuplicateEmail);
        }
      });
    }
    for (auto& t : writers) t.join();
    EXPECT_EQ(winners.load(), 1) << email;
  }
  int registrations = 0;
  for (const auto& e : rig.store->read_all()) registrations += e.event_type == "UserRegistered";
  EXPECT_EQ(registrations, 20);
}

// Property: any single-bit flip of an issued token fails verification.
TEST_F(UserFixture, EveryBitFlipOfATokenFailsVerification) {
  registered("ann@example.org");
  auto token = service.authenticate("ann@example.org", "password-123");
  ASSERT_TRUE(token.ok());
  const std::string original = token->token;
  ASSERT_TRUE(chassis::verify_token(original, kSecret, rig.clock.now_ms()).ok());
  for (std::size_t i = 0; i < original.size(); ++i) {
    for (int bit = 0; bit < 8; ++bit) {
      std::string mutated = original;
      mutated[i] = static_cast<char>(mutated[i] ^ (1 << bit));
      EXPECT_FALSE(chassis::verify_token(mutated, kSecret, rig.clock.now_ms()).ok())
          << "byte " << i << " bit " << bit;
    }
  }
}

TEST_F(UserFixture, BootstrapAdminIsCreatedOnceAcrossStarts) {
  UserServiceOptions options;
  options.token_secret = kSecret;
  options.password_params = {4, 8, 1};
  options.admin_email = "root@example.org";
  options.admin_password = "admin-password";
  UserService first(rig.env(), options);
  first.start();
  first.start();
  auto token = first.authenticate("root@example.org", "admin-password");
  ASSERT_TRUE(token.ok());
  EXPECT_TRUE(token->principal.has(Role::kAdmin));
  int registrations = 0;
  for (const auto& e : rig.store->read_all()) registrations += e.event_type == "UserRegistered";
  EXPECT_EQ(registrations, 1);
}

}  // namespace
}  // namespace hacknizer::user
