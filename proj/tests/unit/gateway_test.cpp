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

#include "hacknizer/chassis/broker.hpp"
#include "hacknizer/gateway/gateway.hpp"
#include "test_support.hpp"

namespace hacknizer::gateway {
namespace {

using chassis::Role;

constexpr const char* kSecret = "gateway-secret";

struct FakeQueries final : QueryPort {
  Result<Json> overview(const std::string& id) override {
    if (id == "hk") return Json{{"hackathon_id", "hk"}};
    return make_error(ErrorCode::kNotFound, id);
  }
  Result<Json> list_hackathons(const std::optional<std::string>& state) override {
    return Json{{"hackathons", Json::array()}, {"filter", state.value_or("")}};
  }
  Result<Json> public_page(const std::string& id) override {
    if (id == "published") return Json{{"hackathon_id", id}};
    return make_error(ErrorCode::kNotPublished, id);
  }
  Result<Json> roster(const std::string& id) override { return Json{{"team_id", id}}; }
  Result<Json> dashboard(const std::string& id) override { return Json{{"user_id", id}}; }
  Result<Json> saga(const std::string& id) override { return Json{{"saga_id", id}}; }
  Result<Json> command(const std::string& id) override {
    return Json{{"command_id", id}, {"status", "pending"}};
  }
};

struct FakeLogin final : LoginPort {
  Result<user::AuthToken> authenticate(const std::string& email,
                                       const std::string& password) override {
    if (email != "ann@example.org" || password != "password-123") {
      return make_error(ErrorCode::kInvalidCredentials, "invalid credentials");
    }
    chassis::Principal p{"ann", {Role::kParticipant}, 3'600'000};
    return user::AuthToken{chassis::issue_token(p, kSecret), p};
  }
};

struct GatewayFixture : ::testing::Test {
  GatewayFixture() {
    for (const char* topic : {"user.commands", "hackathon.commands", "team.commands",
                              "page.commands", "saga.commands"}) {
      broker.subscribe(topic, "probe");
    }
  }

  std::string token(const std::string& user, std::set<Role> roles, chassis::Millis ttl = 3'600'000) {
    return chassis::issue_token({user, std::move(roles), clock.now_ms() + ttl}, kSecret);
  }

  HttpResponse call(const std::string& method, const std::string& path, const Json& body = nullptr,
                    const std::string& bearer = {}) {
    HttpRequest request{method, path, {}, std::nullopt, body.is_null() ? "" : body.dump()};
    if (!bearer.empty()) request.authorization = "Bearer " + bearer;
    return gateway.handle(request);
  }

  std::vector<chassis::Delivery> published() {
    std::vector<chassis::Delivery> out;
    while (auto d = broker.poll("probe")) {
      broker.ack(d->delivery_id);
      out.push_back(*d);
    }
    return out;
  }

  Json hackathon_body() { return {{"title", "Hack"}, {"start", 1}, {"end", 2}}; }

  chassis::SimulatedClock clock;
  chassis::Broker broker{clock};
  chassis::IdGenerator ids{5};
  FakeQueries queries;
  FakeLogin login;
  Gateway gateway{GatewayOptions{kSecret}, broker, queries, login, clock, ids};
};

TEST_F(GatewayFixture, OrganizerCommandIsAcceptedAndPublished) {
  auto response = call("POST", "/api/hackathons", hackathon_body(), token("org", {Role::kOrganizer}));
  ASSERT_EQ(response.status, 202) << response.body.dump();
  EXPECT_TRUE(response.body.contains("command_id"));
  EXPECT_TRUE(response.body.contains("correlation_id"));
  EXPECT_TRUE(response.body.contains("resource_id"));
  auto sent = published();
  ASSERT_EQ(sent.size(), 1u);
  EXPECT_EQ(sent[0].topic, "hackathon.commands");
  EXPECT_EQ(sent[0].envelope.event_type, "CreateHackathon");
  EXPECT_EQ(sent[0].envelope.stream_id, response.body["resource_id"]);
  EXPECT_EQ(sent[0].envelope.payload["command_id"], response.body["command_id"]);
  EXPECT_EQ(sent[0].envelope.payload["actor"]["user_id"], "org");
}

TEST_F(GatewayFixture, ParticipantCannotCreateHackathons) {
  auto response = call("POST", "/api/hackathons", hackathon_body(), token("p", {Role::kParticipant}));
  EXPECT_EQ(response.status, 403);
  EXPECT_TRUE(published().empty());
}

TEST_F(GatewayFixture, MissingTitleNamesTheField) {
  auto response = call("POST", "/api/hackathons", {{"start", 1}, {"end", 2}},
                       token("org", {Role::kOrganizer}));
  EXPECT_EQ(response.status, 400);
  EXPECT_EQ(response.body["field"], "body.title");
  auto wrong_type = call("POST", "/api/hackathons", {{"title", 5}, {"start", 1}, {"end", 2}},
                         token("org", {Role::kOrganizer}));
  EXPECT_EQ(wrong_type.status, 400);
  EXPECT_EQ(call("POST", "/api/users", nullptr).status, 400);
  HttpRequest garbage{"POST", "/api/users", {}, std::nullopt, "{not json"};
  EXPECT_EQ(gateway.handle(garbage).status, 400);
}

TEST_F(GatewayFixture, TokensAreCheckedOnProtectedRoutes) {
  EXPECT_EQ(call("POST", "/api/hackathons", hackathon_body()).status, 401);
  const std::string expired = token("org", {Role::kOrganizer}, 10);
  clock.advance_to(clock.now_ms() + 11);
  EXPECT_EQ(call("POST", "/api/hackathons", hackathon_body(), expired).status, 401);
  std::string tampered = token("org", {Role::kOrganizer});
  tampered.back() = tampered.back() == 'A' ? 'B' : 'A';
  EXPECT_EQ(call("POST", "/api/hackathons", hackathon_body(), tampered).status, 401);
  EXPECT_EQ(call("GET", "/api/me/dashboard").status, 401);
  auto mine = call("GET", "/api/me/dashboard", nullptr, token("ann", {Role::kParticipant}));
  EXPECT_EQ(mine.status, 200);
  EXPECT_EQ(mine.body["user_id"], "ann");
}

TEST_F(GatewayFixture, PublicReadsNeedNoToken) {
  EXPECT_EQ(call("GET", "/api/pages/published").status, 200);
  EXPECT_EQ(call("GET", "/api/pages/draft").status, 404);
  EXPECT_EQ(call("GET", "/api/hackathons/hk").status, 200);
  EXPECT_EQ(call("GET", "/api/hackathons/zz").status, 404);
  HttpRequest filtered{"GET", "/api/hackathons", {{"state", "Draft"}}, std::nullopt, ""};
  auto listed = gateway.handle(filtered);
  EXPECT_EQ(listed.status, 200);
  EXPECT_EQ(listed.body["filter"], "Draft");
}

TEST_F(GatewayFixture, UnknownRouteIs404) {
  EXPECT_EQ(call("GET", "/api/nowhere").status, 404);
  EXPECT_EQ(call("PUT", "/api/hackathons").status, 404);
}

TEST_F(GatewayFixture, BrokerOutageIs503) {
  broker.set_available(false);
  auto response = call("POST", "/api/users",
                       {{"email", "a@b.org"}, {"display_name", "A"}, {"password", "password-123"}});
  EXPECT_EQ(response.status, 503);
}

TEST_F(GatewayFixture, LoginIsSynchronous) {
  auto ok = call("POST", "/api/auth/login", {{"email", "ann@example.org"}, {"password", "password-123"}});
  ASSERT_EQ(ok.status, 200);
  EXPECT_TRUE(chassis::verify_token(ok.body["token"].get<std::string>(), kSecret, 1).ok());
  auto bad = call("POST", "/api/auth/login", {{"email", "ann@example.org"}, {"password", "nope-nope"}});
  EXPECT_EQ(bad.status, 401);
}

TEST_F(GatewayFixture, SagaRoutesAnswerWithASagaId) {
  auto response = call("POST", "/api/hackathons/hk/participants", nullptr,
                       token("ann", {Role::kParticipant}));
  ASSERT_EQ(response.status, 202);
  ASSERT_TRUE(response.body.contains("saga_id"));
  EXPECT_EQ(response.body["correlation_id"], response.body["saga_id"]);
  auto sent = published();
  ASSERT_EQ(sent.size(), 1u);
  EXPECT_EQ(sent[0].topic, "saga.commands");
  EXPECT_EQ(sent[0].envelope.payload["body"]["saga_type"], "ParticipantRegistrationSaga");
  EXPECT_EQ(sent[0].envelope.payload["body"]["input"]["user_id"], "ann");

  auto winner = call("POST", "/api/hackathons/hk/winner", {{"team_id", "t"}, {"award_id", "a"}},
                     token("org", {Role::kOrganizer}));
  ASSERT_EQ(winner.status, 202);
  auto declared = published();
  ASSERT_EQ(declared.size(), 1u);
  EXPECT_EQ(declared[0].envelope.payload["body"]["saga_type"], "WinnerDeclarationSaga");
}

TEST_F(GatewayFixture, AdminOnlyRoleAssignment) {
  EXPECT_EQ(call("POST", "/api/users/u1/roles", {{"role", "organizer"}},
                 token("org", {Role::kOrganizer}))
                .status,
            403);
  EXPECT_EQ(call("POST", "/api/users/u1/roles", {{"role", "organizer"}},
                 token("root", {Role::kAdmin}))
                .status,
            202);
}

TEST(RouteTable, EveryRouteAppearsExactlyOnce) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& route : Gateway::routes()) {
    EXPECT_TRUE(seen.emplace(route.method, route.pattern).second)
        << route.method << " " << route.pattern;
  }
  const std::set<std::pair<std::string, std::string>> expected = {
      {"POST", "/api/users"},
      {"POST", "/api/auth/login"},
      {"POST", "/api/users/{id}/roles"},
      {"POST", "/api/hackathons"},
      {"PATCH", "/api/hackathons/{id}"},
      {"POST", "/api/hackathons/{id}/sponsors"},
      {"POST", "/api/hackathons/{id}/awards"},
      {"POST", "/api/hackathons/{id}/transition"},
      {"POST", "/api/hackathons/{id}/participants"},
      {"POST", "/api/hackathons/{id}/winner"},
      {"POST", "/api/teams"},
      {"POST", "/api/teams/{id}/members"},
      {"DELETE", "/api/teams/{id}/members/{pid}"},
      {"POST", "/api/teams/{id}/project"},
      {"PATCH", "/api/pages/{id}/theme"},
      {"PATCH", "/api/pages/{id}/sections"},
      {"POST", "/api/pages/{id}/publish"},
      {"GET", "/api/hackathons"},
      {"GET", "/api/hackathons/{id}"},
      {"GET", "/api/pages/{id}"},
      {"GET", "/api/teams/{id}"},
      {"GET", "/api/me/dashboard"},
      {"GET", "/api/commands/{id}"},
      {"GET", "/api/sagas/{id}"},
  };
  EXPECT_EQ(seen, expected);
}

}  // namespace
}  // namespace hacknizer::gateway
