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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hacknizer/chassis/broker.hpp"
#include "hacknizer/chassis/clock.hpp"
#include "hacknizer/chassis/consumer.hpp"
#include "hacknizer/chassis/crypto.hpp"
#include "hacknizer/chassis/event_store.hpp"
#include "hacknizer/chassis/ids.hpp"
#include "hacknizer/chassis/scheduler.hpp"
#include "hacknizer/gateway/gateway.hpp"
#include "hacknizer/gateway/http.hpp"
#include "hacknizer/hackathon/hackathon_service.hpp"
#include "hacknizer/harness/fault_spec.hpp"
#include "hacknizer/page/page_service.hpp"
#include "hacknizer/query/projections.hpp"
#include "hacknizer/saga/saga_coordinator.hpp"
#include "hacknizer/team/team_service.hpp"
#include "hacknizer/user/user_service.hpp"

namespace hacknizer::harness {

enum class ClockMode { kSimulated, kWall };

struct ServiceSpec {
  std::string name;   // user | hackathon | team | page | saga | query
  std::string color;  // bounded-context color, informational
  std::string data_dir;  // empty: in memory
};

struct SystemTopology {
  std::vector<ServiceSpec> services;
  chassis::BrokerOptions broker;
  std::uint64_t seed = 1;
  ClockMode clock_mode = ClockMode::kSimulated;
  std::string token_secret = "hacknizer-dev-token-secret";
  std::string saga_secret = "hacknizer-dev-saga-secret";
  std::string admin_email = "admin@hacknizer.local";
  std::string admin_password = "admin-password";
  chassis::ScryptParams password_params;
  // When set, the gateway also listens on 127.0.0.1:<port> (0 = any free port).
  std::optional<int> gateway_port;

  // user/hackathon/team/page/saga/query, all in memory.
  static SystemTopology standard(std::uint64_t seed = 1);
  // Same, with every service in its own directory under `root`.
  static SystemTopology on_disk(const std::string& root, std::uint64_t seed = 1);
};

// Two services with the same name or data directory: DuplicateService.
Status validate_topology(const SystemTopology& topology);

struct DrainReport {
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t delayed = 0;
  std::uint64_t redelivered = 0;
  std::uint64_t dead_lettered = 0;
  std::uint64_t duplicates_skipped = 0;
  std::uint64_t timers_fired = 0;
  std::uint64_t steps = 0;
  chassis::Millis clock_ms = 0;
  bool operator==(const DrainReport&) const = default;
};

Json to_json(const DrainReport& report);

struct DrainOptions {
  std::uint64_t max_steps = 5'000'000;
  // Simulated-time budget; running past it means something keeps re-arming.
  chassis::Millis max_sim_ms = 24LL * 3600 * 1000;
};

// The whole system in one process: one broker, one store per service, a
// timer queue and a gateway. Everything nondeterministic flows from the
// topology seed and the simulated clock.
class System {
 public:
  static Result<std::unique_ptr<System>> compose(SystemTopology topology);
  ~System();

  // Simulated mode only (UnsupportedInWallClockMode otherwise).
  Status inject_fault(const FaultSpec& spec);
  void clear_faults();

  // Delivers, fires timers and advances the clock until nothing is in
  // flight. Timeout on livelock.
  Result<DrainReport> drain(const DrainOptions& options = {});

  // Drops the gateway (and its listener) and builds a fresh one.
  Status restart_gateway();

  // Gateway round-trip without the network.
  gateway::HttpResponse request(const std::string& method, const std::string& path,
                                const Json& body = nullptr, const std::string& token = {},
                                std::map<std::string, std::string> query = {});
  std::optional<std::string> gateway_url() const;

  const SystemTopology& topology() const { return topology_; }
  chassis::Broker& broker() { return *broker_; }
  chassis::Clock& clock() { return *clock_; }
  chassis::SimulatedClock* simulated_clock();
  chassis::TimerQueue& timers() { return timers_; }
  gateway::Gateway& gateway() { return *gateway_; }

  user::UserService* user() { return user_.get(); }
  hackathon::HackathonService* hackathon() { return hackathon_.get(); }
  team::TeamService* team() { return team_.get(); }
  page::PageService* page() { return page_.get(); }
  saga::SagaCoordinator* saga() { return saga_.get(); }
  query::QueryService* query() { return query_.get(); }
  chassis::EventStore* store(const std::string& service);

  // Full logs of every store, in service order.
  std::vector<std::vector<chassis::EventEnvelope>> logs() const;
  // (context, command_type, origin) for every command a service consumed;
  // origin is "saga" for saga step commands and "gateway" otherwise.
  std::set<std::tuple<std::string, std::string, std::string>> consumed_commands() const;

 private:
  explicit System(SystemTopology topology);
  Status build();
  void deliver(const chassis::Delivery& delivery);

  SystemTopology topology_;
  std::unique_ptr<chassis::Clock> clock_;
  std::unique_ptr<chassis::Broker> broker_;
  chassis::TimerQueue timers_;
  std::map<std::string, std::unique_ptr<chassis::IdGenerator>> ids_;
  std::map<std::string, std::unique_ptr<chassis::EventStore>> stores_;

  std::unique_ptr<user::UserService> user_;
  std::unique_ptr<hackathon::HackathonService> hackathon_;
  std::unique_ptr<team::TeamService> team_;
  std::unique_ptr<page::PageService> page_;
  std::unique_ptr<saga::SagaCoordinator> saga_;
  std::unique_ptr<query::QueryService> query_;
  std::map<std::string, chassis::Service*> services_;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<chassis::ConsumerPosition>>
      positions_;

  std::unique_ptr<gateway::QueryPort> query_port_;
  std::unique_ptr<gateway::LoginPort> login_port_;
  std::unique_ptr<gateway::Gateway> gateway_;
  std::unique_ptr<gateway::HttpServer> http_;
  std::set<std::tuple<std::string, std::string, std::string>> consumed_commands_;
};

// Gateway ports backed by in-process services.
class LocalQueryPort final : public gateway::QueryPort {
 public:
  explicit LocalQueryPort(query::QueryService& service) : service_(service) {}
  Result<Json> overview(const std::string& id) override { return service_.get_overview(id); }
  Result<Json> list_hackathons(const std::optional<std::string>& state) override {
    return service_.list_hackathons(state);
  }
  Result<Json> public_page(const std::string& id) override {
    return service_.get_public_page(id);
  }
  Result<Json> roster(const std::string& id) override { return service_.get_roster(id); }
  Result<Json> dashboard(const std::string& id) override { return service_.get_dashboard(id); }
  Result<Json> saga(const std::string& id) override { return service_.get_saga(id); }
  Result<Json> command(const std::string& id) override { return service_.get_command(id); }

 private:
  query::QueryService& service_;
};

class LocalLoginPort final : public gateway::LoginPort {
 public:
  explicit LocalLoginPort(user::UserService& service) : service_(service) {}
  Result<user::AuthToken> authenticate(const std::string& email,
                                       const std::string& password) override {
    return service_.authenticate(email, password);
  }

 private:
  user::UserService& service_;
};

}  // namespace hacknizer::harness
