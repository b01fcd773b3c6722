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

#include "hacknizer/harness/system.hpp"

#include <thread>

namespace hacknizer::harness {

using chassis::Millis;

namespace {

const std::vector<std::pair<std::string, std::string>>& standard_services() {
  static const std::vector<std::pair<std::string, std::string>> services = {
      {"user", "red"},     {"hackathon", "green"}, {"team", "blue"},
      {"page", "yellow"},  {"saga", "grey"},       {"query", "grey"}};
  return services;
}

}  // namespace

SystemTopology SystemTopology::standard(std::uint64_t seed) {
  SystemTopology topology;
  topology.seed = seed;
  for (const auto& [name, color] : standard_services()) {
    topology.services.push_back({name, color, ""});
  }
  return topology;
}

SystemTopology SystemTopology::on_disk(const std::string& root, std::uint64_t seed) {
  SystemTopology topology = standard(seed);
  for (auto& service : topology.services) service.data_dir = root + "/" + service.name;
  return topology;
}

Status validate_topology(const SystemTopology& topology) {
  std::set<std::string> names;
  std::map<std::string, std::string> dirs;
  for (const auto& service : topology.services) {
    if (!names.insert(service.name).second) {
      return make_error(ErrorCode::kDuplicateService, "service '" + service.name + "' twice");
    }
    if (service.data_dir.empty()) continue;
    auto normalized = std::filesystem::weakly_canonical(service.data_dir).string();
    auto [it, inserted] = dirs.emplace(normalized, service.name);
    if (!inserted) {
      return make_error(ErrorCode::kDuplicateService,
                        service.name + " and " + it->second + " share " + service.data_dir);
    }
  }
  return ok_status();
}

Json to_json(const DrainReport& r) {
  return {{"delivered", r.delivered},         {"dropped", r.dropped},
          {"duplicated", r.duplicated},       {"delayed", r.delayed},
          {"redelivered", r.redelivered},     {"dead_lettered", r.dead_lettered},
          {"duplicates_skipped", r.duplicates_skipped},
          {"timers_fired", r.timers_fired},   {"steps", r.steps},
          {"clock_ms", r.clock_ms}};
}

System::System(SystemTopology topology) : topology_(std::move(topology)) {}

System::~System() {
  if (http_) http_->stop();
}

Result<std::unique_ptr<System>> System::compose(SystemTopology topology) {
  if (auto valid = validate_topology(topology); !valid.ok()) return valid.error();
  std::unique_ptr<System> system(new System(std::move(topology)));
  if (auto built = system->build(); !built.ok()) return built.error();
  return system;
}

chassis::SimulatedClock* System::simulated_clock() {
  return dynamic_cast<chassis::SimulatedClock*>(clock_.get());
}

Status System::build() {
  if (topology_.clock_mode == ClockMode::kSimulated) {
    clock_ = std::make_unique<chassis::SimulatedClock>();
  } else {
    clock_ = std::make_unique<chassis::WallClock>();
  }
  chassis::BrokerOptions broker_options = topology_.broker;
  broker_options.fault_seed = chassis::stable_hash("faults:" + std::to_string(topology_.seed));
  broker_ = std::make_unique<chassis::Broker>(*clock_, broker_options);

  auto ids_for = [&](const std::string& name) -> chassis::IdGenerator& {
    auto& slot = ids_[name];
    if (!slot) {
      slot = std::unique_ptr<chassis::IdGenerator>(
          new chassis::IdGenerator(chassis::IdGenerator::derived(topology_.seed, name)));
    }
    return *slot;
  };

  for (const auto& spec : topology_.services) {
    const std::string& name = spec.name;
    if (name == "query") {
      std::filesystem::path checkpoint;
      if (!spec.data_dir.empty()) {
        std::filesystem::create_directories(spec.data_dir);
        checkpoint = std::filesystem::path(spec.data_dir) / "query.checkpoint";
      }
      query_ = std::make_unique<query::QueryService>(checkpoint);
      query_->set_lag_source([this] { return broker_->pending("query"); });
      services_[name] = query_.get();
      continue;
    }
    if (name != "user" && name != "hackathon" && name != "team" && name != "page" &&
        name != "saga") {
      return make_error(ErrorCode::kInvalidConfig, "unknown service '" + name + "'");
    }
    auto store = chassis::EventStore::open({name, spec.data_dir}, *clock_, ids_for(name + ":store"));
    if (!store.ok()) return store.error();
    chassis::ServiceEnv env{store->get(), broker_.get(), clock_.get(), &ids_for(name), &timers_};
    stores_[name] = std::move(store).value();
    if (name == "user") {
      user::UserServiceOptions options;
      options.token_secret = topology_.token_secret;
      options.password_params = topology_.password_params;
      options.admin_email = topology_.admin_email;
      options.admin_password = topology_.admin_password;
      user_ = std::make_unique<user::UserService>(env, options);
      services_[name] = user_.get();
    } else if (name == "hackathon") {
      hackathon::HackathonServiceOptions options;
      options.saga_secret = topology_.saga_secret;
      hackathon_ = std::make_unique<hackathon::HackathonService>(env, options);
      services_[name] = hackathon_.get();
    } else if (name == "team") {
      team_ = std::make_unique<team::TeamService>(env, team::TeamServiceOptions{topology_.saga_secret});
      services_[name] = team_.get();
    } else if (name == "page") {
      page_ = std::make_unique<page::PageService>(env);
      services_[name] = page_.get();
    } else {
      saga_ = std::make_unique<saga::SagaCoordinator>(
          env, saga::SagaCoordinatorOptions{topology_.saga_secret});
      services_[name] = saga_.get();
    }
  }

  for (const auto& [name, service] : services_) {
    for (const auto& topic : service->subscriptions()) broker_->subscribe(topic, name);
  }
  for (const auto& spec : topology_.services) services_.at(spec.name)->start();
  return restart_gateway();
}

Status System::restart_gateway() {
  if (http_) {
    http_->stop();
    http_.reset();
  }
  gateway_.reset();
  if (!user_ || !query_) return ok_status();
  query_port_ = std::make_unique<LocalQueryPort>(*query_);
  login_port_ = std::make_unique<LocalLoginPort>(*user_);
  auto& ids = ids_["gateway"];
  if (!ids) {
    ids = std::unique_ptr<chassis::IdGenerator>(
        new chassis::IdGenerator(chassis::IdGenerator::derived(topology_.seed, "gateway")));
  }
  gateway_ = std::make_unique<gateway::Gateway>(gateway::GatewayOptions{topology_.token_secret},
                                                *broker_, *query_port_, *login_port_, *clock_,
                                                *ids);
  if (topology_.gateway_port) {
    http_ = std::make_unique<gateway::HttpServer>();
    auto port = http_->start("127.0.0.1", *topology_.gateway_port,
                             [this](const gateway::HttpRequest& request) {
                               return gateway_->handle(request);
                             });
    if (!port.ok()) return port.error();
  }
  return ok_status();
}

std::optional<std::string> System::gateway_url() const {
  if (!http_) return std::nullopt;
  return "http://127.0.0.1:" + std::to_string(http_->port());
}

gateway::HttpResponse System::request(const std::string& method, const std::string& path,
                                      const Json& body, const std::string& token,
                                      std::map<std::string, std::string> query) {
  if (!gateway_) {
    return gateway::error_response(503, make_error(ErrorCode::kInvalidConfig, "no gateway"));
  }
  gateway::HttpRequest request{method, path, std::move(query), std::nullopt,
                               body.is_null() ? std::string() : body.dump()};
  if (!token.empty()) request.authorization = "Bearer " + token;
  return gateway_->handle(request);
}

Status System::inject_fault(const FaultSpec& spec) {
  if (topology_.clock_mode != ClockMode::kSimulated) {
    return make_error(ErrorCode::kUnsupportedInWallClockMode, "faults need the simulated clock");
  }
  return broker_->add_fault(spec);
}

void System::clear_faults() { broker_->clear_faults(); }

chassis::EventStore* System::store(const std::string& service) {
  auto it = stores_.find(service);
  return it == stores_.end() ? nullptr : it->second.get();
}

std::vector<std::vector<chassis::EventEnvelope>> System::logs() const {
  std::vector<std::vector<chassis::EventEnvelope>> out;
  for (const auto& spec : topology_.services) {
    auto it = stores_.find(spec.name);
    if (it != stores_.end()) out.push_back(it->second->read_all());
  }
  return out;
}

std::set<std::tuple<std::string, std::string, std::string>> System::consumed_commands() const {
  return consumed_commands_;
}

void System::deliver(const chassis::Delivery& delivery) {
  auto service = services_.find(delivery.group);
  if (service == services_.end()) {
    broker_->ack(delivery.delivery_id);
    return;
  }
  auto& position = positions_[{delivery.group, delivery.topic}];
  if (!position) {
    position = std::make_unique<chassis::ConsumerPosition>(delivery.group, delivery.topic);
  }
  const std::string& topic = delivery.topic;
  constexpr std::string_view kCommands = ".commands";
  if (topic.size() > kCommands.size() &&
      topic.compare(topic.size() - kCommands.size(), kCommands.size(), kCommands) == 0) {
    const std::string command_id = delivery.envelope.payload.value("command_id", "");
    consumed_commands_.emplace(topic.substr(0, topic.size() - kCommands.size()),
                               delivery.envelope.event_type,
                               command_id.find(':') == std::string::npos ? "gateway" : "saga");
  }
  auto outcome = position->deliver(delivery.envelope, [&](const chassis::EventEnvelope& e) {
    return service->second->on_message(topic, e);
  });
  if (outcome == chassis::HandlerOutcome::kAck) {
    broker_->ack(delivery.delivery_id);
  } else {
    broker_->nack(delivery.delivery_id);
  }
}

Result<DrainReport> System::drain(const DrainOptions& options) {
  const chassis::BrokerCounters before = broker_->counters();
  std::uint64_t skipped_before = 0;
  for (const auto& [key, position] : positions_) skipped_before += position->skipped_duplicates();
  const Millis started_at = clock_->now_ms();
  DrainReport report;
  auto* sim = simulated_clock();

  auto flush_all = [&] {
    std::size_t pending = 0;
    for (auto& [name, store] : stores_) {
      (void)store->flush_outbox();
      pending += store->outbox_size();
    }
    return pending;
  };

  for (;; ++report.steps) {
    if (report.steps >= options.max_steps ||
        clock_->now_ms() - started_at > options.max_sim_ms) {
      return make_error(ErrorCode::kTimeout, "no quiescence after " +
                                                 std::to_string(report.steps) + " steps");
    }
    const std::size_t unpublished = flush_all();
    if (auto delivery = broker_->poll()) {
      deliver(*delivery);
      continue;
    }
    if (std::size_t fired = timers_.fire_due(clock_->now_ms()); fired > 0) {
      report.timers_fired += fired;
      continue;
    }
    std::optional<Millis> next = broker_->next_ready_at();
    if (auto timer = timers_.next_deadline(); timer && (!next || *timer < *next)) next = timer;
    if (!next) {
      if (unpublished == 0) break;
      // Outbox entries but no broker progress possible: retry after a beat.
      next = clock_->now_ms() + topology_.broker.ack_timeout_ms;
    }
    if (sim != nullptr) {
      sim->advance_to(std::max(*next, sim->now_ms()));
    } else {
      auto wait = std::clamp<Millis>(*next - clock_->now_ms(), 0, 50);
      std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    }
  }

  const chassis::BrokerCounters after = broker_->counters();
  report.delivered = after.delivered - before.delivered;
  report.dropped = after.dropped - before.dropped;
  report.duplicated = after.duplicated - before.duplicated;
  report.delayed = after.delayed - before.delayed;
  report.redelivered = after.redelivered - before.redelivered;
  report.dead_lettered = after.dead_lettered - before.dead_lettered;
  std::uint64_t skipped_after = 0;
  for (const auto& [key, position] : positions_) skipped_after += position->skipped_duplicates();
  report.duplicates_skipped = skipped_after - skipped_before;
  report.clock_ms = clock_->now_ms();
  return report;
}

}  // namespace hacknizer::harness
