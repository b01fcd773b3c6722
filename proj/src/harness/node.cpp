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

#include "hacknizer/harness/node.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hacknizer/chassis/consumer.hpp"
#include "hacknizer/gateway/http.hpp"
#include "hacknizer/harness/system.hpp"

namespace hacknizer::harness {

using gateway::HttpRequest;
using gateway::HttpResponse;

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

Result<int> to_int(const std::string& key, const std::string& text) {
  int value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    return make_error(ErrorCode::kInvalidConfig, key + " is not an integer: " + text);
  }
  return value;
}

// Non-2xx answers carry {"error": "<code>", "message": ...}.
Result<Json> unwrap(Result<HttpResponse> response) {
  if (!response.ok()) return response.error();
  if (response->status >= 200 && response->status < 300) return std::move(response->body);
  const std::string name = response->body.value("error", "");
  const auto code = error_code_from_string(name).value_or(ErrorCode::kBrokerUnavailable);
  return make_error(code, response->body.value("message", "HTTP " + std::to_string(response->status)));
}

HttpResponse answer(const Result<Json>& result) {
  if (result.ok()) return HttpResponse{200, *result};
  return gateway::error_response(gateway::status_for(result.code()), result.error());
}

Json delivery_to_json(const chassis::Delivery& d) {
  return {{"delivery_id", d.delivery_id}, {"topic", d.topic},       {"group", d.group},
          {"envelope", chassis::to_json(d.envelope)}, {"attempt", d.attempt},
          {"duplicate", d.duplicate}};
}

Result<chassis::Delivery> delivery_from_json(const Json& j) {
  auto envelope = chassis::from_json(j.at("envelope"));
  if (!envelope.ok()) return envelope.error();
  return chassis::Delivery{j.at("delivery_id").get<std::uint64_t>(), j.at("topic"), j.at("group"),
                           std::move(envelope).value(), j.at("attempt"), j.at("duplicate")};
}

}  // namespace

Result<std::map<std::string, std::string>> parse_config(std::string_view text) {
  std::map<std::string, std::string> values;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      return make_error(ErrorCode::kInvalidConfig, "line " + std::to_string(number) + ": no '='");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) {
      return make_error(ErrorCode::kInvalidConfig, "line " + std::to_string(number) + ": no key");
    }
    values[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return values;
}

Result<std::map<std::string, std::string>> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::kInvalidConfig, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

Result<NodeConfig> node_config(const std::string& service,
                               const std::map<std::string, std::string>& values) {
  NodeConfig config;
  config.service = service;
  for (const auto& [key, value] : values) {
    if (key == "port") {
      auto port = to_int(key, value);
      if (!port.ok()) return port.error();
      config.port = *port;
    } else if (key == "host") {
      config.host = value;
    } else if (key == "data_dir") {
      config.data_dir = value;
    } else if (key == "broker") {
      config.broker_url = value;
    } else if (key == "user_url") {
      config.user_url = value;
    } else if (key == "query_url") {
      config.query_url = value;
    } else if (key == "token_secret") {
      config.token_secret = value;
    } else if (key == "saga_secret") {
      config.saga_secret = value;
    } else if (key == "admin_email") {
      config.admin_email = value;
    } else if (key == "admin_password") {
      config.admin_password = value;
    } else if (key == "password_log2_n") {
      auto n = to_int(key, value);
      if (!n.ok()) return n.error();
      config.password_log2_n = *n;
    } else if (key == "port_file") {
      config.port_file = value;
    } else {
      return make_error(ErrorCode::kInvalidConfig, "unknown key '" + key + "'");
    }
  }
  static const std::set<std::string> kKnown = {"user", "hackathon", "team",    "page",
                                              "saga", "query",     "gateway", "broker"};
  if (!kKnown.count(service)) {
    return make_error(ErrorCode::kInvalidConfig, "unknown service '" + service + "'");
  }
  if (service != "broker" && service != "gateway" && service != "query" &&
      config.data_dir.empty()) {
    return make_error(ErrorCode::kInvalidConfig, service + " needs data_dir");
  }
  if (service != "broker" && config.broker_url.empty()) {
    return make_error(ErrorCode::kInvalidConfig, service + " needs broker");
  }
  if (service == "gateway" && (config.user_url.empty() || config.query_url.empty())) {
    return make_error(ErrorCode::kInvalidConfig, "gateway needs user_url and query_url");
  }
  return config;
}

// --- broker surface -------------------------------------------------------

HttpResponse handle_broker_request(chassis::Broker& broker, const HttpRequest& request) {
  const Json body = request.body.empty() ? Json::object() : Json::parse(request.body, nullptr, false);
  if (request.method != "POST" || body.is_discarded() || !body.is_object()) {
    return gateway::error_response(400, make_error(ErrorCode::kInvalidInput, "bad broker request"));
  }
  try {
    if (request.path == "/publish") {
      auto envelope = chassis::from_json(body.at("envelope"));
      if (!envelope.ok()) return answer(envelope.error());
      auto status = broker.publish(body.at("topic"), *envelope);
      if (!status.ok()) return answer(status.error());
      return HttpResponse{200, Json::object()};
    }
    if (request.path == "/subscribe") {
      broker.subscribe(body.at("topic"), body.at("group"));
      return HttpResponse{200, Json::object()};
    }
    if (request.path == "/poll") {
      auto delivery = broker.poll(body.at("group"));
      return HttpResponse{200, {{"delivery", delivery ? delivery_to_json(*delivery) : Json()}}};
    }
    if (request.path == "/ack") {
      broker.ack(body.at("delivery_id").get<std::uint64_t>());
      return HttpResponse{200, Json::object()};
    }
    if (request.path == "/nack") {
      broker.nack(body.at("delivery_id").get<std::uint64_t>());
      return HttpResponse{200, Json::object()};
    }
    if (request.path == "/pending") {
      return HttpResponse{200, {{"pending", broker.pending(body.at("group"))}}};
    }
  } catch (const Json::exception& e) {
    return gateway::error_response(400, make_error(ErrorCode::kInvalidInput, e.what()));
  }
  return gateway::error_response(404, make_error(ErrorCode::kNotFound, request.path));
}

// --- clients --------------------------------------------------------------

Result<Json> RemoteBus::post(const std::string& path, const Json& body) {
  return unwrap(gateway::http_call(url_, "POST", path, body));
}

Status RemoteBus::publish(const std::string& topic, const chassis::EventEnvelope& envelope) {
  auto result = post("/publish", {{"topic", topic}, {"envelope", chassis::to_json(envelope)}});
  if (!result.ok()) return result.error();
  return ok_status();
}

Status RemoteBus::subscribe(const std::string& topic, const std::string& group) {
  auto result = post("/subscribe", {{"topic", topic}, {"group", group}});
  if (!result.ok()) return result.error();
  return ok_status();
}

Result<std::optional<chassis::Delivery>> RemoteBus::poll(const std::string& group) {
  auto result = post("/poll", {{"group", group}});
  if (!result.ok()) return result.error();
  const Json& delivery = (*result)["delivery"];
  if (delivery.is_null()) return std::optional<chassis::Delivery>();
  auto parsed = delivery_from_json(delivery);
  if (!parsed.ok()) return parsed.error();
  return std::optional<chassis::Delivery>(std::move(parsed).value());
}

Status RemoteBus::ack(std::uint64_t delivery_id) {
  auto result = post("/ack", {{"delivery_id", delivery_id}});
  if (!result.ok()) return result.error();
  return ok_status();
}

Status RemoteBus::nack(std::uint64_t delivery_id) {
  auto result = post("/nack", {{"delivery_id", delivery_id}});
  if (!result.ok()) return result.error();
  return ok_status();
}

Result<std::size_t> RemoteBus::pending(const std::string& group) {
  auto result = post("/pending", {{"group", group}});
  if (!result.ok()) return result.error();
  return (*result)["pending"].get<std::size_t>();
}

Result<Json> RemoteQueryPort::get(const std::string& view, const std::string& id) {
  return unwrap(gateway::http_call(url_, "POST", "/internal/query",
                                   {{"view", view}, {"id", id}}));
}

Result<Json> RemoteQueryPort::list_hackathons(const std::optional<std::string>& state) {
  Json body{{"view", "list"}};
  if (state) body["state"] = *state;
  return unwrap(gateway::http_call(url_, "POST", "/internal/query", body));
}

Result<user::AuthToken> RemoteLoginPort::authenticate(const std::string& email,
                                                      const std::string& password) {
  auto result = unwrap(gateway::http_call(url_, "POST", "/internal/login",
                                          {{"email", email}, {"password", password}}));
  if (!result.ok()) return result.error();
  auto principal = chassis::principal_from_json(result->at("principal"));
  if (!principal.ok()) return principal.error();
  return user::AuthToken{result->at("token"), std::move(principal).value()};
}

// --- node runners ---------------------------------------------------------

namespace {

void sleep_ms(int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); }

Status write_port_file(const NodeConfig& config, int port) {
  if (config.port_file.empty()) return ok_status();
  const std::string tmp = config.port_file + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << port << "\n";
    if (!out) return make_error(ErrorCode::kStorageError, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, config.port_file);
  return ok_status();
}

int serve_until_stopped(gateway::HttpServer& server, const NodeConfig& config,
                        gateway::HttpServer::Handler handler, const std::atomic<bool>& stop,
                        std::ostream& log, const std::function<void()>& tick = {}) {
  auto port = server.start(config.host, config.port, std::move(handler));
  if (!port.ok()) {
    log << "error: " << port.error().to_string() << "\n";
    return 2;
  }
  if (auto written = write_port_file(config, *port); !written.ok()) {
    log << "error: " << written.error().to_string() << "\n";
    return 2;
  }
  log << config.service << " listening on " << config.host << ":" << *port << std::endl;
  while (!stop.load()) {
    if (tick) {
      tick();
    } else {
      sleep_ms(20);
    }
  }
  server.stop();
  return 0;
}

int run_broker(const NodeConfig& config, const std::atomic<bool>& stop, std::ostream& log) {
  chassis::WallClock clock;
  chassis::Broker broker(clock);
  gateway::HttpServer server;
  return serve_until_stopped(
      server, config,
      [&broker](const HttpRequest& request) { return handle_broker_request(broker, request); },
      stop, log);
}

int run_gateway(const NodeConfig& config, const std::atomic<bool>& stop, std::ostream& log) {
  chassis::WallClock clock;
  auto ids = chassis::IdGenerator::from_entropy();
  RemoteBus bus(config.broker_url);
  RemoteQueryPort queries(config.query_url);
  RemoteLoginPort login(config.user_url);
  gateway::Gateway gateway(gateway::GatewayOptions{config.token_secret}, bus, queries, login,
                           clock, ids);
  gateway::HttpServer server;
  return serve_until_stopped(
      server, config, [&gateway](const HttpRequest& request) { return gateway.handle(request); },
      stop, log);
}

// One service: local store, remote broker, timers on the wall clock. Every
// touch of the service (deliveries, timers, HTTP reads) holds `mu`.
int run_service(const NodeConfig& config, const std::atomic<bool>& stop, std::ostream& log) {
  chassis::WallClock clock;
  auto ids = chassis::IdGenerator::from_entropy();
  auto store_ids = chassis::IdGenerator::from_entropy();
  chassis::TimerQueue timers;
  RemoteBus bus(config.broker_url);
  std::mutex mu;

  std::unique_ptr<chassis::EventStore> store;
  std::unique_ptr<chassis::Service> service;
  user::UserService* user = nullptr;
  query::QueryService* query = nullptr;

  if (config.service == "query") {
    std::filesystem::path checkpoint;
    if (!config.data_dir.empty()) {
      std::filesystem::create_directories(config.data_dir);
      checkpoint = std::filesystem::path(config.data_dir) / "query.checkpoint";
    }
    auto owned = std::make_unique<query::QueryService>(checkpoint);
    owned->set_lag_source([&bus]() -> std::size_t {
      auto pending = bus.pending("query");
      return pending.ok() ? *pending : 0;
    });
    query = owned.get();
    service = std::move(owned);
  } else {
    auto opened = chassis::EventStore::open({config.service, config.data_dir}, clock, store_ids);
    if (!opened.ok()) {
      log << "error: " << opened.error().to_string() << "\n";
      return 2;
    }
    store = std::move(opened).value();
    chassis::ServiceEnv env{store.get(), &bus, &clock, &ids, &timers};
    if (config.service == "user") {
      user::UserServiceOptions options;
      options.token_secret = config.token_secret;
      options.password_params.log2_n = config.password_log2_n;
      options.admin_email = config.admin_email;
      options.admin_password = config.admin_password;
      auto owned = std::make_unique<user::UserService>(env, options);
      user = owned.get();
      service = std::move(owned);
    } else if (config.service == "hackathon") {
      hackathon::HackathonServiceOptions options;
      options.saga_secret = config.saga_secret;
      service = std::make_unique<hackathon::HackathonService>(env, options);
    } else if (config.service == "team") {
      service = std::make_unique<team::TeamService>(env, team::TeamServiceOptions{config.saga_secret});
    } else if (config.service == "page") {
      service = std::make_unique<page::PageService>(env);
    } else {
      service = std::make_unique<saga::SagaCoordinator>(
          env, saga::SagaCoordinatorOptions{config.saga_secret});
    }
  }

  // The broker may come up after us; keep trying to subscribe.
  for (const auto& topic : service->subscriptions()) {
    while (!bus.subscribe(topic, service->name()).ok()) {
      if (stop.load()) return 0;
      sleep_ms(100);
    }
  }
  {
    std::lock_guard lock(mu);
    service->start();
  }

  std::map<std::string, std::unique_ptr<chassis::ConsumerPosition>> positions;
  auto tick = [&] {
    bool worked = false;
    {
      std::lock_guard lock(mu);
      if (store) (void)store->flush_outbox();
      timers.fire_due(clock.now_ms());
    }
    auto delivery = bus.poll(service->name());
    if (delivery.ok() && delivery->has_value()) {
      const chassis::Delivery& d = **delivery;
      auto& position = positions[d.topic];
      if (!position) position = std::make_unique<chassis::ConsumerPosition>(service->name(), d.topic);
      chassis::HandlerOutcome outcome;
      {
        std::lock_guard lock(mu);
        outcome = position->deliver(d.envelope, [&](const chassis::EventEnvelope& e) {
          return service->on_message(d.topic, e);
        });
      }
      (void)(outcome == chassis::HandlerOutcome::kAck ? bus.ack(d.delivery_id)
                                                       : bus.nack(d.delivery_id));
      worked = true;
    }
    if (!worked) sleep_ms(10);
  };

  gateway::HttpServer server;
  auto handler = [&](const HttpRequest& request) -> HttpResponse {
    const Json body = request.body.empty() ? Json::object()
                                           : Json::parse(request.body, nullptr, false);
    if (request.path == "/health") return HttpResponse{200, {{"service", config.service}}};
    if (body.is_discarded() || !body.is_object()) {
      return gateway::error_response(400, make_error(ErrorCode::kInvalidInput, "bad body"));
    }
    std::lock_guard lock(mu);
    if (user && request.path == "/internal/login") {
      auto token = user->authenticate(body.value("email", ""), body.value("password", ""));
      if (!token.ok()) return answer(token.error());
      return HttpResponse{200, {{"token", token->token},
                                {"principal", chassis::to_json(token->principal)}}};
    }
    if (query && request.path == "/internal/query") {
      const std::string view = body.value("view", "");
      const std::string id = body.value("id", "");
      if (view == "list") {
        std::optional<std::string> state;
        if (body.contains("state")) state = body["state"].get<std::string>();
        return answer(query->list_hackathons(state));
      }
      if (view == "overview") return answer(query->get_overview(id));
      if (view == "public_page") return answer(query->get_public_page(id));
      if (view == "roster") return answer(query->get_roster(id));
      if (view == "dashboard") return answer(query->get_dashboard(id));
      if (view == "saga") return answer(query->get_saga(id));
      if (view == "command") return answer(query->get_command(id));
    }
    return gateway::error_response(404, make_error(ErrorCode::kNotFound, request.path));
  };
  const int code = serve_until_stopped(server, config, handler, stop, log, tick);
  if (query) (void)query->checkpoint();
  return code;
}

}  // namespace

int run_node(const NodeConfig& config, const std::atomic<bool>& stop, std::ostream& log) {
  if (config.service == "broker") return run_broker(config, stop, log);
  if (config.service == "gateway") return run_gateway(config, stop, log);
  return run_service(config, stop, log);
}

}  // namespace hacknizer::harness
