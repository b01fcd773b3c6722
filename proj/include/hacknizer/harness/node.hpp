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

#include <atomic>
#include <map>
#include <ostream>
#include <string>

#include "hacknizer/chassis/broker.hpp"
#include "hacknizer/chassis/bus.hpp"
#include "hacknizer/gateway/gateway.hpp"

namespace hacknizer::harness {

// Multi-process mode: one OS process per service, talking to a broker
// process over HTTP. Wall clock only; no determinism promise.

// Flat `key = value` lines; '#' starts a comment.
Result<std::map<std::string, std::string>> parse_config(std::string_view text);
Result<std::map<std::string, std::string>> load_config(const std::string& path);

struct NodeConfig {
  std::string service;  // user|hackathon|team|page|saga|query|gateway|broker
  std::string host = "127.0.0.1";
  int port = 0;
  std::string data_dir;
  std::string broker_url;  // http://host:port of the broker node
  std::string user_url;    // gateway only
  std::string query_url;   // gateway only
  std::string token_secret = "hacknizer-dev-token-secret";
  std::string saga_secret = "hacknizer-dev-saga-secret";
  std::string admin_email = "admin@hacknizer.local";
  std::string admin_password = "admin-password";
  int password_log2_n = 14;
  std::string port_file;  // when set, the bound port is written here
};

// Unknown keys are InvalidConfig, so typos do not pass silently.
Result<NodeConfig> node_config(const std::string& service,
                               const std::map<std::string, std::string>& values);

// Runs until `stop` is set. Returns the process exit code: 0 on a clean
// stop, 2 when the node refuses to start (e.g. a data directory that
// belongs to another service).
int run_node(const NodeConfig& config, const std::atomic<bool>& stop, std::ostream& log);

// Client side of the broker node.
class RemoteBus final : public chassis::MessageBus {
 public:
  explicit RemoteBus(std::string broker_url) : url_(std::move(broker_url)) {}
  Status publish(const std::string& topic, const chassis::EventEnvelope& envelope) override;
  Status subscribe(const std::string& topic, const std::string& group);
  Result<std::optional<chassis::Delivery>> poll(const std::string& group);
  Status ack(std::uint64_t delivery_id);
  Status nack(std::uint64_t delivery_id);
  Result<std::size_t> pending(const std::string& group);

 private:
  Result<Json> post(const std::string& path, const Json& body);
  std::string url_;
};

class RemoteQueryPort final : public gateway::QueryPort {
 public:
  explicit RemoteQueryPort(std::string url) : url_(std::move(url)) {}
  Result<Json> overview(const std::string& id) override { return get("overview", id); }
  Result<Json> list_hackathons(const std::optional<std::string>& state) override;
  Result<Json> public_page(const std::string& id) override { return get("public_page", id); }
  Result<Json> roster(const std::string& id) override { return get("roster", id); }
  Result<Json> dashboard(const std::string& id) override { return get("dashboard", id); }
  Result<Json> saga(const std::string& id) override { return get("saga", id); }
  Result<Json> command(const std::string& id) override { return get("command", id); }

 private:
  Result<Json> get(const std::string& view, const std::string& id);
  std::string url_;
};

class RemoteLoginPort final : public gateway::LoginPort {
 public:
  explicit RemoteLoginPort(std::string url) : url_(std::move(url)) {}
  Result<user::AuthToken> authenticate(const std::string& email,
                                       const std::string& password) override;

 private:
  std::string url_;
};

// The broker's HTTP surface, usable in-process for tests.
gateway::HttpResponse handle_broker_request(chassis::Broker& broker,
                                            const gateway::HttpRequest& request);

}  // namespace hacknizer::harness
