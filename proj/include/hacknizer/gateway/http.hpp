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
#include <memory>
#include <string>
#include <thread>

#include "hacknizer/gateway/gateway.hpp"

namespace hacknizer::gateway {

// Minimal HTTP listener around a request handler; runs on its own thread.
class HttpServer {
 public:
  using Handler = std::function<HttpResponse(const HttpRequest&)>;

  HttpServer();
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. PortInUse when the port cannot be bound.
  Result<int> start(const std::string& host, int port, Handler handler);
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

// One blocking request against `base_url` (e.g. http://127.0.0.1:8080).
// BrokerUnavailable when the peer cannot be reached.
Result<HttpResponse> http_call(const std::string& base_url, const std::string& method,
                               const std::string& path, const Json& body = nullptr,
                               const std::string& bearer_token = {});

}  // namespace hacknizer::gateway
