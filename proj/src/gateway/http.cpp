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

#include "hacknizer/gateway/http.hpp"

#include <httplib.h>

namespace hacknizer::gateway {

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer() : impl_(std::make_unique<Impl>()) {}

HttpServer::~HttpServer() { stop(); }

Result<int> HttpServer::start(const std::string& host, int port, Handler handler) {
  auto route = [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [key, value] : req.params) request.query[key] = value;
    if (req.has_header("Authorization")) request.authorization = req.get_header_value("Authorization");
    request.body = req.body;
    HttpResponse response = handler(request);
    res.status = response.status;
    res.set_content(response.body.dump(), "application/json");
  };
  const std::string any = R"(/.*)";
  impl_->server.Get(any, route);
  impl_->server.Post(any, route);
  impl_->server.Patch(any, route);
  impl_->server.Delete(any, route);
  impl_->server.Put(any, route);

  // httplib's default also sets SO_REUSEPORT, which would let a second
  // server share a busy port instead of failing.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  if (port == 0) {
    port = impl_->server.bind_to_any_port(host);
    if (port < 0) return make_error(ErrorCode::kPortInUse, host + ":any");
  } else if (!impl_->server.bind_to_port(host, port)) {
    return make_error(ErrorCode::kPortInUse, host + ":" + std::to_string(port));
  }
  port_ = port;
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void HttpServer::stop() {
  if (!thread_.joinable()) return;
  impl_->server.stop();
  thread_.join();
}

Result<HttpResponse> http_call(const std::string& base_url, const std::string& method,
                               const std::string& path, const Json& body,
                               const std::string& bearer_token) {
  httplib::Client client(base_url);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(10, 0);
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
  const std::string payload = body.is_null() ? std::string() : body.dump();
  httplib::Result result;
  if (method == "GET") {
    result = client.Get(path, headers);
  } else if (method == "POST") {
    result = client.Post(path, headers, payload, "application/json");
  } else if (method == "PATCH") {
    result = client.Patch(path, headers, payload, "application/json");
  } else if (method == "DELETE") {
    result = client.Delete(path, headers, payload, "application/json");
  } else {
    return make_error(ErrorCode::kInvalidInput, "unsupported method " + method);
  }
  if (!result) {
    return make_error(ErrorCode::kBrokerUnavailable,
                      base_url + path + ": " + httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.body = result->body.empty() ? Json::object() : Json::parse(result->body, nullptr, false);
  if (response.body.is_discarded()) response.body = Json{{"raw", result->body}};
  return response;
}

}  // namespace hacknizer::gateway
