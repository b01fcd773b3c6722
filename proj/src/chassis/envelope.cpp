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

#include "hacknizer/chassis/envelope.hpp"

#include <array>

namespace hacknizer::chassis {

namespace {

constexpr std::array<std::string_view, 9> kFields = {
    "causation_id", "correlation_id", "event_id",   "event_type", "occurred_at",
    "payload",      "sequence",       "stream_id", "stream_type"};

}  // namespace

Json to_json(const EventEnvelope& envelope) {
  return Json{{"event_id", envelope.event_id},
              {"stream_id", envelope.stream_id},
              {"stream_type", envelope.stream_type},
              {"sequence", envelope.sequence},
              {"event_type", envelope.event_type},
              {"payload", envelope.payload},
              {"occurred_at", envelope.occurred_at},
              {"correlation_id", envelope.correlation_id},
              {"causation_id", envelope.causation_id}};
}

Result<EventEnvelope> from_json(const Json& document) {
  if (!document.is_object() || document.size() != kFields.size()) {
    return make_error(ErrorCode::kInvalidInput, "envelope must have exactly the envelope fields");
  }
  for (auto field : kFields) {
    if (!document.contains(field)) {
      return make_error(ErrorCode::kInvalidInput, "missing field " + std::string(field));
    }
  }
  try {
    EventEnvelope envelope;
    envelope.event_id = document.at("event_id").get<std::string>();
    envelope.stream_id = document.at("stream_id").get<std::string>();
    envelope.stream_type = document.at("stream_type").get<std::string>();
    envelope.sequence = document.at("sequence").get<std::uint64_t>();
    envelope.event_type = document.at("event_type").get<std::string>();
    envelope.payload = document.at("payload");
    envelope.occurred_at = document.at("occurred_at").get<std::int64_t>();
    envelope.correlation_id = document.at("correlation_id").get<std::string>();
    envelope.causation_id = document.at("causation_id").get<std::string>();
    if (!envelope.payload.is_object()) {
      return make_error(ErrorCode::kInvalidInput, "payload must be an object");
    }
    return envelope;
  } catch (const Json::exception& e) {
    return make_error(ErrorCode::kInvalidInput, e.what());
  }
}

std::string to_wire(const EventEnvelope& envelope) { return canonical(to_json(envelope)); }

Result<EventEnvelope> from_wire(std::string_view line) {
  auto document = Json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (document.is_discarded()) {
    return make_error(ErrorCode::kInvalidInput, "envelope line is not valid JSON");
  }
  return from_json(document);
}

std::string events_topic(std::string_view stream_type) {
  return std::string(stream_type) + ".events";
}

std::string commands_topic(std::string_view context) {
  return std::string(context) + ".commands";
}

std::string canonical(const Json& document) {
  // nlohmann::json objects are std::map backed, so keys come out sorted.
  return document.dump(-1, ' ', false, Json::error_handler_t::replace);
}

}  // namespace hacknizer::chassis
