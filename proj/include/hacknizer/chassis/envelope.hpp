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
#include <string>
#include <string_view>
#include <vector>

#include "hacknizer/common/result.hpp"
#include "json.hpp"

namespace hacknizer {

using Json = nlohmann::json;

namespace chassis {

// The immutable unit of truth. Every state change in every bounded context
// is one of these, appended to a stream and published on
// `<stream_type>.events`.
struct EventEnvelope {
  std::string event_id;
  std::string stream_id;
  std::string stream_type;
  std::uint64_t sequence = 0;
  std::string event_type;
  Json payload = Json::object();
  std::int64_t occurred_at = 0;  // epoch milliseconds, UTC
  std::string correlation_id;
  std::string causation_id;

  bool operator==(const EventEnvelope&) const = default;
};

// An event that has not been appended yet.
struct NewEvent {
  std::string event_type;
  Json payload = Json::object();
};

Json to_json(const EventEnvelope& envelope);
Result<EventEnvelope> from_json(const Json& document);

// Single-line wire form used on the bus and in store logs: a JSON object with
// exactly the envelope fields, keys sorted, no insignificant whitespace.
std::string to_wire(const EventEnvelope& envelope);
Result<EventEnvelope> from_wire(std::string_view line);

std::string events_topic(std::string_view stream_type);
std::string commands_topic(std::string_view context);

// Canonical text of an arbitrary document (sorted keys, compact).
std::string canonical(const Json& document);

}  // namespace chassis
}  // namespace hacknizer
