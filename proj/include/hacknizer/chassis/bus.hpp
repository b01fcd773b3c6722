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
#include <string>

#include "hacknizer/chassis/envelope.hpp"
#include "hacknizer/common/result.hpp"

namespace hacknizer::chassis {

// Publishing side of the pub/sub contract. An OK status is the broker's
// acknowledgment; BrokerUnavailable means the caller must retry later.
class MessageBus {
 public:
  virtual ~MessageBus() = default;
  virtual Status publish(const std::string& topic, const EventEnvelope& envelope) = 0;
};

// What a consumer tells the broker after handling one delivery.
enum class HandlerOutcome { kAck, kRetry };

using EnvelopeHandler = std::function<HandlerOutcome(const EventEnvelope&)>;

}  // namespace hacknizer::chassis
