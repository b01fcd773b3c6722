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

#include <cstddef>
#include <mutex>
#include <string>
#include <unordered_set>

#include "hacknizer/chassis/bus.hpp"

namespace hacknizer::chassis {

// Consumer-side half of the at-least-once contract: remembers which
// event_ids a group has handled so a redelivered envelope never reaches the
// handler twice. An id is recorded only after the handler acked it.
class ConsumerPosition {
 public:
  ConsumerPosition(std::string consumer_group, std::string topic)
      : consumer_group_(std::move(consumer_group)), topic_(std::move(topic)) {}

  HandlerOutcome deliver(const EventEnvelope& envelope, const EnvelopeHandler& handler);

  bool processed(const std::string& event_id) const;
  std::size_t processed_count() const;
  std::size_t skipped_duplicates() const;

  const std::string& consumer_group() const { return consumer_group_; }
  const std::string& topic() const { return topic_; }

 private:
  std::string consumer_group_;
  std::string topic_;
  mutable std::mutex mu_;
  std::unordered_set<std::string> processed_ids_;
  std::size_t skipped_ = 0;
};

}  // namespace hacknizer::chassis
