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

#include "hacknizer/chassis/consumer.hpp"

namespace hacknizer::chassis {

HandlerOutcome ConsumerPosition::deliver(const EventEnvelope& envelope,
                                         const EnvelopeHandler& handler) {
  {
    std::lock_guard lock(mu_);
    if (processed_ids_.count(envelope.event_id) != 0) {
      ++skipped_;
      return HandlerOutcome::kAck;
    }
  }
  HandlerOutcome outcome = handler(envelope);
  if (outcome == HandlerOutcome::kAck) {
    std::lock_guard lock(mu_);
    processed_ids_.insert(envelope.event_id);
  }
  return outcome;
}

bool ConsumerPosition::processed(const std::string& event_id) const {
  std::lock_guard lock(mu_);
  return processed_ids_.count(event_id) != 0;
}

std::size_t ConsumerPosition::processed_count() const {
  std::lock_guard lock(mu_);
  return processed_ids_.size();
}

std::size_t ConsumerPosition::skipped_duplicates() const {
  std::lock_guard lock(mu_);
  return skipped_;
}

}  // namespace hacknizer::chassis
