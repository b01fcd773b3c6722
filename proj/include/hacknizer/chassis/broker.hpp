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
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hacknizer/chassis/bus.hpp"
#include "hacknizer/chassis/clock.hpp"
#include "hacknizer/harness/fault_spec.hpp"

namespace hacknizer::chassis {

struct BrokerOptions {
  Millis ack_timeout_ms = 1000;
  int max_delivery_attempts = 16;
  std::uint64_t fault_seed = 0;
};

struct Delivery {
  std::uint64_t delivery_id = 0;
  std::string topic;
  std::string group;
  EventEnvelope envelope;
  int attempt = 0;
  bool duplicate = false;
};

struct DeadLetter {
  std::string topic;
  std::string group;
  EventEnvelope envelope;
  int attempts = 0;
};

struct BrokerCounters {
  std::uint64_t published = 0;
  std::uint64_t delivered = 0;
  std::uint64_t acked = 0;
  std::uint64_t nacked = 0;
  std::uint64_t dropped = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t delayed = 0;
  std::uint64_t redelivered = 0;
  std::uint64_t dead_lettered = 0;

  bool operator==(const BrokerCounters&) const = default;
};

Json to_json(const BrokerCounters& counters);

// In-memory pull broker with consumer groups and at-least-once delivery.
//
// Each (topic, group, stream_id) is a FIFO lane with at most one delivery in
// flight, so a group sees the envelopes of one stream serially and in publish
// order. A delivery not acked within ack_timeout_ms is handed out again; after
// max_delivery_attempts it moves to the dead-letter list. Faults are rolled
// once per delivery attempt from a seeded source.
class Broker final : public MessageBus {
 public:
  explicit Broker(const Clock& clock, BrokerOptions options = {});

  Status publish(const std::string& topic, const EventEnvelope& envelope) override;

  // Messages published before a group subscribes are not replayed to it.
  void subscribe(const std::string& topic, const std::string& group);

  // Earliest ready delivery (by ready time, then publish order). An empty
  // group accepts any.
  std::optional<Delivery> poll(const std::string& group = {});
  void ack(std::uint64_t delivery_id);
  void nack(std::uint64_t delivery_id);

  // Earliest future instant at which poll could return something.
  std::optional<Millis> next_ready_at() const;
  bool idle() const;
  std::size_t pending(const std::string& group) const;

  Status add_fault(const harness::FaultSpec& spec);
  void clear_faults();
  void set_available(bool available);

  BrokerCounters counters() const;
  std::vector<DeadLetter> dead_letters() const;
  std::vector<std::string> topics() const;

 private:
  using LaneKey = std::tuple<std::string, std::string, std::string>;  // topic, group, stream

  struct Message {
    EventEnvelope envelope;
    std::uint64_t seq = 0;
    int attempts = 0;
    bool duplicate = false;
    bool rolled = false;
  };

  struct Lane {
    std::deque<Message> queue;
    Millis ready_at = 0;
    bool in_flight = false;
    std::uint64_t delivery_id = 0;
    Millis deadline = 0;
  };

  void expire_in_flight(Millis now);
  // Returns true when the head may be handed out now.
  bool roll_faults(const LaneKey& key, Lane& lane, Millis now);
  void dead_letter_head(const LaneKey& key, Lane& lane);
  void erase_if_empty(const LaneKey& key);
  bool chance(double rate);

  const Clock& clock_;
  BrokerOptions options_;

  mutable std::mutex mu_;
  std::mt19937_64 fault_rng_;
  std::vector<harness::FaultSpec> faults_;
  bool available_ = true;
  std::map<std::string, std::set<std::string>> subscriptions_;
  std::map<LaneKey, Lane> lanes_;
  std::map<std::uint64_t, LaneKey> in_flight_;
  std::vector<DeadLetter> dead_letters_;
  BrokerCounters counters_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t next_delivery_id_ = 1;
};

}  // namespace hacknizer::chassis
