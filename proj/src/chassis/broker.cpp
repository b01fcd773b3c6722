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

#include "hacknizer/chassis/broker.hpp"

#include <limits>

namespace hacknizer::chassis {

Json to_json(const BrokerCounters& counters) {
  return Json{{"published", counters.published},   {"delivered", counters.delivered},
              {"acked", counters.acked},           {"nacked", counters.nacked},
              {"dropped", counters.dropped},       {"duplicated", counters.duplicated},
              {"delayed", counters.delayed},       {"redelivered", counters.redelivered},
              {"dead_lettered", counters.dead_lettered}};
}

Broker::Broker(const Clock& clock, BrokerOptions options)
    : clock_(clock), options_(options), fault_rng_(options.fault_seed) {}

Status Broker::publish(const std::string& topic, const EventEnvelope& envelope) {
  if (topic.empty()) return make_error(ErrorCode::kInvalidInput, "empty topic");
  std::lock_guard lock(mu_);
  if (!available_) return make_error(ErrorCode::kBrokerUnavailable, topic);
  ++counters_.published;
  const Millis now = clock_.now_ms();
  auto it = subscriptions_.find(topic);
  if (it == subscriptions_.end()) return ok_status();
  const std::uint64_t seq = next_seq_++;
  for (const auto& group : it->second) {
    LaneKey key{topic, group, envelope.stream_id};
    auto [lane_it, inserted] = lanes_.try_emplace(key);
    Lane& lane = lane_it->second;
    if (inserted || (lane.queue.empty() && !lane.in_flight)) lane.ready_at = now;
    lane.queue.push_back(Message{envelope, seq});
  }
  return ok_status();
}

void Broker::subscribe(const std::string& topic, const std::string& group) {
  std::lock_guard lock(mu_);
  subscriptions_[topic].insert(group);
}

bool Broker::chance(double rate) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(fault_rng_) < rate;
}

void Broker::dead_letter_head(const LaneKey& key, Lane& lane) {
  Message& head = lane.queue.front();
  dead_letters_.push_back(DeadLetter{std::get<0>(key), std::get<1>(key), head.envelope, head.attempts});
  ++counters_.dead_lettered;
  lane.queue.pop_front();
  lane.ready_at = clock_.now_ms();
}

void Broker::erase_if_empty(const LaneKey& key) {
  auto it = lanes_.find(key);
  if (it != lanes_.end() && it->second.queue.empty() && !it->second.in_flight) lanes_.erase(it);
}

void Broker::expire_in_flight(Millis now) {
  for (auto it = in_flight_.begin(); it != in_flight_.end();) {
    auto lane_it = lanes_.find(it->second);
    if (lane_it == lanes_.end() || lane_it->second.deadline > now) {
      ++it;
      continue;
    }
    Lane& lane = lane_it->second;
    lane.in_flight = false;
    lane.ready_at = lane.deadline;
    ++counters_.redelivered;
    Message& head = lane.queue.front();
    head.rolled = false;
    if (head.attempts >= options_.max_delivery_attempts) dead_letter_head(lane_it->first, lane);
    LaneKey key = it->second;
    it = in_flight_.erase(it);
    erase_if_empty(key);
  }
}

bool Broker::roll_faults(const LaneKey& key, Lane& lane, Millis now) {
  Message& head = lane.queue.front();
  if (head.rolled) return true;
  head.rolled = true;
  const std::string& topic = std::get<0>(key);
  bool deliver_now = true;
  for (const auto& spec : faults_) {
    if (!spec.matches(topic)) continue;
    switch (spec.kind) {
      case harness::FaultKind::kDrop:
        if (chance(spec.rate)) {
          ++counters_.dropped;
          ++head.attempts;
          head.rolled = false;
          if (head.attempts >= options_.max_delivery_attempts) {
            dead_letter_head(key, lane);
          } else {
            lane.ready_at = now + options_.ack_timeout_ms;
          }
          return false;
        }
        break;
      case harness::FaultKind::kDelay:
        if (chance(spec.rate)) {
          Millis delay = std::uniform_int_distribution<Millis>(spec.delay_min_ms,
                                                               spec.delay_max_ms)(fault_rng_);
          ++counters_.delayed;
          if (delay > 0) {
            lane.ready_at = now + delay;
            deliver_now = false;
          }
        }
        break;
      case harness::FaultKind::kDuplicate:
        if (chance(spec.rate)) {
          ++counters_.duplicated;
          Message copy = head;
          copy.duplicate = true;
          copy.attempts = 0;
          lane.queue.insert(lane.queue.begin() + 1, std::move(copy));
        }
        break;
    }
  }
  return deliver_now;
}

std::optional<Delivery> Broker::poll(const std::string& group) {
  std::lock_guard lock(mu_);
  const Millis now = clock_.now_ms();
  expire_in_flight(now);
  while (true) {
    const LaneKey* best_key = nullptr;
    Lane* best = nullptr;
    for (auto& [key, lane] : lanes_) {
      if (lane.in_flight || lane.queue.empty() || lane.ready_at > now) continue;
      if (!group.empty() && std::get<1>(key) != group) continue;
      if (best == nullptr || lane.ready_at < best->ready_at ||
          (lane.ready_at == best->ready_at &&
           lane.queue.front().seq < best->queue.front().seq)) {
        best_key = &key;
        best = &lane;
      }
    }
    if (best == nullptr) return std::nullopt;
    LaneKey key = *best_key;
    if (!roll_faults(key, *best, now)) {
      erase_if_empty(key);
      continue;
    }
    Message& head = best->queue.front();
    ++head.attempts;
    best->in_flight = true;
    best->delivery_id = next_delivery_id_++;
    best->deadline = now + options_.ack_timeout_ms;
    in_flight_.emplace(best->delivery_id, key);
    ++counters_.delivered;
    return Delivery{best->delivery_id, std::get<0>(key), std::get<1>(key), head.envelope,
                    head.attempts, head.duplicate};
  }
}

void Broker::ack(std::uint64_t delivery_id) {
  std::lock_guard lock(mu_);
  auto it = in_flight_.find(delivery_id);
  if (it == in_flight_.end()) return;  // already timed out and re-queued
  LaneKey key = it->second;
  in_flight_.erase(it);
  Lane& lane = lanes_.at(key);
  lane.in_flight = false;
  lane.queue.pop_front();
  lane.ready_at = clock_.now_ms();
  ++counters_.acked;
  erase_if_empty(key);
}

void Broker::nack(std::uint64_t delivery_id) {
  std::lock_guard lock(mu_);
  auto it = in_flight_.find(delivery_id);
  if (it == in_flight_.end()) return;
  LaneKey key = it->second;
  in_flight_.erase(it);
  Lane& lane = lanes_.at(key);
  lane.in_flight = false;
  ++counters_.nacked;
  Message& head = lane.queue.front();
  head.rolled = false;
  if (head.attempts >= options_.max_delivery_attempts) {
    dead_letter_head(key, lane);
  } else {
    lane.ready_at = clock_.now_ms() + options_.ack_timeout_ms;
  }
  erase_if_empty(key);
}

std::optional<Millis> Broker::next_ready_at() const {
  std::lock_guard lock(mu_);
  std::optional<Millis> best;
  for (const auto& [key, lane] : lanes_) {
    Millis t;
    if (lane.in_flight) {
      t = lane.deadline;
    } else if (!lane.queue.empty()) {
      t = lane.ready_at;
    } else {
      continue;
    }
    if (!best || t < *best) best = t;
  }
  return best;
}

bool Broker::idle() const {
  std::lock_guard lock(mu_);
  for (const auto& [key, lane] : lanes_) {
    if (lane.in_flight || !lane.queue.empty()) return false;
  }
  return true;
}

std::size_t Broker::pending(const std::string& group) const {
  std::lock_guard lock(mu_);
  std::size_t count = 0;
  for (const auto& [key, lane] : lanes_) {
    if (std::get<1>(key) == group) count += lane.queue.size();
  }
  return count;
}

Status Broker::add_fault(const harness::FaultSpec& spec) {
  auto valid = spec.validate();
  if (!valid.ok()) return valid;
  std::lock_guard lock(mu_);
  faults_.push_back(spec);
  return ok_status();
}

void Broker::clear_faults() {
  std::lock_guard lock(mu_);
  faults_.clear();
}

void Broker::set_available(bool available) {
  std::lock_guard lock(mu_);
  available_ = available;
}

BrokerCounters Broker::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

std::vector<DeadLetter> Broker::dead_letters() const {
  std::lock_guard lock(mu_);
  return dead_letters_;
}

std::vector<std::string> Broker::topics() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [topic, groups] : subscriptions_) out.push_back(topic);
  return out;
}

}  // namespace hacknizer::chassis
