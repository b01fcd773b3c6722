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
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "hacknizer/chassis/clock.hpp"

namespace hacknizer::chassis {

// Timer facility handed to services (saga step timeouts, reservation expiry,
// outbox retries). Callbacks run on the runtime's thread of control.
class Scheduler {
 public:
  using TimerId = std::uint64_t;

  virtual ~Scheduler() = default;
  virtual TimerId schedule_at(Millis deadline, std::function<void()> callback) = 0;
  // No-op for timers that already fired or were cancelled.
  virtual void cancel(TimerId id) = 0;
};

// Deadline-ordered timer queue. Equal deadlines fire in scheduling order.
class TimerQueue final : public Scheduler {
 public:
  TimerId schedule_at(Millis deadline, std::function<void()> callback) override;
  void cancel(TimerId id) override;

  std::optional<Millis> next_deadline() const;
  // Fires every timer with deadline <= now, including ones scheduled by the
  // callbacks themselves. Returns how many fired.
  std::size_t fire_due(Millis now);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<Millis, std::uint64_t>, std::function<void()>> timers_;
  std::map<TimerId, Millis> deadlines_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace hacknizer::chassis
