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

#include "hacknizer/chassis/scheduler.hpp"

namespace hacknizer::chassis {

Scheduler::TimerId TimerQueue::schedule_at(Millis deadline, std::function<void()> callback) {
  std::lock_guard lock(mu_);
  TimerId id = next_seq_++;
  timers_.emplace(std::make_pair(deadline, id), std::move(callback));
  deadlines_.emplace(id, deadline);
  return id;
}

void TimerQueue::cancel(TimerId id) {
  std::lock_guard lock(mu_);
  auto it = deadlines_.find(id);
  if (it == deadlines_.end()) return;
  timers_.erase(std::make_pair(it->second, id));
  deadlines_.erase(it);
}

std::optional<Millis> TimerQueue::next_deadline() const {
  std::lock_guard lock(mu_);
  if (timers_.empty()) return std::nullopt;
  return timers_.begin()->first.first;
}

std::size_t TimerQueue::fire_due(Millis now) {
  std::size_t fired = 0;
  while (true) {
    std::function<void()> callback;
    {
      std::lock_guard lock(mu_);
      if (timers_.empty() || timers_.begin()->first.first > now) return fired;
      callback = std::move(timers_.begin()->second);
      deadlines_.erase(timers_.begin()->first.second);
      timers_.erase(timers_.begin());
    }
    callback();
    ++fired;
  }
}

std::size_t TimerQueue::size() const {
  std::lock_guard lock(mu_);
  return timers_.size();
}

}  // namespace hacknizer::chassis
