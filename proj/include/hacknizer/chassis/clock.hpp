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

#include <atomic>
#include <cstdint>

namespace hacknizer::chassis {

using Millis = std::int64_t;

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Millis now_ms() const = 0;
  virtual bool simulated() const = 0;
};

class WallClock final : public Clock {
 public:
  Millis now_ms() const override;
  bool simulated() const override { return false; }
};

// Only moves when told to. The harness advances it inside drain, jumping to
// the next timer deadline.
class SimulatedClock final : public Clock {
 public:
  // 2023-11-14T22:13:20Z, an arbitrary fixed origin so logs are reproducible.
  static constexpr Millis kDefaultOrigin = 1'700'000'000'000;

  explicit SimulatedClock(Millis origin = kDefaultOrigin) : now_(origin) {}

  Millis now_ms() const override { return now_.load(); }
  bool simulated() const override { return true; }

  void advance_to(Millis t) {
    if (t > now_.load()) now_.store(t);
  }
  void advance_by(Millis delta) { now_.fetch_add(delta); }

 private:
  std::atomic<Millis> now_;
};

}  // namespace hacknizer::chassis
