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

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "hacknizer/chassis/broker.hpp"
#include "hacknizer/chassis/clock.hpp"
#include "hacknizer/chassis/event_store.hpp"
#include "hacknizer/chassis/ids.hpp"
#include "hacknizer/chassis/scheduler.hpp"
#include "hacknizer/chassis/service.hpp"

namespace hacknizer::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device device;
    path_ = std::filesystem::temp_directory_path() /
            ("hacknizer-test-" + std::to_string(device()) + std::to_string(device()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// One service's worth of infrastructure: store, broker, clock, timers. A
// "probe" group sees everything published on `topics`.
struct ServiceRig {
  explicit ServiceRig(const std::string& stream_type, std::vector<std::string> topics = {},
                      std::uint64_t seed = 1)
      : ids(seed), probe_topics(std::move(topics)) {
    store = std::move(chassis::EventStore::open({stream_type, {}}, clock, ids)).value();
    for (const auto& topic : probe_topics) broker.subscribe(topic, "probe");
  }

  chassis::ServiceEnv env() { return {store.get(), &broker, &clock, &ids, &timers}; }

  // Everything delivered to the probe group so far, acknowledged.
  std::vector<chassis::Delivery> take() {
    std::vector<chassis::Delivery> out;
    (void)store->flush_outbox();
    while (auto delivery = broker.poll("probe")) {
      broker.ack(delivery->delivery_id);
      out.push_back(*delivery);
    }
    return out;
  }

  std::vector<std::string> stream_types(const std::string& stream_id) {
    std::vector<std::string> out;
    for (const auto& e : store->load_stream(stream_id, 0)) out.push_back(e.event_type);
    return out;
  }

  chassis::SimulatedClock clock;
  chassis::Broker broker{clock};
  chassis::TimerQueue timers;
  chassis::IdGenerator ids;
  std::unique_ptr<chassis::EventStore> store;
  std::vector<std::string> probe_topics;
};

inline chassis::Principal principal(std::string user_id, std::set<chassis::Role> roles) {
  return chassis::Principal{std::move(user_id), std::move(roles), 0};
}

inline chassis::AppendContext ctx(const std::string& id) { return {"corr-" + id, id}; }

}  // namespace hacknizer::testing
