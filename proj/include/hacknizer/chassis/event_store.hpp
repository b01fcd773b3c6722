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
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hacknizer/chassis/bus.hpp"
#include "hacknizer/chassis/clock.hpp"
#include "hacknizer/chassis/envelope.hpp"
#include "hacknizer/chassis/ids.hpp"
#include "hacknizer/common/result.hpp"

namespace hacknizer::chassis {

struct StreamHead {
  std::string stream_id;
  std::uint64_t current_version = 0;  // 0 = empty stream
};

struct AppendContext {
  std::string correlation_id;
  std::string causation_id;
};

struct StoreOptions {
  // Aggregate kind owning this store. Every stream in it carries this type.
  std::string stream_type;
  // Empty keeps everything in memory.
  std::filesystem::path data_dir;
};

// Applied to each envelope on its way to the bus (never to the stored copy).
using PublishFilter = std::function<EventEnvelope(EventEnvelope)>;

// Append-only event log for one service, keyed by (stream_id, sequence) with
// an event_id uniqueness index. On disk: `events.log` holds one wire line per
// envelope, `published.log` one event_id per line for the outbox, and
// `store.meta` records the owning stream_type so another service cannot
// open the directory.
//
// Safe for concurrent callers; append_to_stream is linearizable per stream.
class EventStore {
 public:
  static constexpr std::string_view kLogFile = "events.log";
  static constexpr std::string_view kPublishedFile = "published.log";
  static constexpr std::string_view kMetaFile = "store.meta";

  static Result<std::unique_ptr<EventStore>> open(StoreOptions options, const Clock& clock,
                                                  IdGenerator& ids);

  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;
  ~EventStore();

  // Appends all events atomically when expected_version matches the stream's
  // current version. Returns the new version.
  Result<std::uint64_t> append_to_stream(std::string_view stream_id,
                                         std::uint64_t expected_version,
                                         std::vector<NewEvent> events,
                                         const AppendContext& context = {});

  // Envelopes with sequence > from_version, in order. Unknown stream: empty.
  std::vector<EventEnvelope> load_stream(std::string_view stream_id,
                                         std::uint64_t from_version = 0) const;

  StreamHead head(std::string_view stream_id) const;
  std::vector<std::string> stream_ids() const;
  std::vector<EventEnvelope> read_all() const;
  std::vector<EventEnvelope> find_by_causation(std::string_view causation_id) const;
  std::optional<EventEnvelope> find(std::string_view event_id) const;
  std::size_t size() const;
  const std::string& stream_type() const { return options_.stream_type; }
  const std::filesystem::path& data_dir() const { return options_.data_dir; }

  // Outbox. Envelopes count as published only after the bus acknowledged
  // them; on reopen, anything not in published.log is pending again.
  void attach_publisher(MessageBus* bus, PublishFilter filter = {});
  Status flush_outbox();
  std::size_t outbox_size() const;

  // Publishes an already-published envelope again (idempotent replies).
  Status republish(const EventEnvelope& envelope);

 private:
  EventStore(StoreOptions options, const Clock& clock, IdGenerator& ids);

  Status load_from_disk();
  Status persist_batch(const std::vector<std::size_t>& positions);

  StoreOptions options_;
  const Clock& clock_;
  IdGenerator& ids_;

  mutable std::shared_mutex mu_;
  std::vector<EventEnvelope> log_;
  std::unordered_map<std::string, std::vector<std::size_t>> streams_;
  std::unordered_map<std::string, std::size_t> by_event_id_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_causation_;
  std::set<std::size_t> unpublished_;
  std::ofstream log_out_;
  std::ofstream published_out_;

  std::mutex outbox_mu_;
  MessageBus* publisher_ = nullptr;
  PublishFilter filter_;
};

}  // namespace hacknizer::chassis
