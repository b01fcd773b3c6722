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

#include "hacknizer/chassis/event_store.hpp"

#include <algorithm>

namespace hacknizer::chassis {

namespace fs = std::filesystem;

EventStore::EventStore(StoreOptions options, const Clock& clock, IdGenerator& ids)
    : options_(std::move(options)), clock_(clock), ids_(ids) {}

EventStore::~EventStore() = default;

Result<std::unique_ptr<EventStore>> EventStore::open(StoreOptions options, const Clock& clock,
                                                     IdGenerator& ids) {
  if (options.stream_type.empty()) {
    return make_error(ErrorCode::kInvalidConfig, "store needs a stream_type");
  }
  std::unique_ptr<EventStore> store(new EventStore(std::move(options), clock, ids));
  if (!store->options_.data_dir.empty()) {
    auto loaded = store->load_from_disk();
    if (!loaded.ok()) return loaded.error();
  }
  return store;
}

Status EventStore::load_from_disk() {
  const fs::path& dir = options_.data_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return make_error(ErrorCode::kStorageError, "cannot create " + dir.string());

  const fs::path meta = dir / kMetaFile;
  const std::string expected_meta = "stream_type=" + options_.stream_type;
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    std::string line;
    std::getline(in, line);
    if (line != expected_meta) {
      return make_error(ErrorCode::kStreamTypeMismatch,
                        dir.string() + " belongs to '" + line + "', not '" + expected_meta + "'");
    }
  }

  std::ifstream log_in(dir / kLogFile);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(log_in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto envelope = from_wire(line);
    if (!envelope.ok()) {
      // A torn final line from a crash mid-write is dropped; anything else is
      // corruption.
      if (log_in.peek() == std::char_traits<char>::eof()) break;
      return make_error(ErrorCode::kStorageError,
                        "corrupt log line " + std::to_string(line_number));
    }
    if (envelope->stream_type != options_.stream_type) {
      return make_error(ErrorCode::kStreamTypeMismatch,
                        "log contains stream_type '" + envelope->stream_type + "'");
    }
    auto& positions = streams_[envelope->stream_id];
    if (envelope->sequence != positions.size() + 1) {
      return make_error(ErrorCode::kStorageError,
                        "non-contiguous sequence in stream " + envelope->stream_id);
    }
    if (by_event_id_.count(envelope->event_id) != 0) {
      return make_error(ErrorCode::kStorageError, "duplicate event_id " + envelope->event_id);
    }
    std::size_t position = log_.size();
    positions.push_back(position);
    by_event_id_.emplace(envelope->event_id, position);
    by_causation_[envelope->causation_id].push_back(position);
    unpublished_.insert(position);
    log_.push_back(std::move(envelope).value());
  }

  std::ifstream published_in(dir / kPublishedFile);
  while (std::getline(published_in, line)) {
    auto it = by_event_id_.find(line);
    if (it != by_event_id_.end()) unpublished_.erase(it->second);
  }

  if (!fs::exists(meta)) {
    std::ofstream meta_out(meta);
    meta_out << expected_meta << "\n";
    if (!meta_out) return make_error(ErrorCode::kStorageError, "cannot write " + meta.string());
  }
  log_out_.open(dir / kLogFile, std::ios::app);
  published_out_.open(dir / kPublishedFile, std::ios::app);
  if (!log_out_ || !published_out_) {
    return make_error(ErrorCode::kStorageError, "cannot open log files in " + dir.string());
  }
  return ok_status();
}

Status EventStore::persist_batch(const std::vector<std::size_t>& positions) {
  if (!log_out_.is_open()) return ok_status();
  std::string buffer;
  for (std::size_t position : positions) {
    buffer += to_wire(log_[position]);
    buffer += '\n';
  }
  log_out_.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  log_out_.flush();
  if (!log_out_) return make_error(ErrorCode::kStorageError, "append to log failed");
  return ok_status();
}

Result<std::uint64_t> EventStore::append_to_stream(std::string_view stream_id,
                                                   std::uint64_t expected_version,
                                                   std::vector<NewEvent> events,
                                                   const AppendContext& context) {
  if (events.empty()) return make_error(ErrorCode::kEmptyAppend, std::string(stream_id));
  if (stream_id.empty()) return make_error(ErrorCode::kInvalidInput, "empty stream_id");

  std::uint64_t new_version = 0;
  {
    std::unique_lock lock(mu_);
    auto& positions = streams_[std::string(stream_id)];
    const std::uint64_t current = positions.size();
    if (current != expected_version) {
      if (positions.empty()) streams_.erase(std::string(stream_id));
      return make_error(ErrorCode::kVersionConflict,
                        std::string(stream_id) + " is at " + std::to_string(current) +
                            ", expected " + std::to_string(expected_version));
    }

    const Millis now = clock_.now_ms();
    std::vector<std::size_t> batch;
    batch.reserve(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
      EventEnvelope envelope;
      do {
        envelope.event_id = ids_.next();
      } while (by_event_id_.count(envelope.event_id) != 0);
      envelope.stream_id = std::string(stream_id);
      envelope.stream_type = options_.stream_type;
      envelope.sequence = current + i + 1;
      envelope.event_type = std::move(events[i].event_type);
      envelope.payload = std::move(events[i].payload);
      envelope.occurred_at = now;
      envelope.correlation_id = context.correlation_id;
      envelope.causation_id = context.causation_id;
      batch.push_back(log_.size());
      log_.push_back(std::move(envelope));
    }

    auto persisted = persist_batch(batch);
    if (!persisted.ok()) {
      log_.resize(batch.front());
      if (positions.empty()) streams_.erase(std::string(stream_id));
      return persisted.error();
    }
    for (std::size_t position : batch) {
      const auto& envelope = log_[position];
      positions.push_back(position);
      by_event_id_.emplace(envelope.event_id, position);
      by_causation_[envelope.causation_id].push_back(position);
      unpublished_.insert(position);
    }
    new_version = positions.size();
  }

  // A failed publish leaves the envelopes in the outbox for the next flush.
  (void)flush_outbox();
  return new_version;
}

std::vector<EventEnvelope> EventStore::load_stream(std::string_view stream_id,
                                                   std::uint64_t from_version) const {
  std::shared_lock lock(mu_);
  std::vector<EventEnvelope> out;
  auto it = streams_.find(std::string(stream_id));
  if (it == streams_.end()) return out;
  for (std::size_t i = from_version; i < it->second.size(); ++i) {
    out.push_back(log_[it->second[i]]);
  }
  return out;
}

StreamHead EventStore::head(std::string_view stream_id) const {
  std::shared_lock lock(mu_);
  auto it = streams_.find(std::string(stream_id));
  return StreamHead{std::string(stream_id), it == streams_.end() ? 0 : it->second.size()};
}

std::vector<std::string> EventStore::stream_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  ids.reserve(streams_.size());
  for (const auto& [id, positions] : streams_) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<EventEnvelope> EventStore::read_all() const {
  std::shared_lock lock(mu_);
  return log_;
}

std::vector<EventEnvelope> EventStore::find_by_causation(std::string_view causation_id) const {
  std::shared_lock lock(mu_);
  std::vector<EventEnvelope> out;
  auto it = by_causation_.find(std::string(causation_id));
  if (it == by_causation_.end()) return out;
  for (std::size_t position : it->second) out.push_back(log_[position]);
  return out;
}

std::optional<EventEnvelope> EventStore::find(std::string_view event_id) const {
  std::shared_lock lock(mu_);
  auto it = by_event_id_.find(std::string(event_id));
  if (it == by_event_id_.end()) return std::nullopt;
  return log_[it->second];
}

std::size_t EventStore::size() const {
  std::shared_lock lock(mu_);
  return log_.size();
}

void EventStore::attach_publisher(MessageBus* bus, PublishFilter filter) {
  std::lock_guard lock(outbox_mu_);
  publisher_ = bus;
  filter_ = std::move(filter);
}

Status EventStore::flush_outbox() {
  std::lock_guard outbox_lock(outbox_mu_);
  if (publisher_ == nullptr) return ok_status();
  while (true) {
    EventEnvelope envelope;
    std::size_t position;
    {
      std::shared_lock lock(mu_);
      if (unpublished_.empty()) return ok_status();
      position = *unpublished_.begin();
      envelope = log_[position];
    }
    if (filter_) envelope = filter_(std::move(envelope));
    auto published = publisher_->publish(events_topic(options_.stream_type), envelope);
    if (!published.ok()) return published;
    std::unique_lock lock(mu_);
    unpublished_.erase(position);
    if (published_out_.is_open()) {
      published_out_ << log_[position].event_id << '\n';
      published_out_.flush();
    }
  }
}

std::size_t EventStore::outbox_size() const {
  std::shared_lock lock(mu_);
  return unpublished_.size();
}

Status EventStore::republish(const EventEnvelope& envelope) {
  std::lock_guard outbox_lock(outbox_mu_);
  if (publisher_ == nullptr) return ok_status();
  EventEnvelope copy = filter_ ? filter_(envelope) : envelope;
  return publisher_->publish(events_topic(options_.stream_type), copy);
}

}  // namespace hacknizer::chassis
