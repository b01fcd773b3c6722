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
#include <span>
#include <string>
#include <utility>

#include "hacknizer/chassis/envelope.hpp"
#include "hacknizer/chassis/event_store.hpp"
#include "hacknizer/common/result.hpp"

namespace hacknizer::chassis {

// How one aggregate kind is rebuilt from its stream. `apply` must be pure.
template <typename State>
struct AggregateDefinition {
  std::string stream_type;
  State initial_state{};
  std::function<State(State, const EventEnvelope&)> apply;
};

template <typename State>
Result<State> fold_aggregate(const AggregateDefinition<State>& definition,
                             std::span<const EventEnvelope> envelopes) {
  State state = definition.initial_state;
  for (const auto& envelope : envelopes) {
    if (envelope.stream_type != definition.stream_type) {
      return make_error(ErrorCode::kTypeMismatch, "expected stream_type '" +
                                                      definition.stream_type + "', got '" +
                                                      envelope.stream_type + "'");
    }
    state = definition.apply(std::move(state), envelope);
  }
  return state;
}

template <typename State>
struct Loaded {
  State state{};
  std::uint64_t version = 0;
};

// Live aggregate cache over an EventStore. A load folds only the envelopes
// appended since the cached version, so the cached state is always exactly
// the fold of the persisted stream.
template <typename State>
class Repository {
 public:
  Repository(EventStore& store, AggregateDefinition<State> definition)
      : store_(store), definition_(std::move(definition)) {}

  Result<Loaded<State>> load(const std::string& stream_id) {
    Loaded<State> current;
    {
      std::lock_guard lock(mu_);
      auto it = cache_.find(stream_id);
      current = it == cache_.end() ? Loaded<State>{definition_.initial_state, 0} : it->second;
    }
    auto fresh = store_.load_stream(stream_id, current.version);
    if (fresh.empty()) return current;
    auto folded = fold_from(std::move(current.state), fresh);
    if (!folded.ok()) return folded.error();
    Loaded<State> updated{std::move(folded).value(), current.version + fresh.size()};
    std::lock_guard lock(mu_);
    auto& slot = cache_[stream_id];
    if (updated.version >= slot.version) slot = updated;
    return updated;
  }

  const AggregateDefinition<State>& definition() const { return definition_; }
  EventStore& store() { return store_; }

  std::map<std::string, Loaded<State>> snapshot() const {
    std::lock_guard lock(mu_);
    return cache_;
  }

 private:
  Result<State> fold_from(State state, const std::vector<EventEnvelope>& envelopes) const {
    AggregateDefinition<State> from_here{definition_.stream_type, std::move(state),
                                         definition_.apply};
    return fold_aggregate(from_here, std::span<const EventEnvelope>(envelopes));
  }

  EventStore& store_;
  AggregateDefinition<State> definition_;
  mutable std::mutex mu_;
  std::map<std::string, Loaded<State>> cache_;
};

}  // namespace hacknizer::chassis
