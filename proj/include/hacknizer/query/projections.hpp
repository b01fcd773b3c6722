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
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hacknizer/chassis/envelope.hpp"
#include "hacknizer/chassis/service.hpp"
#include "hacknizer/hackathon/hackathon.hpp"
#include "hacknizer/page/page_service.hpp"
#include "hacknizer/saga/saga.hpp"
#include "hacknizer/team/team.hpp"
#include "hacknizer/user/user_service.hpp"

namespace hacknizer::query {

inline constexpr std::string_view kContext = "query";

// Topics the read side consumes.
std::vector<std::string> source_topics();

struct CommandStatus {
  std::string status = "pending";  // pending | succeeded | failed
  std::string context;
  std::string command_type;
  std::string error;
  std::string message;
  std::string reply_type;
  Json result = Json::object();
  int events = 0;
};

struct Quarantined {
  chassis::EventEnvelope envelope;
  std::string reason;
};

// The CQRS read side. Every source stream is folded independently (in
// sequence order, each sequence exactly once); views join the folded streams
// at query time. Because no state depends on the interleaving of different
// streams, a rebuild from the logs reproduces the live model exactly.
enum class ApplyResult { kApplied, kBuffered, kDuplicate };

class ReadModel {
 public:
  // Duplicates (sequence already applied or already held) are ignored; early
  // arrivals are held until the gap before them fills.
  ApplyResult apply(const chassis::EventEnvelope& envelope);

  // Canonical form of everything the views are computed from.
  std::string canonical_form() const;
  Json to_json() const;

  std::size_t buffered() const;
  std::size_t applied() const { return applied_count_; }
  const std::vector<Quarantined>& quarantine() const { return quarantine_; }
  // Envelopes in the order they were applied, then the held ones.
  std::vector<chassis::EventEnvelope> journal() const;

  // Views. Errors: NotFound, NotPublished.
  Result<Json> overview(const std::string& hackathon_id) const;
  Json list_hackathons(const std::optional<std::string>& state) const;
  Result<Json> public_page(const std::string& hackathon_id) const;
  Result<Json> roster(const std::string& team_id) const;
  Result<Json> dashboard(const std::string& user_id) const;
  Result<Json> saga(const std::string& saga_id) const;
  Json command_status(const std::string& command_id) const;

 private:
  using StreamKey = std::pair<std::string, std::string>;  // stream_type, stream_id

  void apply_in_order(const chassis::EventEnvelope& envelope);
  void fold(const chassis::EventEnvelope& envelope);
  void note_command(const chassis::EventEnvelope& envelope);
  std::optional<hackathon::Winner> winner_of(const hackathon::Hackathon& h) const;
  Json winner_json(const hackathon::Hackathon& h) const;
  Json overview_json(const hackathon::Hackathon& h) const;
  std::string display_name(const std::string& user_id) const;

  std::map<StreamKey, std::uint64_t> positions_;
  std::map<StreamKey, std::map<std::uint64_t, chassis::EventEnvelope>> pending_;

  std::map<std::string, user::UserAccount> users_;
  std::map<std::string, hackathon::Hackathon> hackathons_;
  std::map<std::string, team::Team> teams_;
  std::map<std::string, team::Participant> participants_;
  std::map<std::string, page::PageDocument> pages_;
  std::map<std::string, saga::SagaInstance> sagas_;
  std::map<std::string, CommandStatus> commands_;

  std::vector<Quarantined> quarantine_;
  std::vector<chassis::EventEnvelope> journal_;
  std::size_t applied_count_ = 0;
};

// Builds a model from complete store logs.
ReadModel rebuild(const std::vector<std::vector<chassis::EventEnvelope>>& logs);

// Checkpoint file: a JSON header line
//   {"format":"hacknizer-query-checkpoint","version":1}
// followed by one envelope wire line per accepted envelope. Replaying the
// lines through ReadModel::apply restores the model; the query service
// appends a line per accepted envelope, so the file is always current.
Status write_checkpoint(const ReadModel& model, const std::filesystem::path& path);
Result<ReadModel> read_checkpoint(const std::filesystem::path& path);

// The query service: a bus consumer feeding a ReadModel plus the query
// endpoints. Queries and updates are serialized by one mutex, so a query
// never sees a half-applied envelope.
class QueryService final : public chassis::Service {
 public:
  using LagSource = std::function<std::size_t()>;

  QueryService() = default;
  explicit QueryService(std::filesystem::path checkpoint_path);

  std::string name() const override { return std::string(kContext); }
  std::vector<std::string> subscriptions() const override { return source_topics(); }
  chassis::HandlerOutcome on_message(const std::string& topic,
                                     const chassis::EventEnvelope& envelope) override;
  // Restores from the checkpoint file, if any.
  void start() override;

  // Unconsumed envelopes upstream of this service (e.g. broker backlog).
  void set_lag_source(LagSource source) { lag_source_ = std::move(source); }
  std::size_t projection_lag() const;

  Status checkpoint() const;

  Result<Json> get_overview(const std::string& hackathon_id) const;
  Json list_hackathons(const std::optional<std::string>& state) const;
  Result<Json> get_public_page(const std::string& hackathon_id) const;
  Result<Json> get_roster(const std::string& team_id) const;
  Result<Json> get_dashboard(const std::string& user_id) const;
  Result<Json> get_saga(const std::string& saga_id) const;
  Json get_command(const std::string& command_id) const;

  std::string canonical_form() const;
  std::vector<Quarantined> quarantine() const;

 private:
  Json with_lag(Json view) const;
  Result<Json> with_lag(Result<Json> view) const;
  void append_checkpoint(const chassis::EventEnvelope& envelope) const;

  mutable std::mutex mu_;
  ReadModel model_;
  LagSource lag_source_;
  std::filesystem::path checkpoint_path_;
};

}  // namespace hacknizer::query
