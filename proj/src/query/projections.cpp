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

#include "hacknizer/query/projections.hpp"

#include <fstream>
#include <set>

namespace hacknizer::query {

using chassis::EventEnvelope;

namespace {

constexpr std::string_view kCheckpointFormat = "hacknizer-query-checkpoint";

bool starts_with(std::string_view text, std::string_view prefix) {
  return text.substr(0, prefix.size()) == prefix;
}

Json user_json(const user::UserAccount& u) {
  Json roles = Json::array();
  for (auto role : u.roles) roles.push_back(chassis::to_string(role));
  return {{"user_id", u.user_id}, {"email", u.email}, {"display_name", u.display_name},
          {"roles", roles},       {"active", u.active}};
}

Json participant_json(const team::Participant& p) {
  return {{"participant_id", p.participant_id},
          {"hackathon_id", p.hackathon_id},
          {"user_id", p.user_id},
          {"reservation_id", p.reservation_id},
          {"team_id", p.team_id ? Json(*p.team_id) : Json(nullptr)}};
}

Json command_json(const std::string& id, const CommandStatus& c) {
  Json out{{"command_id", id}, {"status", c.status}, {"events", c.events}};
  if (!c.command_type.empty()) out["command_type"] = c.command_type;
  if (!c.context.empty()) out["context"] = c.context;
  if (!c.error.empty()) {
    out["error"] = c.error;
    out["message"] = c.message;
  }
  if (!c.reply_type.empty()) out["reply_type"] = c.reply_type;
  if (!c.result.empty()) out["result"] = c.result;
  return out;
}

template <typename Map, typename Fn>
Json map_json(const Map& map, Fn&& fn) {
  Json out = Json::object();
  for (const auto& [key, value] : map) out[key] = fn(value);
  return out;
}

}  // namespace

std::vector<std::string> source_topics() {
  return {chassis::events_topic("user"), chassis::events_topic("hackathon"),
          chassis::events_topic("team"), chassis::events_topic("page"),
          chassis::events_topic("saga")};
}

ApplyResult ReadModel::apply(const EventEnvelope& envelope) {
  StreamKey key{envelope.stream_type, envelope.stream_id};
  std::uint64_t position = positions_[key];
  if (envelope.sequence <= position) return ApplyResult::kDuplicate;
  if (envelope.sequence > position + 1) {
    auto [it, inserted] = pending_[key].emplace(envelope.sequence, envelope);
    return inserted ? ApplyResult::kBuffered : ApplyResult::kDuplicate;
  }
  apply_in_order(envelope);
  auto held = pending_.find(key);
  if (held != pending_.end()) {
    auto& queue = held->second;
    while (!queue.empty() && queue.begin()->first == positions_[key] + 1) {
      EventEnvelope next = std::move(queue.begin()->second);
      queue.erase(queue.begin());
      apply_in_order(next);
    }
    if (queue.empty()) pending_.erase(held);
  }
  return ApplyResult::kApplied;
}

void ReadModel::apply_in_order(const EventEnvelope& envelope) {
  try {
    fold(envelope);
    note_command(envelope);
  } catch (const std::exception& error) {
    // Poison envelope: keep the position moving so the stream is not stuck.
    quarantine_.push_back({envelope, error.what()});
  }
  positions_[{envelope.stream_type, envelope.stream_id}] = envelope.sequence;
  journal_.push_back(envelope);
  ++applied_count_;
}

void ReadModel::fold(const EventEnvelope& e) {
  static const auto users = user::user_definition();
  static const auto hackathons = hackathon::hackathon_definition();
  static const auto teams = team::team_definition();
  static const auto participants = team::participant_definition();
  static const auto pages = page::page_definition();
  static const auto sagas = saga::saga_definition();

  const std::string& id = e.stream_id;
  if (starts_with(id, "cmd-")) return;
  auto step = [&](auto& table, const auto& definition) {
    auto next = definition.apply(table[id], e);
    table[id] = std::move(next);
  };
  if (e.stream_type == "user") {
    if (!starts_with(id, "email-")) step(users_, users);
  } else if (e.stream_type == "hackathon") {
    step(hackathons_, hackathons);
  } else if (e.stream_type == "team") {
    if (starts_with(id, "pt-")) {
      step(participants_, participants);
    } else if (!starts_with(id, "teamname-")) {
      step(teams_, teams);
    }
  } else if (e.stream_type == "page") {
    step(pages_, pages);
  } else if (e.stream_type == "saga") {
    step(sagas_, sagas);
  }
}

void ReadModel::note_command(const EventEnvelope& e) {
  if (starts_with(e.stream_id, "cmd-")) {
    CommandStatus& c = commands_[e.stream_id.substr(4)];
    if (c.context.empty() || e.stream_type < c.context) c.context = e.stream_type;
    c.command_type = e.payload.value("command_type", "");
    c.reply_type = e.event_type;
    if (e.event_type == chassis::kCommandRejected) {
      c.status = "failed";
      c.error = e.payload.value("error", "");
      c.message = e.payload.value("message", "");
    } else {
      if (c.status != "failed") c.status = "succeeded";
      c.result = e.payload.value("result", Json::object());
    }
    return;
  }
  if (e.causation_id.empty()) return;
  CommandStatus& c = commands_[e.causation_id];
  if (c.status != "failed") c.status = "succeeded";
  // An event id can cause reactions in several contexts; pick one that does
  // not depend on arrival order.
  if (c.context.empty() || e.stream_type < c.context) c.context = e.stream_type;
  ++c.events;
}

std::size_t ReadModel::buffered() const {
  std::size_t total = 0;
  for (const auto& [key, queue] : pending_) total += queue.size();
  return total;
}

std::vector<EventEnvelope> ReadModel::journal() const {
  std::vector<EventEnvelope> out = journal_;
  for (const auto& [key, queue] : pending_) {
    for (const auto& [seq, envelope] : queue) out.push_back(envelope);
  }
  return out;
}

Json ReadModel::to_json() const {
  Json positions = Json::object();
  for (const auto& [key, seq] : positions_) positions[key.first + "/" + key.second] = seq;
  std::vector<const Quarantined*> poison;
  for (const auto& q : quarantine_) poison.push_back(&q);
  std::sort(poison.begin(), poison.end(), [](const Quarantined* a, const Quarantined* b) {
    return std::tie(a->envelope.stream_type, a->envelope.stream_id, a->envelope.sequence) <
           std::tie(b->envelope.stream_type, b->envelope.stream_id, b->envelope.sequence);
  });
  Json quarantine = Json::array();
  for (const auto* q : poison) quarantine.push_back({{"event_id", q->envelope.event_id}, {"reason", q->reason}});
  return {{"positions", positions},
          {"users", map_json(users_, user_json)},
          {"hackathons", map_json(hackathons_, [](const auto& h) { return hackathon::to_json(h); })},
          {"teams", map_json(teams_, [](const auto& t) { return team::to_json(t); })},
          {"participants", map_json(participants_, participant_json)},
          {"pages", map_json(pages_, [](const auto& p) { return page::to_json(p); })},
          {"sagas", map_json(sagas_, [](const auto& s) { return saga::to_json(s); })},
          {"commands", [&] {
             Json out = Json::object();
             for (const auto& [id, c] : commands_) out[id] = command_json(id, c);
             return out;
           }()},
          {"quarantine", quarantine}};
}

std::string ReadModel::canonical_form() const { return chassis::canonical(to_json()); }

std::string ReadModel::display_name(const std::string& user_id) const {
  auto it = users_.find(user_id);
  return it == users_.end() ? std::string() : it->second.display_name;
}

Json ReadModel::winner_json(const hackathon::Hackathon& h) const {
  if (!h.winner) return nullptr;
  Json out{{"team_id", h.winner->team_id}, {"award_id", h.winner->award_id}};
  auto team = teams_.find(h.winner->team_id);
  out["team_name"] = team == teams_.end() ? "" : team->second.name;
  const hackathon::Award* award = h.find_award(h.winner->award_id);
  out["award_title"] = award ? award->title : "";
  return out;
}

Json ReadModel::overview_json(const hackathon::Hackathon& h) const {
  std::set<std::string> participants;
  int team_count = 0;
  for (const auto& [id, p] : participants_) {
    if (p.registered && p.hackathon_id == h.hackathon_id) participants.insert(id);
  }
  for (const auto& [id, t] : teams_) {
    if (!t.created || t.hackathon_id != h.hackathon_id) continue;
    if (!t.disbanded) ++team_count;
    for (const auto& m : t.members) participants.insert(m.participant_id);
  }
  Json sponsors = Json::array();
  for (const auto& s : h.sponsors) {
    sponsors.push_back({{"sponsor_id", s.sponsor_id}, {"name", s.name}, {"tier", s.tier},
                        {"logo", s.logo}});
  }
  Json awards = Json::array();
  for (const auto& a : h.awards) {
    Json award{{"award_id", a.award_id}, {"title", a.title}, {"description", a.description}};
    if (a.sponsor_id) {
      const hackathon::Sponsor* sponsor = h.find_sponsor(*a.sponsor_id);
      award["sponsor"] = sponsor ? Json{{"sponsor_id", sponsor->sponsor_id}, {"name", sponsor->name}}
                                 : Json(nullptr);
    } else {
      award["sponsor"] = nullptr;
    }
    awards.push_back(std::move(award));
  }
  return {{"hackathon_id", h.hackathon_id},
          {"title", h.title},
          {"description", h.description},
          {"organizer_id", h.organizer_id},
          {"state", hackathon::to_string(h.state)},
          {"schedule", {{"start", h.schedule.start}, {"end", h.schedule.end}}},
          {"capacity", h.capacity},
          {"slots_used", h.slots_used},
          {"team_size", {{"min", h.team_min}, {"max", h.team_max}}},
          {"sponsor_count", h.sponsors.size()},
          {"sponsors", sponsors},
          {"awards", awards},
          {"team_count", team_count},
          {"participant_count", participants.size()},
          {"winner", winner_json(h)}};
}

Result<Json> ReadModel::overview(const std::string& hackathon_id) const {
  auto it = hackathons_.find(hackathon_id);
  if (it == hackathons_.end() || !it->second.created) {
    return make_error(ErrorCode::kNotFound, "hackathon " + hackathon_id);
  }
  return overview_json(it->second);
}

Json ReadModel::list_hackathons(const std::optional<std::string>& state) const {
  Json out = Json::array();
  for (const auto& [id, h] : hackathons_) {
    if (!h.created) continue;
    if (state && hackathon::to_string(h.state) != *state) continue;
    out.push_back(overview_json(h));
  }
  return out;
}

Result<Json> ReadModel::public_page(const std::string& hackathon_id) const {
  auto it = pages_.find(hackathon_id);
  if (it == pages_.end() || !it->second.created) {
    return make_error(ErrorCode::kNotFound, "page " + hackathon_id);
  }
  const page::PageDocument& doc = it->second;
  if (!doc.published) return make_error(ErrorCode::kNotPublished, hackathon_id);
  auto hk = hackathons_.find(hackathon_id);
  const hackathon::Hackathon* h = hk == hackathons_.end() ? nullptr : &hk->second;
  Json overview = h ? overview_json(*h) : Json::object();

  Json sections = Json::array();
  for (const auto& s : doc.sections) {
    Json rendered{{"section_id", s.section_id}, {"kind", s.kind}};
    if (s.kind == "markdown") {
      rendered["body"] = s.body;
    } else if (s.kind == "sponsors") {
      rendered["sponsors"] = overview.value("sponsors", Json::array());
    } else if (s.kind == "awards") {
      rendered["awards"] = overview.value("awards", Json::array());
    } else if (s.kind == "schedule") {
      rendered["schedule"] = overview.value("schedule", Json::object());
      rendered["state"] = overview.value("state", "");
    } else if (s.kind == "winner") {
      rendered["winner"] = h ? winner_json(*h) : Json(nullptr);
    }
    sections.push_back(std::move(rendered));
  }
  return Json{{"hackathon_id", hackathon_id},
              {"title", h ? h->title : ""},
              {"theme", page::to_json(doc.theme)},
              {"sections", sections},
              {"published", doc.published},
              {"revision", doc.revision}};
}

Result<Json> ReadModel::roster(const std::string& team_id) const {
  auto it = teams_.find(team_id);
  if (it == teams_.end() || !it->second.created) {
    return make_error(ErrorCode::kNotFound, "team " + team_id);
  }
  const team::Team& t = it->second;
  Json members = Json::array();
  for (const auto& m : t.members) {
    members.push_back({{"participant_id", m.participant_id},
                       {"user_id", m.user_id},
                       {"display_name", display_name(m.user_id)}});
  }
  Json project{{"submitted", t.project.has_value()}, {"submissions", t.submissions}};
  if (t.project) {
    project["title"] = t.project->title;
    project["description"] = t.project->description;
    project["repository"] = t.project->repository;
    project["submitted_at"] = t.project->submitted_at;
  }
  auto hk = hackathons_.find(t.hackathon_id);
  return Json{{"team_id", t.team_id},
              {"hackathon_id", t.hackathon_id},
              {"hackathon_title", hk == hackathons_.end() ? "" : hk->second.title},
              {"name", t.name},
              {"disbanded", t.disbanded},
              {"members", members},
              {"project", project}};
}

Result<Json> ReadModel::dashboard(const std::string& user_id) const {
  auto it = users_.find(user_id);
  if (it == users_.end() || !it->second.registered) {
    return make_error(ErrorCode::kNotFound, "user " + user_id);
  }
  Json participating = Json::array();
  for (const auto& [id, p] : participants_) {
    if (!p.registered || p.user_id != user_id) continue;
    auto hk = hackathons_.find(p.hackathon_id);
    Json entry{{"hackathon_id", p.hackathon_id},
               {"participant_id", id},
               {"title", hk == hackathons_.end() ? "" : hk->second.title},
               {"state", hk == hackathons_.end() ? "" : hackathon::to_string(hk->second.state)},
               {"team", nullptr},
               {"submission", "none"}};
    if (p.team_id) {
      auto team = teams_.find(*p.team_id);
      if (team != teams_.end() && team->second.has_member(id)) {
        entry["team"] = {{"team_id", team->second.team_id}, {"name", team->second.name}};
        if (team->second.project) entry["submission"] = "submitted";
      }
    }
    participating.push_back(std::move(entry));
  }
  Json organizing = Json::array();
  for (const auto& [id, h] : hackathons_) {
    if (h.created && h.organizer_id == user_id) {
      organizing.push_back(
          {{"hackathon_id", id}, {"title", h.title}, {"state", hackathon::to_string(h.state)}});
    }
  }
  return Json{{"user", user_json(it->second)},
              {"participating", participating},
              {"organizing", organizing}};
}

Result<Json> ReadModel::saga(const std::string& saga_id) const {
  auto it = sagas_.find(saga_id);
  if (it == sagas_.end() || !it->second.created) {
    return make_error(ErrorCode::kNotFound, "saga " + saga_id);
  }
  return saga::to_json(it->second);
}

Json ReadModel::command_status(const std::string& command_id) const {
  auto it = commands_.find(command_id);
  return command_json(command_id, it == commands_.end() ? CommandStatus{} : it->second);
}

ReadModel rebuild(const std::vector<std::vector<EventEnvelope>>& logs) {
  ReadModel model;
  for (const auto& log : logs) {
    for (const auto& envelope : log) (void)model.apply(envelope);
  }
  return model;
}

Status write_checkpoint(const ReadModel& model, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) return make_error(ErrorCode::kStorageError, "cannot write " + tmp.string());
    out << chassis::canonical(Json{{"format", kCheckpointFormat}, {"version", 1}}) << '\n';
    for (const auto& envelope : model.journal()) out << chassis::to_wire(envelope) << '\n';
    if (!out.flush()) return make_error(ErrorCode::kStorageError, "short write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) return make_error(ErrorCode::kStorageError, ec.message());
  return ok_status();
}

Result<ReadModel> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return make_error(ErrorCode::kStorageError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) return ReadModel{};
  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != kCheckpointFormat) {
    return make_error(ErrorCode::kStorageError, "not a query checkpoint: " + path.string());
  }
  ReadModel model;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto envelope = chassis::from_wire(line);
    if (!envelope.ok()) break;  // torn final line
    (void)model.apply(*envelope);
  }
  return model;
}

QueryService::QueryService(std::filesystem::path checkpoint_path)
    : checkpoint_path_(std::move(checkpoint_path)) {}

void QueryService::start() {
  if (checkpoint_path_.empty()) return;
  std::lock_guard lock(mu_);
  if (std::filesystem::exists(checkpoint_path_)) {
    auto restored = read_checkpoint(checkpoint_path_);
    if (restored.ok()) model_ = std::move(restored).value();
  }
  (void)write_checkpoint(model_, checkpoint_path_);
}

void QueryService::append_checkpoint(const EventEnvelope& envelope) const {
  if (checkpoint_path_.empty()) return;
  std::ofstream out(checkpoint_path_, std::ios::app);
  out << chassis::to_wire(envelope) << '\n';
}

chassis::HandlerOutcome QueryService::on_message(const std::string&,
                                                 const EventEnvelope& envelope) {
  std::lock_guard lock(mu_);
  if (model_.apply(envelope) != ApplyResult::kDuplicate) append_checkpoint(envelope);
  return chassis::HandlerOutcome::kAck;
}

Status QueryService::checkpoint() const {
  if (checkpoint_path_.empty()) return make_error(ErrorCode::kInvalidConfig, "no checkpoint path");
  std::lock_guard lock(mu_);
  return write_checkpoint(model_, checkpoint_path_);
}

std::size_t QueryService::projection_lag() const {
  std::size_t upstream = lag_source_ ? lag_source_() : 0;
  std::lock_guard lock(mu_);
  return upstream + model_.buffered();
}

Json QueryService::with_lag(Json view) const {
  view["projection_lag"] = projection_lag();
  return view;
}

Result<Json> QueryService::with_lag(Result<Json> view) const {
  if (!view.ok()) return view;
  return with_lag(std::move(view).value());
}

Result<Json> QueryService::get_overview(const std::string& hackathon_id) const {
  Result<Json> view = [&] {
    std::lock_guard lock(mu_);
    return model_.overview(hackathon_id);
  }();
  return with_lag(std::move(view));
}

Json QueryService::list_hackathons(const std::optional<std::string>& state) const {
  Json list = [&] {
    std::lock_guard lock(mu_);
    return model_.list_hackathons(state);
  }();
  return with_lag(Json{{"hackathons", std::move(list)}});
}

Result<Json> QueryService::get_public_page(const std::string& hackathon_id) const {
  Result<Json> view = [&] {
    std::lock_guard lock(mu_);
    return model_.public_page(hackathon_id);
  }();
  return with_lag(std::move(view));
}

Result<Json> QueryService::get_roster(const std::string& team_id) const {
  Result<Json> view = [&] {
    std::lock_guard lock(mu_);
    return model_.roster(team_id);
  }();
  return with_lag(std::move(view));
}

Result<Json> QueryService::get_dashboard(const std::string& user_id) const {
  Result<Json> view = [&] {
    std::lock_guard lock(mu_);
    return model_.dashboard(user_id);
  }();
  return with_lag(std::move(view));
}

Result<Json> QueryService::get_saga(const std::string& saga_id) const {
  Result<Json> view = [&] {
    std::lock_guard lock(mu_);
    return model_.saga(saga_id);
  }();
  return with_lag(std::move(view));
}

Json QueryService::get_command(const std::string& command_id) const {
  Json view = [&] {
    std::lock_guard lock(mu_);
    return model_.command_status(command_id);
  }();
  return with_lag(std::move(view));
}

std::string QueryService::canonical_form() const {
  std::lock_guard lock(mu_);
  return model_.canonical_form();
}

std::vector<Quarantined> QueryService::quarantine() const {
  std::lock_guard lock(mu_);
  return model_.quarantine();
}

}  // namespace hacknizer::query
