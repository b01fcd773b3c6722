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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// fails. Thresholds below are part of the contract; do not loosen them.

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <barrier>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "client.hpp"
#include "hacknizer/gateway/http.hpp"
#include "hacknizer/harness/scenario.hpp"

extern char** environ;

namespace hacknizer::acceptance {
namespace {

using chassis::EventEnvelope;
using Clock = std::chrono::steady_clock;

constexpr double kFeatureBudgetSeconds = 10.0;
constexpr int kReplayMinCommands = 1000;
constexpr int kFaultScenarios = 200;
constexpr double kMaxFaultRate = 0.3;
constexpr double kFaultBudgetSeconds = 60.0;
constexpr int kWriters = 4;
constexpr int kAttemptsPerWriter = 100;

constexpr std::int64_t kStart = 1767225600000;
constexpr std::int64_t kEnd = 1767398400000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class TempRoot {
 public:
  explicit TempRoot(const std::string& label) {
    path_ = std::filesystem::temp_directory_path() /
            ("hacknizer-acceptance-" + label + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempRoot() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

harness::SystemTopology cheap(harness::SystemTopology topology) {
  topology.password_params = chassis::ScryptParams{4, 8, 1};
  return topology;
}

std::unique_ptr<harness::System> compose(harness::SystemTopology topology) {
  auto system = harness::System::compose(std::move(topology));
  if (!system.ok()) throw Failure("compose: " + system.error().to_string());
  return std::move(system).value();
}

bool has_prefix(const std::string& s, std::string_view prefix) {
  return s.rfind(prefix, 0) == 0;
}

std::size_t count_type(const std::vector<EventEnvelope>& log, std::string_view type) {
  return std::count_if(log.begin(), log.end(),
                       [&](const EventEnvelope& e) { return e.event_type == type; });
}

// --- feature scenario -------------------------------------------------------

Outcome feature_scenario() {
  auto scenario = harness::load_json_file(std::string(HACKNIZER_SOURCE_DIR) +
                                          "/scenarios/feature.json");
  if (!scenario.ok()) return {false, scenario.error().to_string()};
  const auto t0 = Clock::now();
  auto system = compose(harness::SystemTopology::standard(11));
  auto run = harness::run_scenario(*system, *scenario);
  if (!run.ok()) return {false, run.error().to_string()};
  Client client(*system);
  client.drain();
  const double elapsed = seconds_since(t0);
  Json overview = client.expect(200, "GET", "/api/hackathons/" + run->vars.at("hk"));
  const int lag = overview["projection_lag"];
  std::ostringstream detail;
  detail << run->requests << " requests, state=" << overview["state"].get<std::string>()
         << ", projection_lag=" << lag << ", " << elapsed << " s (limit "
         << kFeatureBudgetSeconds << " s)";
  return {lag == 0 && overview["state"] == "WinnerDeclared" && elapsed < kFeatureBudgetSeconds,
          detail.str()};
}

// --- random valid workload ----------------------------------------------------

struct TeamModel {
  std::string team_id;
  std::vector<std::string> members;  // user ids
  bool submitted = false;
};

struct HackathonModel {
  std::string id;
  std::size_t organizer = 0;
  int state = 0;  // 0 Draft, 1 RegistrationOpen, 2 InProgress, 3 Ended, 4 WinnerDeclared
  int capacity = 0;
  int team_min = 1;
  int team_max = 1;
  std::set<std::string> participants;
  std::set<std::string> in_team;
  std::vector<TeamModel> teams;
  std::vector<std::string> sponsors;
  std::vector<std::string> awards;
  int sections = 0;
  bool published = false;
};

// Drives seeded commands that the model predicts are legal, draining after
// each so the model stays exact.
class Workload {
 public:
  Workload(harness::System& system, std::uint64_t seed) : client_(system), rng_(seed) {}

  int accepted() const { return accepted_; }

  void run(int target) {
    admin_ = client_.login("admin@hacknizer.local", "admin-password");
    for (int i = 0; i < 4; ++i) add_user(true);
    for (int i = 0; i < 12; ++i) add_user(false);
    for (int guard = 0; accepted_ < target; ++guard) {
      if (guard > target * 50) throw Failure("workload stalled at " + std::to_string(accepted_));
      step();
    }
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::string color() {
    static const char* kHex = "0123456789abcdef";
    std::string c = "#";
    for (int i = 0; i < 6; ++i) c += kHex[pick(16)];
    return c;
  }

  Json send(const std::string& method, const std::string& path, const Json& body,
            Session* as) {
    Json reply = client_.expect(202, method, path, body, as ? client_.token(*as) : std::string());
    ++accepted_;
    client_.drain();
    return reply;
  }

  void add_user(bool organizer) {
    const int n = static_cast<int>(users_.size());
    const std::string email = "user" + std::to_string(n) + "@example.org";
    const std::string password = "passphrase-" + std::to_string(n);
    send("POST", "/api/users",
         {{"email", email}, {"display_name", "User " + std::to_string(n)}, {"password", password}},
         nullptr);
    Session session = client_.login(email, password);
    if (organizer) {
      send("POST", "/api/users/" + session.user_id + "/roles", {{"role", "organizer"}}, &admin_);
      session = client_.login(email, password);
      organizers_.push_back(users_.size());
    } else {
      participants_.push_back(users_.size());
    }
    users_.push_back(session);
  }

  HackathonModel* any_hackathon(const std::function<bool(const HackathonModel&)>& ok) {
    std::vector<HackathonModel*> candidates;
    for (auto& h : hackathons_) {
      if (ok(h)) candidates.push_back(&h);
    }
    return candidates.empty() ? nullptr : candidates[pick(candidates.size())];
  }

  Session& organizer_of(const HackathonModel& h) { return users_[h.organizer]; }

  void step() {
    switch (pick(14)) {
      case 0:
        if (users_.size() < 60) add_user(pick(5) == 0);
        break;
      case 1:
        if (hackathons_.size() < 40) create_hackathon();
        break;
      case 2:
        if (auto* h = any_hackathon([](const auto& h) { return h.state <= 1; })) {
          const int capacity = std::max<int>(h->capacity, h->participants.size()) + between(0, 3);
          send("PATCH", "/api/hackathons/" + h->id,
               {{"description", "rev " + std::to_string(accepted_)}, {"capacity", capacity}},
               &organizer_of(*h));
          h->capacity = capacity;
        }
        break;
      case 3:
        if (auto* h = any_hackathon([](const auto& h) { return h.state <= 3; })) {
          Json r = send("POST", "/api/hackathons/" + h->id + "/sponsors",
                        {{"name", "Sponsor " + std::to_string(accepted_)}, {"tier", "gold"}},
                        &organizer_of(*h));
          h->sponsors.push_back(r["resource_id"]);
        }
        break;
      case 4:
        if (auto* h = any_hackathon([](const auto& h) { return h.state <= 3; })) {
          Json body{{"title", "Award " + std::to_string(accepted_)}};
          if (!h->sponsors.empty()) body["sponsor_id"] = h->sponsors[pick(h->sponsors.size())];
          Json r = send("POST", "/api/hackathons/" + h->id + "/awards", body, &organizer_of(*h));
          h->awards.push_back(r["resource_id"]);
        }
        break;
      case 5:
        if (auto* h = any_hackathon([](const auto&) { return true; })) {
          send("PATCH", "/api/pages/" + h->id + "/theme",
               {{"primary_color", color()}, {"accent_color", color()}}, &organizer_of(*h));
        }
        break;
      case 6:
        if (auto* h = any_hackathon([](const auto&) { return true; })) {
          const std::string id = "s" + std::to_string(h->sections++);
          send("PATCH", "/api/pages/" + h->id + "/sections",
               {{"ops", Json::array({{{"op", "add"},
                                      {"section", {{"section_id", id}, {"kind", "markdown"},
                                                   {"body", "## " + id}}}}})}},
               &organizer_of(*h));
        }
        break;
      case 7:
        if (auto* h = any_hackathon([](const auto& h) { return !h.published; })) {
          send("POST", "/api/pages/" + h->id + "/publish", nullptr, &organizer_of(*h));
          h->published = true;
        }
        break;
      case 8:
        if (auto* h = any_hackathon([](const auto& h) { return h.state <= 2; })) {
          static const char* kActions[] = {"open_registration", "start", "end"};
          send("POST", "/api/hackathons/" + h->id + "/transition",
               {{"action", kActions[h->state]}}, &organizer_of(*h));
          ++h->state;
        }
        break;
      case 9:
      case 10:
        register_participant();
        break;
      case 11:
        create_or_join_team();
        break;
      case 12:
        submit_project();
        break;
      case 13:
        declare_winner();
        break;
    }
  }

  void create_hackathon() {
    HackathonModel h;
    h.organizer = organizers_[pick(organizers_.size())];
    h.capacity = between(3, 12);
    h.team_min = between(1, 2);
    h.team_max = between(h.team_min, 4);
    Json r = send("POST", "/api/hackathons",
                  {{"title", "Hack " + std::to_string(hackathons_.size())},
                   {"start", kStart}, {"end", kEnd}, {"capacity", h.capacity},
                   {"team_min", h.team_min}, {"team_max", h.team_max}},
                  &users_[h.organizer]);
    h.id = r["resource_id"];
    hackathons_.push_back(std::move(h));
  }

  void register_participant() {
    auto* h = any_hackathon([](const auto& h) {
      return h.state == 1 && static_cast<int>(h.participants.size()) < h.capacity;
    });
    if (h == nullptr) return;
    std::vector<std::size_t> free;
    for (std::size_t u : participants_) {
      if (!h->participants.count(users_[u].user_id)) free.push_back(u);
    }
    if (free.empty()) return;
    Session& user = users_[free[pick(free.size())]];
    send("POST", "/api/hackathons/" + h->id + "/participants", nullptr, &user);
    h->participants.insert(user.user_id);
  }

  Session& session_of(const std::string& user_id) {
    for (auto& s : users_) {
      if (s.user_id == user_id) return s;
    }
    throw Failure("unknown user " + user_id);
  }

  void create_or_join_team() {
    auto* h = any_hackathon([](const auto& h) {
      return (h.state == 1 || h.state == 2) && h.in_team.size() < h.participants.size();
    });
    if (h == nullptr) return;
    std::vector<std::string> loose;
    for (const auto& p : h->participants) {
      if (!h->in_team.count(p)) loose.push_back(p);
    }
    const std::string user_id = loose[pick(loose.size())];
    std::vector<TeamModel*> open;
    for (auto& t : h->teams) {
      if (static_cast<int>(t.members.size()) < h->team_max) open.push_back(&t);
    }
    if (!open.empty() && pick(2) == 0) {
      TeamModel* team = open[pick(open.size())];
      send("POST", "/api/teams/" + team->team_id + "/members", nullptr, &session_of(user_id));
      team->members.push_back(user_id);
    } else {
      Json r = send("POST", "/api/teams",
                    {{"hackathon_id", h->id}, {"name", "Team " + std::to_string(h->teams.size())}},
                    &session_of(user_id));
      h->teams.push_back({r["resource_id"], {user_id}, false});
    }
    h->in_team.insert(user_id);
  }

  void submit_project() {
    auto* h = any_hackathon([](const auto& h) {
      return h.state == 2 && std::any_of(h.teams.begin(), h.teams.end(), [&](const TeamModel& t) {
               return static_cast<int>(t.members.size()) >= h.team_min;
             });
    });
    if (h == nullptr) return;
    std::vector<TeamModel*> ready;
    for (auto& t : h->teams) {
      if (static_cast<int>(t.members.size()) >= h->team_min) ready.push_back(&t);
    }
    TeamModel* team = ready[pick(ready.size())];
    send("POST", "/api/teams/" + team->team_id + "/project",
         {{"title", "Project " + std::to_string(accepted_)}},
         &session_of(team->members[pick(team->members.size())]));
    team->submitted = true;
  }

  void declare_winner() {
    auto* h = any_hackathon([](const auto& h) {
      return h.state == 3 && !h.awards.empty() &&
             std::any_of(h.teams.begin(), h.teams.end(),
                         [](const TeamModel& t) { return t.submitted; });
    });
    if (h == nullptr) return;
    std::vector<TeamModel*> done;
    for (auto& t : h->teams) {
      if (t.submitted) done.push_back(&t);
    }
    send("POST", "/api/hackathons/" + h->id + "/winner",
         {{"team_id", done[pick(done.size())]->team_id},
          {"award_id", h->awards[pick(h->awards.size())]}},
         &organizer_of(*h));
    h->state = 4;
  }

  Client client_;
  std::mt19937_64 rng_;
  int accepted_ = 0;
  Session admin_;
  std::vector<Session> users_;
  std::vector<std::size_t> organizers_;
  std::vector<std::size_t> participants_;
  std::vector<HackathonModel> hackathons_;
};

// Live aggregate states, keyed "<service>/<stream_id>", as canonical JSON-free
// comparisons need the typed states themselves.
struct LiveStates {
  std::map<std::string, user::UserAccount> users;
  std::map<std::string, hackathon::Hackathon> hackathons;
  std::map<std::string, team::Team> teams;
  std::map<std::string, team::Participant> participants;
  std::map<std::string, team::NameClaim> names;
  std::map<std::string, page::PageDocument> pages;
  std::map<std::string, saga::SagaInstance> sagas;
  std::size_t size() const {
    return users.size() + hackathons.size() + teams.size() + participants.size() + names.size() +
           pages.size() + sagas.size();
  }
};

template <typename State, typename Load>
void capture(chassis::EventStore& store, std::map<std::string, State>& out, Load load,
             const std::function<bool(const std::string&)>& is_kind) {
  for (const auto& id : store.stream_ids()) {
    if (!is_kind(id)) continue;
    auto loaded = load(id);
    if (!loaded.ok()) throw Failure("load " + id + ": " + loaded.error().to_string());
    out[id] = loaded->state;
  }
}

LiveStates capture_live(harness::System& system) {
  LiveStates live;
  auto not_cmd = [](const std::string& id) { return !has_prefix(id, "cmd-"); };
  capture(*system.store("user"), live.users, [&](const auto& id) { return system.user()->load(id); },
          [](const std::string& id) { return !has_prefix(id, "cmd-") && !has_prefix(id, "email-"); });
  capture(*system.store("hackathon"), live.hackathons,
          [&](const auto& id) { return system.hackathon()->load(id); }, not_cmd);
  capture(*system.store("team"), live.participants,
          [&](const auto& id) { return system.team()->load_participant(id); },
          [](const std::string& id) { return has_prefix(id, "pt-"); });
  capture(*system.store("team"), live.names,
          [&](const auto& id) { return system.team()->load_name_claim(id); },
          [](const std::string& id) { return has_prefix(id, "teamname-"); });
  capture(*system.store("team"), live.teams,
          [&](const auto& id) { return system.team()->load_team(id); },
          [](const std::string& id) {
            return !has_prefix(id, "cmd-") && !has_prefix(id, "pt-") && !has_prefix(id, "teamname-");
          });
  capture(*system.store("page"), live.pages, [&](const auto& id) { return system.page()->load(id); },
          not_cmd);
  capture(*system.store("saga"), live.sagas, [&](const auto& id) { return system.saga()->load(id); },
          not_cmd);
  return live;
}

// Independent fold of one stream as read back from disk.
template <typename State>
int compare_folds(const chassis::EventStore& store, const chassis::AggregateDefinition<State>& def,
                  const std::map<std::string, State>& live, std::vector<std::string>& mismatches) {
  int compared = 0;
  for (const auto& [id, state] : live) {
    const auto stream = store.load_stream(id);
    auto folded = chassis::fold_aggregate(def, std::span<const EventEnvelope>(stream));
    ++compared;
    if (!folded.ok() || !(*folded == state)) mismatches.push_back(store.stream_type() + "/" + id);
  }
  return compared;
}

struct ReplayArtifacts {
  std::string live_canonical;
  std::vector<std::vector<EventEnvelope>> logs;
  std::filesystem::path root;
};

Outcome replay_equivalence(const std::filesystem::path& root, ReplayArtifacts& artifacts) {
  auto system = compose(cheap(harness::SystemTopology::on_disk(root.string(), 2026)));
  Workload workload(*system, 2026);
  workload.run(kReplayMinCommands + 100);

  std::size_t rejected = 0;
  std::size_t aborted = 0;
  for (const auto& log : system->logs()) {
    rejected += count_type(log, chassis::kCommandRejected);
  }
  const LiveStates live = capture_live(*system);
  for (const auto& [id, saga] : live.sagas) aborted += saga.status == saga::SagaStatus::kAborted;
  artifacts.live_canonical = system->query()->canonical_form();
  artifacts.logs = system->logs();
  artifacts.root = root;
  system.reset();  // closes every store

  chassis::SimulatedClock clock;
  std::vector<std::string> mismatches;
  int compared = 0;
  std::size_t log_index = 0;
  bool logs_equal = true;
  for (const auto& name : {"user", "hackathon", "team", "page", "saga"}) {
    auto ids = chassis::IdGenerator::derived(1, "reopen");
    auto store = chassis::EventStore::open({name, root / name}, clock, ids);
    if (!store.ok()) return {false, "reopen " + std::string(name) + ": " + store.error().to_string()};
    const auto reread = (*store)->read_all();
    const auto& before = artifacts.logs[log_index++];
    logs_equal = logs_equal && reread.size() == before.size() &&
                 std::equal(reread.begin(), reread.end(), before.begin(),
                            [](const auto& a, const auto& b) { return to_wire(a) == to_wire(b); });
    const std::string n = name;
    if (n == "user") compared += compare_folds(**store, user::user_definition(), live.users, mismatches);
    if (n == "hackathon") {
      compared += compare_folds(**store, hackathon::hackathon_definition(), live.hackathons, mismatches);
    }
    if (n == "team") {
      compared += compare_folds(**store, team::team_definition(), live.teams, mismatches);
      compared += compare_folds(**store, team::participant_definition(), live.participants, mismatches);
      compared += compare_folds(**store, team::name_claim_definition(), live.names, mismatches);
    }
    if (n == "page") compared += compare_folds(**store, page::page_definition(), live.pages, mismatches);
    if (n == "saga") compared += compare_folds(**store, saga::saga_definition(), live.sagas, mismatches);
  }

  std::ostringstream detail;
  detail << workload.accepted() << " commands accepted, " << rejected << " rejected, " << aborted
         << " sagas aborted, " << compared << " aggregates folded from disk, "
         << mismatches.size() << " mismatches" << (logs_equal ? "" : ", reopened logs differ");
  if (!mismatches.empty()) detail << " (first: " << mismatches.front() << ")";
  return {workload.accepted() >= kReplayMinCommands && rejected == 0 && aborted == 0 &&
              compared == static_cast<int>(live.size()) && mismatches.empty() && logs_equal,
          detail.str()};
}

// --- rebuild ----------------------------------------------------------------

Outcome rebuild_equivalence(const ReplayArtifacts& artifacts) {
  if (artifacts.logs.empty()) return {false, "no workload artifacts"};
  const std::string& live = artifacts.live_canonical;
  const std::string serial = query::rebuild(artifacts.logs).canonical_form();

  // Cross-stream interleaving shuffled, per-stream order kept.
  std::mt19937_64 rng(77);
  std::map<std::pair<std::string, std::string>, std::deque<EventEnvelope>> streams;
  for (const auto& log : artifacts.logs) {
    for (const auto& e : log) streams[{e.stream_type, e.stream_id}].push_back(e);
  }
  query::ReadModel shuffled;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [key, queue] : streams) keys.push_back(key);
  while (!keys.empty()) {
    const std::size_t i = std::uniform_int_distribution<std::size_t>(0, keys.size() - 1)(rng);
    auto& queue = streams[keys[i]];
    (void)shuffled.apply(queue.front());
    queue.pop_front();
    if (queue.empty()) keys.erase(keys.begin() + static_cast<std::ptrdiff_t>(i));
  }

  auto restored = query::read_checkpoint(artifacts.root / "query" / "query.checkpoint");
  const bool checkpoint_equal = restored.ok() && restored->canonical_form() == live;
  const bool ok = serial == live && shuffled.canonical_form() == live && checkpoint_equal;
  std::ostringstream detail;
  detail << live.size() << " canonical bytes; serial rebuild "
         << (serial == live ? "equal" : "DIFFERS") << ", shuffled rebuild "
         << (shuffled.canonical_form() == live ? "equal" : "DIFFERS") << ", checkpoint restore "
         << (checkpoint_equal ? "equal" : "DIFFERS");
  return {ok, detail.str()};
}

// --- saga atomicity under faults -------------------------------------------

struct FaultTally {
  int registrations = 0;
  int confirmed = 0;
  int released = 0;
  int winners = 0;
  int aborted_winners = 0;
  std::uint64_t dropped = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t delayed = 0;
  std::size_t step_timeouts = 0;
  std::size_t compensations = 0;
  std::size_t revocations = 0;
  std::vector<std::string> violations;
};

void fault_scenario(std::uint64_t seed, FaultTally& tally) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto between = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  auto system = compose(cheap(harness::SystemTopology::standard(seed)));
  // Every other scenario delays past the whole retry budget of a step.
  const chassis::Millis delay_max = seed % 2 == 0 ? between(50, 3000) : between(3000, 20000);
  for (auto kind : {harness::FaultKind::kDrop, harness::FaultKind::kDuplicate, harness::FaultKind::kDelay}) {
    harness::FaultSpec spec{kind, "*", uniform(0.0, kMaxFaultRate), 0, 0};
    if (kind == harness::FaultKind::kDelay) spec.delay_max_ms = delay_max;
    auto added = system->inject_fault(spec);
    if (!added.ok()) throw Failure("fault: " + added.error().to_string());
  }

  Client client(*system);
  auto fail = [&](const std::string& what) {
    tally.violations.push_back("seed " + std::to_string(seed) + ": " + what);
  };
  Session admin = client.login("admin@hacknizer.local", "admin-password");
  const int people = between(3, 6);
  std::vector<std::pair<std::string, std::string>> creds;
  for (int i = 0; i <= people; ++i) {
    creds.emplace_back("p" + std::to_string(i) + "@example.org", "passphrase-" + std::to_string(i));
    client.expect(202, "POST", "/api/users",
                  {{"email", creds.back().first}, {"display_name", "P"}, {"password", creds.back().second}});
  }
  client.drain();
  Session org = client.login(creds[0].first, creds[0].second);
  client.expect(202, "POST", "/api/users/" + org.user_id + "/roles", {{"role", "organizer"}},
                client.token(admin));
  client.drain();
  org = client.login(creds[0].first, creds[0].second);
  std::vector<Session> users;
  for (int i = 1; i <= people; ++i) users.push_back(client.login(creds[i].first, creds[i].second));

  const int capacity = between(1, people);
  Json created = client.expect(202, "POST", "/api/hackathons",
                               {{"title", "Faulty"}, {"start", kStart}, {"end", kEnd},
                                {"capacity", capacity}, {"team_min", 1}, {"team_max", 3}},
                               client.token(org));
  const std::string hk = created["resource_id"];
  client.drain();
  Json award = client.expect(202, "POST", "/api/hackathons/" + hk + "/awards", {{"title", "Prize"}},
                             client.token(org));
  client.expect(202, "POST", "/api/hackathons/" + hk + "/transition",
                {{"action", "open_registration"}}, client.token(org));
  client.drain();

  std::map<std::string, std::string> saga_user;  // registration saga -> user id
  for (auto& user : users) {
    Json r = client.expect(202, "POST", "/api/hackathons/" + hk + "/participants", nullptr,
                           client.token(user));
    saga_user[r["saga_id"]] = user.user_id;
    if (between(0, 3) == 0) {  // concurrent second attempt by the same user
      Json again = client.expect(202, "POST", "/api/hackathons/" + hk + "/participants", nullptr,
                                 client.token(user));
      saga_user[again["saga_id"]] = user.user_id;
    }
  }
  client.drain();

  // Teams from whoever got in: the first submits, the second does not.
  std::vector<Session*> confirmed;
  for (auto& user : users) {
    auto p = system->team()->load_participant(team::participant_id_for(hk, user.user_id));
    if (p.ok() && p->state.registered) confirmed.push_back(&user);
  }
  std::vector<std::string> teams;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, confirmed.size()); ++i) {
    Json t = client.expect(202, "POST", "/api/teams",
                           {{"hackathon_id", hk}, {"name", "T" + std::to_string(i)}},
                           client.token(*confirmed[i]));
    teams.push_back(t["resource_id"]);
    client.drain();
  }
  client.expect(202, "POST", "/api/hackathons/" + hk + "/transition", {{"action", "start"}},
                client.token(org));
  client.drain();
  if (!teams.empty()) {
    client.expect(202, "POST", "/api/teams/" + teams[0] + "/project", {{"title", "Thing"}},
                  client.token(*confirmed[0]));
    client.drain();
  }
  client.expect(202, "POST", "/api/hackathons/" + hk + "/transition", {{"action", "end"}},
                client.token(org));
  client.drain();
  std::vector<std::string> winner_sagas;
  for (auto it = teams.rbegin(); it != teams.rend(); ++it) {
    Json w = client.expect(202, "POST", "/api/hackathons/" + hk + "/winner",
                           {{"team_id", *it}, {"award_id", award["resource_id"]}},
                           client.token(org));
    winner_sagas.push_back(w["saga_id"]);
    client.drain();
  }

  // Invariants, checked against the aggregates themselves.
  auto h = system->hackathon()->load(hk);
  if (!h.ok()) throw Failure("load hackathon: " + h.error().to_string());
  int registered = 0;
  for (const auto& [saga_id, user_id] : saga_user) {
    ++tally.registrations;
    auto saga = system->saga()->load(saga_id);
    auto participant = system->team()->load_participant(team::participant_id_for(hk, user_id));
    // Confirmed by this saga: registered through this saga's reservation.
    const bool is_participant = participant.ok() && participant->state.registered &&
                                participant->state.reservation_id ==
                                    saga::reservation_id_for_saga(saga_id);
    auto r = h->state.reservations.find(saga::reservation_id_for_saga(saga_id));
    const bool consumed = r != h->state.reservations.end() &&
                          r->second.status == hackathon::ReservationStatus::kConsumed;
    const bool released = r == h->state.reservations.end() ||
                          r->second.status == hackathon::ReservationStatus::kReleased;
    const bool in = is_participant && consumed;
    const bool out = !is_participant && released;
    registered += is_participant;
    if (in == out) fail("saga " + saga_id + " is neither confirmed nor cleanly released");
    if (!saga.ok() || (in && saga->state.status != saga::SagaStatus::kCompleted) ||
        (out && saga->state.status != saga::SagaStatus::kAborted)) {
      fail("saga " + saga_id + " is " +
           (saga.ok() ? std::string(saga::to_string(saga->state.status)) : "missing") +
           " but " + (in ? "confirmed" : "released"));
    }
    tally.confirmed += in;
    tally.released += out;
  }
  if (h->state.pending_reservations() != 0) {
    fail(std::to_string(h->state.pending_reservations()) + " leaked reservations");
  }
  if (registered > capacity || h->state.slots_used != registered) {
    fail("registered " + std::to_string(registered) + ", slots " +
         std::to_string(h->state.slots_used) + ", capacity " + std::to_string(capacity));
  }
  const auto hackathon_log = system->store("hackathon")->read_all();
  tally.revocations += count_type(hackathon_log, "RegistrationRevoked");
  if (!system->query()->quarantine().empty()) {
    fail(std::to_string(system->query()->quarantine().size()) + " envelopes quarantined by the read side");
  }
  for (const auto& e : hackathon_log) {
    if (e.event_type != "WinnerDeclared") continue;
    ++tally.winners;
    const std::string team_id = e.payload.value("team_id", "");
    const auto team_log = system->store("team")->load_stream(team_id);
    if (count_type(team_log, "ProjectSubmitted") == 0) {
      fail("WinnerDeclared for " + team_id + " without ProjectSubmitted");
    }
  }
  for (const auto& id : system->store("saga")->stream_ids()) {
    if (has_prefix(id, "cmd-")) continue;
    auto saga = system->saga()->load(id);
    if (saga.ok() && (saga->state.status == saga::SagaStatus::kRunning ||
                      saga->state.status == saga::SagaStatus::kCompensating)) {
      fail("saga " + id + " still " + std::string(saga::to_string(saga->state.status)));
    }
  }
  for (const auto& id : winner_sagas) {
    auto saga = system->saga()->load(id);
    tally.aborted_winners += saga.ok() && saga->state.status == saga::SagaStatus::kAborted;
  }
  const auto saga_log = system->store("saga")->read_all();
  tally.step_timeouts += count_type(saga_log, "StepTimedOut");
  tally.compensations += count_type(saga_log, "SagaCompensating");
  const auto counters = system->broker().counters();
  tally.dropped += counters.dropped;
  tally.duplicated += counters.duplicated;
  tally.delayed += counters.delayed;
}

Outcome saga_atomicity() {
  const auto t0 = Clock::now();
  FaultTally tally;
  for (int i = 0; i < kFaultScenarios; ++i) fault_scenario(5000 + i, tally);
  const double elapsed = seconds_since(t0);
  std::ostringstream detail;
  detail << kFaultScenarios << " scenarios, " << tally.registrations << " registration sagas ("
         << tally.confirmed << " confirmed, " << tally.released << " released), " << tally.winners
         << " winners, " << tally.aborted_winners << " winner sagas aborted; faults dropped="
         << tally.dropped << " duplicated=" << tally.duplicated << " delayed=" << tally.delayed
         << ", step timeouts=" << tally.step_timeouts << ", compensations=" << tally.compensations
         << ", revocations=" << tally.revocations
         << "; " << tally.violations.size() << " violations; " << elapsed << " s (limit "
         << kFaultBudgetSeconds << " s)";
  if (!tally.violations.empty()) detail << "; first: " << tally.violations.front();
  if (std::getenv("HACKNIZER_VERBOSE")) {
    for (const auto& v : tally.violations) std::fprintf(stderr, "  %s\n", v.c_str());
  }
  return {tally.violations.empty() && elapsed < kFaultBudgetSeconds &&
              tally.confirmed + tally.released == tally.registrations,
          detail.str()};
}

// --- optimistic concurrency ---------------------------------------------------

struct Attempt {
  int writer = 0;
  int index = 0;
  std::uint64_t expected = 0;
  bool accepted = false;
  ErrorCode error = ErrorCode::kStorageError;
};

Outcome optimistic_concurrency(const std::filesystem::path& root) {
  chassis::WallClock clock;
  auto ids = chassis::IdGenerator::derived(3, "occ");
  auto opened = chassis::EventStore::open({"hackathon", root / "occ"}, clock, ids);
  if (!opened.ok()) return {false, opened.error().to_string()};
  chassis::EventStore& store = **opened;
  const std::string stream = "contended";

  // Writers read the head together each round, so every round contends.
  std::vector<std::vector<Attempt>> attempts(kWriters);
  std::vector<std::thread> threads;
  std::barrier round(kWriters);
  for (int w = 0; w < kWriters; ++w) {
    threads.emplace_back([&, w] {
      for (int i = 0; i < kAttemptsPerWriter; ++i) {
        round.arrive_and_wait();
        Attempt a{w, i, store.head(stream).current_version};
        round.arrive_and_wait();
        auto appended = store.append_to_stream(
            stream, a.expected, {chassis::NewEvent{"Tick", {{"writer", w}, {"index", i}}}});
        a.accepted = appended.ok();
        if (!appended.ok()) a.error = appended.code();
        attempts[w].push_back(a);
      }
    });
  }
  for (auto& t : threads) t.join();

  const auto log = store.load_stream(stream);
  bool contiguous = true;
  std::map<std::pair<int, int>, std::uint64_t> slot_of;  // (writer, index) -> sequence
  for (std::size_t i = 0; i < log.size(); ++i) {
    contiguous = contiguous && log[i].sequence == i + 1;
    slot_of[{log[i].payload["writer"], log[i].payload["index"]}] = log[i].sequence;
  }

  // Serial oracle: replaying in log order, an attempt lands iff its expected
  // version is the stream head at that point, i.e. it owns slot expected+1.
  std::set<std::pair<int, int>> accepted;
  std::set<std::pair<int, int>> oracle;
  bool errors_ok = true;
  int conflicts = 0;
  for (const auto& writer : attempts) {
    for (const auto& a : writer) {
      if (a.accepted) accepted.insert({a.writer, a.index});
      if (!a.accepted && a.error != ErrorCode::kVersionConflict) errors_ok = false;
      conflicts += !a.accepted;
      auto slot = slot_of.find({a.writer, a.index});
      if (slot != slot_of.end() && slot->second == a.expected + 1) oracle.insert({a.writer, a.index});
      if (!a.accepted && a.expected >= log.size()) errors_ok = false;  // nothing took its slot
    }
  }
  chassis::SimulatedClock serial_clock;
  auto serial_ids = chassis::IdGenerator::derived(3, "serial");
  auto serial = chassis::EventStore::open({"hackathon", ""}, serial_clock, serial_ids);
  bool serial_ok = serial.ok();
  for (std::size_t i = 0; serial_ok && i < log.size(); ++i) {
    serial_ok = (*serial)->append_to_stream(stream, i, {{"Tick", log[i].payload}}).ok() &&
                !(*serial)->append_to_stream(stream, i, {{"Tick", log[i].payload}}).ok();
  }
  std::ostringstream detail;
  detail << kWriters << "x" << kAttemptsPerWriter << " attempts, " << accepted.size()
         << " accepted, " << conflicts << " VersionConflict, sequences 1.." << log.size() << (contiguous ? " contiguous" : " NOT contiguous")
         << ", oracle " << (oracle == accepted ? "agrees" : "DISAGREES");
  return {contiguous && accepted.size() == log.size() && oracle == accepted && errors_ok && serial_ok &&
              conflicts > 0,
          detail.str()};
}

// --- lifecycle ----------------------------------------------------------------

Outcome lifecycle_table() {
  auto system = compose(cheap(harness::SystemTopology::standard(6)));
  Client client(*system);
  Session admin = client.login("admin@hacknizer.local", "admin-password");
  for (const auto& [email, pw] : {std::pair{"org@example.org", "passphrase-o"},
                                  std::pair{"pat@example.org", "passphrase-p"}}) {
    client.expect(202, "POST", "/api/users", {{"email", email}, {"display_name", "X"}, {"password", pw}});
  }
  client.drain();
  Session org = client.login("org@example.org", "passphrase-o");
  client.expect(202, "POST", "/api/users/" + org.user_id + "/roles", {{"role", "organizer"}},
                client.token(admin));
  client.drain();
  org = client.login("org@example.org", "passphrase-o");
  Session pat = client.login("pat@example.org", "passphrase-p");

  auto transition = [&](const std::string& hk, const std::string& action) {
    Json r = client.expect(202, "POST", "/api/hackathons/" + hk + "/transition",
                           {{"action", action}}, client.token(org));
    client.drain();
    return client.expect(200, "GET", "/api/commands/" + r["command_id"].get<std::string>());
  };
  auto state_of = [&](const std::string& hk) {
    return client.expect(200, "GET", "/api/hackathons/" + hk)["state"].get<std::string>();
  };

  const std::vector<std::string> states = {"Draft", "RegistrationOpen", "InProgress", "Ended",
                                           "WinnerDeclared"};
  const std::vector<std::string> actions = {"open_registration", "start", "end"};
  // Oracle: the only legal moves.
  const std::set<std::pair<std::string, std::string>> legal = {
      {"Draft", "open_registration"}, {"RegistrationOpen", "start"}, {"InProgress", "end"}};

  int succeeded = 0;
  int invalid = 0;
  std::vector<std::string> wrong;
  for (std::size_t s = 0; s < states.size(); ++s) {
    Json created = client.expect(202, "POST", "/api/hackathons",
                                 {{"title", "L" + std::to_string(s)}, {"start", kStart},
                                  {"end", kEnd}, {"capacity", 5}, {"team_min", 1}, {"team_max", 2}},
                                 client.token(org));
    const std::string hk = created["resource_id"];
    client.drain();
    if (s >= 1) transition(hk, "open_registration");
    std::string team;
    std::string award;
    if (s == 4) {
      award = client.expect(202, "POST", "/api/hackathons/" + hk + "/awards", {{"title", "A"}},
                            client.token(org))["resource_id"];
      client.expect(202, "POST", "/api/hackathons/" + hk + "/participants", nullptr,
                    client.token(pat));
      client.drain();
      team = client.expect(202, "POST", "/api/teams", {{"hackathon_id", hk}, {"name", "Solo"}},
                           client.token(pat))["resource_id"];
      client.drain();
    }
    if (s >= 2) transition(hk, "start");
    if (s == 4) {
      client.expect(202, "POST", "/api/teams/" + team + "/project", {{"title", "P"}},
                    client.token(pat));
      client.drain();
    }
    if (s >= 3) transition(hk, "end");
    if (s == 4) {
      client.expect(202, "POST", "/api/hackathons/" + hk + "/winner",
                    {{"team_id", team}, {"award_id", award}}, client.token(org));
      client.drain();
    }
    if (state_of(hk) != states[s]) return {false, "could not reach " + states[s]};

    // Illegal actions first so the state stays put for them.
    std::vector<std::string> order = actions;
    std::stable_partition(order.begin(), order.end(),
                          [&](const auto& a) { return !legal.count({states[s], a}); });
    for (const auto& action : order) {
      const std::string before = state_of(hk);
      Json status = transition(hk, action);
      const bool ok = status["status"] == "succeeded";
      const bool expected_ok = legal.count({states[s], action}) != 0;
      succeeded += ok;
      if (!ok && status.value("error", "") == "InvalidTransition" && state_of(hk) == before) ++invalid;
      if (ok != expected_ok) wrong.push_back(states[s] + "/" + action);
    }
  }
  std::ostringstream detail;
  detail << states.size() * actions.size() << " pairs: " << succeeded << " legal, " << invalid
         << " InvalidTransition";
  if (!wrong.empty()) detail << ", unexpected: " << wrong.front();
  return {succeeded == 3 && invalid == 12 && wrong.empty(), detail.str()};
}

// --- process isolation ----------------------------------------------------------

class Process {
 public:
  Process(const std::vector<std::string>& args, const std::filesystem::path& log) {
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 2, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    if (posix_spawn(&pid_, argv[0], &actions, nullptr, argv.data(), environ) != 0) pid_ = -1;
    posix_spawn_file_actions_destroy(&actions);
  }
  ~Process() { stop(); }

  // Exit code once the process ended within `timeout`, else nullopt.
  std::optional<int> wait_exit(std::chrono::milliseconds timeout) {
    if (pid_ <= 0) return exit_;
    const auto deadline = Clock::now() + timeout;
    while (Clock::now() < deadline) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        exit_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        return exit_;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return std::nullopt;
  }

  std::optional<int> stop() {
    if (pid_ > 0) {
      ::kill(pid_, SIGTERM);
      if (!wait_exit(std::chrono::seconds(5))) {
        ::kill(pid_, SIGKILL);
        wait_exit(std::chrono::seconds(5));
      }
    }
    return exit_;
  }

  bool started() const { return pid_ > 0 || exit_.has_value(); }

 private:
  pid_t pid_ = -1;
  std::optional<int> exit_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::optional<std::string> wait_for_port(const std::filesystem::path& file) {
  const auto deadline = Clock::now() + std::chrono::seconds(10);
  while (Clock::now() < deadline) {
    std::string text = read_file(file);
    if (!text.empty() && text.back() == '\n') {
      return "http://127.0.0.1:" + text.substr(0, text.size() - 1);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  return std::nullopt;
}

Outcome process_isolation(const std::filesystem::path& root) {
  const std::string cli = HACKNIZER_CLI;
  auto write_config = [&](const std::string& name, const std::string& extra) {
    const auto path = root / (name + ".conf");
    std::ofstream(path) << "# " << name << "\nport = 0\nport_file = " << (root / (name + ".port")).string()
                        << "\n" << extra;
    return path;
  };
  auto launch = [&](const std::string& service, const std::filesystem::path& config,
                    const std::string& log_name) {
    return std::make_unique<Process>(
        std::vector<std::string>{cli, "run", "--service", service, "--config", config.string()},
        root / (log_name + ".log"));
  };

  std::vector<std::unique_ptr<Process>> nodes;
  nodes.push_back(launch("broker", write_config("broker", ""), "broker"));
  auto broker = wait_for_port(root / "broker.port");
  if (!broker) return {false, "broker did not start"};

  const std::vector<std::string> services = {"user", "hackathon", "team", "page", "saga", "query"};
  std::map<std::string, std::string> urls;
  for (const auto& s : services) {
    const std::string extra = "data_dir = " + (root / "data" / s).string() + "\nbroker = " + *broker +
                              "\npassword_log2_n = 4\n";
    nodes.push_back(launch(s, write_config(s, extra), s));
  }
  for (const auto& s : services) {
    auto url = wait_for_port(root / (s + ".port"));
    if (!url) return {false, s + " did not start: " + read_file(root / (s + ".log"))};
    urls[s] = *url;
  }
  nodes.push_back(launch("gateway",
                         write_config("gateway", "broker = " + *broker + "\nuser_url = " +
                                                     urls["user"] + "\nquery_url = " + urls["query"] + "\n"),
                         "gateway"));
  auto gateway = wait_for_port(root / "gateway.port");
  if (!gateway) return {false, "gateway did not start"};

  // Cross-process round trip: register through the gateway, then log in
  // once the user node has consumed the command.
  auto registered = gateway::http_call(*gateway, "POST", "/api/users",
                                       {{"email", "iso@example.org"}, {"display_name", "Iso"},
                                        {"password", "passphrase-iso"}});
  if (!registered.ok() || registered->status != 202) return {false, "register over HTTP failed"};
  bool logged_in = false;
  for (auto deadline = Clock::now() + std::chrono::seconds(10); !logged_in && Clock::now() < deadline;) {
    auto login = gateway::http_call(*gateway, "POST", "/api/auth/login",
                                    {{"email", "iso@example.org"}, {"password", "passphrase-iso"}});
    logged_in = login.ok() && login->status == 200;
    if (!logged_in) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }

  std::set<std::string> metas;
  for (const auto& s : services) {
    if (s == "query") continue;
    metas.insert(read_file(root / "data" / s / chassis::EventStore::kMetaFile));
  }

  // A second process pointed at the user service's directory must refuse.
  const auto user_log = root / "data" / "user" / chassis::EventStore::kLogFile;
  const auto size_before = std::filesystem::file_size(user_log);
  Process rogue({cli, "run", "--service", "hackathon", "--config",
                 write_config("rogue", "data_dir = " + (root / "data" / "user").string() +
                                           "\nbroker = " + *broker + "\n")
                     .string()},
                root / "rogue.log");
  const auto rogue_exit = rogue.wait_exit(std::chrono::seconds(10));
  const std::string rogue_log = read_file(root / "rogue.log");
  const bool refused = rogue_exit && *rogue_exit != 0 &&
                       rogue_log.find("StreamTypeMismatch") != std::string::npos;
  const bool untouched = std::filesystem::file_size(user_log) == size_before;

  int clean = 0;
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) clean += (*it)->stop() == 0;

  std::ostringstream detail;
  detail << nodes.size() << " processes, " << metas.size() << " distinct store owners, login "
         << (logged_in ? "ok" : "FAILED") << "; rogue hackathon on user dir exit="
         << (rogue_exit ? std::to_string(*rogue_exit) : "none")
         << (refused ? " StreamTypeMismatch" : "") << (untouched ? ", dir untouched" : ", DIR MODIFIED")
         << "; " << clean << " clean shutdowns";
  return {logged_in && metas.size() == 5 && refused && untouched &&
              clean == static_cast<int>(nodes.size()),
          detail.str()};
}

}  // namespace
}  // namespace hacknizer::acceptance

int main() {
  using namespace hacknizer::acceptance;
  TempRoot replay_root("replay");
  TempRoot scratch("scratch");
  ReplayArtifacts artifacts;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"feature_scenario", [] { return feature_scenario(); }},
      {"replay_equivalence", [&] { return replay_equivalence(replay_root.path(), artifacts); }},
      {"rebuild_equivalence", [&] { return rebuild_equivalence(artifacts); }},
      {"saga_atomicity", [] { return saga_atomicity(); }},
      {"optimistic_concurrency", [&] { return optimistic_concurrency(scratch.path()); }},
      {"lifecycle_table", [] { return lifecycle_table(); }},
      {"process_isolation", [&] { return process_isolation(scratch.path()); }},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = Clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.pass;
    std::printf("%s %-22s %6.2fs  %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(),
                seconds_since(t0), outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
