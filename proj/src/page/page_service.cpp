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

#include "hacknizer/page/page_service.hpp"

#include <algorithm>
#include <cctype>

namespace hacknizer::page {

using chassis::AppendContext;
using chassis::CommandOutcome;
using chassis::EventEnvelope;
using chassis::NewEvent;
using chassis::Principal;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<Section> sections_from(const Json& array) {
  std::vector<Section> out;
  for (const auto& item : array) {
    if (auto section = section_from_json(item); section.ok()) out.push_back(*section);
  }
  return out;
}

Json sections_json(const std::vector<Section>& sections) {
  Json out = Json::array();
  for (const auto& s : sections) out.push_back(to_json(s));
  return out;
}

std::vector<Section>::iterator find_section(std::vector<Section>& sections,
                                            const std::string& id) {
  return std::find_if(sections.begin(), sections.end(),
                      [&](const Section& s) { return s.section_id == id; });
}

}  // namespace

bool valid_color(std::string_view color) {
  return color.size() == 7 && color[0] == '#' &&
         std::all_of(color.begin() + 1, color.end(),
                     [](unsigned char c) { return std::isxdigit(c) != 0; });
}

bool valid_section_kind(std::string_view kind) {
  return std::find(std::begin(kSectionKinds), std::end(kSectionKinds), kind) !=
         std::end(kSectionKinds);
}

Json to_json(const Theme& theme) {
  return {{"primary_color", theme.primary_color},
          {"accent_color", theme.accent_color},
          {"logo", theme.logo}};
}

Json to_json(const Section& section) {
  Json out{{"section_id", section.section_id}, {"kind", section.kind}};
  if (section.kind == "markdown") out["body"] = section.body;
  return out;
}

Json to_json(const PageDocument& page) {
  return {{"hackathon_id", page.hackathon_id}, {"organizer_id", page.organizer_id},
          {"theme", to_json(page.theme)},      {"sections", sections_json(page.sections)},
          {"published", page.published},       {"revision", page.revision}};
}

Result<Section> section_from_json(const Json& json) {
  if (!json.is_object()) return make_error(ErrorCode::kInvalidInput, "section must be an object");
  Section section{json.value("section_id", ""), json.value("kind", ""), json.value("body", "")};
  if (section.section_id.empty()) return make_error(ErrorCode::kInvalidInput, "section_id");
  if (!valid_section_kind(section.kind)) {
    return make_error(ErrorCode::kInvalidSectionKind, section.kind);
  }
  if (section.kind != "markdown") section.body.clear();
  return section;
}

chassis::AggregateDefinition<PageDocument> page_definition() {
  return {std::string(kContext), PageDocument{}, [](PageDocument page, const EventEnvelope& e) {
            const Json& body = e.payload;
            ++page.revision;
            if (e.event_type == "PageCreated") {
              page.created = true;
              page.hackathon_id = body.value("hackathon_id", e.stream_id);
              page.organizer_id = body.value("organizer_id", "");
              if (body.contains("theme")) {
                const Json& t = body["theme"];
                page.theme = Theme{t.value("primary_color", ""), t.value("accent_color", ""),
                                   t.value("logo", "")};
              }
              page.sections = sections_from(body.value("sections", Json::array()));
            } else if (e.event_type == "ThemeUpdated") {
              page.theme.primary_color = body.value("primary_color", page.theme.primary_color);
              page.theme.accent_color = body.value("accent_color", page.theme.accent_color);
              page.theme.logo = body.value("logo", page.theme.logo);
            } else if (e.event_type == "SectionsEdited") {
              page.sections = sections_from(body.value("sections", Json::array()));
            } else if (e.event_type == "PagePublished") {
              page.published = true;
            }
            return page;
          }};
}

Result<std::vector<Section>> apply_section_edits(std::vector<Section> sections, const Json& ops) {
  if (!ops.is_array() || ops.empty()) {
    return make_error(ErrorCode::kInvalidInput, "ops must be a non-empty array");
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Json& op = ops[i];
    const std::string where = "ops[" + std::to_string(i) + "]";
    if (!op.is_object()) return make_error(ErrorCode::kInvalidInput, where);
    const std::string kind = op.value("op", "");
    auto clamp_index = [&](std::size_t size) {
      if (!op.contains("index") || !op["index"].is_number_integer()) return size;
      auto index = op["index"].get<std::int64_t>();
      return index < 0 ? std::size_t{0} : std::min<std::size_t>(index, size);
    };
    if (kind == "add") {
      auto section = section_from_json(op.value("section", Json()));
      if (!section.ok()) return section.error();
      if (find_section(sections, section->section_id) != sections.end()) {
        return make_error(ErrorCode::kDuplicateSectionId, section->section_id);
      }
      sections.insert(sections.begin() + clamp_index(sections.size()), *section);
      continue;
    }
    const std::string id = op.value("section_id", "");
    auto it = find_section(sections, id);
    if (kind != "remove" && kind != "move" && kind != "replace") {
      return make_error(ErrorCode::kInvalidInput, where + ".op '" + kind + "'");
    }
    if (it == sections.end()) return make_error(ErrorCode::kSectionNotFound, id);
    if (kind == "remove") {
      sections.erase(it);
    } else if (kind == "move") {
      Section moved = *it;
      sections.erase(it);
      sections.insert(sections.begin() + clamp_index(sections.size()), moved);
    } else {
      Json replacement = op.value("section", Json::object());
      if (replacement.is_object()) replacement["section_id"] = id;
      auto section = section_from_json(replacement);
      if (!section.ok()) return section.error();
      *it = *section;
    }
  }
  return sections;
}

PageService::PageService(chassis::ServiceEnv env)
    : CommandService(env), pages_(*env.store, page_definition()) {
  env_.store->attach_publisher(env_.bus);
}

std::vector<std::string> PageService::subscriptions() const {
  return {chassis::commands_topic(kContext), chassis::events_topic("hackathon")};
}

chassis::HandlerOutcome PageService::on_message(const std::string& topic,
                                                const EventEnvelope& envelope) {
  if (topic == chassis::commands_topic(kContext)) return handle_command(envelope);
  if (envelope.event_type == "HackathonCreated") {
    auto created = on_hackathon_created(envelope);
    if (!created.ok() && chassis::is_transient(created.code())) {
      return chassis::HandlerOutcome::kRetry;
    }
  }
  return chassis::HandlerOutcome::kAck;
}

PageService::Outcome PageService::on_hackathon_created(const EventEnvelope& envelope) {
  const std::string& hackathon_id = envelope.stream_id;
  Theme theme;
  Json payload{{"hackathon_id", hackathon_id},
               {"organizer_id", envelope.payload.value("organizer_id", "")},
               {"theme", to_json(theme)},
               {"sections", Json::array({to_json(Section{
                                "about", "markdown",
                                "# " + envelope.payload.value("title", hackathon_id)})})}};
  auto created = append(hackathon_id, 0, {NewEvent{"PageCreated", std::move(payload)}},
                        AppendContext{envelope.correlation_id, envelope.event_id});
  if (!created.ok()) {
    if (created.code() == ErrorCode::kVersionConflict) return CommandOutcome{};
    return created.error();
  }
  return CommandOutcome{std::move(created).value(), {}, {}, Json::object()};
}

template <typename Decide>
PageService::Outcome PageService::mutate(const std::string& hackathon_id, const Principal& actor,
                                         const AppendContext& context, Decide&& decide) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto page = pages_.load(hackathon_id);
    if (!page.ok()) return page.error();
    if (!page->state.created) return make_error(ErrorCode::kUnknownPage, hackathon_id);
    if (!actor.has(chassis::Role::kAdmin) && actor.user_id != page->state.organizer_id) {
      return make_error(ErrorCode::kForbidden, "not the organizer");
    }
    Result<std::optional<NewEvent>> event = decide(page->state);
    if (!event.ok()) return event.error();
    if (!*event) {
      CommandOutcome noop;
      noop.result = Json{{"noop", true}};
      return noop;
    }
    auto done = append(hackathon_id, page->version, {std::move(**event)}, context);
    if (done.ok()) return CommandOutcome{std::move(done).value(), {}, {}, Json::object()};
    if (done.code() != ErrorCode::kVersionConflict) return done.error();
  }
  return make_error(ErrorCode::kVersionConflict, hackathon_id);
}

PageService::Outcome PageService::update_theme(const AppendContext& context,
                                               const Principal& actor,
                                               const std::string& hackathon_id,
                                               const ThemePatch& patch) {
  return mutate(hackathon_id, actor, context,
                [&](const PageDocument&) -> Result<std::optional<NewEvent>> {
                  Json payload = Json::object();
                  for (auto [key, value] : {std::pair{"primary_color", &patch.primary_color},
                                            std::pair{"accent_color", &patch.accent_color}}) {
                    if (!*value) continue;
                    if (!valid_color(**value)) return make_error(ErrorCode::kInvalidColor, **value);
                    payload[key] = lower(**value);
                  }
                  if (patch.logo) payload["logo"] = *patch.logo;
                  if (payload.empty()) return make_error(ErrorCode::kInvalidInput, "empty theme");
                  return std::optional<NewEvent>(NewEvent{"ThemeUpdated", std::move(payload)});
                });
}

PageService::Outcome PageService::edit_sections(const AppendContext& context,
                                                const Principal& actor,
                                                const std::string& hackathon_id, const Json& ops) {
  return mutate(hackathon_id, actor, context,
                [&](const PageDocument& page) -> Result<std::optional<NewEvent>> {
                  auto edited = apply_section_edits(page.sections, ops);
                  if (!edited.ok()) return edited.error();
                  return std::optional<NewEvent>(NewEvent{
                      "SectionsEdited", {{"ops", ops}, {"sections", sections_json(*edited)}}});
                });
}

PageService::Outcome PageService::publish_page(const AppendContext& context,
                                               const Principal& actor,
                                               const std::string& hackathon_id) {
  return mutate(hackathon_id, actor, context,
                [&](const PageDocument& page) -> Result<std::optional<NewEvent>> {
                  if (page.published) return std::optional<NewEvent>();
                  return std::optional<NewEvent>(NewEvent{"PagePublished", Json::object()});
                });
}

PageService::Outcome PageService::execute(const chassis::Command& command) {
  if (!command.actor) return make_error(ErrorCode::kForbidden, "no actor");
  const Json& body = command.body;
  auto opt = [&](const char* key) -> std::optional<std::string> {
    if (body.contains(key) && body[key].is_string()) return body[key].get<std::string>();
    return std::nullopt;
  };
  const std::string& type = command.command_type;
  if (type == "UpdateTheme") {
    return update_theme(command.context(), *command.actor, command.target,
                        ThemePatch{opt("primary_color"), opt("accent_color"), opt("logo")});
  }
  if (type == "EditSections") {
    return edit_sections(command.context(), *command.actor, command.target,
                         body.value("ops", Json()));
  }
  if (type == "PublishPage") return publish_page(command.context(), *command.actor, command.target);
  return make_error(ErrorCode::kInvalidInput, "unknown command " + type);
}

}  // namespace hacknizer::page
