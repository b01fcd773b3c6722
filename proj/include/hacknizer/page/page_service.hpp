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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hacknizer/chassis/aggregate.hpp"
#include "hacknizer/chassis/service.hpp"

namespace hacknizer::page {

inline constexpr std::string_view kContext = "page";
inline constexpr std::string_view kSectionKinds[] = {"markdown", "sponsors", "awards", "schedule",
                                                     "winner"};

struct Theme {
  std::string primary_color = "#1f2937";
  std::string accent_color = "#f59e0b";
  std::string logo;
  bool operator==(const Theme&) const = default;
};

struct Section {
  std::string section_id;
  std::string kind;
  std::string body;  // markdown only; data-driven kinds render from read models
  bool operator==(const Section&) const = default;
};

// One page per hackathon; the stream id is the hackathon id.
struct PageDocument {
  bool created = false;
  std::string hackathon_id;
  std::string organizer_id;
  Theme theme;
  std::vector<Section> sections;
  bool published = false;
  std::uint64_t revision = 0;
  bool operator==(const PageDocument&) const = default;
};

chassis::AggregateDefinition<PageDocument> page_definition();

bool valid_color(std::string_view color);
bool valid_section_kind(std::string_view kind);

Json to_json(const Theme& theme);
Json to_json(const Section& section);
Json to_json(const PageDocument& page);
Result<Section> section_from_json(const Json& json);

struct ThemePatch {
  std::optional<std::string> primary_color;
  std::optional<std::string> accent_color;
  std::optional<std::string> logo;
};

// Applies an ordered batch of {op: add|remove|move|replace, ...} edits to a
// copy of `sections`; the first failing op fails the whole batch.
Result<std::vector<Section>> apply_section_edits(std::vector<Section> sections, const Json& ops);

// Yellow bounded context: per-hackathon page theme, sections, publication.
class PageService final : public chassis::CommandService {
 public:
  explicit PageService(chassis::ServiceEnv env);

  std::string name() const override { return std::string(kContext); }
  std::vector<std::string> subscriptions() const override;
  chassis::HandlerOutcome on_message(const std::string& topic,
                                     const chassis::EventEnvelope& envelope) override;

  using Outcome = Result<chassis::CommandOutcome>;

  Outcome on_hackathon_created(const chassis::EventEnvelope& envelope);
  Outcome update_theme(const chassis::AppendContext& context, const chassis::Principal& actor,
                       const std::string& hackathon_id, const ThemePatch& patch);
  Outcome edit_sections(const chassis::AppendContext& context, const chassis::Principal& actor,
                        const std::string& hackathon_id, const Json& ops);
  Outcome publish_page(const chassis::AppendContext& context, const chassis::Principal& actor,
                       const std::string& hackathon_id);

  Result<chassis::Loaded<PageDocument>> load(const std::string& hackathon_id) {
    return pages_.load(hackathon_id);
  }

 protected:
  Outcome execute(const chassis::Command& command) override;

 private:
  template <typename Decide>
  Outcome mutate(const std::string& hackathon_id, const chassis::Principal& actor,
                 const chassis::AppendContext& context, Decide&& decide);

  chassis::Repository<PageDocument> pages_;
};

}  // namespace hacknizer::page
