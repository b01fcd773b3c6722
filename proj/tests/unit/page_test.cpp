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

#include <gtest/gtest.h>

#include "hacknizer/hackathon/hackathon_service.hpp"
#include "hacknizer/page/page_service.hpp"
#include "test_support.hpp"

namespace hacknizer::page {
namespace {

using chassis::Role;
using hacknizer::testing::ctx;
using hacknizer::testing::principal;

struct PageFixture : ::testing::Test {
  hacknizer::testing::ServiceRig hk_rig{"hackathon", {"hackathon.events"}};
  hacknizer::testing::ServiceRig rig{"page", {"page.events"}, 3};
  hackathon::HackathonService hackathons{hk_rig.env(), hackathon::HackathonServiceOptions{"s"}};
  PageService service{rig.env()};
  chassis::Principal organizer = principal("org", {Role::kOrganizer});
  int counter = 0;

  chassis::AppendContext next() { return ctx("c" + std::to_string(++counter)); }

  std::vector<chassis::EventEnvelope> created_events(const std::string& id) {
    EXPECT_TRUE(hackathons
                    .create_hackathon(next(), organizer, id,
                                      {"Green Code", "", {1, 2}, std::nullopt, std::nullopt,
                                       std::nullopt})
                    .ok());
    std::vector<chassis::EventEnvelope> out;
    for (const auto& d : hk_rig.take()) out.push_back(d.envelope);
    return out;
  }

  void page_for(const std::string& id) {
    for (const auto& e : created_events(id)) {
      ASSERT_EQ(service.on_message("hackathon.events", e), chassis::HandlerOutcome::kAck);
    }
  }

  PageDocument page(const std::string& id) { return service.load(id)->state; }

  std::vector<std::string> ids(const std::string& id) {
    std::vector<std::string> out;
    for (const auto& s : page(id).sections) out.push_back(s.section_id);
    return out;
  }
};

TEST_F(PageFixture, HackathonCreatedYieldsADefaultPage) {
  page_for("hk");
  auto doc = page("hk");
  ASSERT_TRUE(doc.created);
  EXPECT_EQ(rig.stream_types("hk"), std::vector<std::string>{"PageCreated"});
  EXPECT_EQ(doc.theme, Theme{});
  ASSERT_EQ(doc.sections.size(), 1u);
  EXPECT_EQ(doc.sections[0].kind, "markdown");
  EXPECT_EQ(doc.sections[0].body, "# Green Code");
  EXPECT_FALSE(doc.published);
  EXPECT_EQ(doc.organizer_id, "org");
}

TEST_F(PageFixture, DuplicateDeliveryKeepsOnePageAndTwoHackathonsGetTwo) {
  auto events = created_events("hk");
  for (int i = 0; i < 3; ++i) {
    for (const auto& e : events) service.on_message("hackathon.events", e);
  }
  EXPECT_EQ(rig.store->head("hk").current_version, 1u);
  page_for("hk2");
  EXPECT_TRUE(page("hk2").created);
  EXPECT_EQ(rig.store->head("hk").current_version, 1u);
}

TEST_F(PageFixture, ThemeUpdates) {
  page_for("hk");
  auto updated = service.update_theme(next(), organizer, "hk", {"#112233", "#FFCC00", std::nullopt});
  ASSERT_TRUE(updated.ok());
  EXPECT_EQ(updated->events.back().event_type, "ThemeUpdated");
  EXPECT_EQ(page("hk").theme.primary_color, "#112233");
  EXPECT_EQ(page("hk").theme.accent_color, "#ffcc00");
  EXPECT_EQ(service.update_theme(next(), organizer, "hk", {"#12345", std::nullopt, std::nullopt})
                .code(),
            ErrorCode::kInvalidColor);
  EXPECT_EQ(service.update_theme(next(), principal("x", {Role::kOrganizer}), "hk",
                                 {"#000000", std::nullopt, std::nullopt})
                .code(),
            ErrorCode::kForbidden);
  EXPECT_TRUE(service.update_theme(next(), principal("root", {Role::kAdmin}), "hk",
                                   {"#000000", std::nullopt, std::nullopt})
                  .ok());
}

TEST_F(PageFixture, RemovingAnAbsentSectionLeavesRevisionUnchanged) {
  page_for("hk");
  const auto before = page("hk").revision;
  auto removed = service.edit_sections(next(), organizer, "hk",
                                       Json::array({{{"op", "remove"}, {"section_id", "ghost"}}}));
  ASSERT_FALSE(removed.ok());
  EXPECT_EQ(removed.code(), ErrorCode::kSectionNotFound);
  EXPECT_EQ(page("hk").revision, before);
}

TEST_F(PageFixture, BatchAddThenMoveIsAppliedInOrder) {
  page_for("hk");
  Json ops = Json::array({{{"op", "add"}, {"section", {{"section_id", "A"}, {"kind", "awards"}}}},
                          {{"op", "move"}, {"section_id", "A"}, {"index", 0}}});
  ASSERT_TRUE(service.edit_sections(next(), organizer, "hk", ops).ok());
  EXPECT_EQ(ids("hk"), (std::vector<std::string>{"A", "about"}));
}

TEST_F(PageFixture, FailingOpRollsBackTheWholeBatch) {
  page_for("hk");
  Json ops = Json::array({{{"op", "add"}, {"section", {{"section_id", "B"}, {"kind", "winner"}}}},
                          {{"op", "replace"}, {"section_id", "nope"},
                           {"section", {{"section_id", "nope"}, {"kind", "markdown"}}}}});
  EXPECT_EQ(service.edit_sections(next(), organizer, "hk", ops).code(), ErrorCode::kSectionNotFound);
  EXPECT_EQ(ids("hk"), std::vector<std::string>{"about"});

  Json dup = Json::array({{{"op", "add"}, {"section", {{"section_id", "about"}, {"kind", "markdown"}}}}});
  EXPECT_EQ(service.edit_sections(next(), organizer, "hk", dup).code(), ErrorCode::kDuplicateSectionId);
  Json bad = Json::array({{{"op", "add"}, {"section", {{"section_id", "x"}, {"kind", "html"}}}}});
  EXPECT_EQ(service.edit_sections(next(), organizer, "hk", bad).code(),
            ErrorCode::kInvalidSectionKind);
}

TEST_F(PageFixture, ApplySectionEditsHandlesEveryOp) {
  std::vector<Section> sections = {{"a", "markdown", "A"}, {"b", "sponsors", ""}};
  Json ops = Json::array({
      {{"op", "add"}, {"index", 1}, {"section", {{"section_id", "c"}, {"kind", "schedule"}}}},
      {{"op", "replace"}, {"section_id", "a"},
       {"section", {{"section_id", "a2"}, {"kind", "markdown"}, {"body", "new"}}}},
      {{"op", "move"}, {"section_id", "b"}, {"index", 0}},
      {{"op", "remove"}, {"section_id", "c"}},
  });
  auto edited = apply_section_edits(sections, ops);
  ASSERT_TRUE(edited.ok()) << edited.error().to_string();
  ASSERT_EQ(edited->size(), 2u);
  EXPECT_EQ((*edited)[0].section_id, "b");
  // replace swaps the content; the section keeps its id.
  EXPECT_EQ((*edited)[1], (Section{"a", "markdown", "new"}));
  EXPECT_EQ(apply_section_edits(sections, Json::array()).code(), ErrorCode::kInvalidInput);
}

TEST_F(PageFixture, PublishOnceThenNoop) {
  page_for("hk");
  auto published = service.publish_page(next(), organizer, "hk");
  ASSERT_TRUE(published.ok());
  EXPECT_EQ(published->events.back().event_type, "PagePublished");
  const auto version = rig.store->head("hk").current_version;
  auto again = service.publish_page(next(), organizer, "hk");
  ASSERT_TRUE(again.ok());
  EXPECT_TRUE(again->events.empty());
  EXPECT_EQ(rig.store->head("hk").current_version, version);
  EXPECT_EQ(service.publish_page(next(), organizer, "ghost").code(), ErrorCode::kUnknownPage);
}

// Property: revision counts the page stream's events, and a fresh fold of
// the stream reproduces the live document.
TEST_F(PageFixture, RevisionMatchesStreamAndRebuildMatchesLive) {
  page_for("hk");
  ASSERT_TRUE(service.update_theme(next(), organizer, "hk", {"#101010", std::nullopt, "logo.png"}).ok());
  ASSERT_TRUE(service
                  .edit_sections(next(), organizer, "hk",
                                 Json::array({{{"op", "add"},
                                               {"section", {{"section_id", "w"}, {"kind", "winner"}}}}}))
                  .ok());
  (void)service.edit_sections(next(), organizer, "hk",
                              Json::array({{{"op", "remove"}, {"section_id", "ghost"}}}));
  ASSERT_TRUE(service.publish_page(next(), organizer, "hk").ok());
  (void)service.publish_page(next(), organizer, "hk");

  auto log = rig.store->load_stream("hk", 0);
  EXPECT_EQ(page("hk").revision, log.size());
  auto rebuilt = chassis::fold_aggregate(page_definition(), std::span(log));
  ASSERT_TRUE(rebuilt.ok());
  EXPECT_EQ(*rebuilt, page("hk"));
}

}  // namespace
}  // namespace hacknizer::page
