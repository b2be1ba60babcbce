// Copyright 2026 The insightgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "insightgen/feedback.hpp"
#include "test_support.hpp"

namespace ig = insightgen;

namespace {

TEST(Rating, LinearLabels) {
  EXPECT_EQ(ig::rating_label(ig::rating_from_string("not_useful_at_all")), 0.0);
  EXPECT_EQ(ig::rating_label(ig::rating_from_string("not_useful")), 0.25);
  EXPECT_EQ(ig::rating_label(ig::rating_from_string("neutral")), 0.5);
  EXPECT_EQ(ig::rating_label(ig::rating_from_string("useful")), 0.75);
  EXPECT_EQ(ig::rating_label(ig::rating_from_string("very_useful")), 1.0);
  EXPECT_THROW(ig::rating_from_string("meh"), ig::InputError);
}

TEST(FeedbackLog, AppendReadLatest) {
  ig::testing::TempDir dir;
  const auto path = dir / "fb.jsonl";
  EXPECT_TRUE(ig::read_feedback_log(path).empty());
  ig::append_feedback(path, {"a", ig::Rating::kUseful, "2024-01-01T00:00:00Z"});
  ig::append_feedback(path, {"b", ig::Rating::kNotUseful, "2024-01-01T00:00:00Z"});
  ig::append_feedback(path, {"a", ig::Rating::kVeryUseful, "2024-01-02T00:00:00Z"});
  ig::append_feedback(path, {"b", ig::Rating::kNeutral, "2023-12-31T00:00:00Z"});
  const auto log = ig::read_feedback_log(path);
  ASSERT_EQ(log.size(), 4u);
  EXPECT_EQ(log[0].rating, ig::Rating::kUseful);
  const auto latest = ig::latest_feedback(log);
  EXPECT_EQ(latest.at("a").rating, ig::Rating::kVeryUseful);
  EXPECT_EQ(latest.at("b").rating, ig::Rating::kNotUseful);

  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_NE(first.find("\"label\":0.75"), std::string::npos) << first;
}

TEST(FeedbackLog, Errors) {
  EXPECT_THROW(ig::parse_feedback_lines("{\"candidate_id\": \"a\"}\n"), ig::InputError);
  EXPECT_THROW(ig::parse_feedback_lines("not json\n"), ig::InputError);
  EXPECT_THROW(ig::parse_feedback_lines("{\"candidate_id\":\"a\",\"rating\":\"useful\",\"timestamp\":\"x\"}\n"),
               ig::InputError);
  EXPECT_EQ(ig::parse_feedback_lines("\n  \n").size(), 0u);
}

}  // namespace
