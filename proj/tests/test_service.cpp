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


#include <future>
#include <latch>
#include <string>
#include <thread>

#include <gtest/gtest.h>

#include "insightgen/insightgen.hpp"
#include "insightgen/service.hpp"
#include "synthetic_fixture.hpp"
#include "test_support.hpp"

namespace ig = insightgen;

namespace {

const ig::InsightSet& shared_set() {
  static const ig::InsightSet set = [] {
    ig::SynthConfig cfg;
    cfg.rows = 3000;
    cfg.measurements = 6;
    cfg.seed = 5;
    cfg.effects = {{"exam_duration", "weekday_mon", 2.0}};
    return ig::testing::synthetic_run(cfg).set;
  }();
  return set;
}

struct ServiceFixture : ::testing::Test {
  ig::testing::TempDir dir;
  ig::ServiceConfig config() const {
    ig::ServiceConfig cfg;
    cfg.feedback_log = dir / "feedback.jsonl";
    cfg.model_file = dir / "model.json";
    return cfg;
  }
  std::string id_at(std::size_t pool_pos) const {
    const auto& set = shared_set();
    return set.insights[set.truthful_indices()[pool_pos]].candidate.candidate_id;
  }
  static std::string body(const std::string& id, const std::string& rating, const std::string& ts = "2026-02-01T10:00:00Z") {
    return nlohmann::json{{"candidate_id", id}, {"rating", rating}, {"timestamp", ts}}.dump();
  }
};

TEST_F(ServiceFixture, InsightsTopK) {
  ig::InsightService svc(shared_set(), config());
  const auto all = svc.get_insights();
  ASSERT_EQ(all.status, 200);
  EXPECT_EQ(all.body.at("insights").size(), 23u);
  const auto one = svc.get_insights(1);
  ASSERT_EQ(one.body.at("insights").size(), 1u);
  EXPECT_EQ(one.body["insights"][0], all.body["insights"][0]);
  const auto more = svc.get_insights(30);
  EXPECT_EQ(more.status, 200);
  EXPECT_EQ(more.body.at("insights").size(), 30u);
  EXPECT_EQ(svc.get_insights(0).status, 400);
  EXPECT_EQ(svc.get_insights(shared_set().truthful_count + 1).status, 400);
  EXPECT_EQ(svc.get_all().body.at("insights").size(), shared_set().insights.size());
}

TEST_F(ServiceFixture, FeedbackValidationAndStorage) {
  ig::InsightService svc(shared_set(), config());
  const auto id = id_at(0);
  auto r = svc.post_feedback(body(id, "useful"));
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_TRUE(r.body.at("stored").get<bool>());
  const auto line = ig::detail::read_file(dir / "feedback.jsonl");
  EXPECT_NE(line.find("\"label\":0.75"), std::string::npos) << line;

  r = svc.post_feedback(body(id, "useful"));
  EXPECT_EQ(r.status, 200);
  EXPECT_TRUE(r.body.at("duplicate").get<bool>());
  EXPECT_EQ(ig::read_feedback_log(dir / "feedback.jsonl").size(), 1u);

  EXPECT_EQ(svc.post_feedback(body("0000000000000000", "useful")).status, 404);
  EXPECT_EQ(svc.post_feedback(body(id, "great")).status, 422);
  EXPECT_EQ(svc.post_feedback(nlohmann::json{{"candidate_id", id}}.dump()).status, 422);
  EXPECT_EQ(svc.post_feedback("{not json").status, 400);
  EXPECT_EQ(svc.post_feedback("{}").status, 400);
  EXPECT_EQ(svc.post_feedback(nlohmann::json{{"candidate_id", id}, {"rating", "neutral"}}.dump()).status, 200);
  EXPECT_EQ(svc.feedback().size(), 2u);
}

TEST_F(ServiceFixture, RetrainWithoutFeedback) {
  ig::InsightService svc(shared_set(), config());
  EXPECT_EQ(svc.post_retrain().status, 422);
  EXPECT_EQ(svc.post_retrain("[1]").status, 400);
}

TEST_F(ServiceFixture, SingleRecordRetrain) {
  ig::InsightService svc(shared_set(), config());
  ASSERT_EQ(svc.post_feedback(body(id_at(0), "very_useful")).status, 200);
  const auto r = svc.post_retrain();
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body.at("seeds"), 1);
  EXPECT_EQ(r.body.at("generation"), 1);
  EXPECT_EQ(r.body.at("selection").size(), 23u);
  EXPECT_TRUE(std::filesystem::exists(dir / "model.json"));
  EXPECT_TRUE(svc.health().body.at("model_loaded").get<bool>());
}

TEST_F(ServiceFixture, ProtocolRetrainChangesSelection) {
  ig::InsightService svc(shared_set(), config());
  const auto protocol = ig::testing::dislike_most_frequent_context(shared_set(), svc.snapshot()->rank);
  for (const auto& rec : protocol.records) {
    ASSERT_EQ(svc.post_feedback(rec.to_json().dump()).status, 200);
  }
  const auto r = svc.post_retrain();
  ASSERT_EQ(r.status, 200);
  const auto& diff = r.body.at("selection_diff");
  EXPECT_FALSE(diff.at("added").empty());
  EXPECT_EQ(diff.at("added").size(), diff.at("removed").size());
  EXPECT_EQ(svc.get_insights().body.at("insights"), r.body.at("selection"));

  const auto second = svc.post_retrain();
  ASSERT_EQ(second.status, 200);
  EXPECT_TRUE(std::filesystem::exists(dir / "model.json.1"));
  EXPECT_TRUE(second.body.at("selection_diff").at("added").empty());
}

TEST_F(ServiceFixture, ReplayedLogReproducesModel) {
  std::string first_model;
  {
    ig::InsightService svc(shared_set(), config());
    for (std::size_t i = 0; i < 4; ++i) {
      ASSERT_EQ(svc.post_feedback(body(id_at(i), i % 2 ? "not_useful" : "useful")).status, 200);
    }
    ASSERT_EQ(svc.post_retrain().status, 200);
    first_model = ig::detail::read_file(dir / "model.json");
  }
  auto cfg = config();
  cfg.model_file = dir / "replay.json";
  ig::InsightService replay(shared_set(), cfg);
  EXPECT_EQ(replay.feedback().size(), 4u);
  ASSERT_EQ(replay.post_retrain().status, 200);
  EXPECT_EQ(ig::detail::read_file(dir / "replay.json"), first_model);

  // A restarted service picks the stored model up again.
  ig::InsightService restarted(shared_set(), config());
  EXPECT_TRUE(restarted.health().body.at("model_loaded").get<bool>());
}

TEST_F(ServiceFixture, ConcurrentRetrainIsRejected) {
  ig::InsightService svc(shared_set(), config());
  ASSERT_EQ(svc.post_feedback(body(id_at(0), "useful")).status, 200);
  std::latch entered(1), release(1);
  svc.on_retrain_start = [&] {
    entered.count_down();
    release.wait();
  };
  auto first = std::async(std::launch::async, [&] { return svc.post_retrain(); });
  entered.wait();
  EXPECT_EQ(svc.post_retrain().status, 409);
  // Reads stay available while the retrain runs.
  EXPECT_EQ(svc.get_insights().status, 200);
  EXPECT_EQ(svc.post_feedback(body(id_at(1), "neutral")).status, 200);
  release.count_down();
  EXPECT_EQ(first.get().status, 200);
}

TEST_F(ServiceFixture, HttpRoutes) {
  ig::InsightService svc(shared_set(), config());
  httplib::Server server;
  svc.bind(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread loop([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");

  res = client.Get("/api/insights?top=2");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body).at("insights").size(), 2u);
  res = client.Get("/api/insights?top=abc");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  res = client.Post("/api/feedback", body(id_at(0), "not_useful_at_all"), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Post("/api/retrain", "", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  res = client.Get("/api/pca");
  ASSERT_TRUE(res);
  EXPECT_EQ(nlohmann::json::parse(res->body).size(), shared_set().truthful_count);
  res = client.Options("/api/feedback");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);

  server.stop();
  loop.join();
}

}  // namespace
