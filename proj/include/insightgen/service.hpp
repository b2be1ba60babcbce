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

#pragma once

// HTTP facade for the review loop. InsightService holds the logic and is
// usable without a socket; bind() attaches it to an httplib::Server.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "insightgen/error.hpp"
#include "insightgen/feedback.hpp"
#include "insightgen/pipeline.hpp"

namespace insightgen {

struct ServiceConfig {
  std::filesystem::path feedback_log;
  std::filesystem::path model_file;  // empty: keep the model in memory only
  RankConfig rank;
  std::string cors_origin = "*";
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

class InsightService {
 public:
  struct Snapshot {
    RankResult rank;
    std::shared_ptr<const UsefulnessModel> model;
    std::size_t generation = 0;
  };

  InsightService(InsightSet set, ServiceConfig config) : set_(std::move(set)), config_(std::move(config)) {
    feedback_ = read_feedback_log(config_.feedback_log);
    for (const auto& r : feedback_) seen_.insert({r.candidate_id, r.timestamp});
    std::shared_ptr<const UsefulnessModel> model;
    if (!config_.model_file.empty() && std::filesystem::exists(config_.model_file)) {
      auto loaded = UsefulnessModel::from_json(nlohmann::json::parse(detail::read_file(config_.model_file)));
      if (loaded.vocabulary_fingerprint == set_.vocabulary.fingerprint()) {
        model = std::make_shared<const UsefulnessModel>(std::move(loaded));
      }
    }
    auto snap = std::make_shared<Snapshot>();
    snap->rank = rank_with_model(set_, model.get(), config_.rank);
    snap->model = std::move(model);
    snapshot_ = std::move(snap);
  }

  /// Called at the start of every retrain while the retrain lock is held.
  std::function<void()> on_retrain_start;

  const InsightSet& insight_set() const { return set_; }

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(snapshot_mu_);
    return snapshot_;
  }

  std::vector<FeedbackRecord> feedback() const {
    std::lock_guard lock(feedback_mu_);
    return feedback_;
  }

  ApiResponse get_insights(std::optional<std::size_t> top = std::nullopt) const {
    const auto snap = snapshot();
    const std::size_t truthful = snap->rank.pool.size();
    const std::size_t k = top.value_or(config_.rank.top_k);
    if (k < 1 || k > truthful) {
      return error(400, "top must lie in [1, " + std::to_string(truthful) + "]");
    }
    nlohmann::json list = selection_json(set_, snap->rank);
    if (k <= list.size()) {
      list.erase(list.begin() + static_cast<std::ptrdiff_t>(k), list.end());
    } else {
      auto cfg = config_.rank;
      cfg.top_k = k;
      list = selection_json(set_, rank_with_model(set_, snap->model.get(), cfg));
    }
    return {200, {{"top", k}, {"generation", snap->generation}, {"insights", list}}};
  }

  ApiResponse get_all() const {
    const auto snap = snapshot();
    std::map<std::string, std::size_t> pool_pos;
    for (std::size_t r = 0; r < snap->rank.pool.size(); ++r) {
      pool_pos[set_.insights[snap->rank.pool[r]].candidate.candidate_id] = r;
    }
    nlohmann::json list = nlohmann::json::array();
    for (const auto& ins : set_.insights) {
      nlohmann::json e = {{"candidate_id", ins.candidate.candidate_id},
                          {"text", ins.text},
                          {"truthful", ins.scores.truthful},
                          {"p_value", ins.test.p_value}};
      if (const auto it = pool_pos.find(ins.candidate.candidate_id); it != pool_pos.end()) {
        e["scores"] = to_json(snap->rank.scores[it->second]);
        e["cluster"] = snap->rank.selection.clusters.cluster_of[it->second];
      } else {
        e["scores"] = to_json(ins.scores);
      }
      list.push_back(std::move(e));
    }
    return {200, {{"insights", list}}};
  }

  ApiResponse post_feedback(const std::string& body) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("candidate_id") || !j.at("candidate_id").is_string()) {
      return error(400, "candidate_id is required");
    }
    const auto id = j.at("candidate_id").get<std::string>();
    if (!set_.find(id)) return error(404, "unknown candidate_id '" + id + "'");
    if (!j.contains("rating") || !j.at("rating").is_string()) return error(422, "rating is required");
    FeedbackRecord record;
    try {
      if (!j.contains("timestamp")) j["timestamp"] = utc_now_iso();
      record = FeedbackRecord::from_json(j);
    } catch (const InputError& e) {
      return error(422, e.what());
    }
    std::lock_guard lock(feedback_mu_);
    if (!seen_.insert({record.candidate_id, record.timestamp}).second) {
      return {200, {{"stored", false}, {"duplicate", true}, {"record", record.to_json()}}};
    }
    try {
      append_feedback(config_.feedback_log, record);
    } catch (const std::exception& e) {
      seen_.erase({record.candidate_id, record.timestamp});
      return error(500, e.what());
    }
    feedback_.push_back(record);
    return {200, {{"stored", true}, {"duplicate", false}, {"record", record.to_json()}}};
  }

  /// Optional body: {"seed": S, "top_k": K}.
  ApiResponse post_retrain(const std::string& body = {}) {
    std::unique_lock retrain(retrain_mu_, std::try_to_lock);
    if (!retrain.owns_lock()) return error(409, "a retrain is already running");
    if (on_retrain_start) on_retrain_start();

    auto cfg = config_.rank;
    if (!body.empty()) {
      try {
        const auto j = nlohmann::json::parse(body);
        if (!j.is_object()) return error(400, "retrain body must be a JSON object");
        cfg.seed = j.value("seed", cfg.seed);
        cfg.top_k = j.value("top_k", cfg.top_k);
      } catch (const nlohmann::json::exception& e) {
        return error(400, std::string("malformed JSON: ") + e.what());
      }
    }
    const auto records = feedback();
    if (records.empty()) return error(422, "no feedback recorded yet");

    RankResult rank;
    try {
      rank = run_rank(set_, records, cfg);
    } catch (const InputError& e) {
      return error(422, e.what());
    }
    const auto before = snapshot();
    auto model = std::make_shared<const UsefulnessModel>(*rank.model);
    if (!config_.model_file.empty()) archive_and_write(*model);

    const auto old_ids = before->rank.selected_ids(set_);
    const auto new_ids = rank.selected_ids(set_);
    const std::set<std::string> old_set(old_ids.begin(), old_ids.end()), new_set(new_ids.begin(), new_ids.end());
    nlohmann::json added = nlohmann::json::array(), removed = nlohmann::json::array();
    for (const auto& id : new_ids) {
      if (!old_set.count(id)) added.push_back(id);
    }
    for (const auto& id : old_ids) {
      if (!new_set.count(id)) removed.push_back(id);
    }

    auto snap = std::make_shared<Snapshot>();
    snap->rank = std::move(rank);
    snap->model = std::move(model);
    snap->generation = before->generation + 1;
    const nlohmann::json summary = {{"seeds", snap->rank.seed_count},
                                    {"pseudo_labeled", snap->rank.pseudo_labeled},
                                    {"ignored_feedback", snap->rank.ignored_feedback},
                                    {"final_mse", snap->rank.final_mse},
                                    {"generation", snap->generation},
                                    {"selection_diff", {{"added", added}, {"removed", removed}}},
                                    {"selection", selection_json(set_, snap->rank)}};
    {
      std::lock_guard lock(snapshot_mu_);
      snapshot_ = std::move(snap);
    }
    return {200, summary};
  }

  ApiResponse get_pca() const {
    try {
      return {200, pca_json(set_, latest_feedback(feedback()))};
    } catch (const InputError& e) {
      return error(422, e.what());
    }
  }

  ApiResponse health() const {
    const auto snap = snapshot();
    std::lock_guard lock(feedback_mu_);
    return {200,
            {{"status", "ok"},
             {"insights", set_.insights.size()},
             {"truthful", snap->rank.pool.size()},
             {"feedback_records", feedback_.size()},
             {"model_loaded", static_cast<bool>(snap->model)},
             {"generation", snap->generation}}};
  }

  void bind(httplib::Server& server) {
    server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/api/insights", [this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::size_t> top;
      if (req.has_param("top")) {
        try {
          std::size_t used = 0;
          const auto text = req.get_param_value("top");
          const long long v = std::stoll(text, &used);
          if (used != text.size() || v < 0) throw std::invalid_argument("top");
          top = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
          return send(res, error(400, "top must be a positive integer"));
        }
      }
      send(res, get_insights(top));
    });
    server.Get("/api/insights/all", [this](const httplib::Request&, httplib::Response& res) { send(res, get_all()); });
    server.Post("/api/feedback",
                [this](const httplib::Request& req, httplib::Response& res) { send(res, post_feedback(req.body)); });
    server.Post("/api/retrain",
                [this](const httplib::Request& req, httplib::Response& res) { send(res, post_retrain(req.body)); });
    server.Get("/api/pca", [this](const httplib::Request&, httplib::Response& res) { send(res, get_pca()); });
    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) { send(res, health()); });
  }

 private:
  static ApiResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

  static void send(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  }

  void archive_and_write(const UsefulnessModel& model) {
    const auto& path = config_.model_file;
    if (std::filesystem::exists(path)) {
      for (std::size_t n = 1;; ++n) {
        auto archived = path;
        archived += "." + std::to_string(n);
        if (!std::filesystem::exists(archived)) {
          std::filesystem::rename(path, archived);
          break;
        }
      }
    }
    detail::write_file(path, model.to_json().dump(1) + "\n");
  }

  const InsightSet set_;
  const ServiceConfig config_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> snapshot_;

  mutable std::mutex feedback_mu_;
  std::vector<FeedbackRecord> feedback_;
  std::set<std::pair<std::string, std::string>> seen_;

  std::mutex retrain_mu_;
};

}  // namespace insightgen
