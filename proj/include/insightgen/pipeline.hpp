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

// End-to-end orchestration: enumerate candidates, query contexts, run the
// truthfulness test, score, realize and featurize. Then rank with optional
// feedback-driven usefulness.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightgen/dataset.hpp"
#include "insightgen/error.hpp"
#include "insightgen/features.hpp"
#include "insightgen/feedback.hpp"
#include "insightgen/hash.hpp"
#include "insightgen/realization.hpp"
#include "insightgen/recommender.hpp"
#include "insightgen/schema.hpp"
#include "insightgen/scoring.hpp"
#include "insightgen/stats.hpp"
#include "insightgen/usefulness_model.hpp"

namespace insightgen {

inline constexpr int kInsightSetSchemaVersion = 1;

struct RunConfig {
  std::filesystem::path bundle_dir;
  std::filesystem::path data_file;
  std::filesystem::path output_file;
  ScoreConfig scoring;
  std::size_t top_k = 23;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  IngestConfig ingest;
  bool lenient = false;
  bool bosw_include_schema = true;
  MannWhitneyOptions mann_whitney;

  void validate() const {
    if (workers < 1) throw InputError("workers must be >= 1");
    if (!(scoring.alpha > 0.0 && scoring.alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
    if (!(scoring.gamma > 0.0)) throw InputError("gamma must be > 0");
    if (top_k < 1) throw InputError("top_k must be >= 1");
  }

  /// Reads the run-config file: alpha, gamma, top_k, seed, lenient,
  /// bosw_include_schema, mann_whitney_exact_max, and an `ingest` block.
  void apply_json(const nlohmann::json& j) {
    try {
      scoring.alpha = j.value("alpha", scoring.alpha);
      scoring.gamma = j.value("gamma", scoring.gamma);
      top_k = j.value("top_k", top_k);
      seed = j.value("seed", seed);
      lenient = j.value("lenient", lenient);
      bosw_include_schema = j.value("bosw_include_schema", bosw_include_schema);
      mann_whitney.exact_max_total = j.value("mann_whitney_exact_max", mann_whitney.exact_max_total);
      if (j.contains("ingest")) ingest = IngestConfig::from_json(j.at("ingest"));
      if (j.contains("time_unit")) ingest.time_unit = time_unit_from_string(j.at("time_unit").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("run config: ") + e.what());
    }
  }

  /// Settings that determine the output (no worker count).
  nlohmann::json echo() const {
    return {{"alpha", scoring.alpha},
            {"gamma", scoring.gamma},
            {"top_k", top_k},
            {"seed", seed},
            {"lenient", lenient},
            {"bosw_include_schema", bosw_include_schema},
            {"mann_whitney_exact_max", mann_whitney.exact_max_total},
            {"ingest", ingest.to_json()}};
  }
};

struct SampleSummary {
  double mean1 = 0.0, mean2 = 0.0;
  std::size_t n_rec1 = 0, n_rec2 = 0;
  double time_span1 = 0.0, time_span2 = 0.0;

  bool operator==(const SampleSummary&) const = default;
};

struct ScoredInsight {
  CandidateSpec candidate;
  std::string text;
  TestResult test;
  ScoreBreakdown scores;
  SampleSummary samples;
  FeatureVector features;
};

struct InsightSet {
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::object();
  std::size_t candidates_total = 0;
  std::size_t truthful_count = 0;
  std::vector<std::string> skipped;
  Vocabulary vocabulary;
  Standardization standardization;
  std::vector<ScoredInsight> insights;  // sorted by candidate_id
  nlohmann::json timings = nlohmann::json::object();

  double alpha() const { return config.value("alpha", 0.05); }

  /// Indices of truthful insights, in candidate_id order.
  std::vector<std::size_t> truthful_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < insights.size(); ++i) {
      if (insights[i].scores.truthful) out.push_back(i);
    }
    return out;
  }

  const ScoredInsight* find(std::string_view id) const {
    const auto it = std::lower_bound(insights.begin(), insights.end(), id,
                                     [](const ScoredInsight& s, std::string_view v) { return s.candidate.candidate_id < v; });
    return it != insights.end() && it->candidate.candidate_id == id ? &*it : nullptr;
  }
};

// ---------------------------------------------------------------------------
// worker pool

/// Runs fn(i) for i in [0, n) on `workers` threads. Results must be written
/// by index so scheduling order never shows in the output. Exceptions are
/// collected; the one from the lowest index is rethrown after all threads stop.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto body = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// candidate evaluation

using ContextRows = std::map<std::string, std::vector<std::size_t>, std::less<>>;

/// Runs the test selected by the schema. Empty contexts yield p = 1.
inline TestResult run_truthfulness_test(const InsightSchema& schema, const SampleSet& s1, const SampleSet& s2,
                                        const MannWhitneyOptions& mwu) {
  switch (schema.scoring_type) {
    case ScoringType::kDistributionCompare:
      if (s1.n_rec == 0 || s2.n_rec == 0) return {0.0, 1.0, schema.test, false};
      return schema.test == TestMethod::kKsTwoSample ? ks_two_sample(s1.values, s2.values)
                                                     : mann_whitney_u(s1.values, s2.values, mwu);
    case ScoringType::kFrequencyCompare: {
      const std::uint64_t n = s1.n_rec + s2.n_rec;
      if (n == 0) return {0.0, 1.0, TestMethod::kBinomialExact, true};
      return binomial_test(s1.n_rec, n, 0.5);
    }
    case ScoringType::kScalarCompare: {
      // Context 2 collapses to its mean; sign test of context 1 against it.
      if (s1.n_rec == 0 || s2.n_rec == 0) return {0.0, 1.0, TestMethod::kBinomialExact, true};
      std::uint64_t above = 0, n = 0;
      for (double v : s1.values) {
        if (v == s2.mean) continue;
        ++n;
        if (v > s2.mean) ++above;
      }
      if (n == 0) return {0.0, 1.0, TestMethod::kBinomialExact, true};
      return binomial_test(above, n, 0.5);
    }
  }
  return {};
}

inline RealizationBinding make_binding(const InsightSchema& schema, const MeasurementDef& measurement,
                                       const ContextDef& c1, const ContextDef& c2, const SampleSet& s1,
                                       const SampleSet& s2) {
  const std::string unit_suffix = measurement.unit.empty() ? std::string() : " " + measurement.unit;
  RealizationBinding b;
  b["measurement"] = measurement.surface_form;
  b["context:1"] = c1.surface_form;
  b["context:2"] = c2.surface_form;
  b["mean:1"] = Quantity{s1.mean, measurement.decimals, unit_suffix, true};
  b["mean:2"] = Quantity{s2.mean, measurement.decimals, unit_suffix, true};
  b["comparison"] = std::string(schema.claim == Claim::kGreater ? "greater than" : "lower than");
  if (s2.mean != 0.0) {
    b["percent"] = Quantity{percent_diff(s1.mean, s2.mean), 2, "%", false};
  } else {
    b["percent"] = std::string("n/a");
  }
  b["count:1"] = Quantity{static_cast<double>(s1.n_rec), 0, "", false};
  b["count:2"] = Quantity{static_cast<double>(s2.n_rec), 0, "", false};
  b["unit"] = measurement.unit;
  return b;
}

inline ScoredInsight evaluate_candidate(const CandidateSpec& cand, const SchemaBundle& bundle, const Table& table,
                                        const ContextRows& rows, const ScoreConfig& scoring,
                                        const MannWhitneyOptions& mwu) {
  const auto& schema = bundle.schema(cand.schema_id);
  const auto& measurement = bundle.measurement(cand.measurement_id);
  const auto& c1 = bundle.context(cand.context1_id);
  const auto& c2 = bundle.context(cand.context2_id);
  const SampleSet s1 = extract_samples(table, rows.find(c1.context_id)->second, measurement.column);
  const SampleSet s2 = extract_samples(table, rows.find(c2.context_id)->second, measurement.column);

  ScoredInsight out;
  out.candidate = cand;
  out.test = run_truthfulness_test(schema, s1, s2, mwu);
  out.scores = score_candidate(schema, measurement, s1, s2, out.test, 1.0, scoring);
  out.samples = {s1.mean, s2.mean, s1.n_rec, s2.n_rec, s1.time_span, s2.time_span};
  out.text = realize(schema.template_text, make_binding(schema, measurement, c1, c2, s1, s2),
                     candidate_tense(bundle, cand));
  return out;
}

/// Standardization over every non-empty context mean in the run, then
/// features for each insight.
inline void featurize_all(InsightSet& set, const SchemaBundle& bundle) {
  std::vector<MeanObservation> obs;
  for (const auto& ins : set.insights) {
    if (ins.samples.n_rec1 > 0) obs.push_back({ins.candidate.measurement_id, ins.samples.mean1});
    if (ins.samples.n_rec2 > 0) obs.push_back({ins.candidate.measurement_id, ins.samples.mean2});
  }
  set.standardization = compute_standardization(obs);
  for (auto& ins : set.insights) {
    const double tau = bundle.measurement(ins.candidate.measurement_id).tolerance_tau;
    ins.features = featurize(ins.candidate, ins.samples.mean1, ins.samples.mean2, ins.scores.delta, tau,
                             set.vocabulary, set.standardization);
  }
}

inline std::string bundle_digest(const SchemaBundle& bundle) {
  const auto docs = serialize_bundle(bundle);
  return sha256_hex(docs.schemas + docs.measurements + docs.contexts);
}

/// Generate from an already-loaded bundle and table.
inline InsightSet run_generate(const SchemaBundle& bundle, const Table& table, const RunConfig& config) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  const auto t0 = Clock::now();
  auto seconds_since = [](Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); };

  for (const auto& c : bundle.contexts) (void)bind_filter(table, c.filter);
  for (const auto& m : bundle.measurements) {
    const Column& col = table.column(m.column);
    if (col.type != ColumnType::kNumeric) throw InputError("measurement column '" + m.column + "' is not numeric");
  }

  InsightSet set;
  set.config = config.echo();
  set.inputs["bundle_sha256"] = bundle_digest(bundle);
  set.vocabulary = build_vocabulary(bundle, config.bosw_include_schema);

  auto t = Clock::now();
  const auto candidates = enumerate_candidates(bundle);
  set.candidates_total = candidates.size();
  const double enumerate_s = seconds_since(t);

  t = Clock::now();
  std::vector<std::vector<std::size_t>> matched(bundle.contexts.size());
  parallel_for(bundle.contexts.size(), config.workers,
               [&](std::size_t i) { matched[i] = match_rows(table, bundle.contexts[i].filter); });
  ContextRows rows;
  for (std::size_t i = 0; i < bundle.contexts.size(); ++i) rows.emplace(bundle.contexts[i].context_id, std::move(matched[i]));
  const double query_s = seconds_since(t);

  t = Clock::now();
  std::vector<std::optional<ScoredInsight>> results(candidates.size());
  std::vector<std::string> errors(candidates.size());
  parallel_for(candidates.size(), config.workers, [&](std::size_t i) {
    try {
      results[i] = evaluate_candidate(candidates[i], bundle, table, rows, config.scoring, config.mann_whitney);
    } catch (const std::exception& e) {
      if (!config.lenient) {
        throw RuntimeError("candidate " + candidates[i].candidate_id + " (" + candidates[i].schema_id + "|" +
                           candidates[i].measurement_id + "|" + candidates[i].context1_id + "|" +
                           candidates[i].context2_id + ") failed: " + e.what());
      }
      errors[i] = e.what();
    }
  });
  const double evaluate_s = seconds_since(t);

  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (results[i]) {
      set.insights.push_back(std::move(*results[i]));
    } else {
      std::cerr << "warning: skipped candidate " << candidates[i].candidate_id << ": " << errors[i] << "\n";
      set.skipped.push_back(candidates[i].candidate_id);
    }
  }
  set.truthful_count = static_cast<std::size_t>(
      std::count_if(set.insights.begin(), set.insights.end(), [](const ScoredInsight& s) { return s.scores.truthful; }));

  t = Clock::now();
  featurize_all(set, bundle);
  const double featurize_s = seconds_since(t);

  const double total_s = seconds_since(t0);
  set.timings = {{"workers", config.workers},
                 {"enumerate_seconds", enumerate_s},
                 {"query_seconds", query_s},
                 {"evaluate_seconds", evaluate_s},
                 {"featurize_seconds", featurize_s},
                 {"total_seconds", total_s},
                 {"total_insights", set.candidates_total},
                 {"significant_insights", set.truthful_count},
                 {"minutes", total_s / 60.0}};
  return set;
}

/// Generate from the files named in `config`.
inline InsightSet run_generate(const RunConfig& config) {
  const auto bundle = load_bundle(config.bundle_dir);
  const auto data_text = detail::read_file(config.data_file);
  const auto table = parse_table(data_text, config.ingest);
  auto set = run_generate(bundle, table, config);
  set.inputs["data_sha256"] = sha256_hex(data_text);
  return set;
}

// ---------------------------------------------------------------------------
// InsightSet files

inline nlohmann::json to_json(const ScoreBreakdown& s) {
  return {{"p_value", s.p_value}, {"truthful", s.truthful}, {"score_c", s.score_c}, {"score_s", s.score_s},
          {"score_u", s.score_u}, {"score_f", s.score_f},   {"delta", s.delta},     {"gamma", s.gamma},
          {"tau", s.tau}};
}

inline ScoreBreakdown score_breakdown_from_json(const nlohmann::json& j) {
  ScoreBreakdown s;
  s.p_value = j.at("p_value").get<double>();
  s.truthful = j.at("truthful").get<bool>();
  s.score_c = j.at("score_c").get<double>();
  s.score_s = j.at("score_s").get<double>();
  s.score_u = j.at("score_u").get<double>();
  s.score_f = j.at("score_f").get<double>();
  s.delta = j.at("delta").get<double>();
  s.gamma = j.at("gamma").get<double>();
  s.tau = j.at("tau").get<double>();
  return s;
}

inline nlohmann::json to_json(const InsightSet& set) {
  nlohmann::json insights = nlohmann::json::array();
  for (const auto& ins : set.insights) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < ins.features.bosw.size(); ++i) {
      if (ins.features.bosw[i] != 0.0) active.push_back(i);
    }
    insights.push_back({{"candidate_id", ins.candidate.candidate_id},
                        {"schema_id", ins.candidate.schema_id},
                        {"measurement_id", ins.candidate.measurement_id},
                        {"context1_id", ins.candidate.context1_id},
                        {"context2_id", ins.candidate.context2_id},
                        {"text", ins.text},
                        {"test",
                         {{"method", to_string(ins.test.method)},
                          {"statistic", ins.test.statistic},
                          {"p_value", ins.test.p_value},
                          {"exact", ins.test.exact}}},
                        {"scores", to_json(ins.scores)},
                        {"samples",
                         {{"mean1", ins.samples.mean1},
                          {"mean2", ins.samples.mean2},
                          {"n_rec1", ins.samples.n_rec1},
                          {"n_rec2", ins.samples.n_rec2},
                          {"time_span1", ins.samples.time_span1},
                          {"time_span2", ins.samples.time_span2}}},
                        {"features",
                         {{"bosw_active", active},
                          {"mean1", ins.features.mean1},
                          {"mean2", ins.features.mean2},
                          {"delta_norm", ins.features.delta_norm}}}});
  }
  return {{"schema_version", kInsightSetSchemaVersion},
          {"config", set.config},
          {"inputs", set.inputs},
          {"counts",
           {{"candidates_total", set.candidates_total},
            {"truthful_count", set.truthful_count},
            {"skipped", set.skipped}}},
          {"vocabulary", set.vocabulary.to_json()},
          {"standardization", set.standardization.to_json()},
          {"insights", insights},
          {"timings", set.timings}};
}

inline InsightSet insight_set_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kInsightSetSchemaVersion) {
      throw InputError("insight set: unsupported schema_version");
    }
    InsightSet set;
    set.config = j.at("config");
    set.inputs = j.value("inputs", nlohmann::json::object());
    set.candidates_total = j.at("counts").at("candidates_total").get<std::size_t>();
    set.truthful_count = j.at("counts").at("truthful_count").get<std::size_t>();
    set.skipped = j.at("counts").value("skipped", std::vector<std::string>{});
    set.vocabulary = Vocabulary::from_json(j.at("vocabulary"));
    set.standardization = Standardization::from_json(j.at("standardization"));
    set.timings = j.value("timings", nlohmann::json::object());
    for (const auto& e : j.at("insights")) {
      ScoredInsight ins;
      ins.candidate = {e.at("candidate_id").get<std::string>(), e.at("schema_id").get<std::string>(),
                       e.at("measurement_id").get<std::string>(), e.at("context1_id").get<std::string>(),
                       e.at("context2_id").get<std::string>()};
      ins.text = e.at("text").get<std::string>();
      const auto& t = e.at("test");
      ins.test = {t.at("statistic").get<double>(), t.at("p_value").get<double>(),
                  test_method_from_string(t.at("method").get<std::string>()), t.at("exact").get<bool>()};
      ins.scores = score_breakdown_from_json(e.at("scores"));
      const auto& s = e.at("samples");
      ins.samples = {s.at("mean1").get<double>(),      s.at("mean2").get<double>(),
                     s.at("n_rec1").get<std::size_t>(), s.at("n_rec2").get<std::size_t>(),
                     s.at("time_span1").get<double>(), s.at("time_span2").get<double>()};
      const auto& f = e.at("features");
      auto& fv = ins.features;
      fv.bosw.assign(set.vocabulary.size(), 0.0);
      for (const auto idx : f.at("bosw_active").get<std::vector<std::size_t>>()) {
        if (idx >= fv.bosw.size()) throw InputError("insight set: bosw index out of range");
        fv.bosw[idx] = 1.0;
      }
      fv.mean1 = f.at("mean1").get<double>();
      fv.mean2 = f.at("mean2").get<double>();
      fv.delta_norm = f.at("delta_norm").get<double>();
      fv.context1_index = set.vocabulary.context_index(ins.candidate.context1_id);
      fv.context2_index = set.vocabulary.context_index(ins.candidate.context2_id);
      fv.measurement_index = set.vocabulary.measurement_index(ins.candidate.measurement_id);
      fv.vocabulary_fingerprint = set.vocabulary.fingerprint();
      set.insights.push_back(std::move(ins));
    }
    std::size_t truthful = 0;
    for (const auto& ins : set.insights) truthful += ins.scores.truthful ? 1 : 0;
    if (truthful != set.truthful_count) throw InputError("insight set: truthful_count does not match insights");
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("insight set: malformed JSON (") + e.what() + ")");
  }
}

inline void write_insight_set(const InsightSet& set, const std::filesystem::path& path) {
  detail::write_file(path, to_json(set).dump(1) + "\n");
}

inline InsightSet read_insight_set(const std::filesystem::path& path) {
  const auto text = detail::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte);
  }
  return insight_set_from_json(j);
}

// ---------------------------------------------------------------------------
// ranking

struct RankConfig {
  std::size_t top_k = 23;
  std::uint64_t seed = 0;
  std::size_t knn_k = 5;
  TrainConfig train;
};

struct RankResult {
  std::vector<std::size_t> pool;  // indices into InsightSet::insights (truthful)
  std::vector<ScoreBreakdown> scores;  // per pool entry, with current score_u
  Selection selection;                 // indices refer to `pool` positions
  std::optional<UsefulnessModel> model;
  std::size_t seed_count = 0;
  std::size_t pseudo_labeled = 0;
  std::size_t ignored_feedback = 0;
  double final_mse = 0.0;

  std::vector<std::string> selected_ids(const InsightSet& set) const {
    std::vector<std::string> out;
    for (const std::size_t r : selection.ranked) out.push_back(set.insights[pool[r]].candidate.candidate_id);
    return out;
  }
};

/// Fits the usefulness model from feedback: rated insights are seeds, every
/// other truthful insight gets a KNN pseudo-label.
inline UsefulnessModel fit_usefulness(const InsightSet& set, const std::map<std::string, FeedbackRecord>& latest,
                                      const RankConfig& config, RankResult& result) {
  std::vector<LabeledPoint> seeds;
  std::vector<TrainingExample> data;
  for (const auto& [id, record] : latest) {
    const ScoredInsight* ins = set.find(id);
    if (!ins) {
      ++result.ignored_feedback;
      continue;
    }
    const double label = rating_label(record.rating);
    seeds.push_back({id, ins->features.bosw, label});
    data.push_back({ModelInput::from(ins->features), label});
  }
  if (seeds.empty()) throw InputError("no feedback record refers to an insight in this set");
  result.seed_count = seeds.size();

  std::vector<std::vector<double>> unlabeled;
  std::vector<std::size_t> unlabeled_idx;
  for (const std::size_t i : result.pool) {
    if (latest.count(set.insights[i].candidate.candidate_id)) continue;
    unlabeled.push_back(set.insights[i].features.bosw);
    unlabeled_idx.push_back(i);
  }
  const auto pseudo = knn_pseudo_label(seeds, unlabeled, config.knn_k);
  for (std::size_t u = 0; u < pseudo.size(); ++u) {
    data.push_back({ModelInput::from(set.insights[unlabeled_idx[u]].features), pseudo[u]});
  }
  result.pseudo_labeled = pseudo.size();

  auto train_cfg = config.train;
  train_cfg.seed = config.seed;
  auto model = train_usefulness_model(data, set.vocabulary.context_ids().size(),
                                      set.vocabulary.measurement_ids().size(), train_cfg);
  model.vocabulary_fingerprint = set.vocabulary.fingerprint();
  model.standardization = set.standardization;
  result.final_mse = model.final_mse;
  return model;
}

/// Diverse top-K of the truthful insights with the given usefulness model
/// (score_u = 1 everywhere when there is none).
inline void rank_into(const InsightSet& set, const UsefulnessModel* model, const RankConfig& config,
                      RankResult& result) {
  result.pool = set.truthful_indices();
  if (result.pool.empty()) throw InputError("rank: the insight set has no truthful insights");
  if (config.top_k > result.pool.size()) {
    throw InputError("rank: top K=" + std::to_string(config.top_k) + " exceeds the " +
                     std::to_string(result.pool.size()) + " truthful insights");
  }
  result.scores.clear();
  std::vector<SelectionItem> items;
  for (const std::size_t i : result.pool) {
    const auto& ins = set.insights[i];
    const double u = model ? predict_usefulness(*model, ins.features) : 1.0;
    result.scores.push_back(with_usefulness(ins.scores, u));
    items.push_back({ins.candidate.candidate_id, ins.features.bosw, result.scores.back().score_f});
  }
  result.selection = select_diverse(items, config.top_k, derive_seed(config.seed, 3));
}

inline RankResult rank_with_model(const InsightSet& set, const UsefulnessModel* model, const RankConfig& config) {
  RankResult result;
  rank_into(set, model, config, result);
  return result;
}

inline RankResult run_rank(const InsightSet& set, const std::vector<FeedbackRecord>& feedback, const RankConfig& config) {
  RankResult result;
  result.pool = set.truthful_indices();
  if (result.pool.empty()) throw InputError("rank: the insight set has no truthful insights");
  if (config.top_k > result.pool.size()) {
    throw InputError("rank: top K=" + std::to_string(config.top_k) + " exceeds the " +
                     std::to_string(result.pool.size()) + " truthful insights");
  }
  if (!feedback.empty()) {
    result.model = fit_usefulness(set, latest_feedback(feedback), config, result);
  }
  rank_into(set, result.model ? &*result.model : nullptr, config, result);
  return result;
}

inline nlohmann::json selection_json(const InsightSet& set, const RankResult& rank) {
  nlohmann::json list = nlohmann::json::array();
  std::size_t position = 0;
  for (const std::size_t r : rank.selection.ranked) {
    const auto& ins = set.insights[rank.pool[r]];
    list.push_back({{"rank", ++position},
                    {"candidate_id", ins.candidate.candidate_id},
                    {"text", ins.text},
                    {"cluster", rank.selection.clusters.cluster_of[r]},
                    {"scores", to_json(rank.scores[r])}});
  }
  return list;
}

inline nlohmann::json to_json(const InsightSet& set, const RankResult& rank, const RankConfig& config) {
  nlohmann::json clusters = nlohmann::json::array();
  for (std::size_t c = 0; c < rank.selection.clusters.k; ++c) {
    clusters.push_back({{"cluster", c},
                        {"size", rank.selection.clusters.members[c].size()},
                        {"selected", rank.selection.clusters.selected[c]}});
  }
  nlohmann::json out = {{"schema_version", kInsightSetSchemaVersion},
                        {"top_k", config.top_k},
                        {"seed", config.seed},
                        {"truthful_count", rank.pool.size()},
                        {"feedback",
                         {{"seeds", rank.seed_count},
                          {"pseudo_labeled", rank.pseudo_labeled},
                          {"ignored", rank.ignored_feedback}}},
                        {"selection", selection_json(set, rank)},
                        {"clusters", clusters}};
  if (rank.model) out["model"] = {{"final_mse", rank.final_mse}, {"train", rank.model->config.to_json()}};
  return out;
}

/// PCA points for the truthful insights, labelled with their latest feedback.
inline nlohmann::json pca_json(const InsightSet& set, const std::map<std::string, FeedbackRecord>& latest = {}) {
  const auto pool = set.truthful_indices();
  std::vector<std::vector<double>> vectors;
  for (const std::size_t i : pool) vectors.push_back(set.insights[i].features.bosw);
  const auto pca = pca_project(vectors);
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto& id = set.insights[pool[k]].candidate.candidate_id;
    nlohmann::json p = {{"candidate_id", id}, {"x", pca.points[k][0]}, {"y", pca.points[k][1]}};
    if (const auto it = latest.find(id); it != latest.end()) p["feedback_label"] = rating_label(it->second.rating);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace insightgen
