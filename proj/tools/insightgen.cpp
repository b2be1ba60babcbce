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


// insightgen command line: synth, generate, rank, pca, serve, bench.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "insightgen/insightgen.hpp"
#include "insightgen/service.hpp"

namespace ig = insightgen;
namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& out, const nlohmann::json& j) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    ig::detail::write_file(out, j.dump(2) + "\n");
  }
}

ig::RunConfig load_run_config(const fs::path& schemas, const fs::path& data, const fs::path& config_file) {
  ig::RunConfig cfg;
  cfg.bundle_dir = schemas;
  cfg.data_file = data;
  if (!config_file.empty()) {
    const auto text = ig::detail::read_file(config_file);
    try {
      cfg.apply_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw ig::ParseError(config_file.string() + ": " + e.what(), e.byte);
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"insightgen: schema-driven insight generation and ranking"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset and schema bundle");
  fs::path synth_out;
  ig::SynthConfig synth_cfg;
  std::vector<std::string> plants;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--rows", synth_cfg.rows, "number of rows")->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed, "random seed")->capture_default_str();
  synth->add_option("--measurements", synth_cfg.measurements, "number of measurements")->capture_default_str();
  synth->add_option("--scale", synth_cfg.scale, "multiplier on the number of measurements")->capture_default_str();
  synth->add_option("--observation-rate", synth_cfg.observation_rate, "chance a measurement is recorded")
      ->capture_default_str();
  synth->add_option("--plant", plants, "planted effect measurement:context:shift_tau (repeatable)");

  // generate
  auto* gen = app.add_subcommand("generate", "evaluate every candidate insight");
  fs::path gen_schemas, gen_data, gen_config, gen_out;
  std::size_t gen_workers = 1;
  std::uint64_t gen_seed = 0;
  bool gen_lenient = false;
  gen->add_option("--schemas", gen_schemas, "schema bundle directory")->required();
  gen->add_option("--data", gen_data, "CSV data file")->required();
  gen->add_option("--config", gen_config, "run config JSON");
  gen->add_option("--out", gen_out, "InsightSet output file")->required();
  gen->add_option("--workers", gen_workers, "worker threads")->capture_default_str();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "seed (overrides the config file)");
  gen->add_flag("--lenient", gen_lenient, "skip failing candidates with a warning");

  // bench
  auto* bench = app.add_subcommand("bench", "serial vs parallel generate timings");
  fs::path bench_schemas, bench_data, bench_config, bench_out;
  std::size_t bench_workers = 4;
  bench->add_option("--schemas", bench_schemas, "schema bundle directory")->required();
  bench->add_option("--data", bench_data, "CSV data file")->required();
  bench->add_option("--config", bench_config, "run config JSON");
  bench->add_option("--workers", bench_workers, "parallel worker threads")->capture_default_str();
  bench->add_option("--out", bench_out, "timing report (default stdout)");

  // rank
  auto* rank = app.add_subcommand("rank", "select a diverse top-K, retraining from feedback when given");
  fs::path rank_insights, rank_feedback, rank_model, rank_out;
  ig::RankConfig rank_cfg;
  rank->add_option("--insights", rank_insights, "InsightSet file")->required();
  rank->add_option("--feedback", rank_feedback, "feedback JSON Lines file");
  rank->add_option("--top", rank_cfg.top_k, "K")->capture_default_str();
  rank->add_option("--model", rank_model, "where to write the trained model");
  rank->add_option("--out", rank_out, "ranked selection output (default stdout)");
  rank->add_option("--seed", rank_cfg.seed, "seed")->capture_default_str();
  rank->add_option("--epochs", rank_cfg.train.epochs, "training epochs")->capture_default_str();

  // pca
  auto* pca = app.add_subcommand("pca", "2-D projection of the truthful insights");
  fs::path pca_insights, pca_feedback, pca_out;
  pca->add_option("--insights", pca_insights, "InsightSet file")->required();
  pca->add_option("--feedback", pca_feedback, "feedback JSON Lines file");
  pca->add_option("--out", pca_out, "output file (default stdout)");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP API for the review loop");
  fs::path serve_insights, serve_feedback = "feedback.jsonl", serve_model;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  ig::ServiceConfig serve_cfg;
  serve->add_option("--insights", serve_insights, "InsightSet file")->required();
  serve->add_option("--feedback", serve_feedback, "feedback JSON Lines file")->capture_default_str();
  serve->add_option("--model", serve_model, "model file (archived on retrain)");
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_option("--seed", serve_cfg.rank.seed)->capture_default_str();
  serve->add_option("--top", serve_cfg.rank.top_k)->capture_default_str();
  serve->add_option("--cors-origin", serve_cfg.cors_origin)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      for (const auto& p : plants) synth_cfg.effects.push_back(ig::PlantedEffect::parse(p));
      const auto out = ig::generate_synthetic(synth_cfg);
      ig::write_synthetic(out, synth_out);
      std::cerr << "wrote " << synth_cfg.rows << " rows, " << out.bundle.measurements.size() << " measurements, "
                << ig::enumerate_candidates(out.bundle).size() << " candidates to " << synth_out << "\n";
    } else if (*gen) {
      auto cfg = load_run_config(gen_schemas, gen_data, gen_config);
      cfg.output_file = gen_out;
      cfg.workers = gen_workers;
      if (gen_seed_opt->count() > 0) cfg.seed = gen_seed;
      cfg.lenient = cfg.lenient || gen_lenient;
      const auto set = ig::run_generate(cfg);
      ig::write_insight_set(set, gen_out);
      std::cerr << set.candidates_total << " candidates, " << set.truthful_count << " truthful, "
                << set.timings.value("total_seconds", 0.0) << " s\n";
    } else if (*bench) {
      auto cfg = load_run_config(bench_schemas, bench_data, bench_config);
      const auto bundle = ig::load_bundle(cfg.bundle_dir);
      const auto table = ig::load_table(cfg.data_file.string(), cfg.ingest);
      cfg.workers = 1;
      const auto serial = ig::run_generate(bundle, table, cfg);
      cfg.workers = bench_workers;
      const auto parallel = ig::run_generate(bundle, table, cfg);
      write_json(bench_out, {{"total_insights", serial.candidates_total},
                             {"significant_insights", serial.truthful_count},
                             {"serial_minutes", serial.timings.at("minutes")},
                             {"parallel_minutes", parallel.timings.at("minutes")},
                             {"parallel_workers", bench_workers}});
    } else if (*rank) {
      const auto set = ig::read_insight_set(rank_insights);
      const auto feedback = rank_feedback.empty() ? std::vector<ig::FeedbackRecord>{}
                                                  : ig::read_feedback_log(rank_feedback);
      const auto result = ig::run_rank(set, feedback, rank_cfg);
      if (result.model && !rank_model.empty()) {
        ig::detail::write_file(rank_model, result.model->to_json().dump(1) + "\n");
      }
      if (result.ignored_feedback > 0) {
        std::cerr << "warning: ignored " << result.ignored_feedback << " feedback record(s) for unknown insights\n";
      }
      write_json(rank_out, ig::to_json(set, result, rank_cfg));
    } else if (*pca) {
      const auto set = ig::read_insight_set(pca_insights);
      const auto feedback = pca_feedback.empty() ? std::vector<ig::FeedbackRecord>{}
                                                 : ig::read_feedback_log(pca_feedback);
      write_json(pca_out, ig::pca_json(set, ig::latest_feedback(feedback)));
    } else if (*serve) {
      serve_cfg.feedback_log = serve_feedback;
      serve_cfg.model_file = serve_model;
      ig::InsightService service(ig::read_insight_set(serve_insights), serve_cfg);
      httplib::Server server;
      service.bind(server);
      std::cerr << "listening on http://" << serve_host << ":" << serve_port << "\n";
      if (!server.listen(serve_host, serve_port)) throw ig::RuntimeError("cannot listen on port " + std::to_string(serve_port));
    }
  } catch (const ig::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ig::RuntimeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
