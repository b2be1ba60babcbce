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

// Synthetic radiology-style dataset plus a matching schema bundle, with
// optional planted mean shifts recorded in a ground-truth sidecar.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightgen/dataset.hpp"
#include "insightgen/error.hpp"
#include "insightgen/filter.hpp"
#include "insightgen/random.hpp"
#include "insightgen/schema.hpp"

namespace insightgen {

struct PlantedEffect {
  std::string measurement_id;
  std::string context_id;
  double shift_tau = 0.0;  // shift in units of the measurement's tau

  static PlantedEffect parse(std::string_view text);  // "measurement:context:shift"
};

struct SynthConfig {
  std::size_t rows = 5000;
  std::size_t measurements = 10;
  double scale = 1.0;             // multiplies `measurements`
  double observation_rate = 0.25; // chance a measurement is recorded on a row
  std::uint64_t seed = 0;
  int days = 90;
  std::vector<PlantedEffect> effects;
  bool ks_schema = true;
  bool mwu_schema = true;
  bool frequency_schema = true;

  std::size_t measurement_count() const {
    return static_cast<std::size_t>(std::llround(static_cast<double>(measurements) * scale));
  }

  void validate() const {
    if (rows < 100) throw InputError("synth: rows must be >= 100");
    if (measurement_count() < 1) throw InputError("synth: need at least one measurement");
    if (!(observation_rate > 0.0 && observation_rate <= 1.0)) throw InputError("synth: observation rate must lie in (0,1]");
    if (days < 1) throw InputError("synth: days must be >= 1");
    if (!ks_schema && !mwu_schema && !frequency_schema) throw InputError("synth: no schema enabled");
  }
};

inline PlantedEffect PlantedEffect::parse(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos) throw InputError("planted effect must look like measurement:context:shift");
  PlantedEffect e{std::string(text.substr(0, a)), std::string(text.substr(a + 1, b - a - 1)), 0.0};
  try {
    std::size_t used = 0;
    const std::string num(text.substr(b + 1));
    e.shift_tau = std::stod(num, &used);
    if (used != num.size()) throw InputError("");
  } catch (const std::exception&) {
    throw InputError("planted effect: bad shift in '" + std::string(text) + "'");
  }
  return e;
}

struct SynthOutput {
  SchemaBundle bundle;
  std::string csv;
  IngestConfig ingest;
  nlohmann::json run_config;
  nlohmann::json ground_truth;
};

namespace detail {

struct SynthMeasure {
  const char* id;
  const char* surface;
  const char* unit;
  double mu;
  double sigma;
};

inline constexpr SynthMeasure kSynthMeasures[] = {
    {"requested_dose", "requested dose", "mGy", 12.0, 3.0},
    {"exam_duration", "exam duration", "minutes", 25.0, 6.0},
    {"acquisition_time", "acquisition time", "seconds", 40.0, 8.0},
    {"waiting_time", "waiting time", "minutes", 30.0, 10.0},
    {"report_turnaround", "report turnaround", "hours", 6.0, 2.0},
    {"contrast_volume", "contrast volume", "mL", 80.0, 15.0},
    {"table_time", "table time", "minutes", 15.0, 4.0},
    {"image_count", "image count", "images", 120.0, 30.0},
    {"scan_length", "scan length", "cm", 45.0, 10.0},
    {"patient_bmi", "patient BMI", "kg/m2", 27.0, 5.0},
};

inline std::string format_number(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string format_utc(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds tp{seconds{epoch_seconds}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

inline ContextDef synth_context(std::string id, std::string surface, std::string_view filter, std::string pair) {
  return {std::move(id), std::move(surface), parse_filter(filter), std::move(pair), Tense::kPresent};
}

}  // namespace detail

/// Contexts: seven weekdays, four parts of the day, four physicians and four
/// age bands, each group sharing one pair_id.
inline std::vector<ContextDef> synthetic_contexts() {
  std::vector<ContextDef> out;
  static constexpr std::pair<const char*, const char*> kDays[] = {
      {"Mon", "Mondays"}, {"Tue", "Tuesdays"}, {"Wed", "Wednesdays"}, {"Thu", "Thursdays"},
      {"Fri", "Fridays"}, {"Sat", "Saturdays"}, {"Sun", "Sundays"}};
  for (const auto& [abbr, name] : kDays) {
    std::string lower(abbr);
    lower[0] = static_cast<char>(std::tolower(lower[0]));
    out.push_back(detail::synth_context("weekday_" + lower, std::string("on ") + name,
                                        std::string("ts_weekday == '") + abbr + "'", "weekday"));
  }
  for (const char* part : {"morning", "afternoon", "evening", "night"}) {
    const std::string surface = std::string(part) == "night" ? "at night" : std::string("in the ") + part;
    out.push_back(detail::synth_context(std::string("pod_") + part, surface,
                                        std::string("ts_part_of_day == '") + part + "'", "part_of_day"));
  }
  for (int p = 1; p <= 4; ++p) {
    const std::string id = "P" + std::to_string(p);
    out.push_back(detail::synth_context("physician_p" + std::to_string(p), "for physician " + id,
                                        "physician == '" + id + "'", "physician"));
  }
  for (int lo = 18; lo < 90; lo += 18) {
    const int hi = lo + 18;
    out.push_back(detail::synth_context(
        "age_" + std::to_string(lo) + "_" + std::to_string(hi),
        "for patients aged " + std::to_string(lo) + " to " + std::to_string(hi - 1),
        "age >= " + std::to_string(lo) + " and age < " + std::to_string(hi), "age_band"));
  }
  return out;
}

inline SynthOutput generate_synthetic(const SynthConfig& config) {
  config.validate();
  const std::size_t m_count = config.measurement_count();
  Rng rng(derive_seed(config.seed, 100));

  struct Measure {
    std::string id, surface, unit;
    double mu, sigma;
  };
  std::vector<Measure> measures;
  for (std::size_t i = 0; i < m_count; ++i) {
    if (i < std::size(detail::kSynthMeasures)) {
      const auto& s = detail::kSynthMeasures[i];
      measures.push_back({s.id, s.surface, s.unit, s.mu, s.sigma});
    } else {
      const std::string n = std::to_string(i + 1);
      measures.push_back({"measure_" + n, "measure " + n, "units", 50.0, 10.0});
    }
  }

  SynthOutput out;
  out.ingest.primary_timestamp = "ts";
  out.ingest.time_unit = TimeUnit::kHours;
  out.ingest.column_types["ts"] = ColumnType::kTimestamp;
  out.ingest.column_types["physician"] = ColumnType::kCategorical;
  out.ingest.column_types["age"] = ColumnType::kNumeric;
  for (const auto& m : measures) out.ingest.column_types[m.id] = ColumnType::kNumeric;

  // Base rows.
  const std::int64_t start = 1704067200;  // 2024-01-01T00:00:00Z
  const std::int64_t span_seconds = static_cast<std::int64_t>(config.days) * 86400;
  const std::size_t n = config.rows;
  std::vector<std::vector<std::string>> records;
  records.reserve(n + 1);
  records.push_back({"ts", "physician", "age"});
  std::vector<std::vector<double>> values(m_count, std::vector<double>(n, std::nan("")));
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::string> row;
    row.push_back(detail::format_utc(start + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(span_seconds)))));
    row.push_back("P" + std::to_string(1 + uniform_index(rng, 4)));
    row.push_back(std::to_string(18 + uniform_index(rng, 72)));
    for (std::size_t m = 0; m < m_count; ++m) {
      const bool observed = uniform01(rng) < config.observation_rate;
      const double v = measures[m].mu + measures[m].sigma * standard_normal(rng);
      if (observed) values[m][r] = v;
    }
    records.push_back(std::move(row));
  }

  // Bundle.
  auto& bundle = out.bundle;
  bundle.contexts = synthetic_contexts();
  const double span_hours = static_cast<double>(span_seconds) / 3600.0;
  for (const auto& m : measures) {
    MeasurementDef def;
    def.measurement_id = m.id;
    def.surface_form = m.surface;
    def.unit = m.unit;
    def.column = m.id;
    def.tolerance_tau = m.sigma;
    def.expected_rate = 0.4 * static_cast<double>(n) * config.observation_rate / span_hours;
    def.decimals = 2;
    bundle.measurements.push_back(def);
  }
  std::vector<std::string> all_ids;
  for (const auto& m : measures) all_ids.push_back(m.id);
  if (config.ks_schema) {
    bundle.schemas.push_back({"distribution_ks",
                              "{context:1} the {measurement} {mean:1} {tense(be,3)} {comparison} {context:2} "
                              "{mean:2}, a difference of {percent}",
                              ScoringType::kDistributionCompare, all_ids, TestMethod::kKsTwoSample, Claim::kGreater});
  }
  if (config.mwu_schema) {
    bundle.schemas.push_back({"distribution_mwu",
                              "{context:1} the {measurement} {mean:1} {tense(be,3)} {comparison} {context:2} {mean:2}",
                              ScoringType::kDistributionCompare, all_ids, TestMethod::kMannWhitneyU, Claim::kGreater});
  }
  if (config.frequency_schema) {
    bundle.schemas.push_back({"frequency",
                              "{context:1} the number of {measurement} records ({count:1}) {tense(be,3)} "
                              "{comparison} {context:2} ({count:2})",
                              ScoringType::kFrequencyCompare, all_ids, TestMethod::kBinomialExact, Claim::kGreater});
  }
  validate_bundle(bundle);

  // Planted effects, applied to the rows each context selects.
  std::map<std::string, std::size_t> measure_pos;
  for (std::size_t m = 0; m < m_count; ++m) measure_pos[measures[m].id] = m;
  std::map<std::pair<std::string, std::string>, double> shift_of;  // (measurement, context) -> tau units
  if (!config.effects.empty()) {
    IngestConfig base_ingest = out.ingest;
    for (const auto& m : measures) base_ingest.column_types.erase(m.id);
    const Table base = Table::from_records(records, base_ingest);
    for (const auto& e : config.effects) {
      const auto mp = measure_pos.find(e.measurement_id);
      if (mp == measure_pos.end()) throw InputError("planted effect: unknown measurement '" + e.measurement_id + "'");
      const ContextDef& ctx = bundle.context(e.context_id);
      const double shift = e.shift_tau * measures[mp->second].sigma;
      for (const std::size_t r : match_rows(base, ctx.filter)) {
        if (!std::isnan(values[mp->second][r])) values[mp->second][r] += shift;
      }
      shift_of[{e.measurement_id, e.context_id}] += e.shift_tau;
    }
  }

  // CSV.
  std::string csv;
  csv.reserve(n * (32 + 10 * m_count));
  auto append_row = [&csv](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) csv += ',';
      csv += csv_escape(cells[i]);
    }
    csv += '\n';
  };
  auto header = records[0];
  for (const auto& m : measures) header.push_back(m.id);
  append_row(header);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = records[r + 1];
    for (std::size_t m = 0; m < m_count; ++m) {
      row.push_back(std::isnan(values[m][r]) ? std::string() : detail::format_number(values[m][r], 4));
    }
    append_row(row);
  }
  out.csv = std::move(csv);

  out.run_config = {{"alpha", 0.05}, {"gamma", 6.0}, {"top_k", 23}, {"seed", config.seed},
                    {"ingest", out.ingest.to_json()}};

  // Ground truth: distribution candidates whose two contexts differ in planted shift.
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : config.effects) {
    effects.push_back({{"measurement_id", e.measurement_id}, {"context_id", e.context_id}, {"shift_tau", e.shift_tau}});
  }
  nlohmann::json affected = nlohmann::json::array();
  for (const auto& cand : enumerate_candidates(bundle)) {
    if (bundle.schema(cand.schema_id).scoring_type != ScoringType::kDistributionCompare) continue;
    auto get = [&](const std::string& ctx) {
      const auto it = shift_of.find({cand.measurement_id, ctx});
      return it == shift_of.end() ? 0.0 : it->second;
    };
    const double net = get(cand.context1_id) - get(cand.context2_id);
    if (net == 0.0) continue;
    affected.push_back({{"candidate_id", cand.candidate_id},
                        {"schema_id", cand.schema_id},
                        {"measurement_id", cand.measurement_id},
                        {"context1_id", cand.context1_id},
                        {"context2_id", cand.context2_id},
                        {"shift_tau", net}});
  }
  out.ground_truth = {{"seed", config.seed},
                      {"rows", n},
                      {"observation_rate", config.observation_rate},
                      {"measurements", m_count},
                      {"effects", effects},
                      {"affected_candidates", affected}};
  return out;
}

/// Writes data.csv, config.json, ground_truth.json and schemas/.
inline void write_synthetic(const SynthOutput& out, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "schemas", ec);
  if (ec) throw RuntimeError("cannot create " + (dir / "schemas").string() + ": " + ec.message());
  detail::write_file(dir / "data.csv", out.csv);
  detail::write_file(dir / "config.json", out.run_config.dump(2) + "\n");
  detail::write_file(dir / "ground_truth.json", out.ground_truth.dump(2) + "\n");
  write_bundle(out.bundle, dir / "schemas");
}

}  // namespace insightgen
