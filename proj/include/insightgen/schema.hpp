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

// Insight schemas, measurement and context definitions, and candidate
// enumeration.
//
// A bundle lives in a directory holding three JSON arrays:
//   schemas.json       [{schema_id, template, scoring_type, applicable_items,
//                        test?, claim?}]
//   measurements.json  [{measurement_id, surface_form, unit, column,
//                        tolerance_tau, expected_rate_F_exp, decimals}]
//   contexts.json      [{context_id, surface_form, filter, pair_id, tense}]

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightgen/error.hpp"
#include "insightgen/filter.hpp"
#include "insightgen/hash.hpp"
#include "insightgen/realization.hpp"
#include "insightgen/stats.hpp"

namespace insightgen {

enum class ScoringType { kDistributionCompare, kFrequencyCompare, kScalarCompare };

inline std::string_view to_string(ScoringType t) {
  switch (t) {
    case ScoringType::kDistributionCompare: return "distribution_compare";
    case ScoringType::kFrequencyCompare: return "frequency_compare";
    case ScoringType::kScalarCompare: return "scalar_compare";
  }
  return "?";
}

inline ScoringType scoring_type_from_string(std::string_view s) {
  if (s == "distribution_compare") return ScoringType::kDistributionCompare;
  if (s == "frequency_compare") return ScoringType::kFrequencyCompare;
  if (s == "scalar_compare") return ScoringType::kScalarCompare;
  throw InputError("unknown scoring_type '" + std::string(s) + "'");
}

/// Direction asserted by an ordered (context 1, context 2) candidate.
enum class Claim { kGreater, kLower };

inline std::string_view to_string(Claim c) { return c == Claim::kGreater ? "greater" : "lower"; }

inline Claim claim_from_string(std::string_view s) {
  if (s == "greater") return Claim::kGreater;
  if (s == "lower") return Claim::kLower;
  throw InputError("unknown claim '" + std::string(s) + "'");
}

/// Default test per scoring type. distribution_compare may instead select
/// ks_two_sample through the optional `test` field.
inline TestMethod default_test(ScoringType t) {
  return t == ScoringType::kDistributionCompare ? TestMethod::kMannWhitneyU : TestMethod::kBinomialExact;
}

struct InsightSchema {
  std::string schema_id;
  std::string template_text;
  ScoringType scoring_type = ScoringType::kDistributionCompare;
  std::vector<std::string> applicable_items;
  TestMethod test = TestMethod::kMannWhitneyU;
  Claim claim = Claim::kGreater;

  bool operator==(const InsightSchema&) const = default;
};

struct MeasurementDef {
  std::string measurement_id;
  std::string surface_form;
  std::string unit;
  std::string column;
  double tolerance_tau = 1.0;
  double expected_rate = 1.0;  // F_exp, samples per time unit
  int decimals = 2;

  bool operator==(const MeasurementDef&) const = default;
};

struct ContextDef {
  std::string context_id;
  std::string surface_form;
  FilterExpr filter;
  std::string pair_id;
  Tense tense = Tense::kPresent;

  bool operator==(const ContextDef&) const = default;
};

struct SchemaBundle {
  std::vector<InsightSchema> schemas;
  std::vector<MeasurementDef> measurements;
  std::vector<ContextDef> contexts;

  bool operator==(const SchemaBundle&) const = default;

  const InsightSchema& schema(std::string_view id) const { return find_in(schemas, id, &InsightSchema::schema_id, "schema"); }
  const MeasurementDef& measurement(std::string_view id) const {
    return find_in(measurements, id, &MeasurementDef::measurement_id, "measurement");
  }
  const ContextDef& context(std::string_view id) const { return find_in(contexts, id, &ContextDef::context_id, "context"); }

 private:
  template <typename T>
  static const T& find_in(const std::vector<T>& items, std::string_view id, std::string T::*key,
                          std::string_view kind) {
    for (const auto& item : items) {
      if (item.*key == id) return item;
    }
    throw ReferenceError("unknown " + std::string(kind) + " '" + std::string(id) + "'", std::string(id));
  }
};

struct CandidateSpec {
  std::string candidate_id;
  std::string schema_id;
  std::string measurement_id;
  std::string context1_id;
  std::string context2_id;

  bool operator==(const CandidateSpec&) const = default;
};

/// First 16 hex chars of SHA-256("schema|measurement|context1|context2").
inline std::string make_candidate_id(std::string_view schema_id, std::string_view measurement_id,
                                     std::string_view context1_id, std::string_view context2_id) {
  std::string canonical;
  canonical.append(schema_id).append("|").append(measurement_id).append("|");
  canonical.append(context1_id).append("|").append(context2_id);
  return short_hash(canonical);
}

/// Placeholders a schema template may use.
inline bool is_known_placeholder(std::string_view name) {
  static const std::set<std::string, std::less<>> known = {
      "measurement", "context:1", "context:2", "mean:1",  "mean:2", "comparison",
      "percent",     "count:1",   "count:2",   "unit"};
  return known.count(name) > 0;
}

// ---------------------------------------------------------------------------
// parsing

namespace detail {

inline nlohmann::json parse_json_document(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
}

template <typename T>
T required(const nlohmann::json& obj, std::string_view field, std::string_view where) {
  if (!obj.is_object()) throw InputError(std::string(where) + ": expected an object");
  const auto it = obj.find(field);
  if (it == obj.end()) throw InputError(std::string(where) + ": missing field '" + std::string(field) + "'");
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string(where) + ": field '" + std::string(field) + "' has the wrong type");
  }
}

inline const nlohmann::json& require_array(const nlohmann::json& doc, std::string_view what) {
  if (!doc.is_array()) throw InputError(std::string(what) + ": top level must be a JSON array");
  return doc;
}

}  // namespace detail

/// Checks every bundle invariant; throws InputError / ReferenceError.
inline void validate_bundle(const SchemaBundle& bundle) {
  auto check_unique = [](const auto& items, auto key, std::string_view kind) {
    std::set<std::string> seen;
    for (const auto& item : items) {
      const std::string& id = item.*key;
      if (id.empty()) throw InputError("empty " + std::string(kind) + " id");
      if (!seen.insert(id).second) throw InputError("duplicate " + std::string(kind) + " id '" + id + "'");
    }
  };
  check_unique(bundle.schemas, &InsightSchema::schema_id, "schema");
  check_unique(bundle.measurements, &MeasurementDef::measurement_id, "measurement");
  check_unique(bundle.contexts, &ContextDef::context_id, "context");

  for (const auto& m : bundle.measurements) {
    if (!(m.tolerance_tau > 0.0) || !std::isfinite(m.tolerance_tau)) {
      throw InputError("measurement '" + m.measurement_id + "': tolerance_tau must be > 0");
    }
    if (!(m.expected_rate > 0.0) || !std::isfinite(m.expected_rate)) {
      throw InputError("measurement '" + m.measurement_id + "': expected_rate_F_exp must be > 0");
    }
    if (m.decimals < 0 || m.decimals > 12) {
      throw InputError("measurement '" + m.measurement_id + "': decimals out of range");
    }
    if (m.column.empty()) throw InputError("measurement '" + m.measurement_id + "': empty column");
  }

  std::map<std::string, int> pair_sizes;
  for (const auto& c : bundle.contexts) {
    if (c.surface_form.empty()) throw InputError("context '" + c.context_id + "': empty surface_form");
    if (c.pair_id.empty()) throw InputError("context '" + c.context_id + "': empty pair_id");
    ++pair_sizes[c.pair_id];
  }
  for (const auto& [pair, size] : pair_sizes) {
    if (size < 2) throw InputError("pair_id '" + pair + "' has only one context");
  }

  for (const auto& s : bundle.schemas) {
    std::set<std::string> placeholders;
    for (const auto& piece : parse_template(s.template_text)) {
      if (piece.kind != TemplatePiece::Kind::kPlaceholder) continue;
      if (!is_known_placeholder(piece.text)) {
        throw ParseError("schema '" + s.schema_id + "': unknown placeholder {" + piece.text + "}", piece.position);
      }
      placeholders.insert(piece.text);
    }
    for (const char* required : {"measurement", "context:1", "context:2"}) {
      if (!placeholders.count(required)) {
        throw InputError("schema '" + s.schema_id + "': template lacks {" + std::string(required) + "}");
      }
    }
    if (s.applicable_items.empty()) throw InputError("schema '" + s.schema_id + "': no applicable_items");
    std::set<std::string> items;
    for (const auto& id : s.applicable_items) {
      if (!items.insert(id).second) {
        throw InputError("schema '" + s.schema_id + "': measurement '" + id + "' listed twice");
      }
      bool found = false;
      for (const auto& m : bundle.measurements) found = found || m.measurement_id == id;
      if (!found) {
        throw ReferenceError("schema '" + s.schema_id + "': applicable item '" + id +
                                 "' is not a defined measurement",
                             id);
      }
    }
    const bool distribution = s.scoring_type == ScoringType::kDistributionCompare;
    const bool ok = distribution ? (s.test == TestMethod::kKsTwoSample || s.test == TestMethod::kMannWhitneyU)
                                 : s.test == TestMethod::kBinomialExact;
    if (!ok) {
      throw InputError("schema '" + s.schema_id + "': test " + std::string(to_string(s.test)) +
                       " does not fit scoring_type " + std::string(to_string(s.scoring_type)));
    }
  }
}

/// Parses the three bundle documents and validates the result.
inline SchemaBundle parse_bundle(std::string_view schemas_json, std::string_view measurements_json,
                                 std::string_view contexts_json) {
  SchemaBundle bundle;

  const auto schemas_doc = detail::parse_json_document(schemas_json, "schemas.json");
  std::size_t idx = 0;
  for (const auto& j : detail::require_array(schemas_doc, "schemas.json")) {
    const std::string where = "schemas.json[" + std::to_string(idx++) + "]";
    InsightSchema s;
    s.schema_id = detail::required<std::string>(j, "schema_id", where);
    s.template_text = detail::required<std::string>(j, "template", where);
    s.scoring_type = scoring_type_from_string(detail::required<std::string>(j, "scoring_type", where));
    s.applicable_items = detail::required<std::vector<std::string>>(j, "applicable_items", where);
    s.test = j.contains("test") ? test_method_from_string(detail::required<std::string>(j, "test", where))
                                : default_test(s.scoring_type);
    if (j.contains("claim")) s.claim = claim_from_string(detail::required<std::string>(j, "claim", where));
    bundle.schemas.push_back(std::move(s));
  }

  const auto measurements_doc = detail::parse_json_document(measurements_json, "measurements.json");
  idx = 0;
  for (const auto& j : detail::require_array(measurements_doc, "measurements.json")) {
    const std::string where = "measurements.json[" + std::to_string(idx++) + "]";
    MeasurementDef m;
    m.measurement_id = detail::required<std::string>(j, "measurement_id", where);
    m.surface_form = detail::required<std::string>(j, "surface_form", where);
    m.unit = j.contains("unit") ? detail::required<std::string>(j, "unit", where) : std::string();
    m.column = detail::required<std::string>(j, "column", where);
    m.tolerance_tau = detail::required<double>(j, "tolerance_tau", where);
    m.expected_rate = detail::required<double>(j, "expected_rate_F_exp", where);
    m.decimals = j.contains("decimals") ? detail::required<int>(j, "decimals", where) : 2;
    bundle.measurements.push_back(std::move(m));
  }

  const auto contexts_doc = detail::parse_json_document(contexts_json, "contexts.json");
  idx = 0;
  for (const auto& j : detail::require_array(contexts_doc, "contexts.json")) {
    const std::string where = "contexts.json[" + std::to_string(idx++) + "]";
    ContextDef c;
    c.context_id = detail::required<std::string>(j, "context_id", where);
    c.surface_form = detail::required<std::string>(j, "surface_form", where);
    try {
      c.filter = parse_filter(detail::required<std::string>(j, "filter", where));
    } catch (const ParseError& e) {
      throw ParseError(where + " (" + c.context_id + "): " + e.what(), e.position());
    }
    c.pair_id = detail::required<std::string>(j, "pair_id", where);
    c.tense = j.contains("tense") ? tense_from_string(detail::required<std::string>(j, "tense", where))
                                  : Tense::kPresent;
    bundle.contexts.push_back(std::move(c));
  }

  validate_bundle(bundle);
  return bundle;
}

struct BundleDocuments {
  std::string schemas;
  std::string measurements;
  std::string contexts;
};

inline BundleDocuments serialize_bundle(const SchemaBundle& bundle) {
  nlohmann::ordered_json schemas = nlohmann::ordered_json::array();
  for (const auto& s : bundle.schemas) {
    schemas.push_back({{"schema_id", s.schema_id},
                       {"template", s.template_text},
                       {"scoring_type", to_string(s.scoring_type)},
                       {"applicable_items", s.applicable_items},
                       {"test", to_string(s.test)},
                       {"claim", to_string(s.claim)}});
  }
  nlohmann::ordered_json measurements = nlohmann::ordered_json::array();
  for (const auto& m : bundle.measurements) {
    measurements.push_back({{"measurement_id", m.measurement_id},
                            {"surface_form", m.surface_form},
                            {"unit", m.unit},
                            {"column", m.column},
                            {"tolerance_tau", m.tolerance_tau},
                            {"expected_rate_F_exp", m.expected_rate},
                            {"decimals", m.decimals}});
  }
  nlohmann::ordered_json contexts = nlohmann::ordered_json::array();
  for (const auto& c : bundle.contexts) {
    contexts.push_back({{"context_id", c.context_id},
                        {"surface_form", c.surface_form},
                        {"filter", c.filter.source},
                        {"pair_id", c.pair_id},
                        {"tense", to_string(c.tense)}});
  }
  return {schemas.dump(2) + "\n", measurements.dump(2) + "\n", contexts.dump(2) + "\n"};
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw RuntimeError("write failed for '" + path.string() + "'");
}

}  // namespace detail

inline SchemaBundle load_bundle(const std::filesystem::path& dir) {
  return parse_bundle(detail::read_file(dir / "schemas.json"), detail::read_file(dir / "measurements.json"),
                      detail::read_file(dir / "contexts.json"));
}

inline void write_bundle(const SchemaBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto docs = serialize_bundle(bundle);
  detail::write_file(dir / "schemas.json", docs.schemas);
  detail::write_file(dir / "measurements.json", docs.measurements);
  detail::write_file(dir / "contexts.json", docs.contexts);
}

// ---------------------------------------------------------------------------
// enumeration

/// One candidate per (schema, applicable measurement, ordered pair of
/// distinct contexts sharing a pair_id), sorted by candidate_id.
inline std::vector<CandidateSpec> enumerate_candidates(const SchemaBundle& bundle) {
  std::map<std::string, std::vector<const ContextDef*>> pairs;
  for (const auto& c : bundle.contexts) pairs[c.pair_id].push_back(&c);

  std::vector<CandidateSpec> out;
  for (const auto& schema : bundle.schemas) {
    for (const auto& measurement : schema.applicable_items) {
      for (const auto& [pair_id, members] : pairs) {
        for (const ContextDef* c1 : members) {
          for (const ContextDef* c2 : members) {
            if (c1 == c2) continue;
            out.push_back({make_candidate_id(schema.schema_id, measurement, c1->context_id, c2->context_id),
                           schema.schema_id, measurement, c1->context_id, c2->context_id});
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const CandidateSpec& a, const CandidateSpec& b) {
    return std::tie(a.candidate_id, a.schema_id, a.measurement_id, a.context1_id, a.context2_id) <
           std::tie(b.candidate_id, b.schema_id, b.measurement_id, b.context1_id, b.context2_id);
  });
  return out;
}

/// Past if either context is in the past.
inline Tense candidate_tense(const SchemaBundle& bundle, const CandidateSpec& c) {
  return bundle.context(c.context1_id).tense == Tense::kPast || bundle.context(c.context2_id).tense == Tense::kPast
             ? Tense::kPast
             : Tense::kPresent;
}

}  // namespace insightgen
