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


#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "insightgen/schema.hpp"
#include "insightgen/synthetic.hpp"
#include "test_support.hpp"

namespace ig = insightgen;
using ig::testing::make_context;
using ig::testing::make_measurement;
using ig::testing::make_schema;

namespace {

const char* kMinimalSchemas = R"([{
  "schema_id": "age_compare",
  "template": "{context:1} {measurement} {mean:1} {tense(be)} {comparison} {context:2} {mean:2}",
  "scoring_type": "distribution_compare",
  "applicable_items": ["requested_dose"]
}])";
const char* kMinimalMeasurements = R"([{
  "measurement_id": "requested_dose", "surface_form": "the requested dose", "unit": "mGy",
  "column": "dose", "tolerance_tau": 0.5, "expected_rate_F_exp": 2.0
}])";
const char* kMinimalContexts = R"([
  {"context_id": "age_split_young", "surface_form": "in patients younger than 30 years",
   "filter": "age < 30", "pair_id": "age_split"},
  {"context_id": "age_split_mid", "surface_form": "in patients of age 30 to 50",
   "filter": "age >= 30 and age <= 50", "pair_id": "age_split", "tense": "past"}
])";

TEST(Bundle, MinimalParses) {
  const auto b = ig::parse_bundle(kMinimalSchemas, kMinimalMeasurements, kMinimalContexts);
  EXPECT_EQ(b.schemas.size(), 1u);
  EXPECT_EQ(b.measurements.size(), 1u);
  EXPECT_EQ(b.contexts.size(), 2u);
  EXPECT_EQ(b.schemas[0].test, ig::TestMethod::kMannWhitneyU);
  EXPECT_EQ(b.schemas[0].claim, ig::Claim::kGreater);
  EXPECT_EQ(b.contexts[1].tense, ig::Tense::kPast);
  EXPECT_EQ(b.measurements[0].decimals, 2);
  std::set<std::string> placeholders;
  for (const auto& p : ig::parse_template(b.schemas[0].template_text)) {
    if (p.kind == ig::TemplatePiece::Kind::kPlaceholder) placeholders.insert(p.text);
  }
  EXPECT_TRUE(placeholders.count("mean:1"));
  EXPECT_TRUE(placeholders.count("mean:2"));
}

TEST(Bundle, DanglingApplicableItem) {
  std::string schemas = kMinimalSchemas;
  schemas.replace(schemas.find("[\"requested_dose\"]"), 18, "[\"missing_item\"]");
  try {
    ig::parse_bundle(schemas, kMinimalMeasurements, kMinimalContexts);
    FAIL();
  } catch (const ig::ReferenceError& e) {
    EXPECT_EQ(e.missing_id(), "missing_item");
  }
}

TEST(Bundle, ValidationErrors) {
  auto base = ig::parse_bundle(kMinimalSchemas, kMinimalMeasurements, kMinimalContexts);
  auto expect_invalid = [&](auto mutate) {
    auto b = base;
    mutate(b);
    EXPECT_THROW(ig::validate_bundle(b), ig::InputError);
  };
  expect_invalid([](ig::SchemaBundle& b) { b.measurements[0].tolerance_tau = 0.0; });
  expect_invalid([](ig::SchemaBundle& b) { b.measurements[0].expected_rate = -1.0; });
  expect_invalid([](ig::SchemaBundle& b) { b.contexts.pop_back(); });
  expect_invalid([](ig::SchemaBundle& b) { b.contexts[1].context_id = b.contexts[0].context_id; });
  expect_invalid([](ig::SchemaBundle& b) { b.schemas[0].template_text = "{context:1} {context:2}"; });
  expect_invalid([](ig::SchemaBundle& b) { b.schemas[0].template_text += " {bogus}"; });
  expect_invalid([](ig::SchemaBundle& b) { b.schemas[0].template_text += " {unclosed"; });
  expect_invalid([](ig::SchemaBundle& b) { b.schemas[0].test = ig::TestMethod::kBinomialExact; });
  expect_invalid([](ig::SchemaBundle& b) { b.schemas[0].applicable_items.push_back("requested_dose"); });
  expect_invalid([](ig::SchemaBundle& b) { b.schemas.push_back(b.schemas[0]); });
}

TEST(Bundle, SyntaxErrorCarriesPosition) {
  try {
    ig::parse_bundle("[{\"schema_id\": }]", kMinimalMeasurements, kMinimalContexts);
    FAIL();
  } catch (const ig::ParseError& e) {
    EXPECT_GT(e.position(), 0u);
  }
  EXPECT_THROW(ig::parse_bundle("{}", kMinimalMeasurements, kMinimalContexts), ig::InputError);
  std::string contexts = kMinimalContexts;
  contexts.replace(contexts.find("age < 30"), 8, "age <> 30");
  EXPECT_THROW(ig::parse_bundle(kMinimalSchemas, kMinimalMeasurements, contexts), ig::ParseError);
}

TEST(BundleProperty, RoundTripIdentity) {
  const auto b = ig::generate_synthetic({}).bundle;
  const auto docs = ig::serialize_bundle(b);
  const auto again = ig::parse_bundle(docs.schemas, docs.measurements, docs.contexts);
  EXPECT_EQ(again, b);
  const auto docs2 = ig::serialize_bundle(again);
  EXPECT_EQ(docs2.schemas, docs.schemas);
  EXPECT_EQ(docs2.contexts, docs.contexts);

  ig::testing::TempDir dir;
  ig::write_bundle(b, dir.path());
  EXPECT_EQ(ig::load_bundle(dir.path()), b);
}

TEST(Candidates, CartesianCounts) {
  ig::SchemaBundle b;
  b.measurements = {make_measurement("m1", "x"), make_measurement("m2", "y")};
  b.contexts = {make_context("c1", "a == 1", "p"), make_context("c2", "a == 2", "p"),
                make_context("c3", "a == 3", "p")};
  b.schemas = {make_schema("s", {"m1", "m2"})};
  ig::validate_bundle(b);
  EXPECT_EQ(ig::enumerate_candidates(b).size(), 12u);

  ig::SchemaBundle small;
  small.measurements = {make_measurement("m1", "x")};
  small.contexts = {make_context("c1", "a == 1", "p"), make_context("c2", "a == 2", "p")};
  small.schemas = {make_schema("s", {"m1"})};
  const auto cands = ig::enumerate_candidates(small);
  ASSERT_EQ(cands.size(), 2u);
  EXPECT_EQ(cands[0].context1_id, cands[1].context2_id);
  EXPECT_EQ(cands[0].context2_id, cands[1].context1_id);
}

TEST(CandidatesProperty, SyntheticBundleMatchesClosedFormAndBruteForce) {
  for (const std::size_t m : {1u, 4u, 10u, 13u}) {
    ig::SynthConfig cfg;
    cfg.measurements = m;
    const auto b = ig::generate_synthetic(cfg).bundle;
    const auto cands = ig::enumerate_candidates(b);

    // Closed form: sum over schemas and pair groups of |items| * |pair| * (|pair| - 1).
    std::map<std::string, std::size_t> pair_sizes;
    for (const auto& c : b.contexts) ++pair_sizes[c.pair_id];
    std::size_t closed = 0;
    for (const auto& s : b.schemas) {
      for (const auto& [pair, size] : pair_sizes) closed += s.applicable_items.size() * size * (size - 1);
    }
    EXPECT_EQ(cands.size(), closed);
    EXPECT_EQ(closed, b.schemas.size() * m * (7 * 6 + 3 * 4 * 3));

    // Brute force over every (schema, item, context, context) tuple.
    std::set<std::string> brute;
    for (const auto& s : b.schemas) {
      for (const auto& item : s.applicable_items) {
        for (const auto& c1 : b.contexts) {
          for (const auto& c2 : b.contexts) {
            if (c1.context_id != c2.context_id && c1.pair_id == c2.pair_id) {
              brute.insert(ig::make_candidate_id(s.schema_id, item, c1.context_id, c2.context_id));
            }
          }
        }
      }
    }
    std::set<std::string> got;
    for (const auto& c : cands) got.insert(c.candidate_id);
    EXPECT_EQ(got, brute);
    EXPECT_TRUE(std::is_sorted(cands.begin(), cands.end(),
                               [](const auto& x, const auto& y) { return x.candidate_id < y.candidate_id; }));
    EXPECT_EQ(ig::enumerate_candidates(b), cands);
  }
}

TEST(Candidates, TenseFollowsContexts) {
  const auto b = ig::parse_bundle(kMinimalSchemas, kMinimalMeasurements, kMinimalContexts);
  for (const auto& c : ig::enumerate_candidates(b)) EXPECT_EQ(ig::candidate_tense(b, c), ig::Tense::kPast);
}

}  // namespace
