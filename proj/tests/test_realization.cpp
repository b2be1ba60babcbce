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


#include <regex>
#include <string>

#include <gtest/gtest.h>

#include "insightgen/random.hpp"
#include "insightgen/realization.hpp"

namespace ig = insightgen;

namespace {

TEST(Conjugate, IrregularAndRegular) {
  EXPECT_EQ(ig::conjugate({"be", 3, ig::Tense::kPresent}), "is");
  EXPECT_EQ(ig::conjugate({"be", 3, ig::Tense::kPast}), "was");
  EXPECT_EQ(ig::conjugate({"be", 2, ig::Tense::kPresent}), "are");
  EXPECT_EQ(ig::conjugate({"be", 2, ig::Tense::kPast}), "were");
  EXPECT_EQ(ig::conjugate({"sleep", 2, ig::Tense::kPresent}), "sleep");
  EXPECT_EQ(ig::conjugate({"sleep", 3, ig::Tense::kPresent}), "sleeps");
  EXPECT_EQ(ig::conjugate({"sleep", 2, ig::Tense::kPast}), "slept");
  EXPECT_EQ(ig::conjugate({"have", 3, ig::Tense::kPresent}), "has");
  EXPECT_EQ(ig::conjugate({"increase", 3, ig::Tense::kPast}), "increased");
  EXPECT_EQ(ig::conjugate({"vary", 3, ig::Tense::kPresent}), "varies");
  EXPECT_EQ(ig::conjugate({"vary", 3, ig::Tense::kPast}), "varied");
  EXPECT_EQ(ig::conjugate({"reach", 3, ig::Tense::kPresent}), "reaches");
  EXPECT_EQ(ig::conjugate({"stop", 3, ig::Tense::kPast}), "stopped");
  EXPECT_EQ(ig::conjugate({"play", 3, ig::Tense::kPresent}), "plays");
}

TEST(ConjugateProperty, RegularPresentEndsInSIffThirdPerson) {
  for (const char* lemma : {"walk", "rank", "drop", "rise", "climb", "exceed", "grow", "lag", "match", "fall"}) {
    EXPECT_EQ(ig::conjugate({lemma, 3, ig::Tense::kPresent}).back(), 's') << lemma;
    EXPECT_NE(ig::conjugate({lemma, 2, ig::Tense::kPresent}).back(), 's') << lemma;
  }
}

TEST(Numbers, PercentDiff) {
  EXPECT_EQ(ig::percent_diff(10.03, 10.44), 3.93);
  EXPECT_EQ(ig::format_fixed(ig::percent_diff(10.03, 10.44), 2), "3.93");
  EXPECT_EQ(ig::format_fixed(ig::percent_diff(9.56, 11.05), 2), "13.48");
  EXPECT_EQ(ig::format_fixed(ig::percent_diff(5, 10), 2), "50.00");
  EXPECT_EQ(ig::format_fixed(ig::percent_diff(7, 7), 2), "0.00");
  EXPECT_THROW(ig::percent_diff(1, 0), ig::InputError);
}

TEST(Numbers, HalfEven) {
  EXPECT_EQ(ig::format_fixed(0.125, 2), "0.12");
  EXPECT_EQ(ig::format_fixed(0.375, 2), "0.38");
  EXPECT_EQ(ig::format_fixed(2.5, 0), "2");
  EXPECT_EQ(ig::format_fixed(-0.001, 2), "0.00");
}

TEST(Realize, FigureFragment) {
  const ig::RealizationBinding b{{"measurement", std::string("the requested dose")},
                                 {"comparison", std::string("greater than")}};
  const char* tpl = "{measurement} {tense(be,3)} {comparison}";
  EXPECT_EQ(ig::realize(tpl, b, ig::Tense::kPresent, ig::Capitalization::kNone), "the requested dose is greater than");
  EXPECT_EQ(ig::realize(tpl, b, ig::Tense::kPast, ig::Capitalization::kNone), "the requested dose was greater than");
  EXPECT_EQ(ig::realize("{measurement} {tense(be)} {comparison}", b, ig::Tense::kPresent, ig::Capitalization::kNone),
            "the requested dose is greater than");
  EXPECT_EQ(ig::realize(tpl, b, ig::Tense::kPresent), "The requested dose is greater than");
}

TEST(Realize, TableStyleSentence) {
  const ig::RealizationBinding b{
      {"context:1", std::string("on Mondays")},
      {"context:2", std::string("on other days")},
      {"measurement", std::string("the exam duration")},
      {"mean:1", ig::Quantity{10.03, 2, " minutes", true}},
      {"mean:2", ig::Quantity{10.44, 2, " minutes", true}},
      {"percent", ig::Quantity{ig::percent_diff(10.03, 10.44), 2, "%", false}},
  };
  const auto s = ig::realize("{context:1}  {measurement} {mean:1} {tense(be,3)} {percent} lower than {context:2} {mean:2}",
                             b, ig::Tense::kPresent);
  EXPECT_EQ(s, "On Mondays the exam duration (10.03 minutes) is 3.93% lower than on other days (10.44 minutes)");
}

TEST(Realize, Errors) {
  EXPECT_THROW(ig::realize("{missing}", {}, ig::Tense::kPresent), ig::InputError);
  for (const char* bad : {"{", "}", "{}", "{a{b}}", "{tense(be,4)}", "{tense()}", "{tense(Be)}", "{a b}"}) {
    EXPECT_THROW(ig::parse_template(bad), ig::ParseError) << bad;
  }
}

TEST(RealizeProperty, TotalAndNumbersRoundTrip) {
  ig::Rng rng(9);
  const std::regex number(R"(-?\d+\.\d+)");
  for (int trial = 0; trial < 300; ++trial) {
    const int dec = static_cast<int>(ig::uniform_index(rng, 4)) + 1;
    const double m1 = ig::uniform(rng, -1000, 1000), m2 = ig::uniform(rng, 0.5, 1000);
    const ig::RealizationBinding b{{"measurement", std::string("x")},
                                   {"context:1", std::string("here")},
                                   {"context:2", std::string("there")},
                                   {"mean:1", ig::Quantity{m1, dec, " u", true}},
                                   {"mean:2", ig::Quantity{m2, dec, " u", true}},
                                   {"percent", ig::Quantity{ig::percent_diff(m1, m2), 2, "%", false}}};
    const auto s = ig::realize("{context:1} {measurement} {mean:1} {tense(be,3)} {percent} off {context:2} {mean:2}", b,
                               trial % 2 ? ig::Tense::kPast : ig::Tense::kPresent);
    EXPECT_EQ(s.find_first_of("{}"), std::string::npos);
    std::vector<double> found;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
      found.push_back(std::stod(it->str()));
    }
    ASSERT_EQ(found.size(), 3u) << s;
    EXPECT_EQ(found[0], ig::round_half_even(m1, dec)) << s;
    EXPECT_EQ(found[1], ig::percent_diff(m1, m2)) << s;
    EXPECT_EQ(found[2], ig::round_half_even(m2, dec)) << s;
  }
}

}  // namespace
