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


#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "insightgen/features.hpp"
#include "insightgen/random.hpp"
#include "insightgen/synthetic.hpp"
#include "test_support.hpp"

namespace ig = insightgen;
using ig::testing::make_context;
using ig::testing::make_measurement;
using ig::testing::make_schema;

namespace {

ig::SchemaBundle tiny_bundle() {
  ig::SchemaBundle b;
  b.measurements = {make_measurement("m1", "x")};
  b.contexts = {make_context("c1", "a == 1", "p"), make_context("c2", "a == 2", "p")};
  b.schemas = {make_schema("s1", {"m1"})};
  return b;
}

TEST(Vocabulary, TinyBundle) {
  const auto v = ig::build_vocabulary(tiny_bundle());
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"context:c1", "context:c2", "measurement:m1", "schema:s1"}));
  EXPECT_EQ(ig::build_vocabulary(tiny_bundle(), false).size(), 3u);
  EXPECT_NE(v.fingerprint(), ig::build_vocabulary(tiny_bundle(), false).fingerprint());
  const auto back = ig::Vocabulary::from_json(v.to_json());
  EXPECT_EQ(back.tokens(), v.tokens());
  EXPECT_EQ(back.fingerprint(), v.fingerprint());
}

TEST(Vocabulary, SyntheticSizeAndReserialization) {
  const auto b = ig::generate_synthetic({}).bundle;
  const auto v = ig::build_vocabulary(b);
  EXPECT_EQ(v.size(), b.contexts.size() + b.measurements.size() + b.schemas.size());
  const auto docs = ig::serialize_bundle(b);
  const auto v2 = ig::build_vocabulary(ig::parse_bundle(docs.schemas, docs.measurements, docs.contexts));
  EXPECT_EQ(v2.tokens(), v.tokens());
  EXPECT_EQ(v2.fingerprint(), v.fingerprint());
}

TEST(Featurize, BoswAndHamming) {
  auto b = tiny_bundle();
  b.measurements.push_back(make_measurement("m2", "y"));
  b.schemas[0].applicable_items.push_back("m2");
  const auto v = ig::build_vocabulary(b);
  const ig::Standardization z;
  const ig::CandidateSpec c{"id", "s1", "m1", "c1", "c2"};
  const auto fv = ig::featurize(c, 1.0, 2.0, -1.0, 0.5, v, z);
  EXPECT_EQ(fv.bosw, (std::vector<double>{1, 1, 1, 0, 1}));
  EXPECT_EQ(fv.delta_norm, -2.0);
  const auto other = ig::featurize({"id2", "s1", "m2", "c1", "c2"}, 1.0, 2.0, 0.0, 1.0, v, z);
  EXPECT_EQ(ig::squared_distance(fv.bosw, other.bosw), 2.0);

  const auto swapped = ig::featurize({"id3", "s1", "m1", "c2", "c1"}, 2.0, 1.0, 1.0, 0.5, v, z);
  EXPECT_EQ(swapped.bosw, fv.bosw);
  EXPECT_EQ(swapped.mean1, fv.mean2);
  EXPECT_EQ(swapped.mean2, fv.mean1);
  EXPECT_EQ(swapped.context1_index, fv.context2_index);
}

TEST(Standardization, IndependentZScores) {
  ig::Rng rng(1);
  std::vector<ig::MeanObservation> obs;
  std::vector<double> xs;
  for (int i = 0; i < 40; ++i) {
    const double x = ig::uniform(rng, 10, 20);
    xs.push_back(x);
    obs.push_back({"m1", x});
    obs.push_back({"m2", 3.0});
  }
  const auto z = ig::compute_standardization(obs);
  double mu = 0.0;
  for (double x : xs) mu += x;
  mu /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mu) * (x - mu);
  const double sd = std::sqrt(var / xs.size());
  for (double x : {10.0, 15.0, 19.5}) EXPECT_NEAR(z.apply("m1", x), (x - mu) / sd, 1e-12);
  EXPECT_EQ(z.apply("m2", 3.0), 0.0);  // zero spread falls back to unit scale
  EXPECT_EQ(ig::Standardization::from_json(z.to_json()), z);
}

// ---------------------------------------------------------------------------
// PCA

std::vector<std::vector<double>> random_binary(ig::Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> m(n, std::vector<double>(d));
  for (auto& row : m) {
    for (auto& x : row) x = ig::uniform01(rng) < 0.4 ? 1.0 : 0.0;
  }
  return m;
}

TEST(Pca, Collinear) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({static_cast<double>(i), 2.0 * i, 0.0});
  const auto r = ig::pca_project(pts);
  EXPECT_NEAR(r.explained_variance_ratio[0], 1.0, 1e-12);
  EXPECT_NEAR(r.explained_variance_ratio[1], 0.0, 1e-12);
}

TEST(PcaProperty, OrthonormalOrderedCentred) {
  ig::Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_binary(rng, 20, 10);
    const auto r = ig::pca_project(m);
    double dot = 0.0, n0 = 0.0, n1 = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      dot += r.components[0][i] * r.components[1][i];
      n0 += r.components[0][i] * r.components[0][i];
      n1 += r.components[1][i] * r.components[1][i];
    }
    EXPECT_NEAR(dot, 0.0, 1e-9);
    EXPECT_NEAR(n0, 1.0, 1e-9);
    EXPECT_NEAR(n1, 1.0, 1e-9);
    EXPECT_GE(r.explained_variance_ratio[0], r.explained_variance_ratio[1]);
    double sx = 0.0, sy = 0.0;
    for (const auto& p : r.points) {
      sx += p[0];
      sy += p[1];
    }
    EXPECT_NEAR(sx, 0.0, 1e-9);  // the mean vector projects to the origin
    EXPECT_NEAR(sy, 0.0, 1e-9);
  }
}

TEST(Pca, MatchesDenseEigensolverUpToSign) {
  ig::Rng rng(23);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_binary(rng, 20, 10);
    const auto r = ig::pca_project(m);

    Eigen::MatrixXd x(20, 10);
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 10; ++j) x(i, j) = m[i][j];
    }
    const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
    const Eigen::MatrixXd cov = centred.transpose() * centred / 19.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // Eigen sorts ascending; skip trials whose top eigenvalues are degenerate.
    const auto& ev = es.eigenvalues();
    if (ev(9) - ev(8) < 1e-6 || ev(8) - ev(7) < 1e-6) continue;
    ++checked;
    for (int k = 0; k < 2; ++k) {
      const Eigen::VectorXd v = es.eigenvectors().col(9 - k);
      const Eigen::VectorXd proj = centred * v;
      double same = 0.0, flipped = 0.0;
      for (int i = 0; i < 20; ++i) {
        same = std::max(same, std::abs(proj(i) - r.points[i][k]));
        flipped = std::max(flipped, std::abs(proj(i) + r.points[i][k]));
      }
      EXPECT_LT(std::min(same, flipped), 1e-6) << "trial " << trial << " component " << k;
    }
  }
  EXPECT_GE(checked, 18);
}

TEST(Pca, Errors) {
  std::vector<std::vector<double>> one{{1.0, 0.0}};
  EXPECT_THROW(ig::pca_project(one), ig::InputError);
  std::vector<std::vector<double>> ragged{{1.0, 0.0}, {1.0}};
  EXPECT_THROW(ig::pca_project(ragged), ig::InputError);
}

}  // namespace
