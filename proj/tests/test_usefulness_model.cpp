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


#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "insightgen/random.hpp"
#include "insightgen/usefulness_model.hpp"

namespace ig = insightgen;

namespace {

std::vector<ig::TrainingExample> random_batch(ig::Rng& rng, std::size_t n, std::size_t contexts,
                                              std::size_t measurements) {
  std::vector<ig::TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    ig::ModelInput x{ig::uniform_index(rng, contexts), ig::uniform_index(rng, contexts),
                     ig::uniform_index(rng, measurements), ig::standard_normal(rng), ig::standard_normal(rng),
                     ig::uniform(rng, -3, 3)};
    out.push_back({x, 0.25 * static_cast<double>(ig::uniform_index(rng, 5))});
  }
  return out;
}

TEST(UsefulnessModel, GradientMatchesCentralDifferences) {
  ig::Rng rng(2026);
  ig::UsefulnessModel model(6, 4);
  model.initialize(12345);
  // Larger weights so every tanh unit is away from its linear regime.
  for (auto& p : model.parameters()) p *= 5.0;
  const auto batch = random_batch(rng, 5, 6, 4);

  std::vector<double> grad(model.parameters().size(), 0.0);
  model.loss_and_gradient(batch, grad);
  const double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    auto params = model.parameters();
    const double saved = params[i];
    params[i] = saved + eps;
    const double up = model.mean_squared_error(batch);
    params[i] = saved - eps;
    const double down = model.mean_squared_error(batch);
    params[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    const double scale = std::max(std::abs(numeric), std::abs(grad[i]));
    // Parameters with no influence on this batch (unused one-hot columns) have
    // both gradients at round-off level.
    const double rel = scale < 1e-10 ? 0.0 : std::abs(numeric - grad[i]) / scale;
    worst = std::max(worst, rel);
    EXPECT_LT(rel, 1e-4) << "parameter " << i << " analytic " << grad[i] << " numeric " << numeric;
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(UsefulnessModel, ParameterLayout) {
  ig::UsefulnessModel m(3, 2);
  EXPECT_EQ(m.parameters().size(), ig::UsefulnessModel::parameter_count(3, 2));
  EXPECT_EQ(m.out_b() + 1, m.parameters().size());
  EXPECT_EQ(m.tower_b(), 16u * 4u);
}

TEST(UsefulnessModel, ZeroEpochsKeepsInitialization) {
  ig::Rng rng(1);
  const auto data = random_batch(rng, 20, 4, 2);
  ig::TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 9;
  const auto model = ig::train_usefulness_model(data, 4, 2, cfg);
  ig::UsefulnessModel init(4, 2);
  init.initialize(ig::derive_seed(9, 1));
  EXPECT_TRUE(std::equal(model.parameters().begin(), model.parameters().end(), init.parameters().begin()));
  for (const auto& ex : data) {
    const double y = model.predict(ex.input);
    EXPECT_GT(y, 0.0);
    EXPECT_LT(y, 1.0);
  }
}

TEST(UsefulnessModel, LearnsConstantLabel) {
  ig::Rng rng(2);
  auto data = random_batch(rng, 40, 5, 3);
  for (auto& ex : data) ex.label = 1.0;
  ig::TrainConfig cfg;
  cfg.seed = 3;
  const auto model = ig::train_usefulness_model(data, 5, 3, cfg);
  double mean = 0.0;
  for (const auto& ex : data) mean += model.predict(ex.input);
  EXPECT_GE(mean / data.size(), 0.9);
}

TEST(UsefulnessModel, DeterministicAndBounded) {
  ig::Rng rng(4);
  const auto data = random_batch(rng, 30, 5, 3);
  ig::TrainConfig cfg;
  cfg.seed = 77;
  cfg.epochs = 20;
  const auto a = ig::train_usefulness_model(data, 5, 3, cfg);
  const auto b = ig::train_usefulness_model(data, 5, 3, cfg);
  EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
  const ig::ModelInput extreme{0, 4, 2, 1e6, -1e6, 1e9};
  EXPECT_EQ(a.predict(data[0].input), a.predict(data[0].input));
  EXPECT_GT(a.predict(extreme), 0.0);
  EXPECT_LT(a.predict(extreme), 1.0);
  EXPECT_THROW(a.predict({5, 0, 0, 0, 0, 0}), ig::InputError);
}

TEST(UsefulnessModel, JsonRoundTrip) {
  ig::Rng rng(5);
  const auto data = random_batch(rng, 10, 3, 2);
  ig::TrainConfig cfg;
  cfg.epochs = 5;
  auto m = ig::train_usefulness_model(data, 3, 2, cfg);
  m.vocabulary_fingerprint = "abc";
  const auto back = ig::UsefulnessModel::from_json(m.to_json());
  EXPECT_TRUE(std::equal(m.parameters().begin(), m.parameters().end(), back.parameters().begin()));
  EXPECT_EQ(back.vocabulary_fingerprint, "abc");
  EXPECT_EQ(back.predict(data[0].input), m.predict(data[0].input));
  auto broken = m.to_json();
  broken["format"] = "something-else";
  EXPECT_THROW(ig::UsefulnessModel::from_json(broken), ig::InputError);
}

TEST(UsefulnessModelProperty, LossNonIncreasingAtSmallLearningRate) {
  // Disliked context 0 gets 0.25, everything else 0.75.
  ig::Rng rng(6);
  auto data = random_batch(rng, 120, 8, 4);
  for (auto& ex : data) ex.label = (ex.input.context1 == 0 || ex.input.context2 == 0) ? 0.25 : 0.75;
  ig::TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 100;
  ig::TrainingReport report;
  ig::train_usefulness_model(data, 8, 4, cfg, &report);
  ASSERT_EQ(report.epoch_mse.size(), 101u);
  const double initial = report.epoch_mse.front();
  for (std::size_t e = 1; e < report.epoch_mse.size(); ++e) {
    EXPECT_LE(report.epoch_mse[e] - report.epoch_mse[e - 1], 0.01 * initial) << "epoch " << e;
  }
  EXPECT_LT(report.final_mse, initial);
}

TEST(TrainConfig, Validation) {
  ig::TrainConfig cfg;
  cfg.learning_rate = 0;
  EXPECT_THROW(cfg.validate(), ig::InputError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ig::InputError);
  std::vector<ig::TrainingExample> empty;
  EXPECT_THROW(ig::train_usefulness_model(empty, 2, 2, {}), ig::InputError);
}

}  // namespace
