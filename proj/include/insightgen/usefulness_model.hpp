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

// Twin-tower usefulness network.
//
//   tower(x)  = tanh(Wt x + bt),  x = [one-hot context (C); standardized mean]
//   head      = tanh(Wh [tower(x1); tower(x2); one-hot measurement (M); delta/tau] + bh)
//   output    = sigmoid(wo . head + bo)
//
// Both towers share Wt and bt. Trained with mini-batch gradient descent on
// mean squared error against labels in [0, 1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightgen/error.hpp"
#include "insightgen/features.hpp"
#include "insightgen/random.hpp"

namespace insightgen {

/// Model input for one insight.
struct ModelInput {
  std::size_t context1 = 0;
  std::size_t context2 = 0;
  std::size_t measurement = 0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  double delta_norm = 0.0;

  static ModelInput from(const FeatureVector& fv) {
    return {fv.context1_index, fv.context2_index, fv.measurement_index, fv.mean1, fv.mean2, fv.delta_norm};
  }
};

struct TrainingExample {
  ModelInput input;
  double label = 0.0;
};

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  std::size_t batch_size = 16;

  void validate() const {
    if (epochs < 0) throw InputError("train: epochs must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InputError("train: learning_rate must be > 0");
    if (batch_size == 0) throw InputError("train: batch_size must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"epochs", epochs}, {"learning_rate", learning_rate}, {"seed", seed}, {"batch_size", batch_size}};
  }
};

class UsefulnessModel {
 public:
  static constexpr std::size_t kHidden = 16;

  UsefulnessModel() = default;
  UsefulnessModel(std::size_t contexts, std::size_t measurements)
      : contexts_(contexts), measurements_(measurements), params_(parameter_count(contexts, measurements), 0.0) {}

  static std::size_t parameter_count(std::size_t contexts, std::size_t measurements) {
    const std::size_t tower_in = contexts + 1;
    const std::size_t head_in = 2 * kHidden + measurements + 1;
    return kHidden * tower_in + kHidden + kHidden * head_in + kHidden + kHidden + 1;
  }

  std::size_t contexts() const { return contexts_; }
  std::size_t measurements() const { return measurements_; }
  std::size_t tower_inputs() const { return contexts_ + 1; }
  std::size_t head_inputs() const { return 2 * kHidden + measurements_ + 1; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // Parameter layout: tower_w | tower_b | head_w | head_b | out_w | out_b
  std::size_t tower_w() const { return 0; }
  std::size_t tower_b() const { return tower_w() + kHidden * tower_inputs(); }
  std::size_t head_w() const { return tower_b() + kHidden; }
  std::size_t head_b() const { return head_w() + kHidden * head_inputs(); }
  std::size_t out_w() const { return head_b() + kHidden; }
  std::size_t out_b() const { return out_w() + kHidden; }

  void initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& p : params_) p = uniform(rng, -0.1, 0.1);
  }

  double predict(const ModelInput& x) const {
    Activations act;
    return forward(x, act);
  }

  /// Mean squared error over `batch`; adds dLoss/dparam into `grad` if non-empty.
  double loss_and_gradient(std::span<const TrainingExample> batch, std::span<double> grad) const {
    if (batch.empty()) return 0.0;
    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    Activations act;
    std::vector<double> dz(head_inputs());
    for (const auto& ex : batch) {
      check_input(ex.input);
      const double y = forward(ex.input, act);
      const double err = y - ex.label;
      loss += err * err * scale;
      if (grad.empty()) continue;

      const double d_out = 2.0 * err * scale * y * (1.0 - y);
      for (std::size_t h = 0; h < kHidden; ++h) grad[out_w() + h] += d_out * act.head[h];
      grad[out_b()] += d_out;

      std::fill(dz.begin(), dz.end(), 0.0);
      for (std::size_t h = 0; h < kHidden; ++h) {
        const double da = d_out * params_[out_w() + h] * (1.0 - act.head[h] * act.head[h]);
        const std::size_t row = head_w() + h * head_inputs();
        for (std::size_t j = 0; j < head_inputs(); ++j) {
          grad[row + j] += da * act.z[j];
          dz[j] += da * params_[row + j];
        }
        grad[head_b() + h] += da;
      }
      tower_backward(ex.input.context1, ex.input.mean1, act.tower1, std::span<const double>(dz).subspan(0, kHidden), grad);
      tower_backward(ex.input.context2, ex.input.mean2, act.tower2, std::span<const double>(dz).subspan(kHidden, kHidden),
                     grad);
    }
    return loss;
  }

  double mean_squared_error(std::span<const TrainingExample> data) const { return loss_and_gradient(data, {}); }

  // serialization -----------------------------------------------------------

  std::string vocabulary_fingerprint;
  Standardization standardization;
  TrainConfig config;
  double final_mse = 0.0;

  nlohmann::json to_json() const {
    auto slice = [&](std::size_t from, std::size_t to) {
      return std::vector<double>(params_.begin() + static_cast<std::ptrdiff_t>(from),
                                 params_.begin() + static_cast<std::ptrdiff_t>(to));
    };
    return {{"format", "insightgen.usefulness_model"},
            {"version", 1},
            {"architecture",
             {{"contexts", contexts_}, {"measurements", measurements_}, {"hidden", kHidden},
              {"tower_inputs", tower_inputs()}, {"head_inputs", head_inputs()}}},
            {"weights",
             {{"tower_w", slice(tower_w(), tower_b())},
              {"tower_b", slice(tower_b(), head_w())},
              {"head_w", slice(head_w(), head_b())},
              {"head_b", slice(head_b(), out_w())},
              {"out_w", slice(out_w(), out_b())},
              {"out_b", slice(out_b(), params_.size())}}},
            {"standardization", standardization.to_json()},
            {"vocabulary_fingerprint", vocabulary_fingerprint},
            {"seed", config.seed},
            {"config", config.to_json()},
            {"final_mse", final_mse}};
  }

  static UsefulnessModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format").get<std::string>() != "insightgen.usefulness_model" || j.at("version").get<int>() != 1) {
        throw InputError("model: unsupported format or version");
      }
      const auto& arch = j.at("architecture");
      if (arch.at("hidden").get<std::size_t>() != kHidden) throw InputError("model: hidden size mismatch");
      UsefulnessModel m(arch.at("contexts").get<std::size_t>(), arch.at("measurements").get<std::size_t>());
      const auto& w = j.at("weights");
      std::size_t pos = 0;
      for (const char* key : {"tower_w", "tower_b", "head_w", "head_b", "out_w", "out_b"}) {
        for (double v : w.at(key).get<std::vector<double>>()) {
          if (pos >= m.params_.size()) throw InputError("model: too many weights");
          m.params_[pos++] = v;
        }
      }
      if (pos != m.params_.size()) throw InputError("model: weight count does not match architecture");
      m.standardization = Standardization::from_json(j.at("standardization"));
      m.vocabulary_fingerprint = j.at("vocabulary_fingerprint").get<std::string>();
      const auto& c = j.at("config");
      m.config.epochs = c.at("epochs").get<int>();
      m.config.learning_rate = c.at("learning_rate").get<double>();
      m.config.seed = c.at("seed").get<std::uint64_t>();
      m.config.batch_size = c.at("batch_size").get<std::size_t>();
      m.final_mse = j.value("final_mse", 0.0);
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("model: malformed JSON (") + e.what() + ")");
    }
  }

 private:
  struct Activations {
    std::vector<double> tower1, tower2, z, head;
  };

  void check_input(const ModelInput& x) const {
    if (x.context1 >= contexts_ || x.context2 >= contexts_ || x.measurement >= measurements_) {
      throw InputError("usefulness model: feature index out of range");
    }
  }

  void tower_forward(std::size_t context, double mean, std::vector<double>& out) const {
    out.resize(kHidden);
    const std::size_t in = tower_inputs();
    for (std::size_t h = 0; h < kHidden; ++h) {
      const std::size_t row = tower_w() + h * in;
      // one-hot input: only the context column and the mean column contribute
      const double a = params_[row + context] + params_[row + contexts_] * mean + params_[tower_b() + h];
      out[h] = std::tanh(a);
    }
  }

  void tower_backward(std::size_t context, double mean, const std::vector<double>& act,
                      std::span<const double> d_act, std::span<double> grad) const {
    const std::size_t in = tower_inputs();
    for (std::size_t h = 0; h < kHidden; ++h) {
      const double da = d_act[h] * (1.0 - act[h] * act[h]);
      const std::size_t row = tower_w() + h * in;
      grad[row + context] += da;
      grad[row + contexts_] += da * mean;
      grad[tower_b() + h] += da;
    }
  }

  double forward(const ModelInput& x, Activations& act) const {
    check_input(x);
    tower_forward(x.context1, x.mean1, act.tower1);
    tower_forward(x.context2, x.mean2, act.tower2);
    act.z.assign(head_inputs(), 0.0);
    std::copy(act.tower1.begin(), act.tower1.end(), act.z.begin());
    std::copy(act.tower2.begin(), act.tower2.end(), act.z.begin() + kHidden);
    act.z[2 * kHidden + x.measurement] = 1.0;
    act.z[2 * kHidden + measurements_] = x.delta_norm;
    act.head.resize(kHidden);
    double o = params_[out_b()];
    for (std::size_t h = 0; h < kHidden; ++h) {
      const std::size_t row = head_w() + h * head_inputs();
      double a = params_[head_b() + h];
      for (std::size_t j = 0; j < head_inputs(); ++j) a += params_[row + j] * act.z[j];
      act.head[h] = std::tanh(a);
      o += params_[out_w() + h] * act.head[h];
    }
    return 1.0 / (1.0 + std::exp(-o));
  }

  std::size_t contexts_ = 0;
  std::size_t measurements_ = 0;
  std::vector<double> params_;
};

struct TrainingReport {
  std::vector<double> epoch_mse;  // index 0 is the loss before training
  double final_mse = 0.0;
};

/// Seeded init from U(-0.1, 0.1), then `epochs` passes of shuffled
/// mini-batch gradient descent. Deterministic for a given seed.
inline UsefulnessModel train_usefulness_model(std::span<const TrainingExample> data, std::size_t contexts,
                                              std::size_t measurements, const TrainConfig& config,
                                              TrainingReport* report = nullptr) {
  config.validate();
  if (data.empty()) throw InputError("train: no training data");
  for (const auto& ex : data) {
    if (!(ex.label >= 0.0 && ex.label <= 1.0)) throw InputError("train: label outside [0,1]");
  }
  UsefulnessModel model(contexts, measurements);
  model.config = config;
  model.initialize(derive_seed(config.seed, 1));
  Rng shuffle_rng(derive_seed(config.seed, 2));

  std::vector<TrainingExample> order(data.begin(), data.end());
  std::vector<double> grad(model.parameters().size());
  TrainingReport local;
  local.epoch_mse.push_back(model.mean_squared_error(data));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(std::span<TrainingExample>(order), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      model.loss_and_gradient(std::span<const TrainingExample>(order).subspan(start, len), grad);
      auto params = model.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= config.learning_rate * grad[i];
    }
    local.epoch_mse.push_back(model.mean_squared_error(data));
  }
  local.final_mse = local.epoch_mse.back();
  model.final_mse = local.final_mse;
  if (report) *report = std::move(local);
  return model;
}

/// Score_U for one feature vector. Throws if the vector was built against a
/// different vocabulary than the model.
inline double predict_usefulness(const UsefulnessModel& model, const FeatureVector& fv) {
  if (!model.vocabulary_fingerprint.empty() && fv.vocabulary_fingerprint != model.vocabulary_fingerprint) {
    throw InputError("predict_usefulness: vocabulary fingerprint mismatch");
  }
  return model.predict(ModelInput::from(fv));
}

}  // namespace insightgen
