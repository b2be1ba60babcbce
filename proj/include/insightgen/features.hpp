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

// Bag-of-schema-words (BoSW) features, context-mean standardization and a
// 2-D principal component projection for inspection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "insightgen/error.hpp"
#include "insightgen/hash.hpp"
#include "insightgen/schema.hpp"

namespace insightgen {

/// Tokens are "context:<id>", "measurement:<id>" and "schema:<id>", sorted
/// lexicographically. The kind prefix keeps ids of different kinds apart.
class Vocabulary {
 public:
  Vocabulary() = default;

  Vocabulary(std::vector<std::string> context_ids, std::vector<std::string> measurement_ids,
             std::vector<std::string> schema_ids, bool include_schema)
      : contexts_(std::move(context_ids)),
        measurements_(std::move(measurement_ids)),
        schemas_(std::move(schema_ids)),
        include_schema_(include_schema) {
    std::sort(contexts_.begin(), contexts_.end());
    std::sort(measurements_.begin(), measurements_.end());
    std::sort(schemas_.begin(), schemas_.end());
    for (const auto& c : contexts_) tokens_.push_back("context:" + c);
    for (const auto& m : measurements_) tokens_.push_back("measurement:" + m);
    if (include_schema_) {
      for (const auto& s : schemas_) tokens_.push_back("schema:" + s);
    }
    std::sort(tokens_.begin(), tokens_.end());
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
    for (std::size_t i = 0; i < contexts_.size(); ++i) context_pos_.emplace(contexts_[i], i);
    for (std::size_t i = 0; i < measurements_.size(); ++i) measurement_pos_.emplace(measurements_[i], i);
    std::string joined;
    for (const auto& t : tokens_) joined.append(t).push_back('\n');
    fingerprint_ = short_hash(joined);
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::string>& context_ids() const { return contexts_; }
  const std::vector<std::string>& measurement_ids() const { return measurements_; }
  const std::vector<std::string>& schema_ids() const { return schemas_; }
  bool include_schema() const { return include_schema_; }
  const std::string& fingerprint() const { return fingerprint_; }

  std::size_t token_index(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) throw InputError("token '" + std::string(token) + "' not in vocabulary");
    return it->second;
  }
  std::size_t context_index(std::string_view id) const { return lookup(context_pos_, id, "context"); }
  std::size_t measurement_index(std::string_view id) const { return lookup(measurement_pos_, id, "measurement"); }

  nlohmann::json to_json() const {
    return {{"contexts", contexts_},
            {"measurements", measurements_},
            {"schemas", schemas_},
            {"include_schema", include_schema_},
            {"fingerprint", fingerprint_}};
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    Vocabulary v(j.at("contexts").get<std::vector<std::string>>(), j.at("measurements").get<std::vector<std::string>>(),
                 j.at("schemas").get<std::vector<std::string>>(), j.at("include_schema").get<bool>());
    if (j.contains("fingerprint") && j.at("fingerprint").get<std::string>() != v.fingerprint()) {
      throw InputError("vocabulary fingerprint does not match its tokens");
    }
    return v;
  }

 private:
  static std::size_t lookup(const std::unordered_map<std::string, std::size_t>& m, std::string_view id,
                            std::string_view kind) {
    const auto it = m.find(std::string(id));
    if (it == m.end()) throw InputError("unknown " + std::string(kind) + " token '" + std::string(id) + "'");
    return it->second;
  }

  std::vector<std::string> contexts_;
  std::vector<std::string> measurements_;
  std::vector<std::string> schemas_;
  bool include_schema_ = true;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::size_t> context_pos_;
  std::unordered_map<std::string, std::size_t> measurement_pos_;
  std::string fingerprint_;
};

inline Vocabulary build_vocabulary(const SchemaBundle& bundle, bool include_schema = true) {
  std::vector<std::string> contexts, measurements, schemas;
  for (const auto& c : bundle.contexts) contexts.push_back(c.context_id);
  for (const auto& m : bundle.measurements) measurements.push_back(m.measurement_id);
  for (const auto& s : bundle.schemas) schemas.push_back(s.schema_id);
  return Vocabulary(std::move(contexts), std::move(measurements), std::move(schemas), include_schema);
}

/// Per-measurement z-score parameters for context means.
struct Standardization {
  struct Param {
    double mean = 0.0;
    double stddev = 1.0;
  };
  std::map<std::string, Param> by_measurement;

  double apply(std::string_view measurement_id, double x) const {
    const auto it = by_measurement.find(std::string(measurement_id));
    if (it == by_measurement.end()) return 0.0;
    return (x - it->second.mean) / it->second.stddev;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, p] : by_measurement) j[id] = {{"mean", p.mean}, {"std", p.stddev}};
    return j;
  }

  static Standardization from_json(const nlohmann::json& j) {
    Standardization s;
    for (const auto& [id, p] : j.items()) s.by_measurement[id] = {p.at("mean").get<double>(), p.at("std").get<double>()};
    return s;
  }

  bool operator==(const Standardization& o) const {
    if (by_measurement.size() != o.by_measurement.size()) return false;
    for (const auto& [id, p] : by_measurement) {
      const auto it = o.by_measurement.find(id);
      if (it == o.by_measurement.end() || it->second.mean != p.mean || it->second.stddev != p.stddev) return false;
    }
    return true;
  }
};

/// One observed context mean, tagged with its measurement.
struct MeanObservation {
  std::string measurement_id;
  double value = 0.0;
};

/// Population mean and standard deviation per measurement; a zero spread
/// falls back to 1 so every standardized value stays finite.
inline Standardization compute_standardization(std::span<const MeanObservation> observations) {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& o : observations) {
    auto& [s, n] = sums[o.measurement_id];
    s += o.value;
    ++n;
  }
  Standardization out;
  for (const auto& [id, sn] : sums) out.by_measurement[id].mean = sn.first / static_cast<double>(sn.second);
  std::map<std::string, double> sq;
  for (const auto& o : observations) {
    const double d = o.value - out.by_measurement[o.measurement_id].mean;
    sq[o.measurement_id] += d * d;
  }
  for (auto& [id, p] : out.by_measurement) {
    const double var = sq[id] / static_cast<double>(sums[id].second);
    p.stddev = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return out;
}

struct FeatureVector {
  std::vector<double> bosw;  // entries 0 or 1
  double mean1 = 0.0;        // standardized
  double mean2 = 0.0;
  double delta_norm = 0.0;   // delta / tau
  std::size_t context1_index = 0;
  std::size_t context2_index = 0;
  std::size_t measurement_index = 0;
  std::string vocabulary_fingerprint;

  bool operator==(const FeatureVector&) const = default;
};

inline FeatureVector featurize(const CandidateSpec& candidate, double mean1, double mean2, double delta,
                               double tau, const Vocabulary& vocab, const Standardization& standardization) {
  FeatureVector fv;
  fv.bosw.assign(vocab.size(), 0.0);
  fv.bosw[vocab.token_index("context:" + candidate.context1_id)] = 1.0;
  fv.bosw[vocab.token_index("context:" + candidate.context2_id)] = 1.0;
  fv.bosw[vocab.token_index("measurement:" + candidate.measurement_id)] = 1.0;
  if (vocab.include_schema()) fv.bosw[vocab.token_index("schema:" + candidate.schema_id)] = 1.0;
  fv.mean1 = standardization.apply(candidate.measurement_id, mean1);
  fv.mean2 = standardization.apply(candidate.measurement_id, mean2);
  fv.delta_norm = delta / tau;
  fv.context1_index = vocab.context_index(candidate.context1_id);
  fv.context2_index = vocab.context_index(candidate.context2_id);
  fv.measurement_index = vocab.measurement_index(candidate.measurement_id);
  fv.vocabulary_fingerprint = vocab.fingerprint();
  return fv;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// ---------------------------------------------------------------------------
// PCA

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order with matching unit eigenvectors
/// (vectors[k] is the k-th eigenvector).
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

inline SymmetricEigen jacobi_eigen(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (off <= 1e-30 * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  SymmetricEigen out;
  for (const std::size_t k : order) {
    out.values.push_back(a[k][k]);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(std::move(col));
  }
  return out;
}

struct PcaResult {
  std::vector<std::array<double, 2>> points;
  std::array<std::vector<double>, 2> components;
  std::array<double, 2> explained_variance_ratio{0.0, 0.0};
  std::vector<double> mean;
};

/// Mean-centred projection onto the top two covariance eigenvectors. Each
/// component's largest-magnitude entry is made positive.
inline PcaResult pca_project(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) throw InputError("pca_project: need at least 2 vectors");
  const std::size_t d = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != d) throw InputError("pca_project: vectors differ in dimension");
  }
  const double n = static_cast<double>(vectors.size());
  PcaResult out;
  out.mean.assign(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += v[i];
  }
  for (auto& m : out.mean) m /= n;

  std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < d; ++i) {
      const double di = v[i] - out.mean[i];
      if (di == 0.0) continue;
      for (std::size_t j = i; j < d; ++j) cov[i][j] += di * (v[j] - out.mean[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i][j] /= (n - 1.0);
      cov[j][i] = cov[i][j];
    }
  }

  const auto eig = jacobi_eigen(cov);
  double total = 0.0;
  for (double ev : eig.values) total += std::max(ev, 0.0);
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> comp = k < eig.vectors.size() ? eig.vectors[k] : std::vector<double>(d, 0.0);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < comp.size(); ++i) {
      if (std::abs(comp[i]) > std::abs(comp[arg]) + 1e-12) arg = i;
    }
    if (!comp.empty() && comp[arg] < 0.0) {
      for (auto& x : comp) x = -x;
    }
    out.components[k] = std::move(comp);
    out.explained_variance_ratio[k] =
        (k < eig.values.size() && total > 0.0) ? std::max(eig.values[k], 0.0) / total : 0.0;
  }
  for (const auto& v : vectors) {
    std::array<double, 2> p{0.0, 0.0};
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t i = 0; i < d; ++i) p[k] += (v[i] - out.mean[i]) * out.components[k][i];
    }
    out.points.push_back(p);
  }
  return out;
}

}  // namespace insightgen
