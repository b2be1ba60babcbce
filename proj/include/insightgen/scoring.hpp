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

// Truthfulness gate and relevance scoring:
//   score_c = min(1, N_rec / (F_exp * T))
//   score_s = 1 / (1 + exp(-gamma * delta / tau))
//   score_f = score_c * score_s * score_u

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "insightgen/dataset.hpp"
#include "insightgen/error.hpp"
#include "insightgen/schema.hpp"
#include "insightgen/stats.hpp"

namespace insightgen {

struct ScoreConfig {
  double alpha = 0.05;
  double gamma = 6.0;
};

struct ScoreBreakdown {
  double p_value = 1.0;
  bool truthful = false;
  double score_c = 0.0;
  double score_s = 0.5;
  double score_u = 1.0;
  double score_f = 0.0;
  double delta = 0.0;  // claim-aligned: positive when the claim holds
  double gamma = 6.0;
  double tau = 1.0;

  bool operator==(const ScoreBreakdown&) const = default;
};

/// Fraction of expected samples actually recorded, clamped to [0, 1].
/// With t == 0 the ratio is undefined: 0 for no samples, 1 otherwise.
inline double completeness_score(double n_rec, double f_exp, double t) {
  if (!(f_exp > 0.0)) throw InputError("completeness_score: f_exp must be > 0");
  if (n_rec < 0.0 || t < 0.0) throw InputError("completeness_score: negative input");
  if (t == 0.0) return n_rec > 0.0 ? 1.0 : 0.0;
  return std::min(1.0, n_rec / (f_exp * t));
}

/// Logistic in gamma * delta / tau, evaluated without overflow on either side.
inline double significance_score(double delta, double gamma, double tau) {
  if (!(tau > 0.0)) throw InputError("significance_score: tau must be > 0");
  const double x = gamma * delta / tau;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Claim-aligned mean difference of context 1 over context 2.
inline double aligned_delta(Claim claim, const SampleSet& s1, const SampleSet& s2) {
  const double raw = s1.mean - s2.mean;
  return claim == Claim::kGreater ? raw : -raw;
}

inline ScoreBreakdown score_candidate(const InsightSchema& schema, const MeasurementDef& measurement,
                                      const SampleSet& s1, const SampleSet& s2, const TestResult& test,
                                      double score_u, const ScoreConfig& config) {
  if (!(score_u >= 0.0 && score_u <= 1.0)) throw InputError("score_candidate: score_u outside [0,1]");
  ScoreBreakdown out;
  out.p_value = test.p_value;
  out.truthful = test.p_value < config.alpha;
  out.gamma = config.gamma;
  out.tau = measurement.tolerance_tau;
  out.delta = aligned_delta(schema.claim, s1, s2);
  out.score_c = completeness_score(static_cast<double>(s1.n_rec + s2.n_rec), measurement.expected_rate,
                                   std::max(s1.time_span, s2.time_span));
  out.score_s = significance_score(out.delta, config.gamma, measurement.tolerance_tau);
  out.score_u = score_u;
  out.score_f = out.score_c * out.score_s * out.score_u;
  return out;
}

/// Replace score_u and recompute the product.
inline ScoreBreakdown with_usefulness(ScoreBreakdown s, double score_u) {
  s.score_u = score_u;
  s.score_f = s.score_c * s.score_s * s.score_u;
  return s;
}

}  // namespace insightgen
