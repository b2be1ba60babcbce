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

// Truthfulness tests: two-sample Kolmogorov-Smirnov, Mann-Whitney U and the
// exact binomial test. All p-values are two-sided.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "insightgen/error.hpp"

namespace insightgen {

enum class TestMethod { kKsTwoSample, kMannWhitneyU, kBinomialExact };

inline std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::kKsTwoSample: return "ks_two_sample";
    case TestMethod::kMannWhitneyU: return "mann_whitney_u";
    case TestMethod::kBinomialExact: return "binomial_exact";
  }
  return "?";
}

inline TestMethod test_method_from_string(std::string_view s) {
  if (s == "ks_two_sample") return TestMethod::kKsTwoSample;
  if (s == "mann_whitney_u") return TestMethod::kMannWhitneyU;
  if (s == "binomial_exact") return TestMethod::kBinomialExact;
  throw InputError("unknown test method '" + std::string(s) + "'");
}

struct TestResult {
  double statistic = 0.0;  // D, U or k
  double p_value = 1.0;
  TestMethod method = TestMethod::kMannWhitneyU;
  bool exact = false;

  bool operator==(const TestResult&) const = default;
};

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// Q_KS(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2), clamped to
/// [0,1]. Summation stops at the first term below 1e-12.
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  const double a = -2.0 * lambda * lambda;
  double sum = 0.0;
  double sign = 1.0;
  for (std::size_t k = 1; k < 10'000'000; ++k) {
    const double term = std::exp(a * static_cast<double>(k) * static_cast<double>(k));
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// D = sup |ECDF_a - ECDF_b| over the pooled sample points.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("ks_two_sample: empty sample");
  const double d = ks_statistic(a, b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  return {d, kolmogorov_survival(lambda), TestMethod::kKsTwoSample, false};
}

// ---------------------------------------------------------------------------
// Mann-Whitney U

struct MannWhitneyOptions {
  /// Exact null distribution is used when |a|+|b| <= this and there are no ties.
  std::size_t exact_max_total = 20;
};

/// Number of arrangements of m "a" and n "b" labels producing each U value,
/// via f(m,n,u) = f(m-1,n,u-n) + f(m,n-1,u). Index u in [0, m*n].
inline std::vector<double> mann_whitney_null_counts(std::size_t m, std::size_t n) {
  // table[i][j] is the count vector for (i, j); built row by row.
  std::vector<std::vector<std::vector<double>>> table(m + 1, std::vector<std::vector<double>>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      auto& f = table[i][j];
      f.assign(i * j + 1, 0.0);
      if (i == 0 || j == 0) {
        f[0] = 1.0;
        continue;
      }
      const auto& left = table[i - 1][j];   // largest value is an "a": contributes j
      const auto& right = table[i][j - 1];  // largest value is a "b": contributes 0
      for (std::size_t u = 0; u < left.size(); ++u) f[u + j] += left[u];
      for (std::size_t u = 0; u < right.size(); ++u) f[u] += right[u];
    }
  }
  return table[m][n];
}

inline TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                                 const MannWhitneyOptions& options = {}) {
  if (a.empty() || b.empty()) throw InputError("mann_whitney_u: empty sample");
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  const std::size_t n = na + nb;

  struct Item {
    double value;
    bool from_a;
  };
  std::vector<Item> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.push_back({v, true});
  for (double v : b) pooled.push_back({v, false});
  std::sort(pooled.begin(), pooled.end(), [](const Item& l, const Item& r) { return l.value < r.value; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  bool ties = false;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].value == pooled[i].value) ++j;
    const double t = static_cast<double>(j - i);
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].from_a) rank_sum_a += midrank;
    }
    if (t > 1) {
      ties = true;
      tie_term += t * t * t - t;
    }
    i = j;
  }
  const double dna = static_cast<double>(na);
  const double dnb = static_cast<double>(nb);
  const double u = rank_sum_a - dna * (dna + 1.0) / 2.0;

  if (!ties && n <= options.exact_max_total) {
    const auto counts = mann_whitney_null_counts(na, nb);
    const auto ui = static_cast<std::size_t>(std::llround(u));
    double total = 0.0, lower = 0.0, upper = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      total += counts[k];
      if (k <= ui) lower += counts[k];
      if (k >= ui) upper += counts[k];
    }
    const double p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    return {u, p, TestMethod::kMannWhitneyU, true};
  }

  const double dn = static_cast<double>(n);
  const double mu = dna * dnb / 2.0;
  const double var = dna * dnb / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0.0)) return {u, 1.0, TestMethod::kMannWhitneyU, true};
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  const double p = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return {u, p, TestMethod::kMannWhitneyU, false};
}

// ---------------------------------------------------------------------------
// binomial

/// log P(X = j) for X ~ Binomial(n, p).
inline double binomial_log_pmf(std::uint64_t j, std::uint64_t n, double p) {
  const double dn = static_cast<double>(n);
  const double dj = static_cast<double>(j);
  return std::lgamma(dn + 1.0) - std::lgamma(dj + 1.0) - std::lgamma(dn - dj + 1.0) +
         dj * std::log(p) + (dn - dj) * std::log1p(-p);
}

/// Exact two-sided test: sums P(X=j) over every j no more likely than the
/// observed k (relative slack 1e-9).
inline TestResult binomial_test(std::uint64_t k, std::uint64_t n, double p0) {
  if (k > n) throw InputError("binomial_test: k > n");
  if (!(p0 > 0.0 && p0 < 1.0)) throw InputError("binomial_test: p0 must lie in (0,1)");
  const double threshold = binomial_log_pmf(k, n, p0) + std::log1p(1e-9);
  double p = 0.0;
  std::uint64_t included = 0;
  for (std::uint64_t j = 0; j <= n; ++j) {
    const double lp = binomial_log_pmf(j, n, p0);
    if (lp <= threshold) {
      p += std::exp(lp);
      ++included;
    }
  }
  if (included == n + 1) p = 1.0;
  return {static_cast<double>(k), std::clamp(p, 0.0, 1.0), TestMethod::kBinomialExact, true};
}

}  // namespace insightgen
