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

// KNN pseudo-labeling, seeded k-means and one-per-cluster diverse selection.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "insightgen/error.hpp"
#include "insightgen/features.hpp"
#include "insightgen/random.hpp"

namespace insightgen {

struct LabeledPoint {
  std::string id;
  std::vector<double> bosw;
  double label = 0.0;
};

/// Unweighted mean label of the min(k, |seeds|) nearest seeds (Euclidean on
/// BoSW); equal distances are ordered by seed id.
inline std::vector<double> knn_pseudo_label(std::span<const LabeledPoint> seeds,
                                            std::span<const std::vector<double>> unlabeled, std::size_t k) {
  if (seeds.empty()) throw InputError("knn_pseudo_label: empty seed set");
  if (k == 0) throw InputError("knn_pseudo_label: k must be >= 1");
  const std::size_t kk = std::min(k, seeds.size());
  std::vector<double> out;
  out.reserve(unlabeled.size());
  std::vector<std::pair<double, std::size_t>> dist(seeds.size());
  for (const auto& point : unlabeled) {
    for (std::size_t s = 0; s < seeds.size(); ++s) dist[s] = {squared_distance(point, seeds[s].bosw), s};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end(),
                      [&](const auto& a, const auto& b) {
                        return std::tie(a.first, seeds[a.second].id) < std::tie(b.first, seeds[b.second].id);
                      });
    double sum = 0.0;
    for (std::size_t i = 0; i < kk; ++i) sum += seeds[dist[i].second].label;
    out.push_back(sum / static_cast<double>(kk));
  }
  return out;
}

// ---------------------------------------------------------------------------
// k-means

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;  // cluster index per point
  double inertia = 0.0;
  int iterations = 0;
};

struct KMeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // max centroid movement
};

namespace detail {

inline std::vector<std::vector<double>> cluster_means(std::span<const std::vector<double>> points,
                                                      std::span<const std::size_t> assignment, std::size_t k) {
  const std::size_t d = points.front().size();
  std::vector<std::vector<double>> means(k, std::vector<double>(d, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[assignment[i]];
    for (std::size_t j = 0; j < d; ++j) means[assignment[i]][j] += points[i][j];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (auto& x : means[c]) x /= static_cast<double>(counts[c]);
  }
  return means;
}

}  // namespace detail

inline double kmeans_inertia(std::span<const std::vector<double>> points, std::span<const std::size_t> assignment,
                             std::span<const std::vector<double>> centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) s += squared_distance(points[i], centroids[assignment[i]]);
  return s;
}

/// k-means++ seeding, Lloyd iterations with empty-cluster repair, then
/// single-point (Hartigan) moves until no move lowers the inertia.
inline KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& options = {}) {
  const std::size_t n = points.size();
  if (k == 0) throw InputError("kmeans: K must be >= 1");
  if (k > n) throw InputError("kmeans: K exceeds the number of vectors");
  Rng rng(seed);

  // k-means++ seeding over distinct indices
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  chosen.push_back(static_cast<std::size_t>(uniform_index(rng, n)));
  taken[chosen.back()] = true;
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    const auto& last = points[chosen.back()];
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], last));
      if (!taken[i]) total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double r = uniform01(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || d2[i] == 0.0) continue;
        pick = i;
        r -= d2[i];
        if (r < 0.0) break;
      }
    }
    if (pick == n) {  // every remaining point coincides with a centroid
      std::size_t nth = static_cast<std::size_t>(uniform_index(rng, n - chosen.size()));
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (nth-- == 0) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    taken[pick] = true;
  }

  KMeansResult res;
  for (const std::size_t c : chosen) res.centroids.push_back(points[c]);
  res.assignment.assign(n, 0);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    res.iterations = iter + 1;
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(points[i], res.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = squared_distance(points[i], res.centroids[c]);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      res.assignment[i] = best;
      ++counts[best];
    }
    // Repair: an empty cluster takes the point farthest from its own
    // centroid among clusters that can spare one.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[res.assignment[i]] < 2) continue;
        const double di = squared_distance(points[i], res.centroids[res.assignment[i]]);
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      --counts[res.assignment[far]];
      res.assignment[far] = c;
      counts[c] = 1;
      res.centroids[c] = points[far];
    }
    auto next = detail::cluster_means(points, res.assignment, k);
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c) movement = std::max(movement, std::sqrt(squared_distance(next[c], res.centroids[c])));
    res.centroids = std::move(next);
    if (movement < options.tolerance) break;
  }

  // Hartigan refinement: move x from A to B when
  // |B|/(|B|+1) |x-cB|^2 < |A|/(|A|-1) |x-cA|^2.
  std::vector<double> counts(k, 0.0);
  for (const std::size_t a : res.assignment) counts[a] += 1.0;
  const std::size_t d = points.front().size();
  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = res.assignment[i];
      if (counts[a] < 2.0) continue;
      const double cost_out = counts[a] / (counts[a] - 1.0) * squared_distance(points[i], res.centroids[a]);
      std::size_t best = a;
      double best_gain = 0.0;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        const double cost_in = counts[b] / (counts[b] + 1.0) * squared_distance(points[i], res.centroids[b]);
        const double gain = cost_out - cost_in;
        if (gain > best_gain + 1e-12 * std::max(1.0, cost_out)) {
          best_gain = gain;
          best = b;
        }
      }
      if (best == a) continue;
      for (std::size_t j = 0; j < d; ++j) {
        res.centroids[a][j] = (res.centroids[a][j] * counts[a] - points[i][j]) / (counts[a] - 1.0);
        res.centroids[best][j] = (res.centroids[best][j] * counts[best] + points[i][j]) / (counts[best] + 1.0);
      }
      counts[a] -= 1.0;
      counts[best] += 1.0;
      res.assignment[i] = best;
      moved = true;
    }
  }
  res.centroids = detail::cluster_means(points, res.assignment, k);
  res.inertia = kmeans_inertia(points, res.assignment, res.centroids);
  return res;
}

// ---------------------------------------------------------------------------
// diverse selection

struct SelectionItem {
  std::string id;
  std::vector<double> bosw;
  double score_f = 0.0;
};

struct ClusterAssignment {
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<std::vector<std::string>> members;  // candidate ids per cluster
  std::vector<std::string> selected;              // per cluster
  std::vector<std::size_t> cluster_of;            // per input item
};

struct Selection {
  ClusterAssignment clusters;
  std::vector<std::size_t> ranked;  // indices into the input, score_f descending
};

/// Clusters BoSW vectors into K groups and keeps each group's best score_f
/// (ties: smaller id). Output is ordered by score_f descending, then id.
inline Selection select_diverse(std::span<const SelectionItem> items, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InputError("select_diverse: K must be >= 1");
  if (k > items.size()) {
    throw InputError("select_diverse: K=" + std::to_string(k) + " exceeds the " + std::to_string(items.size()) +
                     " available insights");
  }
  std::vector<std::vector<double>> vectors;
  vectors.reserve(items.size());
  for (const auto& it : items) vectors.push_back(it.bosw);
  const auto km = kmeans(vectors, k, seed);

  Selection sel;
  sel.clusters.k = k;
  sel.clusters.centroids = km.centroids;
  sel.clusters.members.resize(k);
  sel.clusters.cluster_of = km.assignment;
  std::vector<std::size_t> best(k, items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::size_t c = km.assignment[i];
    sel.clusters.members[c].push_back(items[i].id);
    const std::size_t b = best[c];
    if (b == items.size() || items[i].score_f > items[b].score_f ||
        (items[i].score_f == items[b].score_f && items[i].id < items[b].id)) {
      best[c] = i;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    sel.clusters.selected.push_back(items[best[c]].id);
    sel.ranked.push_back(best[c]);
  }
  std::sort(sel.ranked.begin(), sel.ranked.end(), [&](std::size_t a, std::size_t b) {
    if (items[a].score_f != items[b].score_f) return items[a].score_f > items[b].score_f;
    return items[a].id < items[b].id;
  });
  return sel;
}

}  // namespace insightgen
