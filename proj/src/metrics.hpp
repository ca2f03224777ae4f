/*
 * Copyright 2026 The probsdf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include "common.hpp"

#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace probsdf {

/// Exact nearest-neighbour queries over a fixed point set using a uniform
/// hash grid searched in growing shells.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Vec3> points);

  /// Squared distance to the nearest indexed point, computed as
  /// (q - p).squaredNorm() so it matches a brute-force scan bitwise.
  double nearest_sq(const Vec3& q) const;

 private:
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  Key cell_of(const Vec3& p) const;

  std::vector<Vec3> points_;
  double cell_ = 1.0;
  Vec3 lo_ = Vec3::Zero();
  Key max_cell_{0, 0, 0};
  std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> cells_;
};

/// Per-query squared nearest distances from `from` into `to`.
Vector nearest_sq_distances(std::span<const Vec3> from, std::span<const Vec3> to);
Vector nearest_sq_distances_brute(std::span<const Vec3> from, std::span<const Vec3> to);

struct FScore {
  double threshold = 0.0;  // meters
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

struct MetricsReport {
  double chamfer = 0.0;       // m^2
  double accuracy = 0.0;      // m
  double completeness = 0.0;  // m
  std::vector<FScore> fscore;
  std::size_t pred_count = 0;
  std::size_t gt_count = 0;

  /// F value at a threshold (meters); NaN when not evaluated.
  double f_at(double threshold) const;
};

/// Metrics from precomputed squared distances (pred->gt and gt->pred).
MetricsReport metrics_from_distances(std::span<const double> pred_to_gt_sq,
                                     std::span<const double> gt_to_pred_sq,
                                     std::span<const double> thresholds);

/// All metrics between predicted and ground-truth points. EmptySet if either
/// set is empty; InvalidArgument on a non-positive threshold.
MetricsReport evaluate(std::span<const Vec3> pred, std::span<const Vec3> gt,
                       std::span<const double> thresholds);
/// Same with an O(n m) scan; the correctness oracle.
MetricsReport evaluate_brute(std::span<const Vec3> pred, std::span<const Vec3> gt,
                             std::span<const double> thresholds);

double chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt);
std::pair<double, double> accuracy_completeness(std::span<const Vec3> pred,
                                                std::span<const Vec3> gt);
std::vector<FScore> fscore(std::span<const Vec3> pred, std::span<const Vec3> gt,
                           std::span<const double> thresholds);

}  // namespace probsdf
