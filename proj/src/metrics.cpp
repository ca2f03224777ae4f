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
#include "metrics.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace probsdf {

std::size_t PointIndex::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

PointIndex::PointIndex(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) fail(ErrorCode::EmptySet, "point index needs at least one point");
  Vec3 lo = points_[0], hi = points_[0];
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo_ = lo;
  // Roughly two points per occupied cell for surface-like sets.
  const Vec3 ext = (hi - lo).cwiseMax(1e-9);
  const double area_like = ext.x() * ext.y() + ext.y() * ext.z() + ext.x() * ext.z();
  cell_ = std::max(std::sqrt(2.0 * area_like / static_cast<double>(points_.size())), 1e-9);
  for (std::uint32_t i = 0; i < points_.size(); ++i) cells_[cell_of(points_[i])].push_back(i);
  max_cell_ = cell_of(hi);
}

PointIndex::Key PointIndex::cell_of(const Vec3& p) const {
  const Vec3 q = (p - lo_) / cell_;
  return {static_cast<std::int64_t>(std::floor(q.x())), static_cast<std::int64_t>(std::floor(q.y())),
          static_cast<std::int64_t>(std::floor(q.z()))};
}

double PointIndex::nearest_sq(const Vec3& q) const {
  const Key c = cell_of(q);
  double best = std::numeric_limits<double>::infinity();
  auto scan = [&](const Key& k) {
    auto it = cells_.find(k);
    if (it == cells_.end()) return;
    for (std::uint32_t i : it->second) best = std::min(best, (q - points_[i]).squaredNorm());
  };
  // Shell r holds cells at Chebyshev distance r from q's cell. Every point in
  // shell r + 1 or beyond is at least r * cell_ away from q.
  const std::int64_t reach =
      std::max({std::abs(c.x), std::abs(c.y), std::abs(c.z), std::abs(c.x - max_cell_.x),
                std::abs(c.y - max_cell_.y), std::abs(c.z - max_cell_.z)});
  // Far or degenerate queries would walk many empty shells; once the shells
  // outnumber the occupied cells a linear scan is cheaper. Both give the same
  // minimum, so the result does not depend on the path taken.
  const double shell_budget = 8.0 * static_cast<double>(cells_.size()) + 64.0;
  for (std::int64_t r = 0; r <= reach; ++r) {
    const double side = 2.0 * static_cast<double>(r) + 1.0;
    if (side * side * side > shell_budget) {
      for (const auto& p : points_) best = std::min(best, (q - p).squaredNorm());
      return best;
    }
    for (std::int64_t dx = -r; dx <= r; ++dx)
      for (std::int64_t dy = -r; dy <= r; ++dy) {
        const bool edge = std::abs(dx) == r || std::abs(dy) == r;
        if (edge) {
          for (std::int64_t dz = -r; dz <= r; ++dz) scan({c.x + dx, c.y + dy, c.z + dz});
        } else {
          scan({c.x + dx, c.y + dy, c.z - r});
          if (r > 0) scan({c.x + dx, c.y + dy, c.z + r});
        }
      }
    const double bound = static_cast<double>(r) * cell_;
    if (best <= bound * bound) break;
  }
  return best;
}

Vector nearest_sq_distances(std::span<const Vec3> from, std::span<const Vec3> to) {
  const PointIndex index(to);
  Vector out(from.size());
  parallel::parallel_for(from.size(), 1024, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = index.nearest_sq(from[i]);
  });
  return out;
}

Vector nearest_sq_distances_brute(std::span<const Vec3> from, std::span<const Vec3> to) {
  if (to.empty()) fail(ErrorCode::EmptySet, "target set is empty");
  Vector out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : to) best = std::min(best, (from[i] - g).squaredNorm());
    out[i] = best;
  }
  return out;
}

double MetricsReport::f_at(double threshold) const {
  for (const auto& f : fscore)
    if (f.threshold == threshold) return f.f;
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void check_thresholds(std::span<const double> thresholds) {
  for (double t : thresholds)
    if (!(t > 0.0)) fail(ErrorCode::InvalidArgument, "F-score thresholds must be > 0");
}

double mean_of(std::span<const double> v, bool take_sqrt) {
  double s = 0.0;
  for (double d : v) s += take_sqrt ? std::sqrt(d) : d;
  return s / static_cast<double>(v.size());
}

double fraction_within(std::span<const double> sq, double threshold) {
  std::size_t n = 0;
  for (double d : sq) n += std::sqrt(d) <= threshold ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(sq.size());
}

void check_sets(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.empty()) fail(ErrorCode::EmptySet, "predicted point set is empty");
  if (gt.empty()) fail(ErrorCode::EmptySet, "ground-truth point set is empty");
}

}  // namespace

MetricsReport metrics_from_distances(std::span<const double> pred_to_gt_sq,
                                     std::span<const double> gt_to_pred_sq,
                                     std::span<const double> thresholds) {
  if (pred_to_gt_sq.empty() || gt_to_pred_sq.empty()) fail(ErrorCode::EmptySet, "empty point set");
  check_thresholds(thresholds);
  MetricsReport r;
  r.pred_count = pred_to_gt_sq.size();
  r.gt_count = gt_to_pred_sq.size();
  r.chamfer = mean_of(pred_to_gt_sq, false) + mean_of(gt_to_pred_sq, false);
  r.accuracy = mean_of(pred_to_gt_sq, true);
  r.completeness = mean_of(gt_to_pred_sq, true);
  for (double t : thresholds) {
    FScore f;
    f.threshold = t;
    f.precision = fraction_within(pred_to_gt_sq, t);
    f.recall = fraction_within(gt_to_pred_sq, t);
    f.f = f.precision + f.recall > 0.0 ? 2.0 * f.precision * f.recall / (f.precision + f.recall) : 0.0;
    r.fscore.push_back(f);
  }
  return r;
}

MetricsReport evaluate(std::span<const Vec3> pred, std::span<const Vec3> gt,
                       std::span<const double> thresholds) {
  check_sets(pred, gt);
  check_thresholds(thresholds);
  const Vector a = nearest_sq_distances(pred, gt);
  const Vector b = nearest_sq_distances(gt, pred);
  return metrics_from_distances(a, b, thresholds);
}

MetricsReport evaluate_brute(std::span<const Vec3> pred, std::span<const Vec3> gt,
                             std::span<const double> thresholds) {
  check_sets(pred, gt);
  check_thresholds(thresholds);
  const Vector a = nearest_sq_distances_brute(pred, gt);
  const Vector b = nearest_sq_distances_brute(gt, pred);
  return metrics_from_distances(a, b, thresholds);
}

double chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  return evaluate(pred, gt, {}).chamfer;
}

std::pair<double, double> accuracy_completeness(std::span<const Vec3> pred,
                                                std::span<const Vec3> gt) {
  const MetricsReport r = evaluate(pred, gt, {});
  return {r.accuracy, r.completeness};
}

std::vector<FScore> fscore(std::span<const Vec3> pred, std::span<const Vec3> gt,
                           std::span<const double> thresholds) {
  return evaluate(pred, gt, thresholds).fscore;
}

}  // namespace probsdf
