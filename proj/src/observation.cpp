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
#include "observation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>

namespace probsdf {

double NoiseModel::pose_sigma(int frame_id) const {
  if (frame_id >= 0 && static_cast<std::size_t>(frame_id) < sigma_pose_per_frame.size())
    return sigma_pose_per_frame[static_cast<std::size_t>(frame_id)];
  return sigma_pose;
}

void NoiseModel::validate() const {
  auto bad = [](double v) { return !(v >= 0.0) || !std::isfinite(v); };
  if (bad(sigma_depth_a) || bad(sigma_depth_b) || bad(sigma_pose) || bad(sigma_model))
    fail(ErrorCode::InvalidArgument, "noise coefficients must be finite and >= 0");
  for (double s : sigma_pose_per_frame)
    if (bad(s)) fail(ErrorCode::InvalidArgument, "per-frame pose sigma must be >= 0");
  if (sigma_depth_a == 0.0 && sigma_depth_b == 0.0 && sigma_pose == 0.0 && sigma_model == 0.0 &&
      sigma_pose_per_frame.empty())
    fail(ErrorCode::InvalidArgument, "noise model yields zero variance");
}

double noise_variance(double depth, int frame_id, double incidence, const NoiseModel& noise) {
  const double sd = noise.sigma_depth(depth);
  const double sp = noise.pose_sigma(frame_id);
  const double sm = noise.sigma_model;
  return (sd * sd + sp * sp + sm * sm) / std::max(incidence, kMinIncidence);
}

void ObservationSet::reserve(std::size_t m) {
  y_.reserve(m);
  sigma2_.reserve(m);
  offsets_.reserve(m + 1);
  cols_.reserve(m * 8);
  vals_.reserve(m * 8);
  frame_ids_.reserve(m);
  px_.reserve(m);
  py_.reserve(m);
}

void ObservationSet::push_back(const Observation& obs) {
  y_.push_back(obs.y);
  sigma2_.push_back(obs.sigma2);
  for (const auto& e : obs.row) {
    cols_.push_back(e.index);
    vals_.push_back(e.weight);
  }
  offsets_.push_back(static_cast<std::int64_t>(cols_.size()));
  frame_ids_.push_back(obs.frame_id);
  px_.push_back(obs.px);
  py_.push_back(obs.py);
}

void ObservationSet::append(const ObservationSet& other) {
  const std::int64_t base = offsets_.back();
  y_.insert(y_.end(), other.y_.begin(), other.y_.end());
  sigma2_.insert(sigma2_.end(), other.sigma2_.begin(), other.sigma2_.end());
  cols_.insert(cols_.end(), other.cols_.begin(), other.cols_.end());
  vals_.insert(vals_.end(), other.vals_.begin(), other.vals_.end());
  for (std::size_t k = 1; k < other.offsets_.size(); ++k) offsets_.push_back(base + other.offsets_[k]);
  frame_ids_.insert(frame_ids_.end(), other.frame_ids_.begin(), other.frame_ids_.end());
  px_.insert(px_.end(), other.px_.begin(), other.px_.end());
  py_.insert(py_.end(), other.py_.begin(), other.py_.end());
}

Observation ObservationSet::at(std::size_t k) const {
  Observation o;
  o.y = y_[k];
  o.sigma2 = sigma2_[k];
  o.frame_id = frame_ids_[k];
  o.px = px_[k];
  o.py = py_[k];
  for (auto e = offsets_[k]; e < offsets_[k + 1]; ++e)
    o.row.entries[static_cast<std::size_t>(o.row.count++)] = {cols_[static_cast<std::size_t>(e)],
                                                              vals_[static_cast<std::size_t>(e)]};
  return o;
}

std::size_t ObservationSet::min_nodes() const {
  std::int32_t mx = -1;
  for (auto c : cols_) mx = std::max(mx, c);
  return static_cast<std::size_t>(mx + 1);
}

Vec3 estimate_normal(const DepthFrame& frame, int x, int y) {
  if (!frame.valid(x, y) || !frame.valid(x - 1, y) || !frame.valid(x + 1, y) ||
      !frame.valid(x, y - 1) || !frame.valid(x, y + 1))
    fail(ErrorCode::DegenerateNeighborhood, "invalid depth in 4-neighborhood");
  auto P = [&](int u, int v) { return backproject(u, v, frame.at(u, v), frame.K, frame.pose); };
  const Vec3 tx = P(x + 1, y) - P(x - 1, y);
  const Vec3 ty = P(x, y + 1) - P(x, y - 1);
  Vec3 n = tx.cross(ty);
  const double len = n.norm();
  if (!(len >= 1e-12)) fail(ErrorCode::DegenerateNeighborhood, "degenerate tangent frame");
  n /= len;
  const Vec3 p = P(x, y);
  if (n.dot(frame.pose.camera_center() - p) < 0.0) n = -n;
  return n;
}

DepthFrame smooth_depth(const DepthFrame& frame, int radius) {
  if (radius <= 0) return frame;
  DepthFrame out = frame;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!frame.valid(x, y)) continue;
      double sum = 0.0;
      int n = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
          if (frame.valid(x + dx, y + dy)) {
            sum += frame.at(x + dx, y + dy);
            ++n;
          }
      out.depth[static_cast<std::size_t>(y) * frame.width + x] = static_cast<float>(sum / n);
    }
  }
  return out;
}

namespace {

bool try_normal(const DepthFrame& frame, int x, int y, Vec3& n) {
  if (!frame.valid(x - 1, y) || !frame.valid(x + 1, y) || !frame.valid(x, y - 1) ||
      !frame.valid(x, y + 1))
    return false;
  try {
    n = estimate_normal(frame, x, y);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

ObservationSet sample_ray_observations(const DepthFrame& frame, const VoxelGrid& grid, double tau,
                                       const NoiseModel& noise, const SamplingOptions& options) {
  frame.validate();
  if (options.stride < 1) fail(ErrorCode::InvalidArgument, "stride must be >= 1");
  if (options.samples_per_ray < 1) fail(ErrorCode::InvalidArgument, "samples_per_ray must be >= 1");
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "tau must be > 0");

  const DepthFrame normal_frame = smooth_depth(frame, options.normal_smoothing);
  const int stride = options.stride;
  const int spr = options.samples_per_ray;
  const std::size_t n_rows = static_cast<std::size_t>((frame.height + stride - 1) / stride);
  std::vector<ObservationSet> fragments(n_rows);

  parallel::parallel_for(n_rows, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const int y = static_cast<int>(r) * stride;
      ObservationSet& frag = fragments[r];
      for (int x = 0; x < frame.width; x += stride) {
        if (!frame.valid(x, y)) continue;
        Vec3 n;
        if (!try_normal(normal_frame, x, y, n)) continue;
        const double d = frame.at(x, y);
        const Vec3 p = backproject(x, y, d, frame.K, frame.pose);
        const Vec3 ray = (frame.pose.R * pixel_ray(x, y, frame.K)).normalized();
        const double incidence = std::abs(n.dot(ray));
        const double sigma2 = noise_variance(d, frame.frame_id, incidence, noise);
        for (int k = 0; k < spr; ++k) {
          const double s = spr == 1 ? 0.0 : -tau + 2.0 * tau * k / (spr - 1);
          const Vec3 xi = p + s * ray;
          Observation obs;
          if (!try_trilinear_stencil(xi, grid, obs.row, options.min_active_corners)) continue;
          obs.y = std::clamp(n.dot(xi - p), -tau, tau);
          obs.sigma2 = sigma2;
          obs.frame_id = frame.frame_id;
          obs.px = x;
          obs.py = y;
          frag.push_back(obs);
        }
      }
    }
  });

  ObservationSet out;
  for (const auto& f : fragments) out.append(f);
  return out;
}

}  // namespace probsdf
