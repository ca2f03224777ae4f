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

#include "camera.hpp"
#include "voxel_grid.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace probsdf {

/// sigma^2 = (sigma_depth(d)^2 + sigma_pose(t)^2 + sigma_model^2) / max(incidence, 0.1)
/// with sigma_depth(d) = a + b d^2. All sigmas in meters.
struct NoiseModel {
  double sigma_depth_a = 0.001;
  double sigma_depth_b = 0.0019;
  double sigma_pose = 0.002;
  /// Optional per-frame override of sigma_pose, indexed by frame id.
  std::vector<double> sigma_pose_per_frame;
  double sigma_model = 0.001;

  double sigma_depth(double d) const { return sigma_depth_a + sigma_depth_b * d * d; }
  double pose_sigma(int frame_id) const;
  void validate() const;
};

constexpr double kMinIncidence = 0.1;

double noise_variance(double depth, int frame_id, double incidence, const NoiseModel& noise);

/// One linearized sample y ~ a^T x with variance sigma2.
struct Observation {
  double y = 0.0;
  Stencil row;
  double sigma2 = 1.0;
  int frame_id = 0;
  int px = 0, py = 0;
};

/// Stacked observations: A (M x N, compressed rows), y and W = diag(1/sigma2).
class ObservationSet {
 public:
  std::size_t size() const { return y_.size(); }
  bool empty() const { return y_.empty(); }

  void push_back(const Observation& obs);
  void append(const ObservationSet& other);
  void reserve(std::size_t m);

  std::span<const double> y() const { return y_; }
  std::span<const double> sigma2() const { return sigma2_; }
  std::span<const std::int64_t> row_offsets() const { return offsets_; }
  std::span<const std::int32_t> cols() const { return cols_; }
  std::span<const double> vals() const { return vals_; }
  std::span<const std::int32_t> frame_ids() const { return frame_ids_; }

  Observation at(std::size_t k) const;
  /// Largest referenced node index + 1 (0 when empty).
  std::size_t min_nodes() const;

 private:
  std::vector<double> y_, sigma2_, vals_;
  std::vector<std::int64_t> offsets_{0};
  std::vector<std::int32_t> cols_;
  std::vector<std::int32_t> frame_ids_, px_, py_;
};

/// World-frame unit normal at pixel (x, y) from central-difference tangents,
/// oriented toward the camera. DegenerateNeighborhood if a 4-neighbor is
/// invalid or the tangents are parallel.
Vec3 estimate_normal(const DepthFrame& frame, int x, int y);

struct SamplingOptions {
  int stride = 1;
  int samples_per_ray = 9;
  int min_active_corners = 4;
  /// Box-filter radius (pixels) applied to depth before normal estimation; 0 disables.
  int normal_smoothing = 0;
};

/// Depth copy with invalid-aware box filtering, used only for normals.
DepthFrame smooth_depth(const DepthFrame& frame, int radius);

/// Projective signed-distance samples along the rays of the stride lattice.
ObservationSet sample_ray_observations(const DepthFrame& frame, const VoxelGrid& grid, double tau,
                                       const NoiseModel& noise, const SamplingOptions& options);

}  // namespace probsdf
