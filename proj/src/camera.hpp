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

#include <cmath>
#include <vector>

namespace probsdf {

/// One posed depth image. Depth is range along the optical axis in meters;
/// zero or NaN marks an invalid pixel.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<float> depth;
  Intrinsics K;
  Pose pose;
  int frame_id = 0;

  float at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
  bool valid(int x, int y) const {
    if (x < 0 || y < 0 || x >= width || y >= height) return false;
    const float d = at(x, y);
    return std::isfinite(d) && d > 0.0f;
  }
  /// Throws InvalidArgument on bad intrinsics, pose or buffer size.
  void validate() const;
};

/// Camera-frame ray direction (unnormalized, z = 1) through pixel (u, v).
inline Vec3 pixel_ray(double u, double v, const Intrinsics& K) {
  return {(u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0};
}

/// World point of pixel (u, v) at depth d. InvalidDepth when d <= 0 or not finite.
Vec3 backproject(double u, double v, double d, const Intrinsics& K, const Pose& pose);

/// Projects a world point; returns false when it lies behind the camera.
/// On success (u, v) is the continuous pixel coordinate and z the depth.
bool project(const Vec3& world, const Intrinsics& K, const Pose& pose, double& u, double& v,
             double& z);

}  // namespace probsdf
