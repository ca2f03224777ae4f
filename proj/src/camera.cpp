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
#include "camera.hpp"

namespace probsdf {

void DepthFrame::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "frame has no pixels");
  if (depth.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorCode::InvalidArgument, "depth buffer size does not match width*height");
  if (!(K.fx > 0.0) || !(K.fy > 0.0)) fail(ErrorCode::InvalidArgument, "fx and fy must be > 0");
  if (!pose.is_rigid()) fail(ErrorCode::InvalidArgument, "pose rotation is not orthonormal");
}

Vec3 backproject(double u, double v, double d, const Intrinsics& K, const Pose& pose) {
  if (!std::isfinite(d) || d <= 0.0) fail(ErrorCode::InvalidDepth, "depth must be finite and > 0");
  return pose.apply(d * pixel_ray(u, v, K));
}

bool project(const Vec3& world, const Intrinsics& K, const Pose& pose, double& u, double& v,
             double& z) {
  const Vec3 c = pose.inverse_apply(world);
  z = c.z();
  if (!(z > 0.0)) return false;
  u = K.fx * c.x() / z + K.cx;
  v = K.fy * c.y() / z + K.cy;
  return true;
}

}  // namespace probsdf
