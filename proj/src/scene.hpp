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
#include "observation.hpp"
#include "tsdf.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace probsdf {

struct SpherePrimitive {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct BoxPrimitive {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
};

/// Points p with n.p = offset; positive side along n.
struct PlanePrimitive {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
};

using Primitive = std::variant<SpherePrimitive, BoxPrimitive, PlanePrimitive>;

double primitive_sdf(const Primitive& prim, const Vec3& p);

/// Min-union of analytic primitives.
class AnalyticScene {
 public:
  AnalyticScene() = default;
  explicit AnalyticScene(std::vector<Primitive> prims) : prims_(std::move(prims)) {}

  void add(Primitive p) { prims_.push_back(std::move(p)); }
  const std::vector<Primitive>& primitives() const { return prims_; }

  double sdf(const Vec3& p) const;
  /// Central-difference gradient of sdf.
  Vec3 gradient(const Vec3& p, double h = 1e-6) const;

 private:
  std::vector<Primitive> prims_;
};

struct RenderOptions {
  int width = 160;
  int height = 120;
  Intrinsics K;
  double max_range = 10.0;
  int max_steps = 4096;  // grazing rays on planes converge slowly
  double hit_eps = 1e-6;
};

/// Sphere-traced depth image; misses are stored as 0. With a noise model the
/// depth gets N(0, sigma_depth(d)^2) added from a generator seeded by
/// (seed, frame_id).
DepthFrame render_depth(const AnalyticScene& scene, const Pose& pose, const RenderOptions& options,
                        const NoiseModel* noise = nullptr, std::uint64_t seed = 0, int frame_id = 0);

/// Points on the zero level set, area-weighted across primitives. Planes and
/// boxes are clipped to `region` (planes require a finite region). Points that
/// fall inside another primitive are rejected.
std::vector<Vec3> sample_ground_truth(const AnalyticScene& scene, std::size_t count,
                                      std::uint64_t seed, const Aabb& region = {});

/// Projects p onto the zero level set along the sdf gradient.
Vec3 project_to_surface(const AnalyticScene& scene, Vec3 p, int max_iter = 50);

/// Canonical desk-scale scene: sphere r = 0.15 m at the origin on the plane z = -0.15 m.
AnalyticScene canonical_scene();

/// `count` look-at poses on a hemisphere of `radius` around `target`, in rings
/// between the given elevations (degrees).
std::vector<Pose> hemisphere_poses(int count, double radius, const Vec3& target,
                                   double min_elevation_deg = 20.0, double max_elevation_deg = 70.0);

/// Fibonacci-sphere look-at poses at `radius` around `target`.
std::vector<Pose> fibonacci_poses(int count, double radius, const Vec3& target);

}  // namespace probsdf
