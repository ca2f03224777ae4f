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
#include "scene.hpp"

#include "parallel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace probsdf {

double primitive_sdf(const Primitive& prim, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SpherePrimitive>) {
          return (p - s.center).norm() - s.radius;
        } else if constexpr (std::is_same_v<T, BoxPrimitive>) {
          const Vec3 q = (p - s.center).cwiseAbs() - s.half_extents;
          return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
        } else {
          return s.normal.normalized().dot(p) - s.offset;
        }
      },
      prim);
}

double AnalyticScene::sdf(const Vec3& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& prim : prims_) d = std::min(d, primitive_sdf(prim, p));
  return d;
}

Vec3 AnalyticScene::gradient(const Vec3& p, double h) const {
  Vec3 g;
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    g[a] = (sdf(p + e) - sdf(p - e)) / (2.0 * h);
  }
  return g;
}

namespace {

/// Distance along the unit ray to the first zero crossing, or -1 on a miss.
double trace(const AnalyticScene& scene, const Vec3& origin, const Vec3& dir,
             const RenderOptions& opt) {
  double t = 0.0;
  bool hit = false;
  for (int step = 0; step < opt.max_steps; ++step) {
    const double d = scene.sdf(origin + t * dir);
    if (std::abs(d) < opt.hit_eps) {
      hit = true;
      break;
    }
    t += d;
    if (t > opt.max_range || t < 0.0) return -1.0;
  }
  if (!hit) return -1.0;
  // Newton polish along the ray: the trace stops within hit_eps of the surface
  // in sdf, which is looser than that in depth at oblique incidence.
  for (int k = 0; k < 4; ++k) {
    const Vec3 p = origin + t * dir;
    const double f = scene.sdf(p);
    const double df = scene.gradient(p, 1e-7).dot(dir);
    if (std::abs(df) < 1e-3) break;
    t -= f / df;
  }
  return t;
}

}  // namespace

DepthFrame render_depth(const AnalyticScene& scene, const Pose& pose, const RenderOptions& options,
                        const NoiseModel* noise, std::uint64_t seed, int frame_id) {
  DepthFrame frame;
  frame.width = options.width;
  frame.height = options.height;
  frame.K = options.K;
  frame.pose = pose;
  frame.frame_id = frame_id;
  frame.depth.assign(static_cast<std::size_t>(options.width) * options.height, 0.0f);

  parallel::parallel_for(static_cast<std::size_t>(options.height), 4, [&](std::size_t b, std::size_t e) {
    for (std::size_t row = b; row < e; ++row) {
      Rng rng(counter_hash(seed, static_cast<std::uint64_t>(frame_id), row));
      const int y = static_cast<int>(row);
      for (int x = 0; x < options.width; ++x) {
        const Vec3 ray_cam = pixel_ray(x, y, options.K);
        const double scale = ray_cam.norm();
        const Vec3 dir = pose.R * (ray_cam / scale);
        const double t = trace(scene, pose.t, dir, options);
        float& out = frame.depth[row * static_cast<std::size_t>(options.width) + static_cast<std::size_t>(x)];
        if (t <= 0.0) {
          if (noise) rng.normal();  // keep the per-row stream aligned with pixels
          continue;
        }
        double depth = t / scale;
        if (noise) depth += noise->sigma_depth(depth) * rng.normal();
        out = depth > 0.0 ? static_cast<float>(depth) : 0.0f;
      }
    }
  });
  return frame;
}

Vec3 project_to_surface(const AnalyticScene& scene, Vec3 p, int max_iter) {
  for (int k = 0; k < max_iter; ++k) {
    const double d = scene.sdf(p);
    if (std::abs(d) < 1e-12) break;
    const Vec3 g = scene.gradient(p, 1e-7);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-12) break;
    p -= d * g / g2;
  }
  return p;
}

namespace {

void plane_basis(const Vec3& n, Vec3& u, Vec3& v) {
  const Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  u = n.cross(a).normalized();
  v = n.cross(u);
}

struct Sampler {
  double area = 0.0;
  std::function<Vec3(Rng&)> draw;  // may return NaN for rejected draws
};

}  // namespace

std::vector<Vec3> sample_ground_truth(const AnalyticScene& scene, std::size_t count,
                                      std::uint64_t seed, const Aabb& region) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "count must be >= 1");
  const Vec3 nan = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  std::vector<Sampler> samplers;
  for (const auto& prim : scene.primitives()) {
    Sampler s;
    if (const auto* sp = std::get_if<SpherePrimitive>(&prim)) {
      s.area = 4.0 * std::numbers::pi * sp->radius * sp->radius;
      s.draw = [sp](Rng& rng) {
        Vec3 d(rng.normal(), rng.normal(), rng.normal());
        return Vec3(sp->center + sp->radius * d.normalized());
      };
    } else if (const auto* pl = std::get_if<PlanePrimitive>(&prim)) {
      if (!region.min.allFinite() || !region.max.allFinite())
        fail(ErrorCode::InvalidArgument, "plane ground truth needs a finite region");
      const Vec3 n = pl->normal.normalized();
      Vec3 u, v;
      plane_basis(n, u, v);
      // Rectangle in (u, v) covering the region's corners projected on the plane.
      double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
      for (int c = 0; c < 8; ++c) {
        const Vec3 corner((c & 1) ? region.max.x() : region.min.x(),
                          (c & 2) ? region.max.y() : region.min.y(),
                          (c & 4) ? region.max.z() : region.min.z());
        u0 = std::min(u0, corner.dot(u));
        u1 = std::max(u1, corner.dot(u));
        v0 = std::min(v0, corner.dot(v));
        v1 = std::max(v1, corner.dot(v));
      }
      const Vec3 base = pl->offset * n;
      auto draw = [=](Rng& rng) {
        const Vec3 p = base + rng.uniform(u0, u1) * u + rng.uniform(v0, v1) * v;
        return region.contains(p) ? p : nan;
      };
      // Acceptance fraction gives the clipped area.
      Rng probe(counter_hash(seed, 0xA5A5, samplers.size()));
      int accepted = 0;
      const int trials = 20000;
      for (int k = 0; k < trials; ++k) accepted += draw(probe).allFinite() ? 1 : 0;
      s.area = (u1 - u0) * (v1 - v0) * accepted / trials;
      s.draw = draw;
    } else {
      const auto& bx = std::get<BoxPrimitive>(prim);
      const Vec3 h = bx.half_extents;
      const double faces[3] = {4.0 * h.y() * h.z(), 4.0 * h.x() * h.z(), 4.0 * h.x() * h.y()};
      s.area = 2.0 * (faces[0] + faces[1] + faces[2]);
      s.draw = [bx, h, faces, region, nan](Rng& rng) {
        double r = rng.uniform() * (faces[0] + faces[1] + faces[2]);
        const int axis = r < faces[0] ? 0 : (r < faces[0] + faces[1] ? 1 : 2);
        Vec3 p;
        for (int a = 0; a < 3; ++a) p[a] = rng.uniform(-h[a], h[a]);
        p[axis] = rng.uniform() < 0.5 ? -h[axis] : h[axis];
        p += bx.center;
        return region.contains(p) ? p : nan;
      };
    }
    if (s.area > 0.0) samplers.push_back(std::move(s));
  }
  if (samplers.empty()) fail(ErrorCode::InvalidArgument, "scene has no samplable surface");

  double total = 0.0;
  for (const auto& s : samplers) total += s.area;
  Rng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(count);
  std::size_t attempts = 0;
  while (pts.size() < count) {
    if (++attempts > 1000 * count) fail(ErrorCode::InvalidArgument, "ground-truth sampling stalled");
    double r = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < samplers.size() && r >= samplers[k].area) r -= samplers[k++].area;
    Vec3 p = samplers[k].draw(rng);
    if (!p.allFinite()) continue;
    // Reject points swallowed by another primitive of the union.
    if (scene.sdf(p) < -1e-9) continue;
    pts.push_back(project_to_surface(scene, p));
  }
  return pts;
}

AnalyticScene canonical_scene() {
  AnalyticScene s;
  s.add(SpherePrimitive{Vec3::Zero(), 0.15});
  s.add(PlanePrimitive{Vec3::UnitZ(), -0.15});
  return s;
}

std::vector<Pose> hemisphere_poses(int count, double radius, const Vec3& target,
                                   double min_elevation_deg, double max_elevation_deg) {
  std::vector<Pose> poses;
  if (count <= 0) return poses;
  const int rings = std::min(count, 3);
  const double deg = std::numbers::pi / 180.0;
  for (int r = 0; r < rings; ++r) {
    const int in_ring = count / rings + (r < count % rings ? 1 : 0);
    const double elev =
        rings == 1 ? min_elevation_deg
                   : min_elevation_deg + (max_elevation_deg - min_elevation_deg) * r / (rings - 1);
    for (int k = 0; k < in_ring; ++k) {
      const double az = 2.0 * std::numbers::pi * (k + 0.5 * r) / in_ring;
      const Vec3 eye = target + radius * Vec3(std::cos(elev * deg) * std::cos(az),
                                              std::cos(elev * deg) * std::sin(az), std::sin(elev * deg));
      poses.push_back(Pose::look_at(eye, target));
    }
  }
  return poses;
}

std::vector<Pose> fibonacci_poses(int count, double radius, const Vec3& target) {
  std::vector<Pose> poses;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    const Vec3 eye = target + radius * Vec3(r * std::cos(phi), r * std::sin(phi), z);
    poses.push_back(Pose::look_at(eye, target));
  }
  return poses;
}

}  // namespace probsdf
