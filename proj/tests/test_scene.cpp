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
#include <doctest.h>

#include "scene.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace probsdf;

namespace {

RenderOptions small_camera() {
  RenderOptions ro;
  ro.width = 101;
  ro.height = 81;
  ro.K = {100.0, 100.0, 50.0, 40.0};
  return ro;
}

/// Smallest positive ray parameter hitting a sphere, or +inf.
double ray_sphere(const Vec3& o, const Vec3& d, const Vec3& c, double r) {
  const Vec3 oc = o - c;
  const double b = oc.dot(d), cc = oc.squaredNorm() - r * r;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double t = -b - std::sqrt(disc);
  return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

double ray_plane(const Vec3& o, const Vec3& d, const Vec3& n, double offset) {
  const double den = n.dot(d);
  if (std::abs(den) < 1e-15) return std::numeric_limits<double>::infinity();
  const double t = (offset - n.dot(o)) / den;
  return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

}  // namespace

TEST_CASE("render_depth analytic examples") {
  const RenderOptions ro = small_camera();
  const DepthFrame plane = render_depth(AnalyticScene({PlanePrimitive{Vec3(0, 0, -1), -2.0}}), Pose{}, ro);
  CHECK(std::abs(plane.at(50, 40) - 2.0f) <= 1e-6f);

  const DepthFrame sphere =
      render_depth(AnalyticScene({SpherePrimitive{Vec3(0, 0, 3), 1.0}}), Pose{}, ro);
  CHECK(std::abs(sphere.at(50, 40) - 2.0f) <= 1e-6f);
  CHECK(sphere.at(0, 0) == 0.0f);  // miss
}

TEST_CASE("noiseless depth matches closed-form intersections") {
  const AnalyticScene scene = canonical_scene();
  const RenderOptions ro = small_camera();
  for (const Pose& pose : hemisphere_poses(6, 0.6, Vec3::Zero())) {
    const DepthFrame f = render_depth(scene, pose, ro);
    double worst = 0.0;
    int hits = 0;
    for (int y = 0; y < f.height; ++y)
      for (int x = 0; x < f.width; ++x) {
        const Vec3 ray_cam = pixel_ray(x, y, ro.K);
        const Vec3 dir = (pose.R * ray_cam).normalized();
        const double t = std::min(ray_sphere(pose.t, dir, Vec3::Zero(), 0.15),
                                  ray_plane(pose.t, dir, Vec3::UnitZ(), -0.15));
        const double expected = t <= ro.max_range ? t / ray_cam.norm() : 0.0;
        if (expected == 0.0 || f.at(x, y) == 0.0f) {
          CHECK(f.at(x, y) == doctest::Approx(expected));
          continue;
        }
        ++hits;
        worst = std::max(worst, std::abs(static_cast<double>(f.at(x, y)) - expected));
        const Vec3 p = backproject(x, y, static_cast<double>(f.at(x, y)), ro.K, pose);
        CHECK(std::abs(scene.sdf(p)) <= 1e-5);
      }
    CHECK(hits > 0);
    // float32 storage dominates the remaining error.
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("noisy rendering is reproducible") {
  const AnalyticScene scene = canonical_scene();
  const Pose pose = hemisphere_poses(3, 0.6, Vec3::Zero())[1];
  const NoiseModel noise;
  const RenderOptions ro = small_camera();
  const DepthFrame a = render_depth(scene, pose, ro, &noise, 42, 1);
  const DepthFrame b = render_depth(scene, pose, ro, &noise, 42, 1);
  const DepthFrame c = render_depth(scene, pose, ro, &noise, 43, 1);
  const DepthFrame d = render_depth(scene, pose, ro, &noise, 42, 2);
  const DepthFrame clean = render_depth(scene, pose, ro);
  CHECK(a.depth == b.depth);
  CHECK(a.depth != c.depth);
  CHECK(a.depth != d.depth);
  // Residuals have roughly the modelled spread.
  double sum = 0.0, sum2 = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < a.depth.size(); ++i) {
    if (clean.depth[i] == 0.0f) continue;
    const double r = double(a.depth[i]) - double(clean.depth[i]);
    const double s = noise.sigma_depth(clean.depth[i]);
    sum += r / s;
    sum2 += (r / s) * (r / s);
    ++n;
  }
  CHECK(std::abs(sum / n) <= 0.1);
  CHECK(std::sqrt(sum2 / n) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("ground truth on a sphere") {
  const AnalyticScene scene({SpherePrimitive{Vec3(0.1, -0.2, 0.3), 0.25}});
  for (const Vec3& p : sample_ground_truth(scene, 5000, 1))
    CHECK(std::abs((p - Vec3(0.1, -0.2, 0.3)).norm() - 0.25) <= 1e-8);
}

TEST_CASE("ground truth on a clipped plane") {
  const Vec3 n = Vec3(0.2, 0.1, 1.0).normalized();
  const AnalyticScene scene({PlanePrimitive{n, 0.05}});
  const Aabb region{Vec3(-0.5, -0.5, -0.5), Vec3(0.5, 0.5, 0.5)};
  const auto pts = sample_ground_truth(scene, 5000, 2, region);
  CHECK(pts.size() == 5000);
  for (const Vec3& p : pts) {
    CHECK(std::abs(n.dot(p) - 0.05) <= 1e-8);
    CHECK(region.contains(p));
  }
  CHECK_THROWS_AS(sample_ground_truth(scene, 10, 2), Error);  // unbounded plane
}

TEST_CASE("ground truth splits by area") {
  const AnalyticScene scene({SpherePrimitive{Vec3(-1, 0, 0), 0.1}, SpherePrimitive{Vec3(1, 0, 0), 0.2}});
  const std::size_t n = 20000;
  std::size_t first = 0;
  for (const Vec3& p : sample_ground_truth(scene, n, 3)) first += p.x() < 0 ? 1 : 0;
  const double share = 0.01 / (0.01 + 0.04);
  const double sd = std::sqrt(n * share * (1 - share));
  CHECK(std::abs(static_cast<double>(first) - n * share) <= 3 * sd);
}

TEST_CASE("canonical scene ground truth") {
  const AnalyticScene scene = canonical_scene();
  const Aabb region{Vec3(-0.3, -0.3, -0.2), Vec3(0.3, 0.3, 0.2)};
  const auto pts = sample_ground_truth(scene, 20000, 4, region);
  CHECK(pts.size() == 20000);
  std::size_t on_sphere = 0;
  for (const Vec3& p : pts) {
    CHECK(std::abs(scene.sdf(p)) <= 1e-8);
    CHECK(region.contains(p));
    on_sphere += std::abs(p.norm() - 0.15) <= 1e-8 ? 1 : 0;
  }
  const double sphere_area = 4 * std::numbers::pi * 0.15 * 0.15, plane_area = 0.36;
  CHECK(static_cast<double>(on_sphere) / 20000.0 ==
        doctest::Approx(sphere_area / (sphere_area + plane_area)).epsilon(0.05));
  CHECK(sample_ground_truth(scene, 100, 4, region) == sample_ground_truth(scene, 100, 4, region));
}

TEST_CASE("primitive distances") {
  CHECK(primitive_sdf(SpherePrimitive{Vec3::Zero(), 1.0}, Vec3(3, 0, 0)) == 2.0);
  CHECK(primitive_sdf(BoxPrimitive{Vec3::Zero(), Vec3(1, 2, 3)}, Vec3(0, 0, 5)) == doctest::Approx(2.0));
  CHECK(primitive_sdf(BoxPrimitive{Vec3::Zero(), Vec3(1, 2, 3)}, Vec3(0.5, 0, 0)) == doctest::Approx(-0.5));
  CHECK(primitive_sdf(BoxPrimitive{Vec3::Zero(), Vec3(1, 1, 1)}, Vec3(2, 2, 1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(primitive_sdf(PlanePrimitive{Vec3(0, 0, 2), 1.0}, Vec3(0, 0, 3)) == doctest::Approx(2.0));
  const AnalyticScene s = canonical_scene();
  CHECK(s.sdf(Vec3(0, 0, 0.5)) == doctest::Approx(0.35));
  CHECK((s.gradient(Vec3(0.4, 0, 0.3)) - Vec3(0.8, 0, 0.6)).norm() <= 1e-6);
  CHECK(std::abs(project_to_surface(s, Vec3(0.05, 0.2, 0.1)).norm() - 0.15) <= 1e-10);
}

TEST_CASE("pose generators") {
  const auto poses = hemisphere_poses(24, 0.6, Vec3::Zero());
  REQUIRE(poses.size() == 24);
  for (const Pose& p : poses) {
    CHECK(p.is_rigid());
    CHECK(p.t.norm() == doctest::Approx(0.6));
    const double elev = std::asin(p.t.z() / 0.6) * 180.0 / std::numbers::pi;
    CHECK(elev >= 20.0 - 1e-9);
    CHECK(elev <= 70.0 + 1e-9);
    // Optical axis points at the target.
    CHECK((p.R.col(2) + p.t.normalized()).norm() <= 1e-12);
  }
  const auto fib = fibonacci_poses(10, 1.5, Vec3(0, 0, 1));
  REQUIRE(fib.size() == 10);
  for (const Pose& p : fib) {
    CHECK((p.t - Vec3(0, 0, 1)).norm() == doctest::Approx(1.5));
    CHECK(p.is_rigid());
  }
}
