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

#include "metrics.hpp"
#include "parallel.hpp"
#include "test_util.hpp"

#include <Eigen/Geometry>

using namespace probsdf;

namespace {

std::vector<Vec3> random_points(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<Vec3> p(n);
  for (Vec3& v : p) v = scale * Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return p;
}

const std::vector<double> kThresholds{0.02, 0.05, 0.2};

void check_bitwise_equal(const MetricsReport& a, const MetricsReport& b) {
  CHECK(a.chamfer == b.chamfer);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.completeness == b.completeness);
  REQUIRE(a.fscore.size() == b.fscore.size());
  for (std::size_t i = 0; i < a.fscore.size(); ++i) {
    CHECK(a.fscore[i].precision == b.fscore[i].precision);
    CHECK(a.fscore[i].recall == b.fscore[i].recall);
    CHECK(a.fscore[i].f == b.fscore[i].f);
  }
}

}  // namespace

TEST_CASE("hand-computed cases") {
  const std::vector<Vec3> origin{Vec3::Zero()}, e1{Vec3::UnitX()};
  CHECK(chamfer(origin, e1) == 2.0);
  const auto [acc, comp] = accuracy_completeness(origin, e1);
  CHECK(acc == 1.0);
  CHECK(comp == 1.0);

  Rng rng(1);
  const auto p = random_points(100, rng);
  CHECK(chamfer(p, p) == 0.0);
  CHECK(accuracy_completeness(p, p).first == 0.0);
  for (const FScore& f : fscore(p, p, kThresholds)) CHECK(f.f == 1.0);

  std::vector<Vec3> far = p;
  for (Vec3& v : far) v += Vec3(10, 0, 0);
  for (const FScore& f : fscore(p, far, kThresholds)) CHECK(f.f == 0.0);

  // Every prediction is matched but only half of the reference is covered.
  const std::vector<Vec3> pred{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const std::vector<Vec3> gt{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(5, 0, 0), Vec3(6, 0, 0)};
  const auto half = fscore(pred, gt, std::vector<double>{0.1});
  CHECK(half[0].precision == 1.0);
  CHECK(half[0].recall == 0.5);
  CHECK(half[0].f == 2.0 / 3.0);
}

TEST_CASE("accelerated metrics equal brute force bitwise") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_points(500, rng, 0.1 + 0.1 * trial);
    const auto g = random_points(500, rng, 0.1 + 0.1 * trial);
    check_bitwise_equal(evaluate(p, g, kThresholds), evaluate_brute(p, g, kThresholds));
    CHECK(nearest_sq_distances(p, g) == nearest_sq_distances_brute(p, g));
  }
}

TEST_CASE("nearest neighbours on awkward distributions") {
  Rng rng(3);
  std::vector<Vec3> clustered;
  for (int i = 0; i < 400; ++i) clustered.push_back(Vec3(rng.normal(), rng.normal(), rng.normal()) * 1e-3);
  for (int i = 0; i < 5; ++i) clustered.push_back(Vec3(50.0 * i, -20, 3));  // far outliers
  clustered.push_back(clustered.front());                                     // duplicate
  std::vector<Vec3> planar;
  for (int i = 0; i < 300; ++i) planar.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0));
  const auto queries = random_points(300, rng, 60.0);
  CHECK(nearest_sq_distances(queries, clustered) == nearest_sq_distances_brute(queries, clustered));
  CHECK(nearest_sq_distances(queries, planar) == nearest_sq_distances_brute(queries, planar));
  CHECK(nearest_sq_distances(planar, clustered) == nearest_sq_distances_brute(planar, clustered));
  const std::vector<Vec3> single{Vec3(1, 2, 3)};
  CHECK(nearest_sq_distances(queries, single) == nearest_sq_distances_brute(queries, single));
}

TEST_CASE("metrics are invariant under rigid motion and scale as expected") {
  Rng rng(4);
  const auto p = random_points(300, rng, 0.2);
  const auto g = random_points(300, rng, 0.2);
  const MetricsReport base = evaluate(p, g, kThresholds);

  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Vec3 t(0.5, -2.0, 7.0);
  std::vector<Vec3> p2, g2, p3, g3;
  for (const Vec3& v : p) p2.push_back(R * v + t);
  for (const Vec3& v : g) g2.push_back(R * v + t);
  const MetricsReport moved = evaluate(p2, g2, kThresholds);
  CHECK(std::abs(moved.chamfer - base.chamfer) <= 1e-9);
  CHECK(std::abs(moved.accuracy - base.accuracy) <= 1e-9);
  CHECK(std::abs(moved.completeness - base.completeness) <= 1e-9);

  const double s = 3.0;
  for (const Vec3& v : p) p3.push_back(s * v);
  for (const Vec3& v : g) g3.push_back(s * v);
  const MetricsReport scaled = evaluate(p3, g3, kThresholds);
  CHECK(scaled.chamfer == doctest::Approx(s * s * base.chamfer).epsilon(1e-12));
  CHECK(scaled.accuracy == doctest::Approx(s * base.accuracy).epsilon(1e-12));
  CHECK(scaled.completeness == doctest::Approx(s * base.completeness).epsilon(1e-12));
}

TEST_CASE("F-score is monotone in the threshold") {
  Rng rng(5);
  const auto p = random_points(400, rng, 0.3);
  const auto g = random_points(400, rng, 0.3);
  std::vector<double> th;
  for (int i = 1; i <= 40; ++i) th.push_back(0.005 * i);
  const auto f = fscore(p, g, th);
  for (std::size_t i = 1; i < f.size(); ++i) {
    CHECK(f[i].f >= f[i - 1].f);
    CHECK(f[i].precision >= f[i - 1].precision);
    CHECK(f[i].recall >= f[i - 1].recall);
  }
}

TEST_CASE("metrics do not depend on the worker count") {
  Rng rng(6);
  const auto p = random_points(20000, rng, 0.3);
  const auto g = random_points(15000, rng, 0.3);
  parallel::set_workers(1);
  const MetricsReport a = evaluate(p, g, kThresholds);
  parallel::set_workers(4);
  const MetricsReport b = evaluate(p, g, kThresholds);
  parallel::set_workers(1);
  check_bitwise_equal(a, b);
  CHECK(a.f_at(0.05) == a.fscore[1].f);
  CHECK(std::isnan(a.f_at(0.03)));
}

TEST_CASE("metric argument checks") {
  const std::vector<Vec3> some{Vec3::Zero()}, none;
  try {
    evaluate(none, some, kThresholds);
    FAIL("expected EmptySet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySet);
  }
  CHECK_THROWS_AS(evaluate(some, none, kThresholds), Error);
  CHECK_THROWS_AS(evaluate(some, some, std::vector<double>{0.0}), Error);
}
