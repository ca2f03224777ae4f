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

#include "gmrf_prior.hpp"
#include "posterior.hpp"
#include "test_util.hpp"

#include <Eigen/Eigenvalues>

using namespace probsdf;
using probsdf::testing::cube_grid;

namespace {

/// Volume with the given value on every node of `grid`, observed where mask is set.
TsdfVolume volume_for(const VoxelGrid& grid, const Vector& values, const std::vector<char>& observed) {
  TsdfVolume vol(grid.config(), 10.0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    vol.set(grid.coord(i), static_cast<float>(values[i]), observed[i] ? 1.0f : 0.0f);
  return vol;
}

}  // namespace

TEST_CASE("pure anchor prior is the identity") {
  const VoxelGrid grid = cube_grid(3);
  Vector v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.25 * static_cast<double>(i % 7) - 0.5;
  const TsdfVolume vol = volume_for(grid, v, std::vector<char>(grid.size(), 1));
  PriorSpec spec;
  spec.lambda = 0.0;
  spec.lambda_b = 1.0;
  const Prior prior = assemble_prior(grid, vol, spec);
  CHECK((prior.Q0.to_dense() - Eigen::MatrixXd::Identity(27, 27)).norm() == 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(prior.b0[i] == static_cast<double>(static_cast<float>(v[i])));
  CHECK(prior.edges.edges.empty());

  const MapResult map = map_solve(prior, ObservationSet{}, PcgOptions{});
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(map.mu[i] == doctest::Approx(prior.b0[i]).epsilon(1e-12));
}

TEST_CASE("two-node Laplacian") {
  GridConfig cfg;
  const VoxelGrid grid = VoxelGrid::from_coords(cfg, {{0, 0, 0}, {1, 0, 0}});
  const TsdfVolume vol = volume_for(grid, {0.0, 0.0}, {1, 1});
  PriorSpec spec;
  spec.lambda = 1.0;
  spec.lambda_b = 0.0;
  const Prior prior = assemble_prior(grid, vol, spec);
  Eigen::Matrix2d expected;
  expected << 1, -1, -1, 1;
  CHECK((prior.Q0.to_dense() - expected).norm() == 0.0);
  const Vector ones{1.0, 1.0};
  for (double r : spmv(prior.Q0, ones)) CHECK(r == 0.0);
}

TEST_CASE("quadratic form matches the edge sum") {
  const VoxelGrid grid = cube_grid(5, 0.01);
  Rng rng(21);
  Vector values(grid.size());
  std::vector<char> observed(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = rng.uniform(-0.02, 0.02);
    observed[i] = rng.uniform() < 0.6;
  }
  const TsdfVolume vol = volume_for(grid, values, observed);
  for (int stencil : {6, 18, 26})
    for (WeightScheme scheme : {WeightScheme::Uniform, WeightScheme::InverseDistance}) {
      PriorSpec spec;
      spec.lambda = 3.5;
      spec.lambda_b = 0.75;
      spec.stencil = stencil;
      spec.weight_scheme = scheme;
      const Prior prior = assemble_prior(grid, vol, spec);
      const Eigen::MatrixXd Q = prior.Q0.to_dense();
      CHECK((Q - Q.transpose()).cwiseAbs().maxCoeff() == 0.0);
      for (int trial = 0; trial < 20; ++trial) {
        Vector x(grid.size());
        for (double& xi : x) xi = rng.normal();
        double direct = 0.0;
        for (const Edge& e : prior.edges.edges) {
          const double d = x[static_cast<std::size_t>(e.i)] - x[static_cast<std::size_t>(e.j)];
          direct += spec.lambda * e.w * d * d;
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
          if (observed[i]) direct += spec.lambda_b * x[i] * x[i];
        const double form = dot(x, spmv(prior.Q0, x));
        CHECK(std::abs(form - direct) <= 1e-10 * std::abs(direct));
        CHECK(form >= -1e-10 * dot(x, x));
      }
      for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(static_cast<bool>(prior.anchored[i]) == static_cast<bool>(observed[i]));
        if (!observed[i]) CHECK(prior.b0[i] == 0.0);
        else CHECK(prior.b0[i] == spec.lambda_b * static_cast<double>(static_cast<float>(values[i])));
      }
    }
}

TEST_CASE("Laplacian-only prior annihilates constants and is PSD") {
  const VoxelGrid grid = cube_grid(4);
  const TsdfVolume vol = volume_for(grid, Vector(grid.size(), 0.0), std::vector<char>(grid.size(), 1));
  PriorSpec spec;
  spec.lambda = 2.0;
  spec.lambda_b = 0.0;
  spec.stencil = 26;
  const Prior prior = assemble_prior(grid, vol, spec);
  for (double r : spmv(prior.Q0, Vector(grid.size(), 1.0))) CHECK(std::abs(r) <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(prior.Q0.to_dense());
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("anchors on every component make the prior definite") {
  GridConfig cfg;
  // Two separate 2x2x2 clusters with one observed node each.
  std::vector<Coord> coords;
  for (int z = 0; z < 2; ++z)
    for (int y = 0; y < 2; ++y)
      for (int x = 0; x < 2; ++x) {
        coords.push_back({x, y, z});
        coords.push_back({x + 10, y, z});
      }
  const VoxelGrid grid = VoxelGrid::from_coords(cfg, coords);
  std::vector<char> observed(grid.size(), 0);
  observed[0] = 1;
  observed[grid.size() - 1] = 1;
  const TsdfVolume vol = volume_for(grid, Vector(grid.size(), 0.01), observed);
  PriorSpec spec;
  spec.lambda = 1.0;
  spec.lambda_b = 0.5;
  const Prior prior = assemble_prior(grid, vol, spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(prior.Q0.to_dense());
  CHECK(eig.eigenvalues().minCoeff() > 1e-6);

  Vector constraint(grid.size(), 0.0);
  constraint[0] = 1.0;
  const auto loose = unconstrained_nodes(grid.size(), prior.edges, constraint);
  CHECK(loose.size() == 8);
  for (auto i : loose) CHECK(grid.coord(static_cast<std::size_t>(i)).x >= 10);
}

TEST_CASE("components without anchors are refused by map_solve") {
  GridConfig cfg;
  const VoxelGrid grid = VoxelGrid::from_coords(cfg, {{0, 0, 0}, {1, 0, 0}, {5, 0, 0}, {6, 0, 0}});
  const TsdfVolume vol = volume_for(grid, Vector(4, 0.0), {1, 0, 0, 0});
  PriorSpec spec;
  spec.lambda = 1.0;
  spec.lambda_b = 1.0;
  Prior prior = assemble_prior(grid, vol, spec);
  try {
    map_solve(prior, ObservationSet{}, PcgOptions{});
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularSystem);
  }
  // Pinning the loose component makes the system solvable.
  const Vector targets{0.0, 0.0, 0.3, 0.3};
  const std::vector<std::int32_t> loose{2, 3};
  pin_nodes(prior, loose, targets, 1e-3);
  CHECK(prior.Q0.coeff(2, 2) == doctest::Approx(1.0 + 1e-3));
  const MapResult map = map_solve(prior, ObservationSet{}, PcgOptions{});
  CHECK(map.mu[2] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(map.mu[3] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("boundary-shell anchors skip interior nodes") {
  const VoxelGrid grid = cube_grid(5);
  const TsdfVolume vol = volume_for(grid, Vector(grid.size(), 0.0), std::vector<char>(grid.size(), 1));
  PriorSpec spec;
  spec.anchor_mode = AnchorMode::BoundaryShell;
  const Prior prior = assemble_prior(grid, vol, spec);
  std::size_t anchored = 0;
  for (char a : prior.anchored) anchored += a ? 1 : 0;
  CHECK(anchored == 125 - 27);
}

TEST_CASE("assemble_prior argument checks") {
  const VoxelGrid grid = cube_grid(2);
  const TsdfVolume vol = volume_for(grid, Vector(8, 0.0), std::vector<char>(8, 1));
  PriorSpec spec;
  spec.lambda = -1.0;
  CHECK_THROWS_AS(assemble_prior(grid, vol, spec), Error);
  CHECK_THROWS_AS(assemble_prior(VoxelGrid{}, vol, PriorSpec{}), Error);
}
