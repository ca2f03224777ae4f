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

#include "test_util.hpp"
#include "tsdf.hpp"
#include "voxel_grid.hpp"

#include <algorithm>
#include <set>

using namespace probsdf;
using probsdf::testing::cube_grid;
using probsdf::testing::dense_volume;

TEST_CASE("world_to_voxel arithmetic") {
  GridConfig cfg;
  cfg.origin = Vec3(0.3, -1.0, 2.0);
  cfg.voxel_size = 0.013;
  CHECK(world_to_voxel(cfg.origin, cfg).norm() == 0.0);

  GridConfig half;
  half.voxel_size = 0.5;
  const Vec3 q = world_to_voxel(Vec3(1, 1, 0.25), half);
  CHECK(q.x() == 2.0);
  CHECK(q.y() == 2.0);
  CHECK(q.z() == 0.5);
}

TEST_CASE("world/voxel round trip") {
  GridConfig cfg;
  cfg.origin = Vec3(-0.25, 0.1, 0.7);
  cfg.voxel_size = 0.005;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3 back = voxel_to_world(world_to_voxel(p, cfg), cfg);
    CHECK((back - p).norm() <= 1e-15 * (1.0 + p.norm()) * 4);
  }
}

TEST_CASE("block addressing handles negative coordinates") {
  GridConfig cfg;
  cfg.block_size = 8;
  const Coord c{-1, -8, -9};
  const Coord b = cfg.block_of(c);
  CHECK(b == Coord{-1, -1, -2});
  CHECK(cfg.voxel_in_block(b, cfg.slot_of(c)) == c);
}

TEST_CASE("activate_narrow_band examples") {
  GridConfig cfg;
  const double tau = 0.02;
  SUBCASE("everything outside the band") {
    TsdfVolume vol(cfg, tau);
    for (int i = 0; i < 10; ++i) vol.set({i, 0, 0}, static_cast<float>(2 * tau), 1.0f);
    CHECK_THROWS_AS(activate_narrow_band(vol, 1.0, tau), Error);
  }
  SUBCASE("everything on the surface") {
    TsdfVolume vol(cfg, tau);
    for (int i = 0; i < 10; ++i) vol.set({i, 3, -2}, 0.0f, 1.0f);
    CHECK(activate_narrow_band(vol, 1.0, tau).size() == 10);
  }
  SUBCASE("unobserved voxels are never active") {
    TsdfVolume vol(cfg, tau);
    vol.set({0, 0, 0}, 0.0f, 0.0f);
    vol.set({1, 0, 0}, 0.0f, 1.0f);
    CHECK(activate_narrow_band(vol, 1.0, tau).size() == 1);
  }
  SUBCASE("alpha outside [1,3]") {
    TsdfVolume vol(cfg, tau);
    vol.set({0, 0, 0}, 0.0f, 1.0f);
    CHECK_THROWS_AS(activate_narrow_band(vol, 0.5, tau), Error);
    CHECK_THROWS_AS(activate_narrow_band(vol, 3.5, tau), Error);
  }
}

TEST_CASE("sphere band matches a dense scan and ignores block size") {
  const double tau = 0.5;
  auto sphere = [](const Vec3& p) { return p.norm() - 5.0; };
  std::set<Coord> expected;
  GridConfig cfg;
  cfg.voxel_size = 0.25;
  for (int z = -30; z <= 30; ++z)
    for (int y = -30; y <= 30; ++y)
      for (int x = -30; x <= 30; ++x) {
        const double v = std::clamp(sphere(node_position({x, y, z}, cfg)), -tau, tau);
        if (std::abs(static_cast<double>(static_cast<float>(v))) <= 2 * 0.2) expected.insert({x, y, z});
      }
  for (int bs : {4, 8}) {
    cfg.block_size = bs;
    const TsdfVolume vol = dense_volume(cfg, tau, -30, 30, sphere);
    const VoxelGrid grid = activate_narrow_band(vol, 2.0, 0.2);
    CHECK(grid.size() == expected.size());
    CHECK(std::equal(grid.coords().begin(), grid.coords().end(), expected.begin(), expected.end()));
    CHECK(grid.count_active_slots() == grid.size());
  }
}

TEST_CASE("index bijection in lexicographic order") {
  GridConfig cfg;
  Rng rng(11);
  std::vector<Coord> coords;
  for (int i = 0; i < 500; ++i)
    coords.push_back({static_cast<int>(rng.uniform(-20, 20)), static_cast<int>(rng.uniform(-20, 20)),
                      static_cast<int>(rng.uniform(-20, 20))});
  coords.push_back(coords.front());  // duplicate
  const VoxelGrid grid = VoxelGrid::from_coords(cfg, coords);
  CHECK(std::is_sorted(grid.coords().begin(), grid.coords().end()));
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid.index_of(grid.coord(i)) == static_cast<int>(i));
  CHECK(grid.index_of({1000, 0, 0}) == -1);
}

TEST_CASE("neighbor_edges examples") {
  GridConfig cfg;
  CHECK(neighbor_edges(VoxelGrid::from_coords(cfg, {{0, 0, 0}}), 6, WeightScheme::Uniform).edges.empty());

  const EdgeList pair = neighbor_edges(VoxelGrid::from_coords(cfg, {{0, 0, 0}, {1, 0, 0}}), 6,
                                       WeightScheme::Uniform);
  REQUIRE(pair.edges.size() == 1);
  CHECK(pair.edges[0].w == 1.0);

  CHECK(neighbor_edges(cube_grid(3), 6, WeightScheme::Uniform).edges.size() == 54);
  CHECK_THROWS_AS(neighbor_edges(cube_grid(2), 7, WeightScheme::Uniform), Error);
}

TEST_CASE("neighbor_edges agrees with an all-pairs scan") {
  GridConfig cfg;
  Rng rng(5);
  std::vector<Coord> coords;
  for (int i = 0; i < 300; ++i)
    coords.push_back({static_cast<int>(rng.uniform(0, 8)), static_cast<int>(rng.uniform(0, 8)),
                      static_cast<int>(rng.uniform(0, 8))});
  const VoxelGrid grid = VoxelGrid::from_coords(cfg, coords);
  for (int stencil : {6, 18, 26}) {
    const int max_l1 = stencil == 6 ? 1 : stencil == 18 ? 2 : 3;
    std::set<std::pair<int, int>> expected;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        const Coord a = grid.coord(i), b = grid.coord(j);
        const int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y), dz = std::abs(a.z - b.z);
        if (std::max({dx, dy, dz}) == 1 && dx + dy + dz <= max_l1)
          expected.insert({static_cast<int>(i), static_cast<int>(j)});
      }
    const EdgeList list = neighbor_edges(grid, stencil, WeightScheme::InverseDistance);
    std::set<std::pair<int, int>> got;
    for (const Edge& e : list.edges) {
      CHECK(e.i < e.j);
      got.insert({e.i, e.j});
      const Coord a = grid.coord(static_cast<std::size_t>(e.i)), b = grid.coord(static_cast<std::size_t>(e.j));
      const double d = std::sqrt(double((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                                        (a.z - b.z) * (a.z - b.z)));
      CHECK(e.w == doctest::Approx(1.0 / d).epsilon(1e-15));
    }
    CHECK(got.size() == list.edges.size());  // duplicate-free
    CHECK(got == expected);
  }
}

TEST_CASE("trilinear stencil examples") {
  const VoxelGrid grid = cube_grid(4, 0.1);
  const Stencil at_node = trilinear_stencil(Vec3(0.1, 0.2, 0.1), grid);
  REQUIRE(at_node.count == 1);
  CHECK(at_node.entries[0].weight == 1.0);
  CHECK(at_node.entries[0].index == grid.index_of({1, 2, 1}));

  const Stencil centroid = trilinear_stencil(Vec3(0.15, 0.15, 0.15), grid);
  REQUIRE(centroid.count == 8);
  for (const auto& e : centroid) CHECK(e.weight == doctest::Approx(0.125).epsilon(1e-14));

  CHECK_THROWS_AS(trilinear_stencil(Vec3(5, 5, 5), grid), Error);
}

TEST_CASE("trilinear weights reproduce linear fields") {
  const VoxelGrid grid = cube_grid(6, 0.05);
  const Vec3 a(0.7, -1.3, 2.1);
  const double b = 0.25;
  Vector field(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) field[i] = a.dot(grid.position(i)) + b;
  Rng rng(17);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 p(rng.uniform(0, 0.25), rng.uniform(0, 0.25), rng.uniform(0, 0.25));
    const Stencil s = trilinear_stencil(p, grid);
    double sum = 0.0, value = 0.0;
    for (const auto& e : s) {
      CHECK(e.weight >= 0.0);
      sum += e.weight;
      value += e.weight * field[static_cast<std::size_t>(e.index)];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-14);
    CHECK(std::abs(value - (a.dot(p) + b)) <= 1e-12);
  }
}

TEST_CASE("partial stencils renormalize or reject") {
  GridConfig cfg;
  cfg.voxel_size = 1.0;
  // Bottom face of the unit cell only.
  const VoxelGrid four = VoxelGrid::from_coords(cfg, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  const Stencil s = trilinear_stencil(Vec3(0.5, 0.5, 0.5), four);
  REQUIRE(s.count == 4);
  for (const auto& e : s) CHECK(e.weight == doctest::Approx(0.25));

  const VoxelGrid three = VoxelGrid::from_coords(cfg, {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
  Stencil out;
  CHECK_FALSE(try_trilinear_stencil(Vec3(0.5, 0.5, 0.5), three, out));
  // On a shared face only the face corners carry weight, so three of eight suffice.
  CHECK(try_trilinear_stencil(Vec3(0.5, 0.0, 0.0), three, out));
  CHECK(out.count == 2);
}
