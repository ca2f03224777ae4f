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

#include "voxel_grid.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace probsdf {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int32_t, 3>> triangles;
  /// Empty, or one non-negative entry per vertex.
  std::vector<double> vertex_variance;

  double area() const;
};

namespace mc {

/// Corner k of the unit cube in the usual MC numbering:
/// 0:(0,0,0) 1:(1,0,0) 2:(1,1,0) 3:(0,1,0) 4:(0,0,1) 5:(1,0,1) 6:(1,1,1) 7:(0,1,1).
extern const std::array<Coord, 8> kCorners;
extern const std::array<std::array<int, 2>, 12> kEdgeCorners;

/// Triangle list (cube-edge triples, -1 terminated) for a sign mask where bit k
/// is set when corner k is below the iso level. Ambiguous faces always separate
/// the negative corners, so neighbouring cells agree on shared faces.
const std::array<std::int8_t, 32>& triangle_table(int mask);
/// 12-bit mask of cube edges crossed by the surface.
int edge_mask(int mask);

}  // namespace mc

struct MarchingCubesOptions {
  double iso = 0.0;
  /// Nodes exactly at iso are shifted by this amount (positive side).
  double perturbation = 1e-14;
};

/// Triangulates every cell whose 8 corner nodes are active. Vertices on
/// shared edges are merged, normals point toward field > iso, and the
/// optional variance is interpolated with the same edge parameter.
/// EmptyMesh if no cell straddles the level.
TriangleMesh marching_cubes(const VoxelGrid& grid, std::span<const double> field,
                            std::span<const double> variance = {},
                            const MarchingCubesOptions& options = {});

/// Area-weighted uniform samples on the mesh surface. EmptyMesh if the mesh
/// has no area.
std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

/// Iso-surface points: marching_cubes followed by sample_surface.
std::vector<Vec3> sample_iso_points(const VoxelGrid& grid, std::span<const double> field,
                                    std::size_t count, std::uint64_t seed);

}  // namespace probsdf
