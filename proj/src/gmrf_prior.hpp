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

#include "sparse.hpp"
#include "tsdf.hpp"
#include "voxel_grid.hpp"

namespace probsdf {

enum class AnchorMode {
  /// Every active node with TSDF weight > 0.
  Observed,
  /// Only band-boundary nodes (fewer active stencil neighbors than the stencil size).
  BoundaryShell,
};

/// Smoothness + anchoring prior. lambda and lambda_b are in 1/m^2. Both
/// must be comparable to the data precision (1/sigma^2, about 1e5 per
/// sample at 5 mm voxels) to have any effect; the defaults are tuned for that.
struct PriorSpec {
  double lambda = 1000.0;
  double lambda_b = 1000.0;
  int stencil = 6;
  WeightScheme weight_scheme = WeightScheme::Uniform;
  AnchorMode anchor_mode = AnchorMode::Observed;
};

struct Prior {
  SparseMatrix Q0;
  Vector b0;
  /// Anchor target per node (TSDF value); meaningful where anchored[i].
  Vector anchor_values;
  std::vector<char> anchored;
  /// Nodes with a direct diagonal term (anchor with lambda_b > 0, or pinned).
  std::vector<char> constrained;
  /// Couplings present in Q0 (empty when lambda = 0).
  EdgeList edges;
};

/// x^T Q0 x = lambda sum_E w_ij (x_i - x_j)^2 + lambda_b sum_anchor x_i^2,
/// b0_i = lambda_b * tsdf_i on anchors.
Prior assemble_prior(const VoxelGrid& grid, const TsdfVolume& tsdf, const PriorSpec& spec);

/// Nodes whose graph component carries no constraint (constraint[i] > 0 on no
/// member). Such components make Q singular.
std::vector<std::int32_t> unconstrained_nodes(std::size_t n, const EdgeList& edges,
                                              std::span<const double> constraint);

/// Adds weight * (x_i - target_i)^2 for the given nodes to (Q0, b0).
void pin_nodes(Prior& prior, std::span<const std::int32_t> nodes, std::span<const double> targets,
               double weight);

}  // namespace probsdf
