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
#include "voxel_grid.hpp"

#include <limits>
#include <span>

namespace probsdf {

struct Aabb {
  Vec3 min = Vec3::Constant(-std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(std::numeric_limits<double>::infinity());
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Block-sparse projective TSDF. Blocks are allocated around observed surface
/// points (+-tau along each ray); only voxels inside `bounds` are integrated.
class TsdfVolume {
 public:
  struct Block {
    std::vector<float> value;
    std::vector<float> weight;
  };
  using BlockMap = std::unordered_map<Coord, Block, CoordHash>;

  TsdfVolume(const GridConfig& cfg, double tau, const Aabb& bounds = {});

  const GridConfig& config() const { return cfg_; }
  double tau() const { return tau_; }
  const Aabb& bounds() const { return bounds_; }
  const BlockMap& blocks() const { return blocks_; }
  BlockMap& mutable_blocks() { return blocks_; }

  /// Returns false when the voxel's block is not allocated.
  bool lookup(const Coord& v, float& value, float& weight) const;
  Block& ensure_block(const Coord& block);
  /// Writes one voxel, allocating its block (used when restoring from disk).
  void set(const Coord& v, float value, float weight);

  std::size_t observed_count() const;

 private:
  GridConfig cfg_;
  double tau_;
  Aabb bounds_;
  BlockMap blocks_;
};

/// Allocates the blocks touched by the +-tau segment around every valid
/// pixel's surface point.
void allocate_blocks(TsdfVolume& volume, const DepthFrame& frame);

/// Weighted-average update with constant per-frame weight 1. Voxels whose raw
/// projective distance is <= -tau, or that fall outside the frustum or on an
/// invalid pixel, are left untouched.
void integrate_frame(TsdfVolume& volume, const DepthFrame& frame);

/// Fold of integrate_frame over frames. NoObservations if nothing was observed.
TsdfVolume bootstrap(std::span<const DepthFrame> frames, const GridConfig& cfg, double tau,
                     const Aabb& bounds = {});

}  // namespace probsdf
