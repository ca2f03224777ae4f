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

#include "common.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace probsdf {

class TsdfVolume;

/// Integer voxel coordinate. Node (i,j,k) sits at origin + (i,j,k) * voxel_size.
struct Coord {
  std::int32_t x = 0, y = 0, z = 0;
  auto operator<=>(const Coord&) const = default;
  Coord operator+(const Coord& o) const { return {x + o.x, y + o.y, z + o.z}; }
};

struct CoordHash {
  std::size_t operator()(const Coord& c) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(c.x) * 73856093ull;
    h ^= static_cast<std::uint32_t>(c.y) * 19349663ull;
    h ^= static_cast<std::uint32_t>(c.z) * 83492791ull;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

inline std::int32_t floor_div(std::int32_t a, std::int32_t b) {
  std::int32_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

struct GridConfig {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 0.005;  // meters
  int block_size = 8;

  void validate() const;
  Coord block_of(const Coord& v) const {
    return {floor_div(v.x, block_size), floor_div(v.y, block_size), floor_div(v.z, block_size)};
  }
  int slot_of(const Coord& v) const {
    const int bx = v.x - floor_div(v.x, block_size) * block_size;
    const int by = v.y - floor_div(v.y, block_size) * block_size;
    const int bz = v.z - floor_div(v.z, block_size) * block_size;
    return (bz * block_size + by) * block_size + bx;
  }
  Coord voxel_in_block(const Coord& block, int slot) const {
    const int bx = slot % block_size;
    const int by = (slot / block_size) % block_size;
    const int bz = slot / (block_size * block_size);
    return {block.x * block_size + bx, block.y * block_size + by, block.z * block_size + bz};
  }
  int block_volume() const { return block_size * block_size * block_size; }
};

Vec3 world_to_voxel(const Vec3& p, const GridConfig& cfg);
Vec3 voxel_to_world(const Vec3& q, const GridConfig& cfg);
inline Vec3 node_position(const Coord& c, const GridConfig& cfg) {
  return cfg.origin + cfg.voxel_size * Vec3(c.x, c.y, c.z);
}

/// Sparse narrow-band domain: hashed blocks of node slots plus a bijection
/// between active coordinates and unknown indices 0..N-1 (lexicographic order).
class VoxelGrid {
 public:
  VoxelGrid() = default;
  /// Builds the grid from an arbitrary list of coordinates; duplicates are merged.
  static VoxelGrid from_coords(const GridConfig& cfg, std::vector<Coord> coords);

  const GridConfig& config() const { return cfg_; }
  std::size_t size() const { return coords_.size(); }
  std::size_t block_count() const { return blocks_.size(); }

  /// Index of an active node or -1.
  std::int32_t index_of(const Coord& c) const {
    auto it = blocks_.find(cfg_.block_of(c));
    if (it == blocks_.end()) return -1;
    return it->second[static_cast<std::size_t>(cfg_.slot_of(c))];
  }
  const Coord& coord(std::size_t i) const { return coords_[i]; }
  const std::vector<Coord>& coords() const { return coords_; }
  Vec3 position(std::size_t i) const { return node_position(coords_[i], cfg_); }
  bool has_block(const Coord& block) const { return blocks_.count(block) != 0; }

  /// Number of active slots summed over allocated blocks (equals size()).
  std::size_t count_active_slots() const;

 private:
  GridConfig cfg_;
  std::unordered_map<Coord, std::vector<std::int32_t>, CoordHash> blocks_;
  std::vector<Coord> coords_;
};

VoxelGrid activate_narrow_band(const TsdfVolume& tsdf, double alpha, double tau);

enum class WeightScheme { Uniform, InverseDistance };

struct Edge {
  std::int32_t i, j;
  double w;
};

struct EdgeList {
  std::vector<Edge> edges;
  int stencil = 6;
};

/// Offsets (lexicographically positive half) of a 6/18/26 stencil.
std::vector<Coord> half_stencil(int stencil);

EdgeList neighbor_edges(const VoxelGrid& grid, int stencil, WeightScheme scheme);

struct StencilEntry {
  std::int32_t index;
  double weight;
};

struct Stencil {
  std::array<StencilEntry, 8> entries{};
  int count = 0;
  auto begin() const { return entries.begin(); }
  auto end() const { return entries.begin() + count; }
};

/// Trilinear interpolation weights of p over the active corners of its cell.
/// Corners with zero weight are omitted. When some corners are inactive the
/// remaining weights are renormalized, provided at least `min_active` corners
/// are active (or every corner carrying weight is active). Returns false
/// otherwise.
bool try_trilinear_stencil(const Vec3& p, const VoxelGrid& grid, Stencil& out,
                           int min_active = 4);
/// Throwing variant: OutsideBand.
Stencil trilinear_stencil(const Vec3& p, const VoxelGrid& grid, int min_active = 4);

/// Interpolates a per-node field; returns false outside the band.
bool interpolate(const Vec3& p, const VoxelGrid& grid, const Vector& field, double& value,
                 int min_active = 4);

}  // namespace probsdf
