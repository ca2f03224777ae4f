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
#include "voxel_grid.hpp"

#include "tsdf.hpp"

#include <algorithm>
#include <cmath>

namespace probsdf {

void GridConfig::validate() const {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size))
    fail(ErrorCode::InvalidArgument, "voxel_size must be > 0");
  if (block_size < 2) fail(ErrorCode::InvalidArgument, "block_size must be >= 2");
  if ((block_size & (block_size - 1)) != 0)
    fail(ErrorCode::InvalidArgument, "block_size must be a power of two");
  if (!origin.allFinite()) fail(ErrorCode::InvalidArgument, "origin must be finite");
}

Vec3 world_to_voxel(const Vec3& p, const GridConfig& cfg) {
  return (p - cfg.origin) / cfg.voxel_size;
}

Vec3 voxel_to_world(const Vec3& q, const GridConfig& cfg) {
  return cfg.origin + q * cfg.voxel_size;
}

VoxelGrid VoxelGrid::from_coords(const GridConfig& cfg, std::vector<Coord> coords) {
  cfg.validate();
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  VoxelGrid grid;
  grid.cfg_ = cfg;
  grid.coords_ = std::move(coords);
  const auto bv = static_cast<std::size_t>(cfg.block_volume());
  for (std::size_t i = 0; i < grid.coords_.size(); ++i) {
    const Coord& c = grid.coords_[i];
    auto& slots = grid.blocks_[cfg.block_of(c)];
    if (slots.empty()) slots.assign(bv, -1);
    slots[static_cast<std::size_t>(cfg.slot_of(c))] = static_cast<std::int32_t>(i);
  }
  return grid;
}

std::size_t VoxelGrid::count_active_slots() const {
  std::size_t n = 0;
  for (const auto& [key, slots] : blocks_)
    n += static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(),
                                                [](std::int32_t s) { return s >= 0; }));
  return n;
}

VoxelGrid activate_narrow_band(const TsdfVolume& tsdf, double alpha, double tau) {
  if (!(alpha >= 1.0 && alpha <= 3.0)) fail(ErrorCode::InvalidArgument, "alpha must be in [1,3]");
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "tau must be > 0");
  const GridConfig& cfg = tsdf.config();
  const double limit = alpha * tau;
  std::vector<Coord> active;
  for (const auto& [key, block] : tsdf.blocks()) {
    for (int s = 0; s < cfg.block_volume(); ++s) {
      const auto idx = static_cast<std::size_t>(s);
      if (block.weight[idx] > 0.0f && std::abs(static_cast<double>(block.value[idx])) <= limit)
        active.push_back(cfg.voxel_in_block(key, s));
    }
  }
  if (active.empty()) fail(ErrorCode::EmptyBand, "no voxel satisfies |tsdf| <= alpha * tau");
  return VoxelGrid::from_coords(cfg, std::move(active));
}

std::vector<Coord> half_stencil(int stencil) {
  if (stencil != 6 && stencil != 18 && stencil != 26)
    fail(ErrorCode::InvalidArgument, "stencil must be 6, 18 or 26");
  const int max_l1 = stencil == 6 ? 1 : (stencil == 18 ? 2 : 3);
  std::vector<Coord> out;
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dz = -1; dz <= 1; ++dz) {
        const Coord o{dx, dy, dz};
        if (!(o > Coord{0, 0, 0})) continue;
        if (std::abs(dx) + std::abs(dy) + std::abs(dz) > max_l1) continue;
        out.push_back(o);
      }
  return out;
}

EdgeList neighbor_edges(const VoxelGrid& grid, int stencil, WeightScheme scheme) {
  const auto offsets = half_stencil(stencil);
  EdgeList list;
  list.stencil = stencil;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Coord c = grid.coord(i);
    for (const Coord& o : offsets) {
      const std::int32_t j = grid.index_of(c + o);
      if (j < 0) continue;
      double w = 1.0;
      if (scheme == WeightScheme::InverseDistance)
        w = 1.0 / std::sqrt(static_cast<double>(o.x * o.x + o.y * o.y + o.z * o.z));
      const auto ii = static_cast<std::int32_t>(i);
      list.edges.push_back({std::min(ii, j), std::max(ii, j), w});
    }
  }
  std::sort(list.edges.begin(), list.edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  return list;
}

namespace {

double snap(double q) {
  const double r = std::round(q);
  return std::abs(q - r) < 1e-9 ? r : q;
}

}  // namespace

bool try_trilinear_stencil(const Vec3& p, const VoxelGrid& grid, Stencil& out, int min_active) {
  const GridConfig& cfg = grid.config();
  const Vec3 q = world_to_voxel(p, cfg);
  const double qx = snap(q.x()), qy = snap(q.y()), qz = snap(q.z());
  const double bx = std::floor(qx), by = std::floor(qy), bz = std::floor(qz);
  const double f[3] = {qx - bx, qy - by, qz - bz};
  const Coord base{static_cast<std::int32_t>(bx), static_cast<std::int32_t>(by),
                   static_cast<std::int32_t>(bz)};

  out.count = 0;
  int active_corners = 0;
  bool support_complete = true;
  double active_sum = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
    const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) * (dz ? f[2] : 1.0 - f[2]);
    const std::int32_t idx = grid.index_of(base + Coord{dx, dy, dz});
    if (idx >= 0) ++active_corners;
    if (w <= 0.0) continue;
    if (idx < 0) {
      support_complete = false;
      continue;
    }
    out.entries[static_cast<std::size_t>(out.count++)] = {idx, w};
    active_sum += w;
  }
  if (support_complete) return out.count > 0;
  if (active_corners < min_active || active_sum <= 0.0) {
    out.count = 0;
    return false;
  }
  for (int k = 0; k < out.count; ++k) out.entries[static_cast<std::size_t>(k)].weight /= active_sum;
  return true;
}

Stencil trilinear_stencil(const Vec3& p, const VoxelGrid& grid, int min_active) {
  Stencil s;
  if (!try_trilinear_stencil(p, grid, s, min_active))
    fail(ErrorCode::OutsideBand, "too few active corners for trilinear stencil");
  return s;
}

bool interpolate(const Vec3& p, const VoxelGrid& grid, const Vector& field, double& value,
                 int min_active) {
  Stencil s;
  if (!try_trilinear_stencil(p, grid, s, min_active)) return false;
  double acc = 0.0;
  for (const auto& e : s) acc += e.weight * field[static_cast<std::size_t>(e.index)];
  value = acc;
  return true;
}

}  // namespace probsdf
