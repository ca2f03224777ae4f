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
#include "tsdf.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace probsdf {

TsdfVolume::TsdfVolume(const GridConfig& cfg, double tau, const Aabb& bounds)
    : cfg_(cfg), tau_(tau), bounds_(bounds) {
  cfg_.validate();
  if (!(tau > 0.0)) fail(ErrorCode::InvalidArgument, "tau must be > 0");
}

bool TsdfVolume::lookup(const Coord& v, float& value, float& weight) const {
  auto it = blocks_.find(cfg_.block_of(v));
  if (it == blocks_.end()) return false;
  const auto s = static_cast<std::size_t>(cfg_.slot_of(v));
  value = it->second.value[s];
  weight = it->second.weight[s];
  return true;
}

TsdfVolume::Block& TsdfVolume::ensure_block(const Coord& block) {
  auto& b = blocks_[block];
  if (b.value.empty()) {
    const auto n = static_cast<std::size_t>(cfg_.block_volume());
    b.value.assign(n, static_cast<float>(tau_));
    b.weight.assign(n, 0.0f);
  }
  return b;
}

void TsdfVolume::set(const Coord& v, float value, float weight) {
  Block& b = ensure_block(cfg_.block_of(v));
  const auto s = static_cast<std::size_t>(cfg_.slot_of(v));
  b.value[s] = value;
  b.weight[s] = weight;
}

std::size_t TsdfVolume::observed_count() const {
  std::size_t n = 0;
  for (const auto& [key, b] : blocks_)
    n += static_cast<std::size_t>(
        std::count_if(b.weight.begin(), b.weight.end(), [](float w) { return w > 0.0f; }));
  return n;
}

void allocate_blocks(TsdfVolume& volume, const DepthFrame& frame) {
  const GridConfig& cfg = volume.config();
  const double tau = volume.tau();
  const double step = 0.5 * cfg.voxel_size;
  const int n_steps = static_cast<int>(std::ceil(2.0 * tau / step));
  std::unordered_set<Coord, CoordHash> touched;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      if (!frame.valid(x, y)) continue;
      const double d = frame.at(x, y);
      const Vec3 p = backproject(x, y, d, frame.K, frame.pose);
      const Vec3 dir = (frame.pose.R * pixel_ray(x, y, frame.K)).normalized();
      for (int k = 0; k <= n_steps; ++k) {
        const Vec3 s = p + (-tau + k * step) * dir;
        if (!volume.bounds().contains(s)) continue;
        const Vec3 q = world_to_voxel(s, cfg);
        const Coord v{static_cast<std::int32_t>(std::lround(q.x())),
                      static_cast<std::int32_t>(std::lround(q.y())),
                      static_cast<std::int32_t>(std::lround(q.z()))};
        touched.insert(cfg.block_of(v));
      }
    }
  }
  for (const Coord& b : touched) volume.ensure_block(b);
}

void integrate_frame(TsdfVolume& volume, const DepthFrame& frame) {
  frame.validate();
  allocate_blocks(volume, frame);

  const GridConfig& cfg = volume.config();
  const double tau = volume.tau();
  std::vector<std::pair<Coord, TsdfVolume::Block*>> blocks;
  blocks.reserve(volume.blocks().size());
  for (auto& [key, b] : volume.mutable_blocks())
    blocks.emplace_back(key, &b);

  const int bv = cfg.block_volume();
  parallel::parallel_for(blocks.size(), 16, [&](std::size_t begin, std::size_t end) {
    for (std::size_t bi = begin; bi < end; ++bi) {
      auto& [key, block] = blocks[bi];
      for (int s = 0; s < bv; ++s) {
        const Vec3 world = node_position(cfg.voxel_in_block(key, s), cfg);
        if (!volume.bounds().contains(world)) continue;
        double u, v, z;
        if (!project(world, frame.K, frame.pose, u, v, z)) continue;
        const long px = std::lround(u), py = std::lround(v);
        if (px < 0 || py < 0 || px >= frame.width || py >= frame.height) continue;
        if (!frame.valid(static_cast<int>(px), static_cast<int>(py))) continue;
        const double sdf = frame.at(static_cast<int>(px), static_cast<int>(py)) - z;
        if (sdf <= -tau) continue;
        const double clamped = std::clamp(sdf, -tau, tau);
        const auto idx = static_cast<std::size_t>(s);
        const double w = block->weight[idx];
        block->value[idx] = static_cast<float>((w * block->value[idx] + clamped) / (w + 1.0));
        block->weight[idx] = static_cast<float>(w + 1.0);
      }
    }
  });
}

TsdfVolume bootstrap(std::span<const DepthFrame> frames, const GridConfig& cfg, double tau,
                     const Aabb& bounds) {
  if (frames.empty()) fail(ErrorCode::InvalidArgument, "bootstrap needs at least one frame");
  TsdfVolume volume(cfg, tau, bounds);
  // Allocating up front lets every frame update every block, which keeps the
  // result independent of frame order.
  for (const DepthFrame& f : frames) {
    f.validate();
    allocate_blocks(volume, f);
  }
  for (const DepthFrame& f : frames) integrate_frame(volume, f);
  if (volume.observed_count() == 0)
    fail(ErrorCode::NoObservations, "no voxel received a TSDF observation");
  return volume;
}

}  // namespace probsdf
