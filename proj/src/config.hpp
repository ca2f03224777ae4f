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

#include "gmrf_prior.hpp"
#include "observation.hpp"
#include "tsdf.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace probsdf {

/// Synthetic dataset parameters. Lengths in meters, angles in degrees.
struct SceneConfig {
  /// "canonical" (sphere on a plane) or "sphere" (sphere alone).
  std::string kind = "canonical";
  int frames = 24;
  int width = 160;
  int height = 120;
  Intrinsics K{160.0, 160.0, 79.5, 59.5};
  double pose_radius = 0.6;
  double min_elevation_deg = 20.0;
  double max_elevation_deg = 70.0;
  bool noisy = true;
  std::size_t gt_points = 100000;
  /// Reconstruction and evaluation region; also clips ground-truth planes.
  Aabb region{Vec3(-0.3, -0.3, -0.2), Vec3(0.3, 0.3, 0.2)};
};

struct NbvConfig {
  int candidates = 24;
  double radius = 0.6;
  /// Half-width of the surface band on |mu| (meters); 0 means tau / 2.
  double epsilon = 0.0;
  int probes = 16;
  int width = 160;
  int height = 120;
  Intrinsics K{160.0, 160.0, 79.5, 59.5};
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  int workers = 1;
  SceneConfig scene;
  GridConfig grid;
  /// Truncation distance in meters; 0 means 4 * voxel_size.
  double tau = 0.0;
  double alpha = 2.0;
  NoiseModel noise;
  SamplingOptions sampling;
  PriorSpec prior;
  bool no_anchor = false;
  /// Weight (1/m^2) pulling nodes of unconstrained components to their TSDF value.
  double pin_weight = 1e-6;
  double solver_tol = 1e-8;
  int solver_max_iter = 0;
  int probes = 32;
  double probe_tol = 1e-6;
  int probe_max_iter = 0;
  double variance_floor = 1e-12;
  std::vector<double> thresholds{0.02, 0.05};
  std::size_t mesh_samples = 100000;
  NbvConfig nbv;
  std::string data_dir = "data";
  std::string out_dir = "out";

  double effective_tau() const { return tau > 0.0 ? tau : 4.0 * grid.voxel_size; }
  double effective_epsilon() const { return nbv.epsilon > 0.0 ? nbv.epsilon : 0.5 * effective_tau(); }
  /// Throws Config on out-of-range values.
  void validate() const;
};

/// Parses JSON text. Missing keys keep their defaults; unknown keys and type
/// mismatches raise Config errors naming the key.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);
/// Effective configuration with every default resolved.
std::string dump_config(const PipelineConfig& cfg);

}  // namespace probsdf
