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

#include "config.hpp"
#include "marching_cubes.hpp"
#include "metrics.hpp"
#include "nbv.hpp"
#include "posterior.hpp"
#include "scene.hpp"

#include <string>
#include <utility>
#include <vector>

namespace probsdf {

struct Dataset {
  std::vector<DepthFrame> frames;
  std::vector<Vec3> gt_points;
  Aabb region;
};

/// Stage name and wall-clock seconds.
using Timing = std::vector<std::pair<std::string, double>>;

AnalyticScene make_scene(const SceneConfig& scene);

/// Renders the configured scene in memory. Deterministic in cfg.seed.
Dataset synthesize(const PipelineConfig& cfg);
/// Layout: dataset.json, poses.txt, depth/frame_NNNN.pfm, gt_points.xyz.
void write_dataset(const Dataset& data, const PipelineConfig& cfg, const std::string& dir);
Dataset read_dataset(const std::string& dir);

struct Reconstruction {
  explicit Reconstruction(TsdfVolume volume) : tsdf(std::move(volume)) {}

  TsdfVolume tsdf;
  VoxelGrid grid;
  Vector x_tsdf;       // TSDF value per band node
  Vector tsdf_weight;  // integration weight per band node
  ObservationSet obs;
  Prior prior;  // anchors as configured, plus pins
  std::size_t pinned = 0;
  Vector mu;
  SolveStats map_stats;
  VarianceEstimate variance;  // empty unless requested
};

struct ReconstructOptions {
  bool solve = true;
  bool variance = true;
};

/// Bootstrap, band activation, observation sampling, prior assembly with
/// pinning of unconstrained components, then MAP and variance as requested.
Reconstruction reconstruct(const Dataset& data, const PipelineConfig& cfg,
                           const ReconstructOptions& options = {}, Timing* timing = nullptr);

struct RunResult {
  explicit RunResult(Reconstruction r) : rec(std::move(r)) {}

  Reconstruction rec;
  TriangleMesh tsdf_mesh;
  TriangleMesh bayes_mesh;
  MetricsReport tsdf_metrics;
  MetricsReport bayes_metrics;
  std::string bayes_label;  // gmrf_anchor or gmrf_no_anchor
};

RunResult run_reconstruction(const Dataset& data, const PipelineConfig& cfg, Timing* timing = nullptr);

/// CSV with header method,CD,Acc,Comp,F@<mm>... (CD in m^2, Acc/Comp in m).
std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows);
std::string metrics_text(const std::vector<std::pair<std::string, MetricsReport>>& rows);

/// On-disk stages.
void cmd_synth(const PipelineConfig& cfg);
void cmd_run(const PipelineConfig& cfg);
/// Reads a completed run directory (its volume file) and writes nbv.csv and
/// nbv_selected.txt to out_dir.
NbvReport cmd_nbv(const PipelineConfig& cfg, const std::string& run_dir, const std::string& out_dir);
MetricsReport cmd_eval(const std::string& pred_path, const std::string& gt_path,
                       const std::vector<double>& thresholds, std::size_t mesh_samples,
                       std::uint64_t seed);

}  // namespace probsdf
