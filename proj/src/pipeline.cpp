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
#include "pipeline.hpp"

#include "io.hpp"
#include "parallel.hpp"
#include "rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace probsdf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kGtStream = 0x67;
constexpr std::uint64_t kMeshStream = 0x6d;

class Stopwatch {
 public:
  Stopwatch(Timing* timing, std::string name) : timing_(timing), name_(std::move(name)) {}
  ~Stopwatch() {
    if (!timing_) return;
    const auto dt = std::chrono::steady_clock::now() - start_;
    timing_->emplace_back(name_, std::chrono::duration<double>(dt).count());
  }

 private:
  Timing* timing_;
  std::string name_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string frame_name(int id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04d.pfm", id);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::Io, dir + ": cannot create directory");
}

Vector node_field(const TsdfVolume& tsdf, const VoxelGrid& grid, bool weight) {
  Vector out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    float v = 0.0f, w = 0.0f;
    tsdf.lookup(grid.coord(i), v, w);
    out[i] = weight ? w : v;
  }
  return out;
}

std::vector<float> to_float(const Vector& v) { return {v.begin(), v.end()}; }

std::string fmt_mm(double meters) {
  const double mm = meters * 1000.0;
  char buf[32];
  if (std::abs(mm - std::round(mm)) < 1e-9)
    std::snprintf(buf, sizeof buf, "%.0f", mm);
  else
    std::snprintf(buf, sizeof buf, "%g", mm);
  return buf;
}

MetricsReport mesh_metrics(const TriangleMesh& mesh, const Dataset& data, const PipelineConfig& cfg) {
  const auto pts = sample_surface(mesh, cfg.mesh_samples, counter_hash(cfg.seed, kMeshStream, 0));
  return evaluate(pts, data.gt_points, cfg.thresholds);
}

}  // namespace

AnalyticScene make_scene(const SceneConfig& scene) {
  if (scene.kind == "canonical") return canonical_scene();
  if (scene.kind == "sphere") return AnalyticScene({SpherePrimitive{Vec3::Zero(), 0.15}});
  fail(ErrorCode::Config, "unknown scene kind '" + scene.kind + "'");
}

Dataset synthesize(const PipelineConfig& cfg) {
  cfg.validate();
  const AnalyticScene scene = make_scene(cfg.scene);
  const auto poses = hemisphere_poses(cfg.scene.frames, cfg.scene.pose_radius, Vec3::Zero(),
                                      cfg.scene.min_elevation_deg, cfg.scene.max_elevation_deg);
  RenderOptions ro;
  ro.width = cfg.scene.width;
  ro.height = cfg.scene.height;
  ro.K = cfg.scene.K;
  Dataset data;
  data.region = cfg.scene.region;
  for (std::size_t f = 0; f < poses.size(); ++f)
    data.frames.push_back(render_depth(scene, poses[f], ro, cfg.scene.noisy ? &cfg.noise : nullptr, cfg.seed,
                                       static_cast<int>(f)));
  data.gt_points = sample_ground_truth(scene, cfg.scene.gt_points, counter_hash(cfg.seed, kGtStream, 0),
                                       cfg.scene.region);
  return data;
}

void write_dataset(const Dataset& data, const PipelineConfig& cfg, const std::string& dir) {
  ensure_dir(dir);
  ensure_dir((fs::path(dir) / "depth").string());
  if (data.frames.empty()) fail(ErrorCode::InvalidArgument, "dataset has no frames");
  const DepthFrame& f0 = data.frames.front();
  json meta = {{"width", f0.width},
               {"height", f0.height},
               {"fx", f0.K.fx},
               {"fy", f0.K.fy},
               {"cx", f0.K.cx},
               {"cy", f0.K.cy},
               {"frames", data.frames.size()},
               {"seed", cfg.seed},
               {"scene", cfg.scene.kind},
               {"units", "meters"},
               {"region_min", {data.region.min.x(), data.region.min.y(), data.region.min.z()}},
               {"region_max", {data.region.max.x(), data.region.max.y(), data.region.max.z()}}};
  io::write_text(fs::path(dir) / "dataset.json", meta.dump(2) + "\n");
  std::vector<std::pair<int, Pose>> poses;
  for (const auto& f : data.frames) {
    io::write_pfm(fs::path(dir) / "depth" / frame_name(f.frame_id), f.width, f.height, f.depth);
    poses.emplace_back(f.frame_id, f.pose);
  }
  io::write_poses(fs::path(dir) / "poses.txt", poses);
  io::write_xyz(fs::path(dir) / "gt_points.xyz", data.gt_points);
}

Dataset read_dataset(const std::string& dir) {
  const fs::path root(dir);
  json meta;
  try {
    meta = json::parse(io::read_text(root / "dataset.json"));
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, (root / "dataset.json").string() + ": " + e.what());
  }
  Dataset data;
  Intrinsics K;
  try {
    K = {meta.at("fx").get<double>(), meta.at("fy").get<double>(), meta.at("cx").get<double>(),
         meta.at("cy").get<double>()};
    const auto lo = meta.at("region_min").get<std::vector<double>>();
    const auto hi = meta.at("region_max").get<std::vector<double>>();
    if (lo.size() != 3 || hi.size() != 3) fail(ErrorCode::Io, "dataset.json: region must have 3 values");
    data.region.min = Vec3(lo[0], lo[1], lo[2]);
    data.region.max = Vec3(hi[0], hi[1], hi[2]);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, (root / "dataset.json").string() + ": " + e.what());
  }
  for (const auto& [id, pose] : io::read_poses(root / "poses.txt")) {
    DepthFrame f;
    f.depth = io::read_pfm(root / "depth" / frame_name(id), f.width, f.height);
    f.K = K;
    f.pose = pose;
    f.frame_id = id;
    data.frames.push_back(std::move(f));
  }
  if (data.frames.empty()) fail(ErrorCode::Io, (root / "poses.txt").string() + ": no frames");
  data.gt_points = io::read_xyz(root / "gt_points.xyz");
  return data;
}

Reconstruction reconstruct(const Dataset& data, const PipelineConfig& cfg, const ReconstructOptions& options,
                           Timing* timing) {
  cfg.validate();
  const double tau = cfg.effective_tau();
  Reconstruction rec([&] {
    Stopwatch sw(timing, "bootstrap");
    return bootstrap(data.frames, cfg.grid, tau, data.region);
  }());
  {
    Stopwatch sw(timing, "activate");
    rec.grid = activate_narrow_band(rec.tsdf, cfg.alpha, tau);
    rec.x_tsdf = node_field(rec.tsdf, rec.grid, false);
    rec.tsdf_weight = node_field(rec.tsdf, rec.grid, true);
  }
  {
    Stopwatch sw(timing, "observe");
    for (const auto& f : data.frames) rec.obs.append(sample_ray_observations(f, rec.grid, tau, cfg.noise, cfg.sampling));
    if (rec.obs.empty()) fail(ErrorCode::NoObservations, "no ray sample fell inside the band");
  }
  {
    Stopwatch sw(timing, "assemble");
    PriorSpec spec = cfg.prior;
    if (cfg.no_anchor) spec.lambda_b = 0.0;
    rec.prior = assemble_prior(rec.grid, rec.tsdf, spec);
    // Components with neither anchors nor data are pinned to the TSDF.
    const PrecisionOperator data_only(SparseMatrix::from_triplets(rec.grid.size(), rec.grid.size(), {}), rec.obs);
    Vector constraint = data_only.data_diag();
    for (std::size_t i = 0; i < constraint.size(); ++i)
      if (rec.prior.constrained[i]) constraint[i] += 1.0;
    const auto loose = unconstrained_nodes(rec.grid.size(), rec.prior.edges, constraint);
    rec.pinned = loose.size();
    if (!loose.empty()) {
      log_message(LogLevel::Info, "pinning " + std::to_string(loose.size()) + " unconstrained nodes");
      pin_nodes(rec.prior, loose, rec.x_tsdf, cfg.pin_weight);
    }
  }
  if (!options.solve) return rec;
  const PrecisionOperator op(rec.prior.Q0, rec.obs);
  {
    Stopwatch sw(timing, "map_solve");
    PcgOptions po;
    po.tol = cfg.solver_tol;
    po.max_iter = cfg.solver_max_iter;
    MapResult map = map_solve(op, rec.prior.b0, rec.obs, po);
    rec.mu = std::move(map.mu);
    rec.map_stats = map.stats;
  }
  if (options.variance) {
    Stopwatch sw(timing, "variance");
    VarianceOptions vo;
    vo.probes = cfg.probes;
    vo.seed = cfg.seed;
    vo.tol = cfg.probe_tol;
    vo.max_iter = cfg.probe_max_iter;
    vo.floor = cfg.variance_floor;
    rec.variance = estimate_diag_variance(op, vo);
  }
  return rec;
}

RunResult run_reconstruction(const Dataset& data, const PipelineConfig& cfg, Timing* timing) {
  RunResult r(reconstruct(data, cfg, {}, timing));
  r.bayes_label = cfg.no_anchor ? "gmrf_no_anchor" : "gmrf_anchor";
  MarchingCubesOptions mo;
  mo.perturbation = 1e-12 * cfg.effective_tau();
  {
    Stopwatch sw(timing, "marching_cubes");
    r.tsdf_mesh = marching_cubes(r.rec.grid, r.rec.x_tsdf, {}, mo);
    r.bayes_mesh = marching_cubes(r.rec.grid, r.rec.mu, r.rec.variance.s_hat, mo);
  }
  {
    Stopwatch sw(timing, "metrics");
    r.tsdf_metrics = mesh_metrics(r.tsdf_mesh, data, cfg);
    r.bayes_metrics = mesh_metrics(r.bayes_mesh, data, cfg);
  }
  return r;
}

std::string metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out = "method,CD,Acc,Comp";
  if (!rows.empty())
    for (const auto& f : rows.front().second.fscore) out += ",F@" + fmt_mm(f.threshold);
  out += "\n";
  for (const auto& [name, m] : rows) {
    out += name + "," + io::fmt_double(m.chamfer) + "," + io::fmt_double(m.accuracy) + "," +
           io::fmt_double(m.completeness);
    for (const auto& f : m.fscore) out += "," + io::fmt_double(f.f);
    out += "\n";
  }
  return out;
}

std::string metrics_text(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string out;
  char buf[256];
  for (const auto& [name, m] : rows) {
    std::snprintf(buf, sizeof buf, "%s: CD %.6g m^2, Acc %.6g m, Comp %.6g m", name.c_str(), m.chamfer,
                  m.accuracy, m.completeness);
    out += buf;
    for (const auto& f : m.fscore) {
      std::snprintf(buf, sizeof buf, ", F@%smm %.4f (P %.4f, R %.4f)", fmt_mm(f.threshold).c_str(), f.f,
                    f.precision, f.recall);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " [|P| = %zu, |G| = %zu]\n", m.pred_count, m.gt_count);
    out += buf;
  }
  return out;
}

void cmd_synth(const PipelineConfig& cfg) {
  parallel::set_workers(cfg.workers);
  write_dataset(synthesize(cfg), cfg, cfg.data_dir);
}

void cmd_run(const PipelineConfig& cfg) {
  parallel::set_workers(cfg.workers);
  Timing timing;
  const Dataset data = [&] {
    Stopwatch sw(&timing, "load");
    return read_dataset(cfg.data_dir);
  }();
  const RunResult r = run_reconstruction(data, cfg, &timing);
  ensure_dir(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  const std::vector<std::pair<std::string, MetricsReport>> rows = {{"tsdf_bootstrap", r.tsdf_metrics},
                                                                   {r.bayes_label, r.bayes_metrics}};
  io::write_text(out / "metrics.csv", metrics_csv(rows));
  io::write_text(out / "metrics.txt", metrics_text(rows));
  io::write_ply(out / "tsdf_mesh.ply", r.tsdf_mesh);
  io::write_ply(out / "bayes_mesh.ply", r.bayes_mesh);

  io::VolumeFile vol;
  vol.grid = cfg.grid;
  vol.tau = cfg.effective_tau();
  vol.seed = cfg.seed;
  vol.probes = r.rec.variance.probes_used;
  vol.coords = r.rec.grid.coords();
  vol.channels["tsdf"] = to_float(r.rec.x_tsdf);
  vol.channels["weight"] = to_float(r.rec.tsdf_weight);
  vol.channels["mu"] = to_float(r.rec.mu);
  vol.channels["s_hat"] = to_float(r.rec.variance.s_hat);
  io::write_volume(out / "volume.psdf", vol);
  io::write_text(out / "config_effective.json", dump_config(cfg));

  std::string log;
  char buf[160];
  for (const auto& [stage, sec] : timing) {
    std::snprintf(buf, sizeof buf, "%-16s %10.3f s\n", stage.c_str(), sec);
    log += buf;
  }
  std::snprintf(buf, sizeof buf, "nodes %zu, observations %zu, pinned %zu, workers %d\n", r.rec.grid.size(),
                r.rec.obs.size(), r.rec.pinned, cfg.workers);
  log += buf;
  std::snprintf(buf, sizeof buf, "map_solve: %d iterations, relative residual %.3e\n", r.rec.map_stats.iterations,
                r.rec.map_stats.relative_residual);
  log += buf;
  std::snprintf(buf, sizeof buf, "variance: %d/%d probes converged\n", r.rec.variance.probes_used, cfg.probes);
  log += buf;
  io::write_text(out / "timing.log", log);
}

NbvReport cmd_nbv(const PipelineConfig& cfg, const std::string& run_dir, const std::string& out_dir) {
  parallel::set_workers(cfg.workers);
  const Dataset data = read_dataset(cfg.data_dir);
  Reconstruction rec = reconstruct(data, cfg, {false, false});
  const io::VolumeFile vol = io::read_volume(fs::path(run_dir) / "volume.psdf");
  if (vol.coords != rec.grid.coords())
    fail(ErrorCode::Config, "run directory does not match the configuration's band");
  auto it = vol.channels.find("mu");
  if (it == vol.channels.end()) fail(ErrorCode::Io, "volume has no 'mu' channel");
  rec.mu.assign(it->second.begin(), it->second.end());

  NbvContext ctx;
  ctx.grid = &rec.grid;
  ctx.q0 = &rec.prior.Q0;
  ctx.observations = &rec.obs;
  ctx.mu = rec.mu;
  ctx.tau = cfg.effective_tau();
  ctx.epsilon = cfg.effective_epsilon();
  ctx.noise = cfg.noise;
  ctx.sampling = cfg.sampling;
  ctx.variance.probes = cfg.nbv.probes;
  ctx.variance.seed = cfg.seed;
  ctx.variance.tol = cfg.probe_tol;
  ctx.variance.max_iter = cfg.probe_max_iter;
  ctx.variance.floor = cfg.variance_floor;
  const auto candidates = fibonacci_candidates(cfg.nbv.candidates, cfg.nbv.radius, band_centroid(rec.grid),
                                               cfg.nbv.K, cfg.nbv.width, cfg.nbv.height);
  const NbvReport report = select_best(candidates, ctx);

  ensure_dir(out_dir);
  io::write_text(fs::path(out_dir) / "nbv.csv", nbv_report_csv(report));
  const Pose& best = candidates[static_cast<std::size_t>(report.selected_id)].pose;
  std::string sel = std::to_string(report.selected_id);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) sel += " " + io::fmt_double(best.R(r, c));
    sel += " " + io::fmt_double(best.t[r]);
  }
  io::write_text(fs::path(out_dir) / "nbv_selected.txt", sel + "\n");
  return report;
}

MetricsReport cmd_eval(const std::string& pred_path, const std::string& gt_path,
                       const std::vector<double>& thresholds, std::size_t mesh_samples, std::uint64_t seed) {
  const auto pred = io::read_points(pred_path, mesh_samples, counter_hash(seed, kMeshStream, 0));
  const auto gt = io::read_points(gt_path, mesh_samples, counter_hash(seed, kGtStream, 0));
  return evaluate(pred, gt, thresholds);
}

}  // namespace probsdf
