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
#include "config.hpp"

#include "io.hpp"

#include <json.hpp>

#include <set>

namespace probsdf {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& what) { fail(ErrorCode::Config, what); }

/// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_fail(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      config_fail(where(key) + ": wrong type");
    }
  }

  void get_vec3(const char* key, Vec3& out) {
    std::vector<double> v;
    get(key, v);
    if (!j_.contains(key)) return;
    if (v.size() != 3) config_fail(where(key) + ": expected 3 numbers");
    out = Vec3(v[0], v[1], v[2]);
  }

  Section sub(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    auto it = j_.find(key);
    return Section(it == j_.end() ? empty : *it, where(key));
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) config_fail("unknown key '" + where(item.key().c_str()) + "'");
  }

 private:
  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void require(bool ok, const std::string& what) {
  if (!ok) config_fail(what);
}

}  // namespace

void PipelineConfig::validate() const {
  require(workers >= 1, "workers must be >= 1");
  require(scene.kind == "canonical" || scene.kind == "sphere", "scene.kind must be 'canonical' or 'sphere'");
  require(scene.frames >= 1, "scene.frames must be >= 1");
  require(scene.width >= 3 && scene.height >= 3, "scene.width and scene.height must be >= 3");
  require(scene.K.fx > 0.0 && scene.K.fy > 0.0, "scene.fx and scene.fy must be > 0");
  require(scene.pose_radius > 0.0, "scene.pose_radius must be > 0");
  require(scene.min_elevation_deg <= scene.max_elevation_deg, "scene elevations out of order");
  require(scene.gt_points >= 1, "scene.gt_points must be >= 1");
  require((scene.region.min.array() < scene.region.max.array()).all(), "scene.region_min must be below region_max");
  require(grid.voxel_size > 0.0, "grid.voxel_size must be > 0");
  require(grid.block_size >= 2 && (grid.block_size & (grid.block_size - 1)) == 0,
          "grid.block_size must be a power of two >= 2");
  require(tau >= 0.0, "grid.tau must be >= 0");
  require(alpha >= 1.0 && alpha <= 3.0, "grid.alpha must lie in [1, 3]");
  try {
    noise.validate();
  } catch (const Error& e) {
    config_fail(std::string("noise: ") + e.what());
  }
  require(sampling.stride >= 1, "observation.stride must be >= 1");
  require(sampling.samples_per_ray >= 1, "observation.samples_per_ray must be >= 1");
  require(sampling.min_active_corners >= 1 && sampling.min_active_corners <= 8,
          "observation.min_active_corners must lie in [1, 8]");
  require(sampling.normal_smoothing >= 0, "observation.normal_smoothing must be >= 0");
  require(prior.lambda >= 0.0 && prior.lambda_b >= 0.0, "prior.lambda and prior.lambda_b must be >= 0");
  require(prior.stencil == 6 || prior.stencil == 18 || prior.stencil == 26, "prior.stencil must be 6, 18 or 26");
  require(pin_weight > 0.0, "prior.pin_weight must be > 0");
  require(solver_tol > 0.0 && solver_tol < 1.0, "solver.tol must lie in (0, 1)");
  require(solver_max_iter >= 0 && probe_max_iter >= 0, "max_iter must be >= 0");
  require(probes >= 1, "variance.probes must be >= 1");
  require(probe_tol > 0.0 && probe_tol < 1.0, "variance.tol must lie in (0, 1)");
  require(variance_floor > 0.0, "variance.floor must be > 0");
  require(!thresholds.empty(), "eval.thresholds must not be empty");
  for (double t : thresholds) require(t > 0.0, "eval.thresholds must be > 0");
  require(mesh_samples >= 1, "eval.mesh_samples must be >= 1");
  require(nbv.candidates >= 1, "nbv.candidates must be >= 1");
  require(nbv.radius > 0.0, "nbv.radius must be > 0");
  require(nbv.epsilon >= 0.0, "nbv.epsilon must be >= 0");
  require(nbv.probes >= 1, "nbv.probes must be >= 1");
  require(nbv.width >= 3 && nbv.height >= 3, "nbv.width and nbv.height must be >= 3");
  require(nbv.K.fx > 0.0 && nbv.K.fy > 0.0, "nbv.fx and nbv.fy must be > 0");
}

PipelineConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    config_fail(std::string("config is not valid JSON: ") + e.what());
  }
  PipelineConfig c;
  Section top(root, "");
  top.get("seed", c.seed);
  top.get("workers", c.workers);
  top.get("no_anchor", c.no_anchor);

  Section paths = top.sub("paths");
  paths.get("data", c.data_dir);
  paths.get("out", c.out_dir);
  paths.finish();

  Section scene = top.sub("scene");
  scene.get("kind", c.scene.kind);
  scene.get("frames", c.scene.frames);
  scene.get("width", c.scene.width);
  scene.get("height", c.scene.height);
  scene.get("fx", c.scene.K.fx);
  scene.get("fy", c.scene.K.fy);
  scene.get("cx", c.scene.K.cx);
  scene.get("cy", c.scene.K.cy);
  scene.get("pose_radius", c.scene.pose_radius);
  scene.get("min_elevation_deg", c.scene.min_elevation_deg);
  scene.get("max_elevation_deg", c.scene.max_elevation_deg);
  scene.get("noisy", c.scene.noisy);
  scene.get("gt_points", c.scene.gt_points);
  scene.get_vec3("region_min", c.scene.region.min);
  scene.get_vec3("region_max", c.scene.region.max);
  scene.finish();

  Section grid = top.sub("grid");
  grid.get_vec3("origin", c.grid.origin);
  grid.get("voxel_size", c.grid.voxel_size);
  grid.get("block_size", c.grid.block_size);
  grid.get("tau", c.tau);
  grid.get("alpha", c.alpha);
  grid.finish();

  Section noise = top.sub("noise");
  noise.get("sigma_depth_a", c.noise.sigma_depth_a);
  noise.get("sigma_depth_b", c.noise.sigma_depth_b);
  noise.get("sigma_pose", c.noise.sigma_pose);
  noise.get("sigma_pose_per_frame", c.noise.sigma_pose_per_frame);
  noise.get("sigma_model", c.noise.sigma_model);
  noise.finish();

  Section obs = top.sub("observation");
  obs.get("stride", c.sampling.stride);
  obs.get("samples_per_ray", c.sampling.samples_per_ray);
  obs.get("min_active_corners", c.sampling.min_active_corners);
  obs.get("normal_smoothing", c.sampling.normal_smoothing);
  obs.finish();

  Section prior = top.sub("prior");
  prior.get("lambda", c.prior.lambda);
  prior.get("lambda_b", c.prior.lambda_b);
  prior.get("stencil", c.prior.stencil);
  std::string scheme = c.prior.weight_scheme == WeightScheme::Uniform ? "uniform" : "inverse_distance";
  prior.get("weight_scheme", scheme);
  if (scheme == "uniform")
    c.prior.weight_scheme = WeightScheme::Uniform;
  else if (scheme == "inverse_distance")
    c.prior.weight_scheme = WeightScheme::InverseDistance;
  else
    config_fail("prior.weight_scheme must be 'uniform' or 'inverse_distance'");
  std::string anchor = c.prior.anchor_mode == AnchorMode::Observed ? "observed" : "boundary_shell";
  prior.get("anchor_mode", anchor);
  if (anchor == "observed")
    c.prior.anchor_mode = AnchorMode::Observed;
  else if (anchor == "boundary_shell")
    c.prior.anchor_mode = AnchorMode::BoundaryShell;
  else
    config_fail("prior.anchor_mode must be 'observed' or 'boundary_shell'");
  prior.get("pin_weight", c.pin_weight);
  prior.finish();

  Section solver = top.sub("solver");
  solver.get("tol", c.solver_tol);
  solver.get("max_iter", c.solver_max_iter);
  solver.finish();

  Section var = top.sub("variance");
  var.get("probes", c.probes);
  var.get("tol", c.probe_tol);
  var.get("max_iter", c.probe_max_iter);
  var.get("floor", c.variance_floor);
  var.finish();

  Section ev = top.sub("eval");
  ev.get("thresholds", c.thresholds);
  ev.get("mesh_samples", c.mesh_samples);
  ev.finish();

  Section nbv = top.sub("nbv");
  nbv.get("candidates", c.nbv.candidates);
  nbv.get("radius", c.nbv.radius);
  nbv.get("epsilon", c.nbv.epsilon);
  nbv.get("probes", c.nbv.probes);
  nbv.get("width", c.nbv.width);
  nbv.get("height", c.nbv.height);
  nbv.get("fx", c.nbv.K.fx);
  nbv.get("fy", c.nbv.K.fy);
  nbv.get("cx", c.nbv.K.cx);
  nbv.get("cy", c.nbv.K.cy);
  nbv.finish();

  top.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    config_fail(e.what());
  }
  return parse_config(text);
}

std::string dump_config(const PipelineConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["no_anchor"] = c.no_anchor;
  j["paths"] = {{"data", c.data_dir}, {"out", c.out_dir}};
  j["scene"] = {{"kind", c.scene.kind},
                {"frames", c.scene.frames},
                {"width", c.scene.width},
                {"height", c.scene.height},
                {"fx", c.scene.K.fx},
                {"fy", c.scene.K.fy},
                {"cx", c.scene.K.cx},
                {"cy", c.scene.K.cy},
                {"pose_radius", c.scene.pose_radius},
                {"min_elevation_deg", c.scene.min_elevation_deg},
                {"max_elevation_deg", c.scene.max_elevation_deg},
                {"noisy", c.scene.noisy},
                {"gt_points", c.scene.gt_points},
                {"region_min", vec3_json(c.scene.region.min)},
                {"region_max", vec3_json(c.scene.region.max)}};
  j["grid"] = {{"origin", vec3_json(c.grid.origin)},
               {"voxel_size", c.grid.voxel_size},
               {"block_size", c.grid.block_size},
               {"tau", c.effective_tau()},
               {"alpha", c.alpha}};
  j["noise"] = {{"sigma_depth_a", c.noise.sigma_depth_a},
                {"sigma_depth_b", c.noise.sigma_depth_b},
                {"sigma_pose", c.noise.sigma_pose},
                {"sigma_pose_per_frame", c.noise.sigma_pose_per_frame},
                {"sigma_model", c.noise.sigma_model}};
  j["observation"] = {{"stride", c.sampling.stride},
                      {"samples_per_ray", c.sampling.samples_per_ray},
                      {"min_active_corners", c.sampling.min_active_corners},
                      {"normal_smoothing", c.sampling.normal_smoothing}};
  j["prior"] = {{"lambda", c.prior.lambda},
                {"lambda_b", c.prior.lambda_b},
                {"stencil", c.prior.stencil},
                {"weight_scheme", c.prior.weight_scheme == WeightScheme::Uniform ? "uniform" : "inverse_distance"},
                {"anchor_mode", c.prior.anchor_mode == AnchorMode::Observed ? "observed" : "boundary_shell"},
                {"pin_weight", c.pin_weight}};
  j["solver"] = {{"tol", c.solver_tol}, {"max_iter", c.solver_max_iter}};
  j["variance"] = {{"probes", c.probes}, {"tol", c.probe_tol}, {"max_iter", c.probe_max_iter},
                   {"floor", c.variance_floor}};
  j["eval"] = {{"thresholds", c.thresholds}, {"mesh_samples", c.mesh_samples}};
  j["nbv"] = {{"candidates", c.nbv.candidates},
              {"radius", c.nbv.radius},
              {"epsilon", c.effective_epsilon()},
              {"probes", c.nbv.probes},
              {"width", c.nbv.width},
              {"height", c.nbv.height},
              {"fx", c.nbv.K.fx},
              {"fy", c.nbv.K.fy},
              {"cx", c.nbv.K.cx},
              {"cy", c.nbv.K.cy}};
  return j.dump(2) + "\n";
}

}  // namespace probsdf
