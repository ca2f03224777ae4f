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
#include <doctest.h>

#include "config.hpp"

#include <json.hpp>

using namespace probsdf;

namespace {

void check_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
    FAIL("expected a Config error for " << text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
  }
}

}  // namespace

TEST_CASE("empty object gives the defaults") {
  const PipelineConfig c = parse_config("{}");
  const PipelineConfig d;
  CHECK(dump_config(c) == dump_config(d));
  CHECK(c.grid.voxel_size == 0.005);
  CHECK(c.effective_tau() == 4 * 0.005);
  CHECK(c.effective_epsilon() == 2 * 0.005);
  CHECK(c.alpha == 2.0);
  CHECK(c.probes == 32);
  CHECK(c.solver_tol == 1e-8);
  CHECK(c.probe_tol == 1e-6);
  CHECK(c.prior.stencil == 6);
  CHECK(c.thresholds == std::vector<double>{0.02, 0.05});
}

TEST_CASE("overrides keep the remaining defaults") {
  const PipelineConfig c = parse_config(R"({
    "seed": 7, "workers": 3,
    "grid": {"voxel_size": 0.01, "tau": 0.05},
    "prior": {"lambda": 2.5, "stencil": 26, "weight_scheme": "uniform", "anchor_mode": "boundary_shell"},
    "scene": {"kind": "sphere", "region_min": [-1, -1, -1]},
    "eval": {"thresholds": [0.01]}
  })");
  CHECK(c.seed == 7);
  CHECK(c.workers == 3);
  CHECK(c.grid.voxel_size == 0.01);
  CHECK(c.effective_tau() == 0.05);
  CHECK(c.prior.lambda == 2.5);
  CHECK(c.prior.lambda_b == PriorSpec{}.lambda_b);
  CHECK(c.prior.stencil == 26);
  CHECK(c.prior.weight_scheme == WeightScheme::Uniform);
  CHECK(c.prior.anchor_mode == AnchorMode::BoundaryShell);
  CHECK(c.scene.kind == "sphere");
  CHECK(c.scene.region.min == Vec3(-1, -1, -1));
  CHECK(c.scene.region.max == SceneConfig{}.region.max);
  CHECK(c.thresholds == std::vector<double>{0.01});
  CHECK(c.scene.frames == SceneConfig{}.frames);
}

TEST_CASE("dump is a fixed point of parse") {
  PipelineConfig c;
  c.seed = 99;
  c.scene.K.cx = 1.0 / 3.0;
  c.prior.lambda = 0.1;
  c.nbv.epsilon = 0.003;
  c.no_anchor = true;
  c.data_dir = "some dir/with \"quotes\"";
  const std::string text = dump_config(c);
  const PipelineConfig back = parse_config(text);
  CHECK(dump_config(back) == text);
  CHECK(back.scene.K.cx == c.scene.K.cx);
  CHECK(back.data_dir == c.data_dir);

  // Derived quantities are written resolved.
  const auto j = nlohmann::json::parse(dump_config(PipelineConfig{}));
  CHECK(j["grid"]["tau"].get<double>() == 0.02);
  CHECK(j["nbv"]["epsilon"].get<double>() == 0.01);
}

TEST_CASE("unknown keys and wrong types are rejected by name") {
  check_config_error(R"({"sede": 1})", "sede");
  check_config_error(R"({"prior": {"lamda": 1}})", "prior.lamda");
  check_config_error(R"({"grid": {"voxel_size": "small"}})", "grid.voxel_size");
  check_config_error(R"({"grid": {"origin": [0, 0]}})", "grid.origin");
  check_config_error(R"({"prior": 5})", "prior");
  check_config_error(R"([1, 2])", "object");
  check_config_error(R"({"seed": )", "not valid JSON");
}

TEST_CASE("out-of-range values are rejected") {
  check_config_error(R"({"workers": 0})", "workers");
  check_config_error(R"({"grid": {"voxel_size": 0}})", "voxel_size");
  check_config_error(R"({"grid": {"block_size": 6}})", "block_size");
  check_config_error(R"({"grid": {"alpha": 4}})", "alpha");
  check_config_error(R"({"prior": {"stencil": 8}})", "stencil");
  check_config_error(R"({"prior": {"lambda": -1}})", "lambda");
  check_config_error(R"({"prior": {"weight_scheme": "gaussian"}})", "weight_scheme");
  check_config_error(R"({"prior": {"anchor_mode": "none"}})", "anchor_mode");
  check_config_error(R"({"scene": {"kind": "teapot"}})", "scene.kind");
  check_config_error(R"({"scene": {"min_elevation_deg": 80}})", "elevations");
  check_config_error(R"({"scene": {"region_min": [1, 0, 0], "region_max": [0, 1, 1]}})", "region");
  check_config_error(R"({"variance": {"probes": 0}})", "variance.probes");
  check_config_error(R"({"solver": {"tol": 1.5}})", "solver.tol");
  check_config_error(R"({"eval": {"thresholds": []}})", "thresholds");
  check_config_error(R"({"eval": {"thresholds": [0.02, -1]}})", "thresholds");
  check_config_error(R"({"noise": {"sigma_depth_a": -1}})", "noise");
  check_config_error(R"({"observation": {"min_active_corners": 9}})", "min_active_corners");
}

TEST_CASE("loading a missing file is a config error") {
  try {
    load_config("/nonexistent/probsdf/config.json");
    FAIL("expected a Config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}
