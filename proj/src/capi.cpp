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
#include "probsdf/probsdf.h"

#include "config.hpp"
#include "io.hpp"
#include "pipeline.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <string>

struct probsdf_config {
  probsdf::PipelineConfig cfg;
};

struct probsdf_volume {
  probsdf::io::VolumeFile vol;
  std::vector<std::int32_t> flat_coords;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_kind;

probsdf_status status_of(probsdf::ErrorCode code) {
  using probsdf::ErrorCode;
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
      return PROBSDF_ERR_CONFIG;
    case ErrorCode::Io:
      return PROBSDF_ERR_IO;
    default:
      return PROBSDF_ERR_SOLVER;
  }
}

template <typename Fn>
probsdf_status guarded(Fn&& fn) {
  g_error.clear();
  g_kind.clear();
  try {
    fn();
    return PROBSDF_OK;
  } catch (const probsdf::Error& e) {
    g_error = e.what();
    g_kind = probsdf::to_string(e.code());
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
    g_kind = "OutOfMemory";
    return PROBSDF_ERR_SOLVER;
  } catch (const std::exception& e) {
    g_error = e.what();
    g_kind = "Internal";
    return PROBSDF_ERR_SOLVER;
  }
}

void require_arg(bool ok, const char* what) {
  if (!ok) probsdf::fail(probsdf::ErrorCode::InvalidArgument, what);
}

}  // namespace

extern "C" {

const char* probsdf_version(void) { return PROBSDF_VERSION_STRING; }

const char* probsdf_last_error(void) { return g_error.c_str(); }

const char* probsdf_last_error_kind(void) { return g_kind.c_str(); }

probsdf_status probsdf_config_new(probsdf_config** out) {
  return guarded([&] {
    require_arg(out != nullptr, "out is null");
    *out = new probsdf_config{};
  });
}

probsdf_status probsdf_config_load(const char* path, probsdf_config** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    *out = new probsdf_config{probsdf::load_config(path)};
  });
}

probsdf_status probsdf_config_parse(const char* json_text, probsdf_config** out) {
  return guarded([&] {
    require_arg(json_text && out, "null argument");
    *out = new probsdf_config{probsdf::parse_config(json_text)};
  });
}

void probsdf_config_free(probsdf_config* cfg) { delete cfg; }

probsdf_status probsdf_config_set_seed(probsdf_config* cfg, uint64_t seed) {
  return guarded([&] {
    require_arg(cfg, "config is null");
    cfg->cfg.seed = seed;
  });
}

probsdf_status probsdf_config_set_workers(probsdf_config* cfg, int workers) {
  return guarded([&] {
    require_arg(cfg, "config is null");
    require_arg(workers >= 1, "workers must be >= 1");
    cfg->cfg.workers = workers;
  });
}

probsdf_status probsdf_config_set_no_anchor(probsdf_config* cfg, int no_anchor) {
  return guarded([&] {
    require_arg(cfg, "config is null");
    cfg->cfg.no_anchor = no_anchor != 0;
  });
}

probsdf_status probsdf_config_set_probes(probsdf_config* cfg, int probes) {
  return guarded([&] {
    require_arg(cfg, "config is null");
    require_arg(probes >= 1, "probe count must be >= 1");
    cfg->cfg.probes = probes;
    cfg->cfg.nbv.probes = probes;
  });
}

probsdf_status probsdf_config_set_data_dir(probsdf_config* cfg, const char* dir) {
  return guarded([&] {
    require_arg(cfg && dir, "null argument");
    cfg->cfg.data_dir = dir;
  });
}

probsdf_status probsdf_config_set_out_dir(probsdf_config* cfg, const char* dir) {
  return guarded([&] {
    require_arg(cfg && dir, "null argument");
    cfg->cfg.out_dir = dir;
  });
}

probsdf_status probsdf_config_set_thresholds(probsdf_config* cfg, const double* thresholds, size_t count) {
  return guarded([&] {
    require_arg(cfg && thresholds && count > 0, "null or empty thresholds");
    for (size_t i = 0; i < count; ++i) require_arg(thresholds[i] > 0.0, "thresholds must be > 0");
    cfg->cfg.thresholds.assign(thresholds, thresholds + count);
  });
}

probsdf_status probsdf_config_to_json(const probsdf_config* cfg, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    require_arg(cfg, "config is null");
    const std::string s = probsdf::dump_config(cfg->cfg);
    if (needed) *needed = s.size() + 1;
    if (buffer && capacity > 0) {
      const size_t n = std::min(capacity - 1, s.size());
      std::memcpy(buffer, s.data(), n);
      buffer[n] = '\0';
    }
  });
}

probsdf_status probsdf_synth(const probsdf_config* cfg) {
  return guarded([&] {
    require_arg(cfg, "config is null");
    cfg->cfg.validate();
    probsdf::cmd_synth(cfg->cfg);
  });
}

probsdf_status probsdf_run(const probsdf_config* cfg) {
  return guarded([&] {
    require_arg(cfg, "config is null");
    cfg->cfg.validate();
    probsdf::cmd_run(cfg->cfg);
  });
}

probsdf_status probsdf_nbv(const probsdf_config* cfg, const char* run_dir, const char* out_dir, int* selected_id) {
  return guarded([&] {
    require_arg(cfg && run_dir && out_dir, "null argument");
    cfg->cfg.validate();
    const probsdf::NbvReport r = probsdf::cmd_nbv(cfg->cfg, run_dir, out_dir);
    if (selected_id) *selected_id = r.selected_id;
  });
}

probsdf_status probsdf_eval(const char* pred_path, const char* gt_path, const double* thresholds,
                            size_t threshold_count, size_t mesh_samples, uint64_t seed, probsdf_metrics* metrics,
                            double* precision, double* recall, double* fscore) {
  return guarded([&] {
    require_arg(pred_path && gt_path, "null path");
    require_arg(threshold_count == 0 || thresholds, "thresholds is null");
    require_arg(mesh_samples >= 1, "mesh_samples must be >= 1");
    const std::vector<double> th(thresholds, thresholds + threshold_count);
    const probsdf::MetricsReport r = probsdf::cmd_eval(pred_path, gt_path, th, mesh_samples, seed);
    if (metrics) *metrics = {r.chamfer, r.accuracy, r.completeness, r.pred_count, r.gt_count};
    for (size_t i = 0; i < r.fscore.size(); ++i) {
      if (precision) precision[i] = r.fscore[i].precision;
      if (recall) recall[i] = r.fscore[i].recall;
      if (fscore) fscore[i] = r.fscore[i].f;
    }
  });
}

probsdf_status probsdf_volume_open(const char* path, probsdf_volume** out) {
  return guarded([&] {
    require_arg(path && out, "null argument");
    auto* v = new probsdf_volume{probsdf::io::read_volume(path), {}};
    v->flat_coords.reserve(v->vol.coords.size() * 3);
    for (const auto& c : v->vol.coords) {
      v->flat_coords.push_back(c.x);
      v->flat_coords.push_back(c.y);
      v->flat_coords.push_back(c.z);
    }
    *out = v;
  });
}

void probsdf_volume_free(probsdf_volume* vol) { delete vol; }

size_t probsdf_volume_size(const probsdf_volume* vol) { return vol ? vol->vol.coords.size() : 0; }

double probsdf_volume_voxel_size(const probsdf_volume* vol) { return vol ? vol->vol.grid.voxel_size : 0.0; }

double probsdf_volume_tau(const probsdf_volume* vol) { return vol ? vol->vol.tau : 0.0; }

const int32_t* probsdf_volume_coords(const probsdf_volume* vol) {
  return vol ? vol->flat_coords.data() : nullptr;
}

const float* probsdf_volume_channel(const probsdf_volume* vol, const char* name) {
  if (!vol || !name) return nullptr;
  auto it = vol->vol.channels.find(name);
  return it == vol->vol.channels.end() ? nullptr : it->second.data();
}

}  // extern "C"
