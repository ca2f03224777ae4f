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
#ifndef PROBSDF_PROBSDF_H
#define PROBSDF_PROBSDF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PROBSDF_BUILDING)
#    define PROBSDF_API __declspec(dllexport)
#  else
#    define PROBSDF_API __declspec(dllimport)
#  endif
#else
#  define PROBSDF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes. */
typedef enum probsdf_status {
  PROBSDF_OK = 0,
  PROBSDF_ERR_CONFIG = 2, /* bad configuration or argument */
  PROBSDF_ERR_SOLVER = 3, /* a pipeline stage or solve failed */
  PROBSDF_ERR_IO = 4      /* unreadable input or unwritable output */
} probsdf_status;

typedef struct probsdf_config probsdf_config;
typedef struct probsdf_volume probsdf_volume;

PROBSDF_API const char* probsdf_version(void);

/* Message and machine-readable kind (e.g. "NotConverged") of the last failure
 * on the calling thread. Empty strings after a success. */
PROBSDF_API const char* probsdf_last_error(void);
PROBSDF_API const char* probsdf_last_error_kind(void);

/* Configuration. All lengths are meters. */
PROBSDF_API probsdf_status probsdf_config_new(probsdf_config** out);
PROBSDF_API probsdf_status probsdf_config_load(const char* path, probsdf_config** out);
PROBSDF_API probsdf_status probsdf_config_parse(const char* json_text, probsdf_config** out);
PROBSDF_API void probsdf_config_free(probsdf_config* cfg);

PROBSDF_API probsdf_status probsdf_config_set_seed(probsdf_config* cfg, uint64_t seed);
PROBSDF_API probsdf_status probsdf_config_set_workers(probsdf_config* cfg, int workers);
PROBSDF_API probsdf_status probsdf_config_set_no_anchor(probsdf_config* cfg, int no_anchor);
/* Sets the probe count of both the variance stage and NBV scoring. */
PROBSDF_API probsdf_status probsdf_config_set_probes(probsdf_config* cfg, int probes);
PROBSDF_API probsdf_status probsdf_config_set_data_dir(probsdf_config* cfg, const char* dir);
PROBSDF_API probsdf_status probsdf_config_set_out_dir(probsdf_config* cfg, const char* dir);
PROBSDF_API probsdf_status probsdf_config_set_thresholds(probsdf_config* cfg, const double* thresholds,
                                                         size_t count);

/* Effective configuration as JSON. Writes at most `capacity` bytes including
 * the terminator; `needed` receives the full size including the terminator. */
PROBSDF_API probsdf_status probsdf_config_to_json(const probsdf_config* cfg, char* buffer, size_t capacity,
                                                  size_t* needed);

/* Pipeline stages. */
PROBSDF_API probsdf_status probsdf_synth(const probsdf_config* cfg);
PROBSDF_API probsdf_status probsdf_run(const probsdf_config* cfg);
/* Scores candidate views against a completed run directory; writes nbv.csv
 * and nbv_selected.txt into out_dir. */
PROBSDF_API probsdf_status probsdf_nbv(const probsdf_config* cfg, const char* run_dir, const char* out_dir,
                                       int* selected_id);

typedef struct probsdf_metrics {
  double chamfer;      /* m^2 */
  double accuracy;     /* m */
  double completeness; /* m */
  size_t pred_count;
  size_t gt_count;
} probsdf_metrics;

/* Metrics between two point files (.ply or .xyz); meshes are sampled with
 * `mesh_samples` area-weighted points. precision, recall and fscore receive
 * one value per threshold and may be NULL. */
PROBSDF_API probsdf_status probsdf_eval(const char* pred_path, const char* gt_path, const double* thresholds,
                                        size_t threshold_count, size_t mesh_samples, uint64_t seed,
                                        probsdf_metrics* metrics, double* precision, double* recall,
                                        double* fscore);

/* Read access to a volume file written by probsdf_run. */
PROBSDF_API probsdf_status probsdf_volume_open(const char* path, probsdf_volume** out);
PROBSDF_API void probsdf_volume_free(probsdf_volume* vol);
PROBSDF_API size_t probsdf_volume_size(const probsdf_volume* vol);
PROBSDF_API double probsdf_volume_voxel_size(const probsdf_volume* vol);
PROBSDF_API double probsdf_volume_tau(const probsdf_volume* vol);
/* 3 * size int32 voxel coordinates. */
PROBSDF_API const int32_t* probsdf_volume_coords(const probsdf_volume* vol);
/* Channel by name ("tsdf", "weight", "mu", "s_hat"); NULL when absent. */
PROBSDF_API const float* probsdf_volume_channel(const probsdf_volume* vol, const char* name);

#ifdef __cplusplus
}
#endif

#endif /* PROBSDF_PROBSDF_H */
