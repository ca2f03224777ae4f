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
// probsdf command line: synth | run | nbv | eval.

#include "probsdf/probsdf.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> probes;
  bool no_anchor = false;
  std::string data;
  std::string out;
};

int report(probsdf_status st) {
  if (st != PROBSDF_OK) {
    // One JSON object per failure so scripts can parse it.
    std::string msg = probsdf_last_error();
    std::string escaped;
    for (char c : msg) {
      if (c == '"' || c == '\\') escaped.push_back('\\');
      if (c == '\n') {
        escaped += "\\n";
        continue;
      }
      escaped.push_back(c);
    }
    std::fprintf(stderr, "{\"error\": \"%s\", \"message\": \"%s\", \"exit_code\": %d}\n",
                 probsdf_last_error_kind(), escaped.c_str(), static_cast<int>(st));
  }
  return static_cast<int>(st);
}

/// Loads the config (or defaults) and applies flag overrides.
probsdf_status make_config(const Common& c, probsdf_config** cfg) {
  probsdf_status st = c.config.empty() ? probsdf_config_new(cfg) : probsdf_config_load(c.config.c_str(), cfg);
  if (st != PROBSDF_OK) return st;
  if (c.seed && (st = probsdf_config_set_seed(*cfg, *c.seed)) != PROBSDF_OK) return st;
  if (c.workers && (st = probsdf_config_set_workers(*cfg, *c.workers)) != PROBSDF_OK) return st;
  if (c.probes && (st = probsdf_config_set_probes(*cfg, *c.probes)) != PROBSDF_OK) return st;
  if (c.no_anchor && (st = probsdf_config_set_no_anchor(*cfg, 1)) != PROBSDF_OK) return st;
  if (!c.data.empty() && (st = probsdf_config_set_data_dir(*cfg, c.data.c_str())) != PROBSDF_OK) return st;
  if (!c.out.empty() && (st = probsdf_config_set_out_dir(*cfg, c.out.c_str())) != PROBSDF_OK) return st;
  return PROBSDF_OK;
}

void add_common(CLI::App* app, Common& c, bool with_anchor, bool with_probes) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  if (with_probes) app->add_option("--k-probes", c.probes, "Variance probes")->check(CLI::PositiveNumber);
  if (with_anchor) app->add_flag("--no-anchor", c.no_anchor, "Disable TSDF anchoring (lambda_b = 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic SDF reconstruction with GMRF posteriors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", probsdf_version());

  Common synth_opts, run_opts, nbv_opts;
  auto* synth = app.add_subcommand("synth", "Render the synthetic dataset");
  add_common(synth, synth_opts, false, false);
  synth->add_option("--out", synth_opts.data, "Dataset directory (overrides paths.data)");

  auto* run = app.add_subcommand("run", "Reconstruct a dataset and write meshes, volume and metrics");
  add_common(run, run_opts, true, true);
  run->add_option("--data", run_opts.data, "Dataset directory (overrides paths.data)");
  run->add_option("--out", run_opts.out, "Output directory (overrides paths.out)");

  std::string run_dir;
  auto* nbv = app.add_subcommand("nbv", "Score candidate views against a completed run");
  add_common(nbv, nbv_opts, false, true);
  nbv->add_option("--run", run_dir, "Run directory")->required();
  nbv->add_option("--data", nbv_opts.data, "Dataset directory (overrides the run's configuration)");
  std::string nbv_out;
  nbv->add_option("--out", nbv_out, "Output directory (defaults to the run directory)");

  std::string pred, gt, eval_out;
  std::vector<double> thresholds{0.02, 0.05};
  std::size_t mesh_samples = 100000;
  std::uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "Compare a predicted surface with ground-truth points");
  eval->add_option("--pred", pred, "Predicted .ply or .xyz")->required();
  eval->add_option("--gt", gt, "Ground-truth .ply or .xyz")->required();
  eval->add_option("--thresholds", thresholds, "F-score thresholds in meters")->delimiter(',');
  eval->add_option("--mesh-samples", mesh_samples, "Samples drawn from meshes");
  eval->add_option("--seed", eval_seed, "Sampling seed");
  eval->add_option("--out", eval_out, "Write metrics.csv into this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  probsdf_config* cfg = nullptr;
  probsdf_status st = PROBSDF_OK;
  if (synth->parsed()) {
    if ((st = make_config(synth_opts, &cfg)) == PROBSDF_OK) st = probsdf_synth(cfg);
  } else if (run->parsed()) {
    if ((st = make_config(run_opts, &cfg)) == PROBSDF_OK) st = probsdf_run(cfg);
  } else if (nbv->parsed()) {
    if (nbv_opts.config.empty()) nbv_opts.config = run_dir + "/config_effective.json";
    int selected = -1;
    if ((st = make_config(nbv_opts, &cfg)) == PROBSDF_OK) {
      const std::string out = nbv_out.empty() ? run_dir : nbv_out;
      st = probsdf_nbv(cfg, run_dir.c_str(), out.c_str(), &selected);
      if (st == PROBSDF_OK) std::printf("selected candidate %d (see %s/nbv.csv)\n", selected, out.c_str());
    }
  } else if (eval->parsed()) {
    probsdf_metrics m{};
    std::vector<double> p(thresholds.size()), r(thresholds.size()), f(thresholds.size());
    st = probsdf_eval(pred.c_str(), gt.c_str(), thresholds.data(), thresholds.size(), mesh_samples, eval_seed, &m,
                      p.data(), r.data(), f.data());
    if (st == PROBSDF_OK) {
      std::printf("CD %.9g m^2\nAcc %.9g m\nComp %.9g m\n", m.chamfer, m.accuracy, m.completeness);
      for (std::size_t i = 0; i < thresholds.size(); ++i)
        std::printf("F@%gmm %.6f (precision %.6f, recall %.6f)\n", thresholds[i] * 1000.0, f[i], p[i], r[i]);
      std::printf("|P| %zu, |G| %zu\n", m.pred_count, m.gt_count);
      if (!eval_out.empty()) {
        std::ofstream csv(eval_out + "/metrics.csv");
        if (!csv) {
          std::fprintf(stderr, "{\"error\": \"Io\", \"message\": \"cannot write %s/metrics.csv\", \"exit_code\": 4}\n",
                       eval_out.c_str());
          return 4;
        }
        char buf[64];
        csv << "method,CD,Acc,Comp";
        for (double t : thresholds) {
          std::snprintf(buf, sizeof buf, ",F@%g", t * 1000.0);
          csv << buf;
        }
        csv << "\neval";
        for (double v : {m.chamfer, m.accuracy, m.completeness}) {
          std::snprintf(buf, sizeof buf, ",%.17g", v);
          csv << buf;
        }
        for (double v : f) {
          std::snprintf(buf, sizeof buf, ",%.17g", v);
          csv << buf;
        }
        csv << "\n";
      }
    }
  }
  probsdf_config_free(cfg);
  return report(st);
}
