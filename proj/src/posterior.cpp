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
#include "posterior.hpp"

#include "parallel.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace probsdf {

Vector posterior_rhs(const PrecisionOperator& op, std::span<const double> b0,
                     const ObservationSet& obs) {
  if (b0.size() != op.size()) fail(ErrorCode::DimensionMismatch, "b0 length must equal N");
  Vector h = op.data_rhs(obs.y());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] += b0[i];
  return h;
}

MapResult map_solve(const PrecisionOperator& op, std::span<const double> b0,
                    const ObservationSet& obs, const PcgOptions& options) {
  for (std::size_t i = 0; i < op.size(); ++i)
    if (!(op.diag()[i] > 0.0))
      fail(ErrorCode::SingularSystem,
           "node " + std::to_string(i) + " has neither prior nor observation precision");
  const Vector h = posterior_rhs(op, b0, obs);
  auto apply = [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  SolveResult res = pcg(apply, h, op.diag(), options);
  require_converged(res, "MAP solve");
  return {std::move(res.x), res.stats};
}

MapResult map_solve(const Prior& prior, const ObservationSet& obs, const PcgOptions& options) {
  PrecisionOperator op(prior.Q0, obs);
  Vector constraint = op.data_diag();
  for (std::size_t i = 0; i < constraint.size(); ++i)
    if (prior.constrained[i]) constraint[i] += 1.0;
  const auto loose = unconstrained_nodes(op.size(), prior.edges, constraint);
  if (!loose.empty())
    fail(ErrorCode::SingularSystem, std::to_string(loose.size()) +
                                        " nodes lie in components with neither anchors nor observations");
  return map_solve(op, prior.b0, obs, options);
}

namespace {

// Probes solved together; bounds the M x block scratch of the operator.
constexpr std::size_t kProbeBlock = 8;

}  // namespace

double probe_entry(std::uint64_t seed, int probe, std::size_t i) {
  return rademacher(seed, static_cast<std::uint64_t>(probe), i);
}

VarianceEstimate estimate_diag_variance(const PrecisionOperator& op, const VarianceOptions& options) {
  if (options.probes < 1) fail(ErrorCode::InvalidArgument, "probe count must be >= 1");
  const std::size_t n = op.size();
  PcgOptions pcg_opts;
  pcg_opts.tol = options.tol;
  pcg_opts.max_iter = options.max_iter;

  VarianceEstimate est;
  est.s_hat.assign(n, 0.0);
  est.stats.resize(static_cast<std::size_t>(options.probes));

  // Probes are solved in blocks that share each pass over A, then folded in
  // probe order so the mean does not depend on the worker count.
  const int block = static_cast<int>(kProbeBlock);
  std::vector<Vector> z;
  for (int first = 0; first < options.probes; first += block) {
    const int count = std::min(block, options.probes - first);
    z.assign(static_cast<std::size_t>(count), Vector(n));
    for (int slot = 0; slot < count; ++slot)
      for (std::size_t i = 0; i < n; ++i) z[static_cast<std::size_t>(slot)][i] = probe_entry(options.seed, first + slot, i);
    std::vector<SolveResult> res;
    if (op.is_diagonal()) {
      // Direct solve keeps z .* (z / d) = 1 / d exact.
      for (const Vector& zk : z) {
        SolveResult r;
        r.x.resize(n);
        for (std::size_t i = 0; i < n; ++i) r.x[i] = zk[i] / op.diag()[i];
        r.stats = {0, 0.0, true};
        res.push_back(std::move(r));
      }
    } else {
      res = pcg_block(op, z, pcg_opts);
    }
    for (int slot = 0; slot < count; ++slot) {
      const int k = first + slot;
      const SolveResult& r = res[static_cast<std::size_t>(slot)];
      est.stats[static_cast<std::size_t>(k)] = r.stats;
      if (!r.stats.converged) {
        log_message(LogLevel::Warn, "variance probe " + std::to_string(k) + " did not converge; dropped");
        continue;
      }
      // Running mean: identical products leave the mean bitwise unchanged.
      const Vector& zk = z[static_cast<std::size_t>(slot)];
      ++est.probes_used;
      const double c = est.probes_used;
      for (std::size_t i = 0; i < n; ++i) est.s_hat[i] += (zk[i] * r.x[i] - est.s_hat[i]) / c;
    }
  }
  if (est.probes_used == 0) fail(ErrorCode::NotConverged, "no variance probe converged");
  for (double& s : est.s_hat) s = std::max(s, options.floor);
  return est;
}

std::vector<std::int32_t> surface_band_indices(std::span<const double> mu, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be > 0");
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (std::abs(mu[i]) <= epsilon) out.push_back(static_cast<std::int32_t>(i));
  return out;
}

}  // namespace probsdf
