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
#include "sparse.hpp"

#include <cstdint>

namespace probsdf {

struct Posterior {
  Vector mu;     // meters
  Vector s_hat;  // meters^2
  int probes_used = 0;
  std::uint64_t seed = 0;
  std::vector<SolveStats> stats;  // MAP solve first, then one per probe
};

/// h = A^T W y + b0.
Vector posterior_rhs(const PrecisionOperator& op, std::span<const double> b0,
                     const ObservationSet& obs);

struct MapResult {
  Vector mu;
  SolveStats stats;
};

/// Solves Q mu = h. SingularSystem when some diagonal entry of Q is zero;
/// NotConverged when PCG misses the tolerance.
MapResult map_solve(const PrecisionOperator& op, std::span<const double> b0,
                    const ObservationSet& obs, const PcgOptions& options);

/// Convenience overload that also rejects graph components with neither
/// anchors nor observations.
MapResult map_solve(const Prior& prior, const ObservationSet& obs, const PcgOptions& options);

struct VarianceOptions {
  int probes = 32;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int max_iter = 0;
  double floor = 1e-12;
};

struct VarianceEstimate {
  Vector s_hat;
  int probes_used = 0;
  std::vector<SolveStats> stats;
};

/// Rademacher probe i of probe k for a given seed. Shared by every caller that
/// needs common random numbers.
double probe_entry(std::uint64_t seed, int probe, std::size_t i);

/// Randomized estimate of diag(Q^-1): mean of z .* (Q^-1 z) over K Rademacher
/// probes, clamped below at options.floor. Probes whose solve does not converge
/// are dropped with a warning; NotConverged if all are dropped.
VarianceEstimate estimate_diag_variance(const PrecisionOperator& op, const VarianceOptions& options);

/// { i : |mu_i| <= epsilon } in increasing index order.
std::vector<std::int32_t> surface_band_indices(std::span<const double> mu, double epsilon);

}  // namespace probsdf
