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

#include "observation.hpp"
#include "posterior.hpp"
#include "sparse.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace probsdf {

struct ViewCandidate {
  Pose pose;
  Intrinsics K;
  int width = 160;
  int height = 120;
  int id = 0;
};

/// Expected depth image of the current mean field seen from `view`: each ray
/// is marched through the band at half-voxel steps and the first + to -
/// crossing of the interpolated mean is refined by bisection. Rays that enter
/// the band on the negative side are treated as occluded. No noise is added.
DepthFrame render_expected_depth(const ViewCandidate& view, const VoxelGrid& grid,
                                 std::span<const double> mu, double max_range = 10.0);

/// Hypothetical observations for a candidate: render_expected_depth followed by
/// sample_ray_observations with the real noise model. NoVisibleSurface when no
/// pixel sees the band.
ObservationSet simulate_view(const ViewCandidate& view, const VoxelGrid& grid,
                             std::span<const double> mu, double tau, const NoiseModel& noise,
                             const SamplingOptions& sampling, int frame_id);

struct UtilityResult {
  double utility = 0.0;  // max(raw, 0), m^2
  double raw = 0.0;      // m^2
  std::size_t hypothetical_count = 0;
};

/// U = sum over omega of (s_hat - s_hat'), where s_hat' comes from the
/// augmented operator Q + A'^T W' A' with the same probe vectors as s_hat.
/// `baseline` must have been produced by estimate_diag_variance(current, opts).
UtilityResult candidate_utility(const PrecisionOperator& current, const ObservationSet& current_obs,
                                const ObservationSet& hypothetical, std::span<const double> baseline,
                                std::span<const std::int32_t> omega, const VarianceOptions& opts);

struct CandidateScore {
  int id = 0;
  double utility = 0.0;
  double raw = 0.0;
  std::size_t hypothetical_count = 0;
  bool valid = true;
  std::string note;
};

struct NbvReport {
  std::vector<CandidateScore> scores;  // in candidate order
  int selected_id = -1;
  std::uint64_t seed = 0;
  int probes = 0;
};

struct NbvContext {
  const VoxelGrid* grid = nullptr;
  const SparseMatrix* q0 = nullptr;
  const ObservationSet* observations = nullptr;
  std::span<const double> mu;
  double tau = 0.02;
  double epsilon = 0.01;  // surface band half-width on |mu|, meters
  NoiseModel noise;
  SamplingOptions sampling;
  VarianceOptions variance;
};

/// Scores every candidate with one shared probe seed and picks the maximum;
/// ties go to the lowest id. Candidates that see nothing score 0; candidates
/// whose solves fail are excluded. AllCandidatesInvalid if none remain.
NbvReport select_best(std::span<const ViewCandidate> candidates, const NbvContext& ctx);

/// Mean position of the band nodes.
Vec3 band_centroid(const VoxelGrid& grid);

/// Fibonacci-sphere candidates at `radius` around `target`, looking at it.
std::vector<ViewCandidate> fibonacci_candidates(int count, double radius, const Vec3& target,
                                                const Intrinsics& K, int width, int height);

/// CSV with columns candidate_id,utility_m2,raw_utility_m2,hypothetical_obs,selected.
std::string nbv_report_csv(const NbvReport& report);

}  // namespace probsdf
