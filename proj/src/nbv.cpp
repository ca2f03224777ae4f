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
#include "nbv.hpp"

#include "io.hpp"
#include "parallel.hpp"
#include "scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace probsdf {

namespace {

struct BandBox {
  Vec3 lo, hi;
};

BandBox band_box(const VoxelGrid& grid) {
  BandBox b{Vec3::Constant(std::numeric_limits<double>::infinity()),
            Vec3::Constant(-std::numeric_limits<double>::infinity())};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3 p = grid.position(i);
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

bool slab(const Vec3& o, const Vec3& d, const BandBox& box, double& t0, double& t1) {
  t0 = 0.0;
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (o[a] < box.lo[a] || o[a] > box.hi[a]) return false;
      continue;
    }
    double ta = (box.lo[a] - o[a]) / d[a], tb = (box.hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 <= t1;
}

}  // namespace

DepthFrame render_expected_depth(const ViewCandidate& view, const VoxelGrid& grid,
                                 std::span<const double> mu, double max_range) {
  if (mu.size() != grid.size()) fail(ErrorCode::DimensionMismatch, "mu length must equal N");
  if (!view.pose.is_rigid()) fail(ErrorCode::InvalidArgument, "candidate pose is not rigid");
  DepthFrame frame;
  frame.width = view.width;
  frame.height = view.height;
  frame.K = view.K;
  frame.pose = view.pose;
  frame.frame_id = view.id;
  frame.depth.assign(static_cast<std::size_t>(view.width) * view.height, 0.0f);
  if (grid.size() == 0) return frame;

  const Vector field(mu.begin(), mu.end());
  const BandBox box = band_box(grid);
  const double step = 0.5 * grid.config().voxel_size;

  parallel::parallel_for(static_cast<std::size_t>(view.height), 4, [&](std::size_t b, std::size_t e) {
    for (std::size_t row = b; row < e; ++row) {
      for (int x = 0; x < view.width; ++x) {
        const Vec3 ray_cam = pixel_ray(x, static_cast<double>(row), view.K);
        const double scale = ray_cam.norm();
        const Vec3 dir = view.pose.R * (ray_cam / scale);
        const Vec3 o = view.pose.t;
        double t_in, t_out;
        if (!slab(o, dir, box, t_in, t_out)) continue;
        t_out = std::min(t_out, max_range);
        double prev_t = -1.0, prev_v = 0.0;
        double hit = -1.0;
        for (double t = t_in; t <= t_out; t += step) {
          double v;
          if (!interpolate(o + t * dir, grid, field, v)) {
            prev_t = -1.0;
            continue;
          }
          if (v < 0.0) {
            if (prev_t >= 0.0 && prev_v >= 0.0) {
              double lo = prev_t, hi = t;
              for (int k = 0; k < 30; ++k) {
                const double mid = 0.5 * (lo + hi);
                double vm;
                if (!interpolate(o + mid * dir, grid, field, vm)) break;
                (vm >= 0.0 ? lo : hi) = mid;
              }
              hit = 0.5 * (lo + hi);
            }
            break;  // either a surface crossing or an occluding interior
          }
          prev_t = t;
          prev_v = v;
        }
        if (hit > 0.0)
          frame.depth[row * static_cast<std::size_t>(view.width) + static_cast<std::size_t>(x)] =
              static_cast<float>(hit / scale);
      }
    }
  });
  return frame;
}

ObservationSet simulate_view(const ViewCandidate& view, const VoxelGrid& grid,
                             std::span<const double> mu, double tau, const NoiseModel& noise,
                             const SamplingOptions& sampling, int frame_id) {
  DepthFrame frame = render_expected_depth(view, grid, mu);
  frame.frame_id = frame_id;
  const bool any = std::any_of(frame.depth.begin(), frame.depth.end(), [](float d) { return d > 0.0f; });
  if (!any) fail(ErrorCode::NoVisibleSurface, "candidate " + std::to_string(view.id) + " sees no surface");
  ObservationSet obs = sample_ray_observations(frame, grid, tau, noise, sampling);
  if (obs.empty())
    fail(ErrorCode::NoVisibleSurface, "candidate " + std::to_string(view.id) + " yields no observations");
  return obs;
}

UtilityResult candidate_utility(const PrecisionOperator& current, const ObservationSet& current_obs,
                                const ObservationSet& hypothetical, std::span<const double> baseline,
                                std::span<const std::int32_t> omega, const VarianceOptions& opts) {
  if (baseline.size() != current.size()) fail(ErrorCode::DimensionMismatch, "baseline length must equal N");
  if (omega.empty()) fail(ErrorCode::InvalidArgument, "surface band is empty");
  ObservationSet combined = current_obs;
  combined.append(hypothetical);
  const PrecisionOperator augmented(current.prior(), combined);
  const VarianceEstimate est = estimate_diag_variance(augmented, opts);
  UtilityResult r;
  r.hypothetical_count = hypothetical.size();
  for (std::int32_t i : omega)
    r.raw += baseline[static_cast<std::size_t>(i)] - est.s_hat[static_cast<std::size_t>(i)];
  r.utility = std::max(r.raw, 0.0);
  return r;
}

NbvReport select_best(std::span<const ViewCandidate> candidates, const NbvContext& ctx) {
  if (candidates.empty()) fail(ErrorCode::InvalidArgument, "no candidates");
  if (!ctx.grid || !ctx.q0 || !ctx.observations) fail(ErrorCode::InvalidArgument, "incomplete NBV context");
  const VoxelGrid& grid = *ctx.grid;
  const PrecisionOperator current(*ctx.q0, *ctx.observations);
  const VarianceEstimate baseline = estimate_diag_variance(current, ctx.variance);
  const auto omega = surface_band_indices(ctx.mu, ctx.epsilon);

  NbvReport report;
  report.seed = ctx.variance.seed;
  report.probes = ctx.variance.probes;
  report.scores.resize(candidates.size());
  parallel::parallel_for(candidates.size(), 1, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      CandidateScore& s = report.scores[c];
      s.id = candidates[c].id;
      try {
        const ObservationSet hypo =
            simulate_view(candidates[c], grid, ctx.mu, ctx.tau, ctx.noise, ctx.sampling, -1 - s.id);
        const UtilityResult u = candidate_utility(current, *ctx.observations, hypo, baseline.s_hat, omega,
                                                  ctx.variance);
        s.utility = u.utility;
        s.raw = u.raw;
        s.hypothetical_count = u.hypothetical_count;
      } catch (const Error& err) {
        if (err.code() == ErrorCode::NoVisibleSurface) {
          s.note = "no visible surface";
        } else {
          s.valid = false;
          s.note = err.what();
        }
      }
    }
  });

  const CandidateScore* best = nullptr;
  for (const auto& s : report.scores) {
    if (!s.valid) {
      log_message(LogLevel::Warn, "candidate " + std::to_string(s.id) + " excluded: " + s.note);
      continue;
    }
    if (!best || s.utility > best->utility || (s.utility == best->utility && s.id < best->id)) best = &s;
  }
  if (!best) fail(ErrorCode::AllCandidatesInvalid, "every candidate failed to evaluate");
  report.selected_id = best->id;
  return report;
}

Vec3 band_centroid(const VoxelGrid& grid) {
  if (grid.size() == 0) fail(ErrorCode::EmptyBand, "band is empty");
  Vec3 c = Vec3::Zero();
  for (std::size_t i = 0; i < grid.size(); ++i) c += grid.position(i);
  return c / static_cast<double>(grid.size());
}

std::vector<ViewCandidate> fibonacci_candidates(int count, double radius, const Vec3& target,
                                                const Intrinsics& K, int width, int height) {
  std::vector<ViewCandidate> out;
  int id = 0;
  for (const Pose& p : fibonacci_poses(count, radius, target)) {
    ViewCandidate v;
    v.pose = p;
    v.K = K;
    v.width = width;
    v.height = height;
    v.id = id++;
    out.push_back(v);
  }
  return out;
}

std::string nbv_report_csv(const NbvReport& report) {
  std::string out = "candidate_id,utility_m2,raw_utility_m2,hypothetical_obs,selected\n";
  for (const auto& s : report.scores) {
    out += std::to_string(s.id) + "," + (s.valid ? io::fmt_double(s.utility) : std::string("nan")) + "," +
           (s.valid ? io::fmt_double(s.raw) : std::string("nan")) + "," + std::to_string(s.hypothetical_count) +
           "," + (s.id == report.selected_id ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace probsdf
