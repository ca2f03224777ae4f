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

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace probsdf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3i = Eigen::Vector3i;
using Vector = std::vector<double>;

enum class ErrorCode {
  InvalidArgument,
  Config,
  Io,
  EmptyBand,
  OutsideBand,
  NoObservations,
  InvalidDepth,
  DegenerateNeighborhood,
  DimensionMismatch,
  NotConverged,
  BreakdownIndefinite,
  SingularMatrix,
  SingularSystem,
  EmptyMesh,
  EmptySet,
  NoVisibleSurface,
  AllCandidatesInvalid,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable code; the C API maps it to a status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// Rigid world-from-camera transform.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return R * p + t; }
  Vec3 inverse_apply(const Vec3& p) const { return R.transpose() * (p - t); }
  Vec3 camera_center() const { return t; }
  bool is_rigid(double tol = 1e-6) const;

  static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());
};

struct Intrinsics {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
};

/// Log sink used for warnings from inner stages. Defaults to stderr.
enum class LogLevel { Info = 0, Warn = 1, Error = 2 };
void log_message(LogLevel level, const std::string& msg);
void set_log_threshold(LogLevel level);

}  // namespace probsdf
