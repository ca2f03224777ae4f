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
#include "common.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>

namespace probsdf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::OutsideBand: return "OutsideBand";
    case ErrorCode::NoObservations: return "NoObservations";
    case ErrorCode::InvalidDepth: return "InvalidDepth";
    case ErrorCode::DegenerateNeighborhood: return "DegenerateNeighborhood";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::BreakdownIndefinite: return "BreakdownIndefinite";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NoVisibleSurface: return "NoVisibleSurface";
    case ErrorCode::AllCandidatesInvalid: return "AllCandidatesInvalid";
  }
  return "Unknown";
}

bool Pose::is_rigid(double tol) const {
  if (!R.allFinite() || !t.allFinite()) return false;
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

Pose Pose::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  // Camera convention: +z forward, +x right, +y down in the image.
  Vec3 z = (target - eye).normalized();
  Vec3 up_axis = up;
  if (std::abs(z.dot(up_axis.normalized())) > 0.999) up_axis = Vec3::UnitY();
  Vec3 x = z.cross(up_axis).normalized();
  Vec3 y = z.cross(x);
  Pose pose;
  pose.R.col(0) = x;
  pose.R.col(1) = y;
  pose.R.col(2) = z;
  pose.t = eye;
  return pose;
}

namespace {
std::atomic<int> g_threshold{static_cast<int>(LogLevel::Warn)};
std::mutex g_log_mu;
}  // namespace

void set_log_threshold(LogLevel level) { g_threshold = static_cast<int>(level); }

void log_message(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) < g_threshold) return;
  static const char* names[] = {"info", "warn", "error"};
  std::lock_guard<std::mutex> lock(g_log_mu);
  std::fprintf(stderr, "[probsdf %s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace probsdf
