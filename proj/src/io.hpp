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

#include "camera.hpp"
#include "marching_cubes.hpp"
#include "voxel_grid.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace probsdf::io {

namespace fs = std::filesystem;

/// Little-endian grayscale PFM ("Pf", scale -1), rows stored bottom to top.
void write_pfm(const fs::path& path, int width, int height, const std::vector<float>& data);
std::vector<float> read_pfm(const fs::path& path, int& width, int& height);

/// One line per frame: frame_id followed by the 3x4 [R|t] world-from-camera
/// matrix in row-major order.
void write_poses(const fs::path& path, const std::vector<std::pair<int, Pose>>& poses);
std::vector<std::pair<int, Pose>> read_poses(const fs::path& path);

/// ASCII PLY with double coordinates. Meshes carry a face list; the optional
/// per-vertex "variance" property is written when present.
void write_ply(const fs::path& path, const TriangleMesh& mesh);
void write_ply_points(const fs::path& path, const std::vector<Vec3>& points);

struct PlyData {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::int32_t, 3>> triangles;  // polygons fan-split
  std::vector<double> variance;                         // empty when absent
};
/// Reads ASCII PLY. Unknown vertex properties are skipped. Io errors carry the
/// offending line number.
PlyData read_ply(const fs::path& path);

/// Whitespace-separated "x y z" per line; '#' starts a comment.
std::vector<Vec3> read_xyz(const fs::path& path);
void write_xyz(const fs::path& path, const std::vector<Vec3>& points);

/// Point set from .ply (vertices, or area-weighted samples when it has faces)
/// or .xyz.
std::vector<Vec3> read_points(const fs::path& path, std::size_t mesh_samples, std::uint64_t seed);

/// Single-file voxel volume; see docs/volume_format.md.
struct VolumeFile {
  GridConfig grid;
  double tau = 0.0;
  std::uint64_t seed = 0;
  std::int32_t probes = 0;
  std::vector<Coord> coords;
  std::map<std::string, std::vector<float>> channels;
};
void write_volume(const fs::path& path, const VolumeFile& vol);
VolumeFile read_volume(const fs::path& path);

/// Writes text atomically enough for our needs; Io on failure.
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

/// printf("%.17g").
std::string fmt_double(double v);

}  // namespace probsdf::io
