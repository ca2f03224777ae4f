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
#include <doctest.h>

#include "io.hpp"
#include "rng.hpp"

#include <Eigen/Geometry>

#include <cstring>
#include <fstream>
#include <unistd.h>

using namespace probsdf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("probsdf_io_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Io error whose message contains `needle`.
template <class F>
void check_io_error(F&& f, const std::string& needle) {
  try {
    f();
    FAIL("expected an Io error mentioning " << needle);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
  }
}

}  // namespace

TEST_CASE("PFM round trip and row order") {
  TempDir dir;
  const std::vector<float> small{1.0f, 2.0f, 3.0f, 4.0f};
  io::write_pfm(dir / "s.pfm", 2, 2, small);
  const std::string raw = bytes(dir / "s.pfm");
  const std::string header = "Pf\n2 2\n-1.0\n";
  REQUIRE(raw.size() == header.size() + 16);
  CHECK(raw.substr(0, header.size()) == header);
  float first;
  std::memcpy(&first, raw.data() + header.size(), 4);
  CHECK(first == 3.0f);  // bottom row first

  Rng rng(1);
  std::vector<float> data(37 * 23);
  for (float& v : data) v = rng.uniform() < 0.2 ? 0.0f : static_cast<float>(rng.uniform(0.1, 5.0));
  io::write_pfm(dir / "d.pfm", 37, 23, data);
  int w = 0, h = 0;
  CHECK(io::read_pfm(dir / "d.pfm", w, h) == data);
  CHECK(w == 37);
  CHECK(h == 23);

  CHECK_THROWS_AS(io::write_pfm(dir / "x.pfm", 3, 3, small), Error);
  put(dir / "bad.pfm", "PF\n2 2\n-1\n");
  check_io_error([&] { io::read_pfm(dir / "bad.pfm", w, h); }, "grayscale");
  put(dir / "short.pfm", header + std::string(7, '\0'));
  check_io_error([&] { io::read_pfm(dir / "short.pfm", w, h); }, "size mismatch");
}

TEST_CASE("pose file round trip and errors") {
  TempDir dir;
  std::vector<std::pair<int, Pose>> poses;
  for (int i = 0; i < 5; ++i) {
    Pose p;
    p.R = Eigen::AngleAxisd(0.3 * i + 0.1, Vec3(1, -2, 0.5 + i).normalized()).toRotationMatrix();
    p.t = Vec3(0.1 * i, -0.3, 1.0 / 3.0);
    poses.emplace_back(i * 2, p);
  }
  io::write_poses(dir / "poses.txt", poses);
  const auto back = io::read_poses(dir / "poses.txt");
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(back[i].first == poses[i].first);
    CHECK(back[i].second.R == poses[i].second.R);
    CHECK(back[i].second.t == poses[i].second.t);
  }

  put(dir / "bad.txt", "0 1 0 0 0 0 1 0 0 0 0 1 0\n1 2 0 0 0 0 1 0 0 0 0 1 0\n");
  check_io_error([&] { io::read_poses(dir / "bad.txt"); }, ":2: rotation is not orthonormal");
  put(dir / "short.txt", "0 1 0 0 0 0 1 0 0 0 0 1\n");
  check_io_error([&] { io::read_poses(dir / "short.txt"); }, ":1: expected 12 pose values");
  check_io_error([&] { io::read_poses(dir / "missing.txt"); }, "cannot open");
}

TEST_CASE("PLY meshes and point clouds") {
  TempDir dir;
  TriangleMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0.1), Vec3(1.0 / 3.0, 1e-17, -2.5)};
  mesh.triangles = {{0, 1, 2}, {1, 3, 2}};
  mesh.vertex_variance = {1e-6, 2e-6, 0.0, 1.0 / 7.0};
  io::write_ply(dir / "m.ply", mesh);
  const std::string text = bytes(dir / "m.ply");
  CHECK(text.rfind(
            "ply\nformat ascii 1.0\nelement vertex 4\nproperty double x\nproperty double y\nproperty double z\n"
            "property double variance\nelement face 2\nproperty list uchar int vertex_indices\nend_header\n",
            0) == 0);
  const io::PlyData back = io::read_ply(dir / "m.ply");
  CHECK(back.vertices == mesh.vertices);
  CHECK(back.triangles == mesh.triangles);
  CHECK(back.variance == mesh.vertex_variance);

  mesh.vertex_variance.clear();
  io::write_ply(dir / "nv.ply", mesh);
  CHECK(io::read_ply(dir / "nv.ply").variance.empty());

  io::write_ply_points(dir / "p.ply", mesh.vertices);
  const io::PlyData pts = io::read_ply(dir / "p.ply");
  CHECK(pts.vertices == mesh.vertices);
  CHECK(pts.triangles.empty());

  // Foreign files: extra properties, a quad and CRLF line ends.
  put(dir / "quad.ply",
      "ply\r\nformat ascii 1.0\r\ncomment made elsewhere\r\nelement vertex 4\r\nproperty float x\r\n"
      "property float y\r\nproperty float z\r\nproperty uchar red\r\nelement face 1\r\n"
      "property list uchar int vertex_indices\r\nend_header\r\n0 0 0 255\r\n1 0 0 0\r\n1 1 0 0\r\n0 1 0 0\r\n"
      "4 0 1 2 3\r\n");
  const io::PlyData quad = io::read_ply(dir / "quad.ply");
  CHECK(quad.vertices.size() == 4);
  CHECK(quad.vertices[2] == Vec3(1, 1, 0));
  REQUIRE(quad.triangles.size() == 2);

  put(dir / "noend.ply", "ply\nformat ascii 1.0\nelement vertex 0\n");
  check_io_error([&] { io::read_ply(dir / "noend.ply"); }, "missing end_header");
  put(dir / "bin.ply", "ply\nformat binary_little_endian 1.0\nend_header\n");
  check_io_error([&] { io::read_ply(dir / "bin.ply"); }, ":2: only ascii");
  put(dir / "range.ply",
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n3 0 0 5\n");
  check_io_error([&] { io::read_ply(dir / "range.ply"); }, ":11: face index out of range");
  put(dir / "trunc.ply",
      "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\nproperty double z\n"
      "end_header\n0 0 0\n");
  check_io_error([&] { io::read_ply(dir / "trunc.ply"); }, "unexpected end of file");
}

TEST_CASE("xyz files and point loading") {
  TempDir dir;
  put(dir / "a.xyz", "# header\n0 0 0\n\n1 2 3  # trailing comment\n  -1e-3 4.5 6\n");
  const auto pts = io::read_xyz(dir / "a.xyz");
  REQUIRE(pts.size() == 3);
  CHECK(pts[2] == Vec3(-1e-3, 4.5, 6));
  put(dir / "bad.xyz", "0 0 0\n1 2\n");
  check_io_error([&] { io::read_xyz(dir / "bad.xyz"); }, ":2: expected three coordinates");

  std::vector<Vec3> v{Vec3(0.1, 0.2, 0.3), Vec3(1.0 / 3.0, -2.0 / 3.0, 1e300)};
  io::write_xyz(dir / "b.xyz", v);
  CHECK(io::read_points(dir / "b.xyz", 0, 0) == v);

  TriangleMesh tri;
  tri.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  tri.triangles = {{0, 1, 2}};
  io::write_ply(dir / "t.ply", tri);
  const auto s1 = io::read_points(dir / "t.ply", 500, 4);
  CHECK(s1.size() == 500);
  CHECK(s1 == io::read_points(dir / "t.ply", 500, 4));
  for (const Vec3& p : s1) CHECK((p.x() >= 0 && p.y() >= 0 && p.x() + p.y() <= 1 + 1e-12 && p.z() == 0));
  check_io_error([&] { io::read_points(dir / "t.obj", 10, 0); }, "unsupported point file extension");
}

TEST_CASE("volume round trip and layout") {
  TempDir dir;
  io::VolumeFile vol;
  vol.grid.origin = Vec3(0.1, -0.2, 0.3);
  vol.grid.voxel_size = 0.005;
  vol.grid.block_size = 8;
  vol.tau = 0.02;
  vol.seed = 123456789012345ull;
  vol.probes = 32;
  vol.coords = {{0, 0, 0}, {-3, 7, 2}, {100000, -100000, 5}};
  vol.channels["tsdf"] = {0.01f, -0.02f, 0.0f};
  vol.channels["s_hat"] = {1e-6f, 2e-6f, 3e-6f};
  io::write_volume(dir / "v.psdf", vol);

  const std::string raw = bytes(dir / "v.psdf");
  CHECK(raw.substr(0, 8) == std::string("PSDFVOL\0", 8));
  CHECK(raw.size() == 80 + 12 * 3 + 2 * (16 + 4 * 3));

  const io::VolumeFile back = io::read_volume(dir / "v.psdf");
  CHECK(back.grid.origin == vol.grid.origin);
  CHECK(back.grid.voxel_size == vol.grid.voxel_size);
  CHECK(back.grid.block_size == vol.grid.block_size);
  CHECK(back.tau == vol.tau);
  CHECK(back.seed == vol.seed);
  CHECK(back.probes == vol.probes);
  CHECK(back.coords == vol.coords);
  CHECK(back.channels == vol.channels);

  put(dir / "magic.psdf", "PSDFVOX" + raw.substr(7));
  check_io_error([&] { io::read_volume(dir / "magic.psdf"); }, "bad volume magic");
  put(dir / "trunc.psdf", raw.substr(0, raw.size() - 1));
  check_io_error([&] { io::read_volume(dir / "trunc.psdf"); }, "truncated");
  put(dir / "tail.psdf", raw + "x");
  check_io_error([&] { io::read_volume(dir / "tail.psdf"); }, "trailing bytes");

  vol.channels["mu"] = {0.0f};
  CHECK_THROWS_AS(io::write_volume(dir / "w.psdf", vol), Error);
  vol.channels.erase("mu");
  vol.channels["a_name_that_is_too_long"] = {0.0f, 0.0f, 0.0f};
  CHECK_THROWS_AS(io::write_volume(dir / "w.psdf", vol), Error);
}

TEST_CASE("text helpers") {
  TempDir dir;
  io::write_text(dir / "t.txt", "hello\n");
  CHECK(io::read_text(dir / "t.txt") == "hello\n");
  check_io_error([&] { io::write_text(dir / "missing" / "t.txt", "x"); }, "cannot open for writing");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(io::fmt_double(v)) == v);
  CHECK(io::fmt_double(0.5) == "0.5");
}
