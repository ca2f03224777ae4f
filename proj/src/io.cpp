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
#include "io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace probsdf::io {

namespace {

constexpr char kVolumeMagic[8] = {'P', 'S', 'D', 'F', 'V', 'O', 'L', '\0'};
constexpr std::uint32_t kVolumeVersion = 1;
constexpr std::size_t kChannelNameBytes = 16;

[[noreturn]] void io_fail(const fs::path& path, const std::string& what) {
  fail(ErrorCode::Io, path.string() + ": " + what);
}

[[noreturn]] void parse_fail(const fs::path& path, std::size_t line, const std::string& what) {
  fail(ErrorCode::Io, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ofstream open_out(const fs::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) io_fail(path, "cannot open for writing");
  return out;
}

std::ifstream open_in(const fs::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) io_fail(path, "cannot open for reading");
  return in;
}

template <typename U>
void put_le(std::string& buf, U v) {
  for (std::size_t k = 0; k < sizeof(U); ++k) buf.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

void put_u32(std::string& b, std::uint32_t v) { put_le(b, v); }
void put_i32(std::string& b, std::int32_t v) { put_le(b, static_cast<std::uint32_t>(v)); }
void put_u64(std::string& b, std::uint64_t v) { put_le(b, v); }
void put_f32(std::string& b, float v) { put_le(b, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& b, double v) { put_le(b, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const fs::path& path, std::string data) : path_(path), data_(std::move(data)) {}

  template <typename U>
  U get_le() {
    if (pos_ + sizeof(U) > data_.size()) io_fail(path_, "truncated file");
    U v = 0;
    for (std::size_t k = 0; k < sizeof(U); ++k)
      v |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    pos_ += sizeof(U);
    return v;
  }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(get_le<std::uint32_t>()); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
  std::string bytes(std::size_t n) {
    if (pos_ + n > data_.size()) io_fail(path_, "truncated file");
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  fs::path path_;
  std::string data_;
  std::size_t pos_ = 0;
};

std::string slurp(const fs::path& path, bool binary) {
  std::ifstream in = open_in(path, binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const fs::path& path, const std::string& data, bool binary) {
  std::ofstream out = open_out(path, binary);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) io_fail(path, "write failed");
}

}  // namespace

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) { dump(path, text, false); }

std::string read_text(const fs::path& path) { return slurp(path, false); }

void write_pfm(const fs::path& path, int width, int height, const std::vector<float>& data) {
  if (width <= 0 || height <= 0 || data.size() != static_cast<std::size_t>(width) * height)
    fail(ErrorCode::InvalidArgument, "PFM buffer does not match its size");
  std::string buf = "Pf\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1.0\n";
  buf.reserve(buf.size() + data.size() * 4);
  for (int y = height - 1; y >= 0; --y)
    for (int x = 0; x < width; ++x) put_f32(buf, data[static_cast<std::size_t>(y) * width + x]);
  dump(path, buf, true);
}

std::vector<float> read_pfm(const fs::path& path, int& width, int& height) {
  const std::string raw = slurp(path, true);
  // Header: three whitespace-terminated tokens after the magic.
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < raw.size() && std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
    return raw.substr(start, pos - start);
  };
  if (token() != "Pf") io_fail(path, "not a grayscale PFM");
  double scale = 0.0;
  try {
    width = std::stoi(token());
    height = std::stoi(token());
    scale = std::stod(token());
  } catch (const std::exception&) {
    io_fail(path, "malformed PFM header");
  }
  ++pos;  // single whitespace byte before the raster
  if (width <= 0 || height <= 0) io_fail(path, "bad PFM dimensions");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (raw.size() - pos != n * 4) io_fail(path, "PFM raster size mismatch");
  const bool little = scale < 0.0;
  std::vector<float> data(n);
  for (int y = height - 1; y >= 0; --y)
    for (int x = 0; x < width; ++x) {
      std::uint32_t bits = 0;
      for (int k = 0; k < 4; ++k) {
        const auto byte = static_cast<std::uint32_t>(static_cast<unsigned char>(raw[pos + static_cast<std::size_t>(k)]));
        bits |= little ? byte << (8 * k) : byte << (8 * (3 - k));
      }
      pos += 4;
      data[static_cast<std::size_t>(y) * width + x] = std::bit_cast<float>(bits);
    }
  return data;
}

void write_poses(const fs::path& path, const std::vector<std::pair<int, Pose>>& poses) {
  std::string out;
  for (const auto& [id, pose] : poses) {
    out += std::to_string(id);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out += " " + fmt_double(pose.R(r, c));
      out += " " + fmt_double(pose.t[r]);
    }
    out += "\n";
  }
  dump(path, out, false);
}

std::vector<std::pair<int, Pose>> read_poses(const fs::path& path) {
  std::istringstream in(slurp(path, false));
  std::vector<std::pair<int, Pose>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    int id = 0;
    double v[12];
    if (!(ls >> id)) parse_fail(path, line_no, "expected frame id");
    for (double& x : v)
      if (!(ls >> x)) parse_fail(path, line_no, "expected 12 pose values");
    std::string extra;
    if (ls >> extra) parse_fail(path, line_no, "trailing data");
    Pose p;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p.R(r, c) = v[r * 4 + c];
      p.t[r] = v[r * 4 + 3];
    }
    if (!p.is_rigid()) parse_fail(path, line_no, "rotation is not orthonormal");
    out.emplace_back(id, p);
  }
  return out;
}

void write_ply(const fs::path& path, const TriangleMesh& mesh) {
  const bool var = !mesh.vertex_variance.empty();
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(mesh.vertices.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\n";
  if (var) out += "property double variance\n";
  out += "element face " + std::to_string(mesh.triangles.size()) +
         "\nproperty list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out += fmt_double(v.x()) + " " + fmt_double(v.y()) + " " + fmt_double(v.z());
    if (var) out += " " + fmt_double(mesh.vertex_variance[i]);
    out += "\n";
  }
  for (const auto& t : mesh.triangles)
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  dump(path, out, false);
}

void write_ply_points(const fs::path& path, const std::vector<Vec3>& points) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(points.size()) +
                    "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& v : points)
    out += fmt_double(v.x()) + " " + fmt_double(v.y()) + " " + fmt_double(v.z()) + "\n";
  dump(path, out, false);
}

PlyData read_ply(const fs::path& path) {
  std::istringstream in(slurp(path, false));
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
    bool list = false;
  };
  std::vector<Element> elements;
  if (!next_line() || line != "ply") parse_fail(path, line_no, "missing 'ply' magic");
  bool ended = false;
  while (next_line()) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") parse_fail(path, line_no, "only ascii PLY is supported");
    } else if (kw == "comment" || kw == "obj_info" || kw.empty()) {
    } else if (kw == "element") {
      Element e;
      long long count = -1;
      if (!(ls >> e.name >> count) || count < 0) parse_fail(path, line_no, "bad element line");
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (elements.empty()) parse_fail(path, line_no, "property before element");
      std::string type, name;
      ls >> type;
      if (type == "list") {
        std::string ct, it;
        ls >> ct >> it;
        elements.back().list = true;
      }
      if (!(ls >> name)) parse_fail(path, line_no, "bad property line");
      elements.back().props.push_back(name);
    } else if (kw == "end_header") {
      ended = true;
      break;
    } else {
      parse_fail(path, line_no, "unknown header keyword '" + kw + "'");
    }
  }
  if (!ended) parse_fail(path, line_no, "missing end_header");

  PlyData data;
  for (const auto& e : elements) {
    if (e.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, iv = -1;
      for (std::size_t k = 0; k < e.props.size(); ++k) {
        if (e.props[k] == "x") ix = static_cast<int>(k);
        if (e.props[k] == "y") iy = static_cast<int>(k);
        if (e.props[k] == "z") iz = static_cast<int>(k);
        if (e.props[k] == "variance") iv = static_cast<int>(k);
      }
      if (ix < 0 || iy < 0 || iz < 0) parse_fail(path, line_no, "vertex element lacks x/y/z");
      data.vertices.reserve(e.count);
      std::vector<double> vals(e.props.size());
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!next_line()) parse_fail(path, line_no, "unexpected end of file in vertex list");
        std::istringstream ls(line);
        for (double& v : vals)
          if (!(ls >> v)) parse_fail(path, line_no, "expected " + std::to_string(vals.size()) + " vertex values");
        data.vertices.emplace_back(vals[static_cast<std::size_t>(ix)], vals[static_cast<std::size_t>(iy)],
                                   vals[static_cast<std::size_t>(iz)]);
        if (iv >= 0) data.variance.push_back(vals[static_cast<std::size_t>(iv)]);
      }
    } else if (e.name == "face") {
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!next_line()) parse_fail(path, line_no, "unexpected end of file in face list");
        std::istringstream ls(line);
        int n = 0;
        if (!(ls >> n) || n < 3) parse_fail(path, line_no, "bad face");
        std::vector<std::int32_t> idx(static_cast<std::size_t>(n));
        for (auto& v : idx) {
          if (!(ls >> v)) parse_fail(path, line_no, "bad face index");
          if (v < 0 || static_cast<std::size_t>(v) >= data.vertices.size())
            parse_fail(path, line_no, "face index out of range");
        }
        for (std::size_t k = 1; k + 1 < idx.size(); ++k) data.triangles.push_back({idx[0], idx[k], idx[k + 1]});
      }
    } else {
      for (std::size_t i = 0; i < e.count; ++i)
        if (!next_line()) parse_fail(path, line_no, "unexpected end of file");
    }
  }
  return data;
}

std::vector<Vec3> read_xyz(const fs::path& path) {
  std::istringstream in(slurp(path, false));
  std::vector<Vec3> pts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) parse_fail(path, line_no, "expected three coordinates");
    pts.emplace_back(x, y, z);
  }
  return pts;
}

void write_xyz(const fs::path& path, const std::vector<Vec3>& points) {
  std::string out;
  for (const auto& p : points) out += fmt_double(p.x()) + " " + fmt_double(p.y()) + " " + fmt_double(p.z()) + "\n";
  dump(path, out, false);
}

std::vector<Vec3> read_points(const fs::path& path, std::size_t mesh_samples, std::uint64_t seed) {
  const std::string ext = path.extension().string();
  if (ext == ".xyz" || ext == ".txt") return read_xyz(path);
  if (ext != ".ply") io_fail(path, "unsupported point file extension '" + ext + "'");
  PlyData ply = read_ply(path);
  if (ply.triangles.empty()) return std::move(ply.vertices);
  TriangleMesh mesh;
  mesh.vertices = std::move(ply.vertices);
  mesh.triangles = std::move(ply.triangles);
  return sample_surface(mesh, mesh_samples, seed);
}

void write_volume(const fs::path& path, const VolumeFile& vol) {
  const std::size_t n = vol.coords.size();
  for (const auto& [name, data] : vol.channels) {
    if (name.empty() || name.size() >= kChannelNameBytes)
      fail(ErrorCode::InvalidArgument, "channel name must be 1..15 bytes");
    if (data.size() != n) fail(ErrorCode::DimensionMismatch, "channel '" + name + "' length must equal N");
  }
  std::string buf(kVolumeMagic, sizeof kVolumeMagic);
  put_u32(buf, kVolumeVersion);
  put_u32(buf, static_cast<std::uint32_t>(vol.channels.size()));
  for (int a = 0; a < 3; ++a) put_f64(buf, vol.grid.origin[a]);
  put_f64(buf, vol.grid.voxel_size);
  put_i32(buf, vol.grid.block_size);
  put_i32(buf, vol.probes);
  put_f64(buf, vol.tau);
  put_u64(buf, vol.seed);
  put_u64(buf, n);
  buf.reserve(buf.size() + n * (12 + 4 * vol.channels.size()));
  for (const auto& c : vol.coords) {
    put_i32(buf, c.x);
    put_i32(buf, c.y);
    put_i32(buf, c.z);
  }
  for (const auto& [name, data] : vol.channels) {
    std::string padded = name;
    padded.resize(kChannelNameBytes, '\0');
    buf += padded;
    for (float v : data) put_f32(buf, v);
  }
  dump(path, buf, true);
}

VolumeFile read_volume(const fs::path& path) {
  Reader r(path, slurp(path, true));
  if (r.bytes(sizeof kVolumeMagic) != std::string(kVolumeMagic, sizeof kVolumeMagic))
    io_fail(path, "bad volume magic");
  if (r.u32() != kVolumeVersion) io_fail(path, "unsupported volume version");
  const std::uint32_t channels = r.u32();
  VolumeFile vol;
  for (int a = 0; a < 3; ++a) vol.grid.origin[a] = r.f64();
  vol.grid.voxel_size = r.f64();
  vol.grid.block_size = r.i32();
  vol.probes = r.i32();
  vol.tau = r.f64();
  vol.seed = r.u64();
  const std::uint64_t n = r.u64();
  vol.coords.resize(n);
  for (auto& c : vol.coords) {
    c.x = r.i32();
    c.y = r.i32();
    c.z = r.i32();
  }
  for (std::uint32_t k = 0; k < channels; ++k) {
    std::string name = r.bytes(kChannelNameBytes);
    name.resize(std::strlen(name.c_str()));
    std::vector<float> data(n);
    for (float& v : data) v = r.f32();
    vol.channels.emplace(std::move(name), std::move(data));
  }
  if (!r.done()) io_fail(path, "trailing bytes after last channel");
  return vol;
}

}  // namespace probsdf::io
