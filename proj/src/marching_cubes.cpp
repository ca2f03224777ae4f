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
#include "marching_cubes.hpp"

#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace probsdf {

double TriangleMesh::area() const {
  double a = 0.0;
  for (const auto& t : triangles)
    a += 0.5 * (vertices[static_cast<std::size_t>(t[1])] - vertices[static_cast<std::size_t>(t[0])])
                   .cross(vertices[static_cast<std::size_t>(t[2])] - vertices[static_cast<std::size_t>(t[0])])
                   .norm();
  return a;
}

namespace mc {

const std::array<Coord, 8> kCorners = {{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                        {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};

const std::array<std::array<int, 2>, 12> kEdgeCorners = {{{0, 1}, {1, 2}, {2, 3}, {3, 0},
                                                          {4, 5}, {5, 6}, {6, 7}, {7, 4},
                                                          {0, 4}, {1, 5}, {2, 6}, {3, 7}}};

namespace {

// Face corners, counter-clockwise seen from outside the cube.
constexpr int kFaces[6][4] = {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
                              {3, 7, 6, 2}, {0, 4, 7, 3}, {1, 2, 6, 5}};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e)
    if ((kEdgeCorners[e][0] == a && kEdgeCorners[e][1] == b) ||
        (kEdgeCorners[e][0] == b && kEdgeCorners[e][1] == a))
      return e;
  return -1;
}

struct Tables {
  std::array<std::array<std::int8_t, 32>, 256> tri{};
  std::array<int, 256> edges{};

  Tables() {
    for (int mask = 0; mask < 256; ++mask) build(mask);
    // Orient globally so that triangle normals point away from negative corners.
    const Vec3 mid[3] = {edge_mid(tri[1][0]), edge_mid(tri[1][1]), edge_mid(tri[1][2])};
    const Vec3 n = (mid[1] - mid[0]).cross(mid[2] - mid[0]);
    if (n.dot(Vec3(1, 1, 1)) < 0.0)
      for (auto& t : tri)
        for (int k = 0; t[static_cast<std::size_t>(k)] >= 0; k += 3)
          std::swap(t[static_cast<std::size_t>(k + 1)], t[static_cast<std::size_t>(k + 2)]);
  }

  static Vec3 edge_mid(int e) {
    const Coord a = kCorners[static_cast<std::size_t>(kEdgeCorners[e][0])];
    const Coord b = kCorners[static_cast<std::size_t>(kEdgeCorners[e][1])];
    return 0.5 * Vec3(a.x + b.x, a.y + b.y, a.z + b.z);
  }

  void build(int mask) {
    auto neg = [mask](int c) { return ((mask >> c) & 1) != 0; };
    // next[a] = b: the contour leaves edge a and continues to edge b.
    std::array<int, 12> next;
    next.fill(-1);
    int edge_bits = 0;
    for (const auto& face : kFaces) {
      for (int k = 0; k < 4; ++k) {
        const int c0 = face[k], c1 = face[(k + 1) % 4];
        if (neg(c0) || !neg(c1)) continue;
        // Entry into a negative run on edge k; the run ends at the first exit.
        int j = (k + 1) % 4;
        while (neg(face[(j + 1) % 4])) j = (j + 1) % 4;
        const int entry = edge_between(c0, c1);
        const int exit = edge_between(face[j], face[(j + 1) % 4]);
        next[static_cast<std::size_t>(entry)] = exit;
        edge_bits |= (1 << entry) | (1 << exit);
      }
    }
    edges[static_cast<std::size_t>(mask)] = edge_bits;

    auto& out = tri[static_cast<std::size_t>(mask)];
    out.fill(-1);
    std::size_t w = 0;
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (next[static_cast<std::size_t>(start)] < 0 || used[static_cast<std::size_t>(start)]) continue;
      std::vector<int> poly;
      for (int e = start; !used[static_cast<std::size_t>(e)]; e = next[static_cast<std::size_t>(e)]) {
        used[static_cast<std::size_t>(e)] = true;
        poly.push_back(e);
      }
      std::vector<std::array<int, 3>> tris;
      if (!triangulate(poly, tris)) {
        tris.clear();
        for (std::size_t i = 1; i + 1 < poly.size(); ++i) tris.push_back({poly[0], poly[i], poly[i + 1]});
      }
      for (const auto& t : tris)
        for (int e : t) out[w++] = static_cast<std::int8_t>(e);
    }
  }

  static bool share_face(int a, int b) {
    for (const auto& face : kFaces) {
      bool ha = false, hb = false;
      for (int k = 0; k < 4; ++k) {
        const int e = edge_between(face[k], face[(k + 1) % 4]);
        ha |= e == a;
        hb |= e == b;
      }
      if (ha && hb) return true;
    }
    return false;
  }

  // Ear clipping whose diagonals never lie on a cube face; a diagonal on a
  // face could coincide with the neighbouring cell's triangulation.
  static bool triangulate(std::vector<int> poly, std::vector<std::array<int, 3>>& out) {
    if (poly.size() == 3) {
      out.push_back({poly[0], poly[1], poly[2]});
      return true;
    }
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int a = poly[i], b = poly[(i + 1) % n], c = poly[(i + 2) % n];
      if (share_face(a, c)) continue;
      std::vector<int> rest;
      for (std::size_t k = 0; k < n; ++k)
        if (k != (i + 1) % n) rest.push_back(poly[k]);
      const std::size_t mark = out.size();
      out.push_back({a, b, c});
      if (triangulate(rest, out)) return true;
      out.resize(mark);
    }
    return false;
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

const std::array<std::int8_t, 32>& triangle_table(int mask) {
  return tables().tri[static_cast<std::size_t>(mask & 255)];
}

int edge_mask(int mask) { return tables().edges[static_cast<std::size_t>(mask & 255)]; }

}  // namespace mc

namespace {

struct EdgeKey {
  Coord base;
  int axis;
  bool operator==(const EdgeKey& o) const { return base == o.base && axis == o.axis; }
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const noexcept {
    return CoordHash{}(k.base) * 3u + static_cast<std::size_t>(k.axis);
  }
};

}  // namespace

TriangleMesh marching_cubes(const VoxelGrid& grid, std::span<const double> field,
                            std::span<const double> variance, const MarchingCubesOptions& options) {
  if (field.size() != grid.size()) fail(ErrorCode::DimensionMismatch, "field length must equal N");
  const bool with_var = !variance.empty();
  if (with_var && variance.size() != grid.size())
    fail(ErrorCode::DimensionMismatch, "variance length must equal N");

  const double iso = options.iso;
  auto value = [&](std::int32_t i) {
    const double v = field[static_cast<std::size_t>(i)];
    return v == iso ? iso + options.perturbation : v;
  };

  TriangleMesh mesh;
  std::unordered_map<EdgeKey, std::int32_t, EdgeKeyHash> vertex_of;
  const GridConfig& cfg = grid.config();

  for (std::size_t n = 0; n < grid.size(); ++n) {
    const Coord base = grid.coord(n);
    std::array<std::int32_t, 8> idx;
    bool complete = true;
    for (int k = 0; k < 8 && complete; ++k) {
      idx[static_cast<std::size_t>(k)] = grid.index_of(base + mc::kCorners[static_cast<std::size_t>(k)]);
      complete = idx[static_cast<std::size_t>(k)] >= 0;
    }
    if (!complete) continue;

    std::array<double, 8> val;
    int mask = 0;
    for (int k = 0; k < 8; ++k) {
      val[static_cast<std::size_t>(k)] = value(idx[static_cast<std::size_t>(k)]);
      if (val[static_cast<std::size_t>(k)] < iso) mask |= 1 << k;
    }
    if (mask == 0 || mask == 255) continue;

    std::array<std::int32_t, 12> edge_vertex;
    const int bits = mc::edge_mask(mask);
    for (int e = 0; e < 12; ++e) {
      if (!(bits & (1 << e))) continue;
      int a = mc::kEdgeCorners[static_cast<std::size_t>(e)][0];
      int b = mc::kEdgeCorners[static_cast<std::size_t>(e)][1];
      Coord ca = base + mc::kCorners[static_cast<std::size_t>(a)];
      Coord cb = base + mc::kCorners[static_cast<std::size_t>(b)];
      if (cb < ca) {
        std::swap(a, b);
        std::swap(ca, cb);
      }
      const int axis = ca.x != cb.x ? 0 : (ca.y != cb.y ? 1 : 2);
      const EdgeKey key{ca, axis};
      auto it = vertex_of.find(key);
      if (it == vertex_of.end()) {
        const double va = val[static_cast<std::size_t>(a)], vb = val[static_cast<std::size_t>(b)];
        const double t = (iso - va) / (vb - va);
        const Vec3 pa = node_position(ca, cfg), pb = node_position(cb, cfg);
        mesh.vertices.push_back(pa + t * (pb - pa));
        if (with_var) {
          const double sa = variance[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
          const double sb = variance[static_cast<std::size_t>(idx[static_cast<std::size_t>(b)])];
          mesh.vertex_variance.push_back(std::max(0.0, sa + t * (sb - sa)));
        }
        it = vertex_of.emplace(key, static_cast<std::int32_t>(mesh.vertices.size() - 1)).first;
      }
      edge_vertex[static_cast<std::size_t>(e)] = it->second;
    }

    const auto& tri = mc::triangle_table(mask);
    for (std::size_t k = 0; k < 32 && tri[k] >= 0; k += 3)
      mesh.triangles.push_back({edge_vertex[static_cast<std::size_t>(tri[k])],
                                edge_vertex[static_cast<std::size_t>(tri[k + 1])],
                                edge_vertex[static_cast<std::size_t>(tri[k + 2])]});
  }
  if (mesh.triangles.empty()) fail(ErrorCode::EmptyMesh, "no cell straddles the iso level");
  return mesh;
}

std::vector<Vec3> sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "sample count must be >= 1");
  std::vector<double> cumulative;
  cumulative.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    total += 0.5 * (mesh.vertices[static_cast<std::size_t>(t[1])] - a)
                       .cross(mesh.vertices[static_cast<std::size_t>(t[2])] - a)
                       .norm();
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) fail(ErrorCode::EmptyMesh, "mesh has zero area");
  Rng rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double r = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    const auto& t = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
    const double u = std::sqrt(rng.uniform()), v = rng.uniform();
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
    pts.push_back((1.0 - u) * a + u * (1.0 - v) * b + u * v * c);
  }
  return pts;
}

std::vector<Vec3> sample_iso_points(const VoxelGrid& grid, std::span<const double> field,
                                    std::size_t count, std::uint64_t seed) {
  return sample_surface(marching_cubes(grid, field), count, seed);
}

}  // namespace probsdf
