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
#include "gmrf_prior.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace probsdf {

Prior assemble_prior(const VoxelGrid& grid, const TsdfVolume& tsdf, const PriorSpec& spec) {
  const std::size_t n = grid.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "assemble_prior: empty grid");
  if (!(spec.lambda >= 0.0) || !(spec.lambda_b >= 0.0))
    fail(ErrorCode::InvalidArgument, "lambda and lambda_b must be >= 0");

  Prior prior;
  prior.edges = neighbor_edges(grid, spec.stencil, spec.weight_scheme);
  prior.anchor_values.assign(n, 0.0);
  prior.anchored.assign(n, 0);
  prior.constrained.assign(n, 0);
  prior.b0.assign(n, 0.0);

  std::vector<int> degree(n, 0);
  for (const Edge& e : prior.edges.edges) {
    ++degree[static_cast<std::size_t>(e.i)];
    ++degree[static_cast<std::size_t>(e.j)];
  }

  std::vector<Triplet> t;
  t.reserve(prior.edges.edges.size() * 4 + n);
  if (spec.lambda > 0.0) {
    for (const Edge& e : prior.edges.edges) {
      const double w = spec.lambda * e.w;
      t.push_back({e.i, e.i, w});
      t.push_back({e.j, e.j, w});
      t.push_back({e.i, e.j, -w});
      t.push_back({e.j, e.i, -w});
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    float value = 0.0f, weight = 0.0f;
    if (!tsdf.lookup(grid.coord(i), value, weight) || weight <= 0.0f) continue;
    if (spec.anchor_mode == AnchorMode::BoundaryShell && degree[i] >= spec.stencil) continue;
    prior.anchored[i] = 1;
    prior.anchor_values[i] = value;
    if (spec.lambda_b > 0.0) {
      prior.constrained[i] = 1;
      t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i), spec.lambda_b});
      prior.b0[i] = spec.lambda_b * value;
    }
  }
  prior.Q0 = SparseMatrix::from_triplets(n, n, std::move(t));
  if (spec.lambda == 0.0) prior.edges.edges.clear();  // no coupling

  Vector constraint(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) constraint[i] = prior.constrained[i] ? 1.0 : 0.0;
  const auto loose = unconstrained_nodes(n, prior.edges, constraint);
  if (!loose.empty())
    log_message(LogLevel::Info, "SingularPrior: " + std::to_string(loose.size()) +
                                    " nodes lie in components without anchors; they need observations");
  return prior;
}

std::vector<std::int32_t> unconstrained_nodes(std::size_t n, const EdgeList& edges,
                                              std::span<const double> constraint) {
  std::vector<std::int32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::int32_t a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  for (const Edge& e : edges.edges) {
    const auto a = find(e.i), b = find(e.j);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<char> ok(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    if (constraint[i] > 0.0) ok[static_cast<std::size_t>(find(static_cast<std::int32_t>(i)))] = 1;
  std::vector<std::int32_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!ok[static_cast<std::size_t>(find(static_cast<std::int32_t>(i)))])
      out.push_back(static_cast<std::int32_t>(i));
  return out;
}

void pin_nodes(Prior& prior, std::span<const std::int32_t> nodes, std::span<const double> targets,
               double weight) {
  if (nodes.empty()) return;
  const std::size_t n = prior.Q0.rows();
  std::vector<Triplet> t;
  t.reserve(prior.Q0.nnz() + nodes.size());
  const auto off = prior.Q0.row_offsets();
  for (std::size_t r = 0; r < n; ++r)
    for (auto k = off[r]; k < off[r + 1]; ++k)
      t.push_back({static_cast<std::int32_t>(r), prior.Q0.col_indices()[static_cast<std::size_t>(k)],
                   prior.Q0.values()[static_cast<std::size_t>(k)]});
  for (auto i : nodes) {
    t.push_back({i, i, weight});
    prior.constrained[static_cast<std::size_t>(i)] = 1;
    prior.b0[static_cast<std::size_t>(i)] += weight * targets[static_cast<std::size_t>(i)];
  }
  prior.Q0 = SparseMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace probsdf
