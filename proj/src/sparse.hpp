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

#include "common.hpp"
#include "observation.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace probsdf {

struct Triplet {
  std::int32_t row, col;
  double value;
};

/// Compressed sparse rows: sorted column indices, no duplicates, no explicit zeros.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Duplicates are summed; entries that sum to exactly zero are dropped.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return n_rows_; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::int64_t> row_offsets() const { return offsets_; }
  std::span<const std::int32_t> col_indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  double coeff(std::size_t r, std::size_t c) const;
  Vector diagonal() const;
  SparseMatrix transpose() const;
  Eigen::MatrixXd to_dense() const;

 private:
  std::size_t n_rows_ = 0, n_cols_ = 0;
  std::vector<std::int64_t> offsets_{0};
  std::vector<std::int32_t> indices_;
  std::vector<double> values_;
};

/// y = m x. DimensionMismatch when x has the wrong length.
Vector spmv(const SparseMatrix& m, std::span<const double> x);
void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Posterior precision Q = Q0 + A^T W A, applied without forming A^T W A.
class PrecisionOperator {
 public:
  PrecisionOperator(SparseMatrix q0, const ObservationSet& obs);

  std::size_t size() const { return q0_.rows(); }
  std::size_t observation_count() const { return a_.rows(); }
  const SparseMatrix& prior() const { return q0_; }
  const Vector& diag() const { return diag_; }
  /// Diagonal of A^T W A alone.
  const Vector& data_diag() const { return data_diag_; }
  /// True when Q has no off-diagonal entries (Q0 diagonal, single-entry rows).
  bool is_diagonal() const { return diagonal_; }

  /// Reentrant; safe to call concurrently from several workers.
  void apply(std::span<const double> x, std::span<double> out) const;
  Vector apply(std::span<const double> x) const;
  /// Applies Q to up to kMaxBlock vectors in one pass over A, which is what
  /// bounds the cost. Column c is bitwise equal to apply(*xs[c]).
  void apply_block(std::span<const Vector* const> xs, std::span<Vector* const> outs) const;
  static constexpr std::size_t kMaxBlock = 16;

  /// A^T W y for the stored observations.
  Vector data_rhs(std::span<const double> y) const;

 private:
  template <std::size_t C>
  void apply_fixed(std::span<const Vector* const> xs, std::span<Vector* const> outs) const;

  SparseMatrix q0_;
  SparseMatrix a_;   // M x N
  SparseMatrix at_;  // N x M
  Vector w_;         // 1 / sigma^2
  Vector diag_;
  Vector data_diag_;
  bool diagonal_ = false;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

struct SolveResult {
  Vector x;
  SolveStats stats;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct PcgOptions {
  double tol = 1e-8;
  int max_iter = 0;  // 0: 10 * sqrt(N) + 200
  /// Called with (iteration, iterate) after every update; tests only.
  std::function<void(int, const Vector&)> on_iterate;
};

int default_max_iter(std::size_t n);

/// Jacobi-preconditioned conjugate gradients from x0 = 0. Returns the last
/// iterate with converged = false when max_iter is exhausted (callers decide
/// whether that is fatal, see require_converged). Throws BreakdownIndefinite
/// when p^T Q p <= 1e-14 |p|^2.
SolveResult pcg(const LinearOperator& apply, std::span<const double> h,
                std::span<const double> precond_diag, const PcgOptions& options);

/// Independent PCG solves Q x_c = rhs[c] that share each operator pass. Every
/// column follows pcg() step for step and returns a bitwise equal result.
/// on_iterate is not called.
std::vector<SolveResult> pcg_block(const PrecisionOperator& op, const std::vector<Vector>& rhs,
                                   const PcgOptions& options);

/// Throws NotConverged when the solve did not reach its tolerance.
void require_converged(const SolveResult& result, const char* what);

/// Dense materialization of Q and its inverse; test oracle for N <= 2000.
struct DenseSystem {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd Q_inv;
};
DenseSystem dense_solve_oracle(const PrecisionOperator& op);

}  // namespace probsdf
