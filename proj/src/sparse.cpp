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
#include "sparse.hpp"

#include <array>

#include "parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace probsdf {

namespace {
constexpr std::size_t kRowGrain = 2048;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets)
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n_rows ||
        static_cast<std::size_t>(t.col) >= n_cols)
      fail(ErrorCode::DimensionMismatch, "triplet index out of range");
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.offsets_.assign(n_rows + 1, 0);
  std::size_t k = 0;
  while (k < triplets.size()) {
    const auto r = triplets[k].row, c = triplets[k].col;
    double v = 0.0;
    for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k)
      v += triplets[k].value;
    if (v == 0.0) continue;
    m.indices_.push_back(c);
    m.values_.push_back(v);
    ++m.offsets_[static_cast<std::size_t>(r) + 1];
  }
  for (std::size_t r = 0; r < n_rows; ++r) m.offsets_[r + 1] += m.offsets_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    t.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(i), 1.0});
  return from_triplets(n, n, std::move(t));
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto b = indices_.begin() + offsets_[r], e = indices_.begin() + offsets_[r + 1];
  auto it = std::lower_bound(b, e, static_cast<std::int32_t>(c));
  if (it == e || *it != static_cast<std::int32_t>(c)) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

Vector SparseMatrix::diagonal() const {
  Vector d(std::min(n_rows_, n_cols_), 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = coeff(r, r);
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t;
  t.n_rows_ = n_cols_;
  t.n_cols_ = n_rows_;
  t.offsets_.assign(n_cols_ + 1, 0);
  for (auto c : indices_) ++t.offsets_[static_cast<std::size_t>(c) + 1];
  for (std::size_t r = 0; r < n_cols_; ++r) t.offsets_[r + 1] += t.offsets_[r];
  t.indices_.resize(indices_.size());
  t.values_.resize(values_.size());
  std::vector<std::int64_t> cursor(t.offsets_.begin(), t.offsets_.end() - 1);
  // Row-major scan keeps each transposed row sorted by column.
  for (std::size_t r = 0; r < n_rows_; ++r) {
    for (auto k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      const auto c = static_cast<std::size_t>(indices_[static_cast<std::size_t>(k)]);
      const auto dst = static_cast<std::size_t>(cursor[c]++);
      t.indices_[dst] = static_cast<std::int32_t>(r);
      t.values_[dst] = values_[static_cast<std::size_t>(k)];
    }
  }
  return t;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_rows_),
                                            static_cast<Eigen::Index>(n_cols_));
  for (std::size_t r = 0; r < n_rows_; ++r)
    for (auto k = offsets_[r]; k < offsets_[r + 1]; ++k)
      d(static_cast<Eigen::Index>(r), indices_[static_cast<std::size_t>(k)]) +=
          values_[static_cast<std::size_t>(k)];
  return d;
}

void spmv(const SparseMatrix& m, std::span<const double> x, std::span<double> y) {
  if (x.size() != m.cols() || y.size() != m.rows())
    fail(ErrorCode::DimensionMismatch, "spmv: vector length does not match matrix shape");
  const auto off = m.row_offsets();
  const auto idx = m.col_indices();
  const auto val = m.values();
  parallel::parallel_for(m.rows(), kRowGrain, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      double acc = 0.0;
      for (auto k = off[r]; k < off[r + 1]; ++k)
        acc += val[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      y[r] = acc;
    }
  });
}

Vector spmv(const SparseMatrix& m, std::span<const double> x) {
  Vector y(m.rows(), 0.0);
  spmv(m, x, y);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "dot: length mismatch");
  return parallel::chunked_sum(a.size(), [&](std::size_t s, std::size_t e) {
    double acc = 0.0;
    for (std::size_t i = s; i < e; ++i) acc += a[i] * b[i];
    return acc;
  });
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

PrecisionOperator::PrecisionOperator(SparseMatrix q0, const ObservationSet& obs)
    : q0_(std::move(q0)) {
  const std::size_t n = q0_.rows();
  if (q0_.cols() != n) fail(ErrorCode::DimensionMismatch, "Q0 must be square");
  if (obs.min_nodes() > n) fail(ErrorCode::DimensionMismatch, "observation references node >= N");

  std::vector<Triplet> t;
  t.reserve(obs.cols().size());
  const auto off = obs.row_offsets();
  for (std::size_t k = 0; k < obs.size(); ++k)
    for (auto e = off[k]; e < off[k + 1]; ++e)
      t.push_back({static_cast<std::int32_t>(k), obs.cols()[static_cast<std::size_t>(e)],
                   obs.vals()[static_cast<std::size_t>(e)]});
  a_ = SparseMatrix::from_triplets(obs.size(), n, std::move(t));
  at_ = a_.transpose();
  w_.resize(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    if (!(obs.sigma2()[k] > 0.0)) fail(ErrorCode::InvalidArgument, "observation variance must be > 0");
    w_[k] = 1.0 / obs.sigma2()[k];
  }

  data_diag_.assign(n, 0.0);
  const auto aoff = at_.row_offsets();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (auto k = aoff[i]; k < aoff[i + 1]; ++k) {
      const double a = at_.values()[static_cast<std::size_t>(k)];
      acc += a * a * w_[static_cast<std::size_t>(at_.col_indices()[static_cast<std::size_t>(k)])];
    }
    data_diag_[i] = acc;
  }
  diag_ = q0_.diagonal();
  for (std::size_t i = 0; i < n; ++i) diag_[i] += data_diag_[i];

  diagonal_ = true;
  const auto qoff = q0_.row_offsets();
  for (std::size_t r = 0; r < n && diagonal_; ++r)
    for (auto k = qoff[r]; k < qoff[r + 1]; ++k)
      if (static_cast<std::size_t>(q0_.col_indices()[static_cast<std::size_t>(k)]) != r) diagonal_ = false;
  const auto arow = a_.row_offsets();
  for (std::size_t k = 0; k < a_.rows() && diagonal_; ++k)
    if (arow[k + 1] - arow[k] > 1) diagonal_ = false;
}

void PrecisionOperator::apply(std::span<const double> x, std::span<double> out) const {
  if (x.size() != size() || out.size() != size())
    fail(ErrorCode::DimensionMismatch, "apply_precision: vector length must equal N");
  spmv(q0_, x, out);
  if (a_.rows() == 0) return;
  thread_local Vector scratch;
  scratch.resize(a_.rows());
  spmv(a_, x, scratch);
  for (std::size_t k = 0; k < scratch.size(); ++k) scratch[k] *= w_[k];
  // Workers must read the caller's buffer, not their own thread_local copy.
  const std::span<const double> t(scratch);
  const auto off = at_.row_offsets();
  const auto idx = at_.col_indices();
  const auto val = at_.values();
  parallel::parallel_for(size(), kRowGrain, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      double acc = 0.0;
      for (auto k = off[r]; k < off[r + 1]; ++k)
        acc += val[static_cast<std::size_t>(k)] * t[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
      out[r] += acc;
    }
  });
}

namespace {

/// out row r, column j = sum_k m(r, k) * in[k * C + j], accumulated in the
/// same order as spmv; `store` receives the C sums of a row.
template <std::size_t C, class Store>
void gather_rows(const SparseMatrix& m, const double* in, Store&& store) {
  const auto off = m.row_offsets();
  const auto idx = m.col_indices();
  const auto val = m.values();
  parallel::parallel_for(m.rows(), kRowGrain, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      std::array<double, C> acc{};
      for (auto k = off[r]; k < off[r + 1]; ++k) {
        const double v = val[static_cast<std::size_t>(k)];
        const double* src = in + static_cast<std::size_t>(idx[static_cast<std::size_t>(k)]) * C;
        for (std::size_t j = 0; j < C; ++j) acc[j] += v * src[j];
      }
      store(r, acc);
    }
  });
}

}  // namespace

template <std::size_t C>
void PrecisionOperator::apply_fixed(std::span<const Vector* const> xs, std::span<Vector* const> outs) const {
  const std::size_t n = size(), c = xs.size();
  // Interleaved copies keep the C values of one node together; unused
  // columns stay zero and are never read back.
  thread_local Vector x_buf, y_buf, t_buf;
  x_buf.assign(n * C, 0.0);
  y_buf.resize(n * C);
  t_buf.resize(a_.rows() * C);
  // Workers must use the caller's buffers, not their own thread_local copies.
  const double* x = x_buf.data();
  double* y = y_buf.data();
  double* t = t_buf.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) x_buf[i * C + j] = (*xs[j])[i];

  gather_rows<C>(q0_, x, [&](std::size_t r, const std::array<double, C>& acc) {
    for (std::size_t j = 0; j < C; ++j) y[r * C + j] = acc[j];
  });
  if (a_.rows() > 0) {
    const double* w = w_.data();
    gather_rows<C>(a_, x, [&](std::size_t r, const std::array<double, C>& acc) {
      for (std::size_t j = 0; j < C; ++j) t[r * C + j] = acc[j] * w[r];
    });
    gather_rows<C>(at_, t, [&](std::size_t r, const std::array<double, C>& acc) {
      for (std::size_t j = 0; j < C; ++j) y[r * C + j] += acc[j];
    });
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) (*outs[j])[i] = y[i * C + j];
}

void PrecisionOperator::apply_block(std::span<const Vector* const> xs, std::span<Vector* const> outs) const {
  const std::size_t c = xs.size(), n = size();
  if (outs.size() != c || c > kMaxBlock) fail(ErrorCode::DimensionMismatch, "apply_block: bad block size");
  for (std::size_t j = 0; j < c; ++j)
    if (xs[j]->size() != n || outs[j]->size() != n)
      fail(ErrorCode::DimensionMismatch, "apply_precision: vector length must equal N");
  if (c == 0) return;
  if (c == 1) return apply(*xs[0], *outs[0]);
  if (c == 2) return apply_fixed<2>(xs, outs);
  if (c <= 4) return apply_fixed<4>(xs, outs);
  if (c <= 8) return apply_fixed<8>(xs, outs);
  return apply_fixed<16>(xs, outs);
}

Vector PrecisionOperator::apply(std::span<const double> x) const {
  Vector out(size(), 0.0);
  apply(x, out);
  return out;
}

Vector PrecisionOperator::data_rhs(std::span<const double> y) const {
  if (y.size() != a_.rows()) fail(ErrorCode::DimensionMismatch, "data_rhs: y length must equal M");
  Vector wy(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) wy[k] = w_[k] * y[k];
  return spmv(at_, wy);
}

int default_max_iter(std::size_t n) {
  return static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 200;
}

namespace {

/// One Jacobi-PCG recurrence. The driver applies Q to direction() and hands
/// the product to advance() until done().
class PcgColumn {
 public:
  PcgColumn(std::span<const double> h, std::span<const double> precond_diag, const PcgOptions& options)
      : h_(h), d_(precond_diag), opt_(options) {
    const std::size_t n = h.size();
    if (precond_diag.size() != n) fail(ErrorCode::DimensionMismatch, "pcg: preconditioner length");
    if (!(options.tol > 0.0 && options.tol < 1.0)) fail(ErrorCode::InvalidArgument, "pcg: tol must be in (0,1)");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(precond_diag[i] > 0.0)) fail(ErrorCode::InvalidArgument, "pcg: preconditioner must be > 0");
      if (!std::isfinite(h[i])) fail(ErrorCode::InvalidArgument, "pcg: right-hand side not finite");
    }
    max_iter_ = options.max_iter > 0 ? options.max_iter : default_max_iter(n);
    res_.x.assign(n, 0.0);
    h_norm_ = norm2(h);
    if (h_norm_ == 0.0) {
      rel_ = 0.0;
      done_ = true;
      return;
    }
    r_.assign(h.begin(), h.end());
    z_.resize(n);
    q_.resize(n);
    precondition();
    p_ = z_;
    rz_ = dot(r_, z_);
    done_ = max_iter_ <= 0;
  }

  bool done() const { return done_; }
  const Vector& direction() const { return p_; }

  /// Consumes qp = Q p.
  void advance(const Vector& qp, const LinearOperator& apply) {
    const std::size_t n = h_.size();
    const double pq = dot(p_, qp);
    if (pq <= 1e-14 * dot(p_, p_))
      fail(ErrorCode::BreakdownIndefinite,
           "pcg: p^T Q p <= 0 at iteration " + std::to_string(it_ + 1) + " (operator not SPD)");
    const double alpha = rz_ / pq;
    parallel::parallel_for(n, kRowGrain, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        res_.x[i] += alpha * p_[i];
        r_[i] -= alpha * qp[i];
      }
    });
    ++it_;
    if (opt_.on_iterate) opt_.on_iterate(it_, res_.x);
    rel_ = norm2(r_) / h_norm_;
    if (rel_ <= opt_.tol) {
      // Recurrence residual drifts from the true one; confirm and restart if needed.
      rel_ = true_residual(apply);
      if (rel_ <= opt_.tol) {
        done_ = true;
        return;
      }
      precondition();
      p_ = z_;
      rz_ = dot(r_, z_);
    } else {
      precondition();
      const double rz_new = dot(r_, z_);
      const double beta = rz_new / rz_;
      rz_ = rz_new;
      parallel::parallel_for(n, kRowGrain, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) p_[i] = z_[i] + beta * p_[i];
      });
    }
    if (it_ >= max_iter_) done_ = true;
  }

  SolveResult finish(const LinearOperator& apply) {
    if (rel_ > opt_.tol) rel_ = true_residual(apply);
    res_.stats.iterations = it_;
    res_.stats.relative_residual = rel_;
    res_.stats.converged = rel_ <= opt_.tol;
    return std::move(res_);
  }

 private:
  void precondition() {
    parallel::parallel_for(h_.size(), kRowGrain, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) z_[i] = r_[i] / d_[i];
    });
  }
  double true_residual(const LinearOperator& apply) {
    apply(res_.x, q_);
    for (std::size_t i = 0; i < h_.size(); ++i) r_[i] = h_[i] - q_[i];
    return norm2(r_) / h_norm_;
  }

  std::span<const double> h_, d_;
  const PcgOptions& opt_;
  int max_iter_ = 0;
  SolveResult res_;
  double h_norm_ = 0.0, rz_ = 0.0, rel_ = 1.0;
  int it_ = 0;
  bool done_ = false;
  Vector r_, z_, p_, q_;
};

}  // namespace

SolveResult pcg(const LinearOperator& apply, std::span<const double> h,
                std::span<const double> precond_diag, const PcgOptions& options) {
  PcgColumn col(h, precond_diag, options);
  Vector q(h.size());
  while (!col.done()) {
    apply(col.direction(), q);
    col.advance(q, apply);
  }
  return col.finish(apply);
}

std::vector<SolveResult> pcg_block(const PrecisionOperator& op, const std::vector<Vector>& rhs,
                                   const PcgOptions& options) {
  const LinearOperator apply = [&op](std::span<const double> x, std::span<double> y) { op.apply(x, y); };
  std::vector<PcgColumn> cols;
  cols.reserve(rhs.size());
  for (const Vector& h : rhs) cols.emplace_back(h, op.diag(), options);
  std::vector<Vector> q(std::min(rhs.size(), PrecisionOperator::kMaxBlock), Vector(op.size()));
  std::vector<const Vector*> in;
  std::vector<Vector*> out;
  std::vector<std::size_t> active;
  for (;;) {
    active.clear();
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (!cols[c].done()) active.push_back(c);
    if (active.empty()) break;
    for (std::size_t first = 0; first < active.size(); first += PrecisionOperator::kMaxBlock) {
      const std::size_t count = std::min(PrecisionOperator::kMaxBlock, active.size() - first);
      in.clear();
      out.clear();
      for (std::size_t j = 0; j < count; ++j) {
        in.push_back(&cols[active[first + j]].direction());
        out.push_back(&q[j]);
      }
      op.apply_block(in, out);
      for (std::size_t j = 0; j < count; ++j) cols[active[first + j]].advance(q[j], apply);
    }
  }
  std::vector<SolveResult> results;
  results.reserve(cols.size());
  for (auto& c : cols) results.push_back(c.finish(apply));
  return results;
}

void require_converged(const SolveResult& result, const char* what) {
  if (!result.stats.converged)
    fail(ErrorCode::NotConverged,
         std::string(what) + ": PCG stopped after " + std::to_string(result.stats.iterations) +
             " iterations at relative residual " + std::to_string(result.stats.relative_residual));
}

DenseSystem dense_solve_oracle(const PrecisionOperator& op) {
  const std::size_t n = op.size();
  if (n > 2000) fail(ErrorCode::InvalidArgument, "dense oracle limited to N <= 2000");
  DenseSystem sys;
  const auto ni = static_cast<Eigen::Index>(n);
  sys.Q.resize(ni, ni);
  Vector e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) sys.Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sys.Q);
  if (llt.info() != Eigen::Success) fail(ErrorCode::SingularMatrix, "dense oracle: Q is not positive definite");
  sys.Q_inv = llt.solve(Eigen::MatrixXd::Identity(ni, ni));
  return sys;
}

}  // namespace probsdf
