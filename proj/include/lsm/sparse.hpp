#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <ostream>
#include <vector>

#include "lsm/common.hpp"

namespace lsm {

using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Symmetric sparse matrix in CSR form.  Column indices are sorted per row and
// only assembled stencil entries are stored.
// ---------------------------------------------------------------------------
struct SparseOperator {
  int n = 0;
  std::vector<int> row_ptr;  // size n+1
  std::vector<int> col;
  std::vector<double> val;
  bool symmetric = true;

  std::size_t nnz() const { return col.size(); }

  double entry(int i, int j) const {
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (col[k] == j) return val[k];
    return 0.0;
  }

  void multiply(const Vector& x, Vector& y) const {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
      y[i] = s;
    }
  }

  Vector operator*(const Vector& x) const {
    Vector y(n);
    multiply(x, y);
    return y;
  }

  bool structurally_symmetric() const {
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        int j = col[k];
        if (entry(j, i) != val[k]) return false;
      }
    return true;
  }

  std::uint64_t fingerprint() const {
    Fnv1a f;
    f.add(n);
    f.add_span(row_ptr);
    f.add_span(col);
    f.add_span(val);
    return f.value();
  }

  Eigen::SparseMatrix<double> to_eigen() const {
    Eigen::SparseMatrix<double> A(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(nnz());
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        trip.emplace_back(i, col[k], val[k]);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
  }

  /// Coordinate text dump (row, col, value), one entry per line.
  void dump(std::ostream& os) const {
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i, col[k], val[k]);
        os << buf;
      }
  }
};

// ---------------------------------------------------------------------------
// CSR accumulation with a fixed pattern; addition order is the caller's
// element order, which keeps assembled values reproducible bit for bit.
// ---------------------------------------------------------------------------
class CsrBuilder {
 public:
  /// cols_per_row: sorted, duplicate-free column lists.
  explicit CsrBuilder(std::vector<std::vector<int>> cols_per_row) {
    op_.n = static_cast<int>(cols_per_row.size());
    op_.row_ptr.resize(op_.n + 1, 0);
    for (int i = 0; i < op_.n; ++i)
      op_.row_ptr[i + 1] = op_.row_ptr[i] + static_cast<int>(cols_per_row[i].size());
    op_.col.reserve(op_.row_ptr[op_.n]);
    for (auto& r : cols_per_row) op_.col.insert(op_.col.end(), r.begin(), r.end());
    op_.val.assign(op_.col.size(), 0.0);
  }

  void add(int i, int j, double v) {
    int lo = op_.row_ptr[i], hi = op_.row_ptr[i + 1];
    auto it = std::lower_bound(op_.col.begin() + lo, op_.col.begin() + hi, j);
    op_.val[it - op_.col.begin()] += v;
  }

  SparseOperator take() { return std::move(op_); }

 private:
  SparseOperator op_;
};

/// K = M + (tau^2/4) S.  Fast path requires the operators to share their
/// sparsity pattern (always true for mass/stiffness from one assembly);
/// otherwise the union pattern is formed.
inline SparseOperator combine(const SparseOperator& M, const SparseOperator& S,
                              double tau) {
  require(M.n == S.n, "combine: dimension mismatch");
  double w = tau * tau / 4.0;
  if (M.row_ptr == S.row_ptr && M.col == S.col) {
    SparseOperator K = M;
    for (std::size_t k = 0; k < K.val.size(); ++k) K.val[k] += w * S.val[k];
    return K;
  }
  std::vector<std::vector<int>> cols(M.n);
  for (int i = 0; i < M.n; ++i) {
    for (int k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k)
      cols[i].push_back(M.col[k]);
    for (int k = S.row_ptr[i]; k < S.row_ptr[i + 1]; ++k)
      cols[i].push_back(S.col[k]);
    std::sort(cols[i].begin(), cols[i].end());
    cols[i].erase(std::unique(cols[i].begin(), cols[i].end()), cols[i].end());
  }
  CsrBuilder b(std::move(cols));
  for (int i = 0; i < M.n; ++i)
    for (int k = M.row_ptr[i]; k < M.row_ptr[i + 1]; ++k)
      b.add(i, M.col[k], M.val[k]);
  for (int i = 0; i < S.n; ++i)
    for (int k = S.row_ptr[i]; k < S.row_ptr[i + 1]; ++k)
      b.add(i, S.col[k], w * S.val[k]);
  return b.take();
}

}  // namespace lsm
