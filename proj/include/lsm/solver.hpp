#pragma once

#include <Eigen/SparseCholesky>
#include <future>
#include <map>
#include <memory>
#include <mutex>

#include "lsm/sparse.hpp"

namespace lsm {

// ---------------------------------------------------------------------------
// SPD direct factorization (sparse Cholesky with fill-reducing AMD ordering).
// Immutable after construction; concurrent solves are fine as long as each
// caller owns its result vector.
// ---------------------------------------------------------------------------
class Factorization {
 public:
  explicit Factorization(const SparseOperator& K)
      : fingerprint_(K.fingerprint()), n_(K.n) {
    Eigen::SparseMatrix<double> A = K.to_eigen();
    llt_.compute(A);
    check(llt_.info() == Eigen::Success,
          "factorize: non-SPD pivot (assembly bug or invalid system)");
  }

  std::uint64_t fingerprint() const { return fingerprint_; }
  int dim() const { return n_; }

  Vector solve(const Vector& b) const { return llt_.solve(b); }

 private:
  std::uint64_t fingerprint_;
  int n_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

using FactorizationPtr = std::shared_ptr<const Factorization>;

// ---------------------------------------------------------------------------
// Fingerprint-keyed factorization cache.  Identical matrices (same structure
// and bit-identical values) are factorized exactly once per cache; the hit
// counter is exposed so tests can verify that no refactorization happens.
// Safe for concurrent use; a key being computed blocks only its duplicates.
// ---------------------------------------------------------------------------
class FactorizationCache {
 public:
  FactorizationPtr factorize(const SparseOperator& K) {
    std::uint64_t key = K.fingerprint();
    std::promise<FactorizationPtr> prom;
    std::shared_future<FactorizationPtr> fut;
    bool creator = false;
    {
      std::lock_guard<std::mutex> g(mutex_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        fut = prom.get_future().share();
        entries_.emplace(key, fut);
        creator = true;
        ++misses_;
      } else {
        fut = it->second;
        ++hits_;
      }
    }
    if (creator) {
      try {
        prom.set_value(std::make_shared<const Factorization>(K));
      } catch (...) {
        prom.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

  void clear() {
    std::lock_guard<std::mutex> g(mutex_);
    entries_.clear();
    hits_ = misses_ = 0;
  }

 private:
  std::mutex mutex_;
  std::map<std::uint64_t, std::shared_future<FactorizationPtr>> entries_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// ---------------------------------------------------------------------------
// Conjugate gradients with a fixed (sequential) reduction order, used as the
// memory-constrained fallback behind the same solve interface.
// ---------------------------------------------------------------------------
inline Vector cg_solve(const SparseOperator& K, const Vector& b,
                       double tol = 1e-13) {
  require(K.n == b.size(), "cg_solve: dimension mismatch");
  Vector x = Vector::Zero(K.n);
  double bnorm = b.norm();
  if (bnorm == 0.0) return x;
  Vector r = b;
  Vector p = r;
  Vector Ap(K.n);
  double rr = r.squaredNorm();
  long maxit = 10L * K.n;
  for (long it = 0; it < maxit; ++it) {
    if (std::sqrt(rr) <= tol * bnorm) return x;
    K.multiply(p, Ap);
    double pAp = p.dot(Ap);
    check(pAp > 0.0, "cg_solve: matrix is not positive definite");
    double alpha = rr / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (std::sqrt(rr) <= tol * bnorm) return x;
  throw numerical_error("cg_solve: iteration cap (10n) exceeded");
}

/// Full inverse via repeated solves against unit vectors; guarded so it is
/// only used for probe-sized systems.
inline Eigen::MatrixXd dense_inverse(const SparseOperator& K) {
  require(K.n <= 20000,
          "dense_inverse: dimension guard (20000) exceeded; use the decay "
          "profile instead");
  Factorization F(K);
  Eigen::MatrixXd inv(K.n, K.n);
  Vector e = Vector::Zero(K.n);
  for (int j = 0; j < K.n; ++j) {
    e[j] = 1.0;
    inv.col(j) = F.solve(e);
    e[j] = 0.0;
  }
  return inv;
}

}  // namespace lsm
