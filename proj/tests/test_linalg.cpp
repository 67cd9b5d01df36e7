#include <catch2/catch.hpp>

#include <chrono>
#include <sstream>

#include "lsm/assembly.hpp"
#include "lsm/common.hpp"
#include "lsm/solver.hpp"
#include "lsm/sparse.hpp"

using namespace lsm;

namespace {

SparseOperator tridiag(int n, double diag, double off) {
  std::vector<std::vector<int>> cols(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) cols[i].push_back(i - 1);
    cols[i].push_back(i);
    if (i + 1 < n) cols[i].push_back(i + 1);
  }
  CsrBuilder b(std::move(cols));
  for (int i = 0; i < n; ++i) {
    b.add(i, i, diag);
    if (i > 0) b.add(i, i - 1, off);
    if (i + 1 < n) b.add(i, i + 1, off);
  }
  return b.take();
}

SparseOperator identity(int n) { return tridiag(n, 1.0, 0.0); }

SparseOperator random_spd(int n, Pcg32& rng) {
  // A = B^T B + I with a dense random B, stored sparsely.
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = 2.0 * rng.next_double() - 1.0;
  Eigen::MatrixXd A = B.transpose() * B + Eigen::MatrixXd::Identity(n, n);
  std::vector<std::vector<int>> cols(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cols[i].push_back(j);
  CsrBuilder b(std::move(cols));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b.add(i, j, A(i, j));
  return b.take();
}

Vector random_vector(int n, Pcg32& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 2.0 * rng.next_double() - 1.0;
  return v;
}

}  // namespace

TEST_CASE("combine forms M + tau^2/4 S") {
  // 1D, h = 1/4, A = 1: hand-assembled interior matrices.
  auto M = tridiag(3, 1.0 / 6, 1.0 / 24);
  auto S = tridiag(3, 8.0, -4.0);
  SECTION("tau = 0 returns M") {
    auto K = combine(M, S, 0.0);
    CHECK(K.entry(0, 0) == M.entry(0, 0));
    CHECK(K.entry(0, 1) == M.entry(0, 1));
  }
  SECTION("tau = 1/4 matches hand values") {
    auto K = combine(M, S, 0.25);
    CHECK(K.entry(1, 1) == Approx(7.0 / 24).epsilon(1e-15));
    CHECK(K.entry(1, 0) == Approx(-1.0 / 48).epsilon(1e-15));
  }
  SECTION("K is SPD (factorization succeeds)") {
    auto K = combine(M, S, 0.25);
    CHECK_NOTHROW(Factorization(K));
  }
  SECTION("dimension mismatch is rejected") {
    auto S2 = tridiag(4, 8.0, -4.0);
    CHECK_THROWS_AS(combine(M, S2, 0.25), config_error);
  }
}

TEST_CASE("direct factorization") {
  Pcg32 rng(7);
  SECTION("identity solve returns the input") {
    auto I = identity(10);
    Factorization F(I);
    auto b = random_vector(10, rng);
    CHECK((F.solve(b) - b).norm() == Approx(0.0).margin(1e-15));
  }
  SECTION("random SPD 50x50: relative residual below 1e-12") {
    auto A = random_spd(50, rng);
    Factorization F(A);
    for (int t = 0; t < 5; ++t) {
      auto b = random_vector(50, rng);
      auto x = F.solve(b);
      CHECK((A * x - b).norm() / b.norm() <= 1e-12);
    }
  }
  SECTION("solve then multiply back reproduces random x to 1e-12") {
    auto A = random_spd(40, rng);
    Factorization F(A);
    for (int t = 0; t < 20; ++t) {
      auto x = random_vector(40, rng);
      Vector b = A * x;
      CHECK((F.solve(b) - x).norm() / x.norm() <= 1e-12);
    }
  }
  SECTION("non-SPD input is reported") {
    auto A = tridiag(5, -1.0, 0.0);
    CHECK_THROWS_AS(Factorization(A), numerical_error);
  }
}

TEST_CASE("factorization cache") {
  Pcg32 rng(11);
  auto A = random_spd(20, rng);
  FactorizationCache cache;
  auto f1 = cache.factorize(A);
  auto f2 = cache.factorize(A);
  CHECK(f1.get() == f2.get());  // same object, no refactorization
  CHECK(cache.misses() == 1);
  CHECK(cache.hits() == 1);
  auto B = random_spd(20, rng);
  auto f3 = cache.factorize(B);
  CHECK(f3.get() != f1.get());
  CHECK(cache.misses() == 2);
}

TEST_CASE("conjugate gradients") {
  Pcg32 rng(3);
  SECTION("zero rhs gives zero solution") {
    auto A = random_spd(15, rng);
    Vector b = Vector::Zero(15);
    CHECK(cg_solve(A, b).norm() == 0.0);
  }
  SECTION("identity converges immediately") {
    auto I = identity(8);
    auto b = random_vector(8, rng);
    CHECK((cg_solve(I, b) - b).norm() <= 1e-13 * b.norm());
  }
  SECTION("agrees with the direct solve") {
    auto A = random_spd(60, rng);
    Factorization F(A);
    auto b = random_vector(60, rng);
    auto xd = F.solve(b);
    auto xc = cg_solve(A, b, 1e-14);
    CHECK((xd - xc).norm() / xd.norm() <= 1e-10);
  }
  SECTION("deterministic across runs") {
    auto A = random_spd(30, rng);
    auto b = random_vector(30, rng);
    auto x1 = cg_solve(A, b);
    auto x2 = cg_solve(A, b);
    CHECK(x1 == x2);
  }
}

TEST_CASE("dense inverse") {
  SECTION("diagonal matrix inverts entrywise") {
    auto D = tridiag(6, 4.0, 0.0);
    auto inv = dense_inverse(D);
    for (int i = 0; i < 6; ++i) CHECK(inv(i, i) == Approx(0.25).epsilon(1e-14));
  }
  SECTION("symmetric input gives symmetric output") {
    Pcg32 rng(5);
    auto A = random_spd(25, rng);
    auto inv = dense_inverse(A);
    CHECK((inv - inv.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SECTION("multiply-back gives the identity") {
    Pcg32 rng(6);
    auto A = random_spd(25, rng);
    auto inv = dense_inverse(A);
    Eigen::MatrixXd prod = Eigen::MatrixXd::Zero(25, 25);
    for (int j = 0; j < 25; ++j) prod.col(j) = A * Vector(inv.col(j));
    CHECK((prod - Eigen::MatrixXd::Identity(25, 25)).cwiseAbs().maxCoeff() <=
          1e-10);
  }
  SECTION("multiply-back on the 2D system at h = 2^-4") {
    MeshHierarchy m(2, 1.0 / 16, 1.0 / 16);
    auto region = m.all_elements();
    auto dm = make_dof_map(m, region);
    auto A1 = constant_coefficient(m, 1.0);
    auto M = assemble_mass(m, region, dm);
    auto S = assemble_stiffness(m, A1, region, dm);
    auto K = combine(M, S, 1.0 / 16);
    auto inv = dense_inverse(K);
    Eigen::MatrixXd prod(K.n, K.n);
    for (int j = 0; j < K.n; ++j) prod.col(j) = K * Vector(inv.col(j));
    CHECK((prod - Eigen::MatrixXd::Identity(K.n, K.n)).cwiseAbs().maxCoeff() <=
          1e-10);
  }
  SECTION("dimension guard") {
    SparseOperator big;
    big.n = 20001;
    big.row_ptr.assign(big.n + 1, 0);
    CHECK_THROWS_AS(dense_inverse(big), config_error);
  }
}

TEST_CASE("factorize and solve at experiment scale is fast") {
  // 2D system at h = 2^-6: factorization plus 100 solves should be far under
  // a second; assert a generous bound so the check stays robust.
  MeshHierarchy m(2, 1.0 / 8, 1.0 / 64);
  auto region = m.all_elements();
  auto dm = make_dof_map(m, region);
  auto A = constant_coefficient(m, 1.0);
  auto M = assemble_mass(m, region, dm);
  auto S = assemble_stiffness(m, A, region, dm);
  auto K = combine(M, S, 1.0 / 64);
  auto t0 = std::chrono::steady_clock::now();
  Factorization F(K);
  Vector b = Vector::Ones(K.n);
  Vector x = b;
  for (int i = 0; i < 100; ++i) x = F.solve(b);
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  CHECK((K * x - b).norm() / b.norm() <= 1e-11);
  CHECK(secs < 5.0);
}

TEST_CASE("coordinate dump") {
  auto A = tridiag(2, 2.0, -1.0);
  std::ostringstream os;
  A.dump(os);
  CHECK(os.str() == "0 0 2\n0 1 -1\n1 0 -1\n1 1 2\n");
}
