#include <catch2/catch.hpp>

#include <sstream>

#include "lsm/csv.hpp"
#include "lsm/experiments.hpp"

using namespace lsm;

TEST_CASE("experiment config validation") {
  ExperimentConfig cfg;
  cfg.d = 2;
  cfg.h = 1.0 / 32;
  cfg.apply_defaults();
  CHECK_NOTHROW(cfg.validate());
  SECTION("divisibility violations are config errors") {
    auto bad = cfg;
    bad.T = 0.3;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = cfg;
    bad.h = 0.3;
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = cfg;
    bad.H = 3.0 / 32;  // 1/H not an integer
    CHECK_THROWS_AS(bad.validate(), config_error);
  }
  SECTION("enumerations are checked") {
    auto bad = cfg;
    bad.rhs = "pulse";
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = cfg;
    bad.compare = "self";
    CHECK_THROWS_AS(bad.validate(), config_error);
    bad = cfg;
    bad.ell = "few";
    CHECK_THROWS_AS(bad.validate(), config_error);
  }
  SECTION("dimension-specific manufactured sources") {
    auto bad = cfg;
    bad.rhs = "manufactured1d";  // but d = 2
    CHECK_THROWS_AS(bad.validate(), config_error);
  }
  SECTION("defaults fill tau, T and coeff_scale") {
    ExperimentConfig c;
    c.h = 1.0 / 64;
    c.H = 1.0 / 8;
    c.apply_defaults();
    CHECK(c.tau == c.h);
    CHECK(c.T == c.H);
    CHECK(c.coeff_scale == c.H);
  }
}

TEST_CASE("config echo and tuple hash are deterministic") {
  ExperimentConfig cfg;
  cfg.h = 1.0 / 64;
  cfg.apply_defaults();
  auto e1 = cfg.echo("lsm");
  auto e2 = cfg.echo("lsm");
  CHECK(e1 == e2);
  CHECK(tuple_hash(e1) == tuple_hash(e2));
  CHECK(tuple_hash(e1).size() == 12);
  cfg.seed = 2;
  CHECK(tuple_hash(cfg.echo("lsm")) != tuple_hash(e1));
}

TEST_CASE("snapshot CSV bytes are reproducible") {
  MeshHierarchy m(2, 0.5, 0.25);
  auto dm = make_dof_map(m, m.all_elements());
  Vector v(dm.size());
  for (int i = 0; i < v.size(); ++i) v[i] = std::sqrt(2.0) * (i + 1) / 7.0;
  std::ostringstream s1, s2;
  write_snapshot_csv(s1, "echo line", m, dm.node_of_dof, v);
  write_snapshot_csv(s2, "echo line", m, dm.node_of_dof, v);
  CHECK(s1.str() == s2.str());
  CHECK(s1.str().substr(0, 12) == "# echo line\n");
  // boundary nodes appear with exact zeros
  CHECK(s1.str().find("\n0,0\n") != std::string::npos);
}

TEST_CASE("pgm writer") {
  Eigen::MatrixXd mag(2, 2);
  mag << 1.0, 1e-8, 1e-20, 0.0;
  std::ostringstream os;
  write_pgm_log(os, mag);
  std::string s = os.str();
  CHECK(s.substr(0, 3) == "P5\n");
  CHECK(s.find("2 2\n255\n") != std::string::npos);
  // last 4 bytes are the pixels; magnitudes below the floor clamp to black
  std::string px = s.substr(s.size() - 4);
  CHECK(static_cast<unsigned char>(px[0]) == 255);
  CHECK(static_cast<unsigned char>(px[2]) == 0);
  CHECK(static_cast<unsigned char>(px[3]) == 0);
}

TEST_CASE("round-trip double formatting") {
  for (double v : {1.0 / 3, std::sqrt(2.0), 1e-300, 2.397297656464281e-12}) {
    CHECK(std::stod(fmt_double(v)) == v);
  }
}

TEST_CASE("manufactured sources match the finite-difference residual") {
  // f must equal dtt u - Laplace(u) (A = 1); check at an off-lattice point
  double x = 0.3, y = 0.7, t = 0.4, eps = 1e-4;

  auto u2 = manufactured_exact(2);
  double dtt = (u2(x, y, t + eps) - 2 * u2(x, y, t) + u2(x, y, t - eps)) /
               (eps * eps);
  double lap = (u2(x + eps, y, t) + u2(x - eps, y, t) + u2(x, y + eps, t) +
                u2(x, y - eps, t) - 4 * u2(x, y, t)) /
               (eps * eps);
  double f2 = (kPi * kPi - 0.5 * kPi * kPi * std::cos(kPi * t)) *
              std::sin(kPi * x) * std::sin(kPi * y);
  CHECK(dtt - lap == Approx(f2).margin(1e-5));

  auto u1 = manufactured_exact(1);
  double dtt1 = (u1(x, 0, t + eps) - 2 * u1(x, 0, t) + u1(x, 0, t - eps)) /
                (eps * eps);
  double dxx1 = (u1(x + eps, 0, t) - 2 * u1(x, 0, t) + u1(x - eps, 0, t)) /
                (eps * eps);
  CHECK(dtt1 - dxx1 == Approx(kPi * kPi / 2 * std::sin(kPi * x)).margin(1e-5));
}

TEST_CASE("sweep points run end to end") {
  ExperimentConfig cfg;
  cfg.d = 2;
  cfg.h = 1.0 / 32;
  cfg.H = 0.25;
  cfg.compare = "global";
  cfg.parallelism = 2;
  auto row = run_point("left", cfg, 16);
  CHECK(row.rel_error <= 1e-11);  // full coverage at ell=16 on this mesh
  CHECK(row.ell_resolved == 16);
}

TEST_CASE("cost model orders configurations sensibly") {
  ExperimentConfig small;
  small.d = 2;
  small.h = 1.0 / 32;
  small.H = 0.25;
  small.apply_defaults();
  ExperimentConfig big = small;
  big.h = 1.0 / 256;
  big.H = 1.0 / 16;
  big.tau = big.h;
  big.T = big.H;
  CHECK(estimated_cost_units(big, 32) > 100 * estimated_cost_units(small, 8));
}
