#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "lsm/analysis.hpp"
#include "lsm/csv.hpp"
#include "lsm/superposition.hpp"

namespace lsm {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Flat experiment configuration mirroring the CLI flags / JSON keys.
// ---------------------------------------------------------------------------
struct ExperimentConfig {
  int d = 2;
  double h = 1.0 / 32;
  double tau = -1.0;  // default: h
  double H = -1.0;    // default: 1/4 in 2D probes; must divide into h
  double T = -1.0;    // default: H
  std::string ell = "auto-heuristic";  // integer, auto-heuristic, auto-theory
  double t_fin = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::string coeff = "constant";  // constant | random
  double coeff_scale = -1.0;       // random-block edge length eps_A; default H
  std::uint64_t seed = 1;
  std::string rhs = "one";    // one | manufactured2d | manufactured1d | zero
  std::string ics = "zero";   // zero | manufactured
  std::string compare = "none";  // global | exact | none
  std::string output_dir = "out";
  int parallelism = 0;  // 0: hardware concurrency
  std::string solver = "direct";  // direct | cg
  double cg_tol = 1e-13;

  void apply_defaults() {
    if (tau <= 0.0) tau = h;
    if (H <= 0.0) H = std::min(0.25, std::max(h, 0.25));
    if (T <= 0.0) T = H;
    if (coeff_scale <= 0.0) coeff_scale = H;
  }

  /// Pure arithmetic validation; runs before any allocation.
  void validate() const {
    require(d == 1 || d == 2, "config: d must be 1 or 2");
    auto integral = [](double x) {
      return x > 0.0 && std::abs(x - std::llround(x)) <= 1e-9 * std::max(1.0, x);
    };
    require(h > 0.0 && integral(1.0 / h), "config: 1/h must be an integer");
    require(H >= h && integral(1.0 / H), "config: 1/H must be an integer");
    require(integral(H / h), "config: H/h must be an integer");
    require(tau > 0.0, "config: tau must be positive");
    require(integral(T / tau), "config: T/tau must be an integer");
    require(integral(t_fin / T), "config: t_fin/T must be an integer");
    require(alpha > 0.0 && alpha <= beta, "config: need 0 < alpha <= beta");
    require(coeff == "constant" || coeff == "random",
            "config: coeff must be constant or random");
    if (coeff == "random")
      require(integral(coeff_scale / h), "config: coeff_scale/h must be an integer");
    require(rhs == "one" || rhs == "zero" || rhs == "manufactured2d" ||
                rhs == "manufactured1d",
            "config: unknown rhs kind");
    if (rhs == "manufactured2d") require(d == 2, "config: manufactured2d needs d=2");
    if (rhs == "manufactured1d") require(d == 1, "config: manufactured1d needs d=1");
    require(ics == "zero" || ics == "manufactured", "config: unknown ics kind");
    require(compare == "none" || compare == "global" || compare == "exact",
            "config: unknown compare kind");
    if (compare == "exact")
      require(rhs == "manufactured2d" || rhs == "manufactured1d",
              "config: compare=exact needs a manufactured rhs");
    require(solver == "direct" || solver == "cg", "config: unknown solver");
    require(cg_tol > 0.0 && cg_tol < 1e-3, "config: cg_tol out of range");
    require(parallelism >= 0, "config: parallelism must be nonnegative");
    if (ell != "auto-heuristic" && ell != "auto-theory") {
      try {
        std::size_t pos = 0;
        int v = std::stoi(ell, &pos);
        require(pos == ell.size() && v >= 0, "config: bad ell");
      } catch (const std::exception&) {
        throw config_error("config: ell must be an integer, auto-heuristic, "
                           "or auto-theory");
      }
    }
  }

  /// Resolved parameter tuple in a fixed key order (CSV header echo).
  std::string echo(const std::string& subcommand) const {
    std::ostringstream os;
    os << "lsmwave " << subcommand << " d=" << d << " h=" << fmt_double(h)
       << " tau=" << fmt_double(tau) << " H=" << fmt_double(H)
       << " T=" << fmt_double(T) << " ell=" << ell
       << " t_fin=" << fmt_double(t_fin) << " alpha=" << fmt_double(alpha)
       << " beta=" << fmt_double(beta) << " coeff=" << coeff
       << " coeff_scale=" << fmt_double(coeff_scale) << " seed=" << seed
       << " rhs=" << rhs << " ics=" << ics << " compare=" << compare
       << " solver=" << solver << " cg_tol=" << fmt_double(cg_tol);
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Manufactured solutions (A == 1): the source is space-time separable.
// 2D: u = sin(pi x) sin(pi y) sin(0.5 pi t)^2
// 1D: u = sin(pi x) sin(0.5 pi t)^2
// ---------------------------------------------------------------------------
inline SpaceTimeFn manufactured_exact(int d) {
  if (d == 1)
    return [](double x, double, double t) {
      double s = std::sin(0.5 * kPi * t);
      return std::sin(kPi * x) * s * s;
    };
  return [](double x, double y, double t) {
    double s = std::sin(0.5 * kPi * t);
    return std::sin(kPi * x) * std::sin(kPi * y) * s * s;
  };
}

inline Rhs manufactured_rhs(int d) {
  if (d == 1)
    return Rhs::separable([](double x, double) { return std::sin(kPi * x); },
                          [](double) { return kPi * kPi / 2.0; });
  return Rhs::separable(
      [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); },
      [](double t) { return kPi * kPi - 0.5 * kPi * kPi * std::cos(kPi * t); });
}

inline Rhs make_rhs(const ExperimentConfig& cfg) {
  if (cfg.rhs == "zero") return Rhs::zero();
  if (cfg.rhs == "one")
    return Rhs::separable([](double, double) { return 1.0; },
                          [](double) { return 1.0; });
  return manufactured_rhs(cfg.d);
}

inline ProblemSpec make_problem(const ExperimentConfig& cfg) {
  MeshHierarchy mesh(cfg.d, cfg.H, cfg.h);
  CoefficientField A =
      cfg.coeff == "random"
          ? random_coefficient(mesh, cfg.seed, cfg.coeff_scale, cfg.alpha,
                               cfg.beta)
          : constant_coefficient(mesh, cfg.alpha);
  SpaceTimeFn u0, v0;
  if (cfg.ics == "manufactured") {
    auto exact = manufactured_exact(cfg.d);
    u0 = [exact](double x, double y, double) { return exact(x, y, 0.0); };
    // d/dt sin^2(0.5 pi t) = 0.5 pi sin(pi t), zero at t = 0
    v0 = [](double, double, double) { return 0.0; };
  }
  return ProblemSpec{std::move(mesh), std::move(A), make_rhs(cfg),
                     std::move(u0),   std::move(v0), cfg.t_fin,
                     cfg.tau,         false,         {}};
}

inline LsmConfig make_lsm_config(const ExperimentConfig& cfg) {
  LsmConfig lsm{make_problem(cfg)};
  lsm.T = cfg.T;
  if (cfg.ell == "auto-heuristic") {
    lsm.ell_mode = EllMode::heuristic;
  } else if (cfg.ell == "auto-theory") {
    lsm.ell_mode = EllMode::theory;
  } else {
    lsm.ell_mode = EllMode::explicit_value;
    lsm.ell = std::stoi(cfg.ell);
  }
  lsm.parallelism = cfg.parallelism;
  lsm.solver = cfg.solver == "cg" ? PatchSolver::cg : PatchSolver::direct;
  lsm.cg_tol = cfg.cg_tol;
  return lsm;
}

// ---------------------------------------------------------------------------
// Figure sweeps.  A crude cost model (solve-weighted dof counts) guards
// against runaway points; desk grids additionally cap h at 2^-8 in 2D and
// 2^-13 in 1D.
// ---------------------------------------------------------------------------
struct SweepRow {
  std::string panel;
  ExperimentConfig cfg;
  int ell_resolved = 0;
  double rel_error = 0.0;
  double seconds = 0.0;
};

inline double estimated_cost_units(const ExperimentConfig& cfg, int ell) {
  double n1 = 1.0 / cfg.h;
  double dofs = cfg.d == 1 ? n1 : n1 * n1;
  double steps = cfg.t_fin / cfg.tau;
  double r = cfg.H / cfg.h;
  double patch_w = std::min(n1, 2 * r + 2.0 * ell);
  double patch_dofs = cfg.d == 1 ? patch_w : patch_w * patch_w;
  double m = std::pow(1.0 / cfg.H - 1.0, cfg.d);
  return dofs * steps + m * patch_dofs * steps;
}

/// Runs one comparison point (vs global or vs exact per cfg.compare).
inline SweepRow run_point(const std::string& panel, ExperimentConfig cfg,
                          int ell) {
  cfg.apply_defaults();
  cfg.ell = std::to_string(ell);
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  SweepRow row{panel, cfg, ell, 0.0, 0.0};
  FactorizationCache cache;
  auto lsm_cfg = make_lsm_config(cfg);
  if (cfg.compare == "exact") {
    auto result = run_lsm(lsm_cfg, cache);
    std::vector<double> times;
    for (long k = 1; k <= lsm_cfg.n_resets(); ++k) times.push_back(k * cfg.T);
    row.rel_error = exact_error(lsm_cfg.problem.mesh, lsm_cfg.problem.coeff,
                                cfg.tau, result.snapshots, times, cfg.T,
                                manufactured_exact(cfg.d));
  } else {
    row.rel_error = compare_to_global(lsm_cfg, cache).rel_error;
  }
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return row;
}

struct FigureSweep {
  std::string name;
  std::vector<SweepRow> rows;
};

/// cost budget: points whose estimate exceeds it are skipped (reported on
/// stderr by the CLI); units are calibrated so ~3e6 units take one second.
inline FigureSweep run_figure(const std::string& name, bool desk,
                              int parallelism, double budget_units = 4e9,
                              std::function<void(const std::string&)> skip_log =
                                  nullptr) {
  FigureSweep sweep{name, {}};
  auto base = [&](double h, double H, double tau, double T) {
    ExperimentConfig cfg;
    cfg.d = 2;
    cfg.h = h;
    cfg.H = H;
    cfg.tau = tau;
    cfg.T = T;
    cfg.compare = "global";
    cfg.parallelism = parallelism;
    return cfg;
  };
  auto push = [&](const std::string& panel, ExperimentConfig cfg, int ell) {
    if (estimated_cost_units(cfg, ell) > budget_units) {
      if (skip_log) {
        std::ostringstream os;
        os << name << " " << panel << " h=" << fmt_double(cfg.h)
           << " H=" << fmt_double(cfg.H) << " ell=" << ell
           << ": skipped (over budget)";
        skip_log(os.str());
      }
      return;
    }
    sweep.rows.push_back(run_point(panel, std::move(cfg), ell));
  };

  if (name == "fig2") {
    double h_min = desk ? 1.0 / 256 : 1.0 / 512;
    for (double h = 1.0 / 64; h >= h_min * 0.999; h /= 2)
      for (double H = 0.5; H >= std::max(1.0 / 32, 2 * h) * 0.999; H /= 2)
        push("left", base(h, H, h, H), static_cast<int>(2 * H / h));
    double h = 1.0 / 256, H = 1.0 / 16;
    std::vector<int> ells = desk ? std::vector<int>{12, 16, 20, 24, 28, 32}
                                 : std::vector<int>{10, 12, 14, 16, 18, 20, 22,
                                                    24, 26, 28, 30, 32, 34};
    for (int ell : ells) push("right", base(h, H, h, H), ell);
  } else if (name == "fig3") {
    double h = desk ? 1.0 / 256 : 1.0 / 512;
    for (double ratio : {0.25, 0.5, 1.0, 2.0, 4.0})
      for (double H = 0.5; H >= 1.0 / 32 * 0.999; H /= 2)
        push("left", base(h, H, ratio * h, H), static_cast<int>(2 * H / h));
    h = 1.0 / 256;
    double H = 1.0 / 16;
    std::vector<double> ratios =
        desk ? std::vector<double>{0.5, 2.0}
             : std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0};
    for (double ratio : ratios) {
      int top = desk ? 48 : 96;
      for (int ell = 8; ell <= top; ell += 8)
        push("right", base(h, H, ratio * h, H), ell);
    }
  } else if (name == "fig4") {
    double h = 1.0 / 256, H = 1.0 / 16;
    struct TPoint {
      double ratio, t_over_h;
    };
    std::vector<TPoint> pts = desk
                                  ? std::vector<TPoint>{{0.25, 0.25}, {2, 0.5}}
                                  : std::vector<TPoint>{{0.25, 1},
                                                        {0.25, 0.5},
                                                        {0.25, 0.25},
                                                        {2, 1},
                                                        {2, 0.5}};
    for (auto [ratio, toh] : pts) {
      int top = desk ? 40 : 60;
      for (int ell = 8; ell <= top; ell += 8)
        push("left", base(h, H, ratio * h, toh * H), ell);
    }
    // right panel: random coefficients, T = H / beta
    for (auto [alpha, beta] : std::vector<std::pair<double, double>>{
             {1.0, 8.0}, {0.125, 1.0}}) {
      for (int ell = 8; ell <= (desk ? 40 : 44); ell += desk ? 8 : 4) {
        auto cfg = base(h, H, h, H / beta);
        cfg.coeff = "random";
        cfg.coeff_scale = 1.0 / 32;
        cfg.alpha = alpha;
        cfg.beta = beta;
        cfg.seed = 1;
        push("right", cfg, ell);
      }
    }
  } else if (name == "fig5") {
    // exact-solution comparisons
    {
      double h = desk ? 1.0 / 512 : 1.0 / 2048;
      double tau = desk ? 1.0 / 64 : 1.0 / 256;
      auto cfg2d = base(h, 1.0 / 16, tau, 1.0 / 16);
      cfg2d.rhs = "manufactured2d";
      cfg2d.compare = "exact";
      std::vector<int> ells = desk ? std::vector<int>{32, 48, 64, 80}
                                   : std::vector<int>{1, 33, 65, 97, 129, 161,
                                                      193, 225, 257, 289, 321};
      for (int ell : ells) push("left", cfg2d, ell);
    }
    {
      ExperimentConfig cfg1d;
      cfg1d.d = 1;
      cfg1d.h = desk ? 1.0 / 8192 : 1.0 / 65536;
      cfg1d.H = 1.0 / 16;
      cfg1d.tau = 1.0 / 256;
      cfg1d.T = 1.0 / 16;
      cfg1d.rhs = "manufactured1d";
      cfg1d.compare = "exact";
      cfg1d.parallelism = parallelism;
      std::vector<int> ells;
      if (desk)
        ells = {256, 512, 768, 1024, 1280};
      else
        ells = {1, 1025, 2049, 3073, 4097, 5121, 6145, 7169, 8193, 9217, 10241};
      for (int ell : ells) push("right", cfg1d, ell);
    }
  } else {
    throw config_error("figures: unknown figure name (use fig2..fig5)");
  }
  return sweep;
}

}  // namespace lsm
