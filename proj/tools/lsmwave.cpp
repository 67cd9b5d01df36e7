// Command-line front end: wave-equation runs (global Crank-Nicolson and the
// local superposition method), decay probes, and figure sweeps, all emitting
// CSV with the resolved parameter tuple echoed in the header line.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "lsm/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lsm;

namespace {

void apply_json_overrides(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open config file: " + path);
  json j = json::parse(is);
  auto get = [&](const char* key, auto& target) {
    if (j.contains(key)) target = j.at(key).get<std::decay_t<decltype(target)>>();
  };
  get("d", cfg.d);
  get("h", cfg.h);
  get("tau", cfg.tau);
  get("H", cfg.H);
  get("T", cfg.T);
  if (j.contains("ell")) {
    if (j.at("ell").is_number_integer())
      cfg.ell = std::to_string(j.at("ell").get<long>());
    else
      cfg.ell = j.at("ell").get<std::string>();
  }
  get("t_fin", cfg.t_fin);
  get("alpha", cfg.alpha);
  get("beta", cfg.beta);
  get("coeff", cfg.coeff);
  get("coeff_scale", cfg.coeff_scale);
  get("seed", cfg.seed);
  get("rhs", cfg.rhs);
  get("ics", cfg.ics);
  get("compare", cfg.compare);
  get("output_dir", cfg.output_dir);
  get("parallelism", cfg.parallelism);
  get("solver", cfg.solver);
  get("cg_tol", cfg.cg_tol);
}

fs::path run_dir(const ExperimentConfig& cfg, const std::string& sub) {
  return fs::path(cfg.output_dir) / sub / tuple_hash(cfg.echo(sub));
}

std::vector<long> coarse_steps(const ExperimentConfig& cfg) {
  std::vector<long> steps;
  long n_res = std::llround(cfg.T / cfg.tau);
  long n_k = std::llround(cfg.t_fin / cfg.T);
  for (long k = 1; k <= n_k; ++k) steps.push_back(k * n_res);
  return steps;
}

int cmd_global(ExperimentConfig cfg) {
  cfg.apply_defaults();
  cfg.validate();
  std::string echo = cfg.echo("global");
  fs::path dir = run_dir(cfg, "global");

  ProblemSpec p = make_problem(cfg);
  p.record_energy = true;
  p.snapshot_steps = coarse_steps(cfg);
  FactorizationCache cache;
  Trajectory traj = run_global_cn(p, cache);

  DofMap dofs = make_dof_map(p.mesh, p.mesh.all_elements());
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    auto os = open_output(dir / ("snapshot_" + std::to_string(traj.steps[i]) +
                                 ".csv"));
    write_snapshot_csv(os, echo, p.mesh, dofs.node_of_dof, traj.snapshots[i]);
  }
  {
    auto os = open_output(dir / "energy.csv");
    os << "# " << echo << "\nstep,energy,stability_bound\n";
    for (std::size_t i = 0; i < traj.energy.steps.size(); ++i)
      os << traj.energy.steps[i] << "," << fmt_double(traj.energy.energy[i])
         << "," << fmt_double(traj.energy.stability_bound[i]) << "\n";
  }
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_lsm(ExperimentConfig cfg) {
  cfg.apply_defaults();
  cfg.validate();
  std::string echo = cfg.echo("lsm");
  fs::path dir = run_dir(cfg, "lsm");

  FactorizationCache cache;
  LsmConfig lsm_cfg = make_lsm_config(cfg);
  LsmResult result;
  std::vector<double> snapshot_errors;
  double rel_error = -1.0;
  if (cfg.compare == "global") {
    result = run_lsm(lsm_cfg, cache);
    ProblemSpec ref = lsm_cfg.problem;
    ref.snapshot_steps.clear();
    for (long k = 1; k <= lsm_cfg.n_resets(); ++k)
      ref.snapshot_steps.push_back(k * lsm_cfg.n_res());
    Trajectory global = run_global_cn(ref, cache);
    DofMap dofs = make_dof_map(ref.mesh, ref.mesh.all_elements());
    NormWorkspace ws(ref.mesh, ref.coeff, ref.tau, dofs);
    double num = 0, den = 0;
    for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
      double e2 = ws.a_sq(result.snapshots[k] - global.snapshots[k]);
      snapshot_errors.push_back(std::sqrt(e2));
      num += cfg.T * e2;
      den += cfg.T * ws.a_sq(global.snapshots[k]);
    }
    rel_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  } else {
    result = run_lsm(lsm_cfg, cache);
    if (cfg.compare == "exact") {
      std::vector<double> times;
      for (long k = 1; k <= lsm_cfg.n_resets(); ++k) times.push_back(k * cfg.T);
      rel_error = exact_error(lsm_cfg.problem.mesh, lsm_cfg.problem.coeff,
                              cfg.tau, result.snapshots, times, cfg.T,
                              manufactured_exact(cfg.d));
    }
  }

  const auto& m = lsm_cfg.problem.mesh;
  DofMap dofs = make_dof_map(m, m.all_elements());
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    auto os =
        open_output(dir / ("snapshot_k" + std::to_string(k + 1) + ".csv"));
    write_snapshot_csv(os, echo, m, dofs.node_of_dof, result.snapshots[k]);
  }
  {
    auto os = open_output(dir / "summary.csv");
    os << "# " << echo << "\n";
    os << "# ell_resolved=" << result.ell << " patches=" << result.patch_count
       << "\n";
    os << "k,time,snapshot_error\n";
    for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
      os << (k + 1) << "," << fmt_double((k + 1) * cfg.T) << ",";
      if (k < snapshot_errors.size()) os << fmt_double(snapshot_errors[k]);
      os << "\n";
    }
    if (rel_error >= 0.0)
      os << "# rel_error=" << fmt_double(rel_error) << "\n";
  }
  {
    auto os = open_output(dir / "timings.csv");
    os << "# " << echo << "\nk,seconds\n";
    for (std::size_t k = 0; k < result.interval_seconds.size(); ++k)
      os << (k + 1) << "," << fmt_double(result.interval_seconds[k]) << "\n";
  }
  if (rel_error >= 0.0)
    std::cout << "rel_error=" << fmt_double(rel_error) << "\n";
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_decay_matrix(ExperimentConfig cfg) {
  cfg.apply_defaults();
  cfg.validate();
  std::string echo = cfg.echo("decay-matrix");
  fs::path dir = run_dir(cfg, "decay-matrix");
  auto res = matrix_decay(cfg.h, cfg.tau, cfg.d);
  {
    auto os = open_output(dir / "profile.csv");
    os << "# " << echo << "\n# fit_rate=" << fmt_double(res.fit.rate)
       << " r_squared=" << fmt_double(res.fit.r_squared)
       << " c_hat=" << fmt_double(res.c_hat) << "\n";
    os << "dist,mean_magnitude,fit_value\n";
    for (std::size_t k = 0; k < res.band_mean.size(); ++k)
      os << k << "," << fmt_double(res.band_mean[k]) << ","
         << fmt_double(res.fit.value_at(static_cast<double>(k))) << "\n";
  }
  {
    auto os = open_output(dir / "heatmap.csv");
    os << "# " << echo << "\n";
    for (Eigen::Index i = 0; i < res.magnitude.rows(); ++i) {
      for (Eigen::Index j = 0; j < res.magnitude.cols(); ++j)
        os << (j ? "," : "") << fmt_double(res.magnitude(i, j));
      os << "\n";
    }
  }
  {
    auto os = open_output(dir / "heatmap.pgm");
    write_pgm_log(os, res.magnitude);
  }
  std::cout << dir.string() << "\n";
  return 0;
}

ElementSet central_coarse_cell(const MeshHierarchy& m) {
  int r = m.refinement();
  int c = m.coarse_cells_per_axis() / 2;
  if (m.dim() == 1) return m.element_box(c * r, (c + 1) * r);
  return m.element_box(c * r, (c + 1) * r, c * r, (c + 1) * r);
}

/// Source bump on the interior nodes of omega (keeps all probe data local).
Rhs bump_rhs(const MeshHierarchy& m, const ElementSet& omega) {
  auto inside = m.interior_nodes(omega);
  std::vector<char> mark(m.node_count(), 0);
  for (int n : inside) mark[n] = 1;
  double h = m.h();
  int np = m.nodes_per_axis();
  int dim = m.dim();
  return Rhs::separable(
      [mark, h, np, dim](double x, double y) {
        int ix = static_cast<int>(std::llround(x / h));
        int iy = dim == 2 ? static_cast<int>(std::llround(y / h)) : 0;
        return mark[dim == 1 ? ix : ix + np * iy] ? 1.0 : 0.0;
      },
      [](double) { return 1.0; });
}

int cmd_decay_profile(ExperimentConfig cfg, long steps, int ell_max) {
  cfg.apply_defaults();
  cfg.validate();
  std::string echo = cfg.echo("decay-profile");
  fs::path dir = run_dir(cfg, "decay-profile");
  ProblemSpec p = make_problem(cfg);
  ElementSet omega = central_coarse_cell(p.mesh);
  p.rhs = bump_rhs(p.mesh, omega);
  FactorizationCache cache;
  auto res = decay_profile(p, omega, steps, ell_max, cache);
  auto os = open_output(dir / "profile.csv");
  os << "# " << echo << " steps=" << steps << "\n";
  os << "# gamma_fit=" << fmt_double(res.gamma_fit)
     << " gamma_formula=" << fmt_double(res.gamma_formula)
     << " max_triple=" << fmt_double(res.max_triple) << "\n";
  os << "ell,value,bound\n";
  for (std::size_t i = 0; i < res.profile.ell.size(); ++i)
    os << res.profile.ell[i] << "," << fmt_double(res.profile.value[i]) << ","
       << fmt_double(res.profile.bound[i]) << "\n";
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_loc_error(ExperimentConfig cfg, long steps, std::vector<int> ells) {
  cfg.apply_defaults();
  cfg.validate();
  std::string echo = cfg.echo("loc-error");
  fs::path dir = run_dir(cfg, "loc-error");
  ProblemSpec p = make_problem(cfg);
  ElementSet omega = central_coarse_cell(p.mesh);
  p.rhs = bump_rhs(p.mesh, omega);
  FactorizationCache cache;
  if (ells.empty())
    for (int ell = 0; ell <= 2 * p.mesh.refinement(); ell += 2)
      ells.push_back(ell);
  auto prof = localization_error_sweep(p, omega, ells, steps, cache);
  auto os = open_output(dir / "profile.csv");
  os << "# " << echo << " steps=" << steps << "\n";
  os << "ell,value\n";
  for (std::size_t i = 0; i < prof.ell.size(); ++i)
    os << prof.ell[i] << "," << fmt_double(prof.value[i]) << "\n";
  std::cout << dir.string() << "\n";
  return 0;
}

int cmd_figures(ExperimentConfig cfg, const std::string& name,
                const std::string& scale, double budget_units) {
  require(scale == "desk" || scale == "full",
          "figures: scale must be desk or full");
  FigureSweep sweep =
      run_figure(name, scale == "desk", cfg.parallelism, budget_units,
                 [](const std::string& msg) { std::cerr << msg << "\n"; });
  std::string echo = "lsmwave figures name=" + name + " scale=" + scale;
  fs::path dir = fs::path(cfg.output_dir) / "figures" / (name + "_" + scale);
  auto os = open_output(dir / (name + ".csv"));
  os << "# " << echo << "\n";
  os << "panel,d,h,tau,H,T,ell,alpha,beta,coeff,seed,compare,rel_error\n";
  for (const auto& row : sweep.rows) {
    os << row.panel << "," << row.cfg.d << "," << fmt_double(row.cfg.h) << ","
       << fmt_double(row.cfg.tau) << "," << fmt_double(row.cfg.H) << ","
       << fmt_double(row.cfg.T) << "," << row.ell_resolved << ","
       << fmt_double(row.cfg.alpha) << "," << fmt_double(row.cfg.beta) << ","
       << row.cfg.coeff << "," << row.cfg.seed << "," << row.cfg.compare << ","
       << fmt_double(row.rel_error) << "\n";
  }
  std::cout << dir.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-equation solver: global Crank-Nicolson and the local "
               "superposition method"};
  app.set_help_flag("--help", "print help");  // frees -h / --h for mesh size
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_path;
  long steps = 8;
  int ell_max = 16;
  std::vector<int> ells;
  std::string fig_name = "fig2", fig_scale = "desk";
  double budget_units = 4e9;

  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print help");
    sub->add_option("--config", config_path, "JSON config file (overrides flags)");
    sub->add_option("--d", cfg.d, "dimension (1 or 2)");
    sub->add_option("--h", cfg.h, "fine mesh size");
    sub->add_option("--tau", cfg.tau, "time step (default h)");
    sub->add_option("--H", cfg.H, "coarse mesh size");
    sub->add_option("--T", cfg.T, "coarse (reset) time step (default H)");
    sub->add_option("--ell", cfg.ell,
                    "layer count: integer, auto-heuristic, auto-theory");
    sub->add_option("--t-fin", cfg.t_fin, "final time");
    sub->add_option("--alpha", cfg.alpha, "coefficient lower bound");
    sub->add_option("--beta", cfg.beta, "coefficient upper bound");
    sub->add_option("--coeff", cfg.coeff, "constant | random");
    sub->add_option("--coeff-scale", cfg.coeff_scale,
                    "random-block edge length (default H)");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--rhs", cfg.rhs,
                    "one | zero | manufactured2d | manufactured1d");
    sub->add_option("--ics", cfg.ics, "zero | manufactured");
    sub->add_option("--compare", cfg.compare, "none | global | exact");
    sub->add_option("--output-dir", cfg.output_dir, "output directory");
    sub->add_option("--parallelism", cfg.parallelism,
                    "worker threads (0 = hardware)");
    sub->add_option("--solver", cfg.solver, "direct | cg");
    sub->add_option("--cg-tol", cfg.cg_tol, "CG relative residual tolerance");
  };

  auto* global = app.add_subcommand("global", "run the global scheme");
  add_common(global);
  auto* lsm = app.add_subcommand("lsm", "run the local superposition method");
  add_common(lsm);
  auto* dmx =
      app.add_subcommand("decay-matrix", "inverse system-matrix decay probe");
  add_common(dmx);
  auto* dpr = app.add_subcommand("decay-profile",
                                 "triple-norm tail decay of a local solution");
  add_common(dpr);
  dpr->add_option("--steps", steps, "number of time steps before measuring");
  dpr->add_option("--ell-max", ell_max, "largest layer count");
  auto* loc =
      app.add_subcommand("loc-error", "localized-vs-global solve error sweep");
  add_common(loc);
  loc->add_option("--steps", steps, "number of time steps before measuring");
  loc->add_option("--ells", ells, "layer counts to sweep");
  auto* fig = app.add_subcommand("figures", "run a named figure sweep");
  add_common(fig);
  fig->add_option("name", fig_name, "fig2 | fig3 | fig4 | fig5");
  fig->add_option("--scale", fig_scale, "desk | full");
  fig->add_option("--budget-units", budget_units,
                  "cost-model skip threshold per point");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) apply_json_overrides(cfg, config_path);
    if (global->parsed()) return cmd_global(cfg);
    if (lsm->parsed()) return cmd_lsm(cfg);
    if (dmx->parsed()) return cmd_decay_matrix(cfg);
    if (dpr->parsed()) return cmd_decay_profile(cfg, steps, ell_max);
    if (loc->parsed()) return cmd_loc_error(cfg, steps, ells);
    if (fig->parsed())
      return cmd_figures(cfg, fig_name, fig_scale, budget_units);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
