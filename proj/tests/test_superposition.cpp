#include <catch2/catch.hpp>

#include <cmath>
#include <set>

#include "lsm/superposition.hpp"

using namespace lsm;

namespace {

ProblemSpec make_problem(int d, double H, double h, double tau, Rhs rhs,
                         double t_fin = 1.0) {
  MeshHierarchy mesh(d, H, h);
  CoefficientField A = constant_coefficient(mesh, 1.0);
  return ProblemSpec{std::move(mesh), std::move(A), std::move(rhs),
                     nullptr,         nullptr,      t_fin,
                     tau,             false,        {}};
}

Rhs unit_rhs() {
  return Rhs::separable([](double, double) { return 1.0; },
                        [](double) { return 1.0; });
}

}  // namespace

TEST_CASE("layer-count choices") {
  SECTION("heuristic: ell = 2H/h") {
    CHECK(choose_ell_heuristic(1.0 / 16, 1.0 / 256) == 32);
    CHECK(choose_ell_heuristic(0.25, 0.25) == 2);
  }
  SECTION("theory mode is monotone in T/tau and |log theta|") {
    double h = 1.0 / 256, H = 1.0 / 16;
    int prev = 0;
    for (double tau : {h, h / 2, h / 4}) {  // T fixed, T/tau growing
      int ell = choose_ell_theory(tau, h, H, H, 1.0, h, 1.0, 1.0);
      CHECK(ell >= prev);
      prev = ell;
    }
    prev = 0;
    for (double theta : {1.0 / 8, 1.0 / 64, 1.0 / 4096}) {
      int ell = choose_ell_theory(h, h, H, H, 1.0, theta, 1.0, 1.0);
      CHECK(ell >= prev);
      prev = ell;
    }
  }
  SECTION("theory mode calibrated near the heuristic at the reference point") {
    double h = 1.0 / 256, H = 1.0 / 16;
    int ell = choose_ell_theory(h, h, H, H, 1.0, h + h * h, 1.0, 1.0);
    CHECK(ell >= 28);
    CHECK(ell <= 36);
  }
}

TEST_CASE("patch construction") {
  auto m = MeshHierarchy(2, 0.25, 1.0 / 32);
  auto A = constant_coefficient(m, 1.0);
  double tau = 1.0 / 32;
  auto dofs = make_dof_map(m, m.all_elements());
  auto pou = build_pou(m);

  SECTION("patch boxes agree with the ring-growth definition") {
    auto patches = build_patches(m, A, tau, 3, dofs, pou);
    auto supports = coarse_supports(m);
    for (std::size_t i = 0; i < patches.size(); ++i) {
      CHECK(patches[i].extended == extend_patch(m, supports[i], 3));
      CHECK(m.interior_nodes(patches[i].extended) == patches[i].nodes);
    }
  }
  SECTION("local operators are exact restrictions of the global ones") {
    auto patches = build_patches(m, A, tau, 2, dofs, pou);
    auto region = m.all_elements();
    auto Mg = assemble_mass(m, region, dofs);
    auto Sg = assemble_stiffness(m, A, region, dofs);
    auto Kg = combine(Mg, Sg, tau);
    for (const auto& p : patches) {
      bool interior_patch = true;
      for (int l = 0; l < p.local_size() && interior_patch; ++l) {
        // rows fully inside the patch must match global rows exactly
        int g = p.gdof[l];
        for (int kk = p.ops->K.row_ptr[l]; kk < p.ops->K.row_ptr[l + 1]; ++kk) {
          int lcol = p.ops->K.col[kk];
          double kv = p.ops->K.val[kk];
          CHECK(kv == Kg.entry(g, p.gdof[lcol]));
        }
        (void)interior_patch;
      }
    }
  }
  SECTION("congruent patches share operators, boundary-clipped ones do not") {
    auto patches = build_patches(m, A, tau, 2, dofs, pou);
    std::set<const PatchOperators*> distinct;
    for (const auto& p : patches) distinct.insert(p.ops.get());
    // 7x7 interior coarse nodes; per axis the clipped widths are {c1, full},
    // mirrored, giving at most 3 distinct widths and 9 distinct shapes.
    CHECK(distinct.size() <= 9);
    CHECK(distinct.size() >= 4);
  }
  SECTION("patch interior counts never exceed the global dof count") {
    auto patches = build_patches(m, A, tau, 4, dofs, pou);
    for (const auto& p : patches) {
      CHECK(p.local_size() <= dofs.size());
      if (p.extended.size() < m.all_elements().size())
        CHECK(p.local_size() < dofs.size());
    }
  }
  SECTION("random coefficients disable sharing between interior patches") {
    auto Ar = random_coefficient(m, 5, 0.25, 1.0, 8.0);
    auto patches = build_patches(m, Ar, tau, 2, dofs, pou);
    std::set<const PatchOperators*> distinct;
    for (const auto& p : patches) distinct.insert(p.ops.get());
    CHECK(distinct.size() == patches.size());
  }
}

TEST_CASE("patch-local runs") {
  auto m = MeshHierarchy(2, 0.25, 1.0 / 16);
  auto A = constant_coefficient(m, 1.0);
  double tau = 1.0 / 16;
  auto dofs = make_dof_map(m, m.all_elements());
  auto pou = build_pou(m);

  SECTION("zero data gives zero output") {
    auto patches = build_patches(m, A, tau, 2, dofs, pou);
    const auto& p = patches[0];
    auto [a, b] = run_patch_cn_local(
        p, tau, [](long) -> const Vector* { return nullptr; },
        Vector::Zero(p.local_size()), Vector::Zero(p.local_size()), 5);
    CHECK(a.norm() == 0.0);
    CHECK(b.norm() == 0.0);
  }
  SECTION("full patch reproduces the global scheme") {
    // ell large enough that every patch covers the domain
    auto patches = build_patches(m, A, tau, 16, dofs, pou);
    for (const auto& p : patches)
      REQUIRE(p.extended.size() == m.element_count());
    FactorizationCache cache;
    auto prob = make_problem(2, 0.25, 1.0 / 16, tau, unit_rhs(), 0.5);
    auto ops = build_global_operators(prob.mesh, prob.coeff, tau, cache);
    auto start = bootstrap(prob, ops, cache);
    long n = 8;
    // n steps from the (0,1) pair leave the global pair at levels (n, n+1),
    // matching what the patch run returns.
    auto traj = run_cn(prob, ops, start, n);

    const auto& p = patches[0];
    std::vector<Vector> slices;
    for (long j = 0; j <= n + 1; ++j)
      slices.push_back(prob.rhs.slice(m, dofs, j * tau));
    auto [a_end, b_end] =
        run_patch_cn(p, tau, slices, start.u_prev, start.u_curr, n);
    CHECK((a_end - traj.final_state.u_prev).norm() <=
          1e-12 * std::max(1.0, traj.final_state.u_prev.norm()));
    CHECK((b_end - traj.final_state.u_curr).norm() <=
          1e-12 * std::max(1.0, traj.final_state.u_curr.norm()));
  }
  SECTION("output support stays inside the patch") {
    auto patches = build_patches(m, A, tau, 1, dofs, pou);
    const auto& p = patches[0];
    Vector ag = Vector::Zero(dofs.size());
    Vector bg = Vector::Zero(dofs.size());
    // put data on the support's center node
    int center = dofs.dof_of_node[m.node_index(4, 4)];
    ag[center] = 1.0;
    bg[center] = 1.0;
    auto [a_end, b_end] = run_patch_cn(p, tau, {}, ag, bg, 6);
    std::set<int> allowed(p.gdof.begin(), p.gdof.end());
    for (int g = 0; g < a_end.size(); ++g) {
      if (a_end[g] != 0.0 || b_end[g] != 0.0) CHECK(allowed.count(g) == 1);
    }
  }
}

TEST_CASE("lsm configuration validation") {
  auto prob = make_problem(2, 0.25, 1.0 / 16, 1.0 / 16, unit_rhs(), 1.0);
  LsmConfig cfg{std::move(prob)};
  cfg.T = 0.25;
  cfg.ell_mode = EllMode::explicit_value;
  cfg.ell = 4;
  CHECK_NOTHROW(cfg.validate());
  SECTION("T/tau must be integral") {
    cfg.T = 0.3;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SECTION("t_fin/T must be integral") {
    cfg.T = 0.375;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
  SECTION("reset guard") {
    cfg.reset_guard = 2;
    CHECK_THROWS_AS(cfg.validate(), config_error);
  }
}

TEST_CASE("lsm zero data stays zero") {
  auto prob = make_problem(2, 0.25, 1.0 / 16, 1.0 / 16, Rhs::zero(), 1.0);
  LsmConfig cfg{std::move(prob)};
  cfg.T = 0.25;
  cfg.ell_mode = EllMode::explicit_value;
  cfg.ell = 2;
  FactorizationCache cache;
  auto result = run_lsm(cfg, cache);
  REQUIRE(result.snapshots.size() == 4);
  for (const auto& s : result.snapshots) CHECK(s.norm() == 0.0);
}

TEST_CASE("superposition identity: full patches reproduce the global run") {
  // d=2, h=2^-5, H=2^-2, tau=h, T=H, ell covering the domain
  auto prob = make_problem(2, 0.25, 1.0 / 32, 1.0 / 32, unit_rhs(), 1.0);
  LsmConfig cfg{std::move(prob)};
  cfg.T = 0.25;
  cfg.ell_mode = EllMode::explicit_value;
  cfg.ell = 32;  // covers (0,1)^2 from every support
  FactorizationCache cache;
  auto rep = compare_to_global(cfg, cache);
  CHECK(rep.rel_error <= 1e-11);
}

TEST_CASE("lsm is deterministic across parallelism degrees") {
  auto make_cfg = [&] {
    auto prob = make_problem(2, 0.25, 1.0 / 32, 1.0 / 32, unit_rhs(), 0.5);
    LsmConfig cfg{std::move(prob)};
    cfg.T = 0.25;
    cfg.ell_mode = EllMode::explicit_value;
    cfg.ell = 6;
    return cfg;
  };
  FactorizationCache c1, c2;
  auto cfg1 = make_cfg();
  cfg1.parallelism = 1;
  auto r1 = run_lsm(cfg1, c1);
  auto cfg2 = make_cfg();
  cfg2.parallelism = 4;
  auto r2 = run_lsm(cfg2, c2);
  REQUIRE(r1.snapshots.size() == r2.snapshots.size());
  for (std::size_t k = 0; k < r1.snapshots.size(); ++k)
    CHECK(r1.snapshots[k] == r2.snapshots[k]);  // bit-identical
}

TEST_CASE("partition re-decomposition reproduces the superposed state") {
  auto prob = make_problem(2, 0.25, 1.0 / 32, 1.0 / 32, unit_rhs(), 0.5);
  LsmConfig cfg{std::move(prob)};
  cfg.T = 0.25;
  cfg.ell_mode = EllMode::explicit_value;
  cfg.ell = 8;
  FactorizationCache cache;
  auto result = run_lsm(cfg, cache);
  const auto& m = cfg.problem.mesh;
  auto dofs = make_dof_map(m, m.all_elements());
  auto pou = build_pou(m);
  const Vector& state = result.snapshots.back();
  Vector sum = Vector::Zero(state.size());
  for (const auto& e : pou.entries) sum += localize(m, dofs, state, e);
  double scale = state.cwiseAbs().maxCoeff();
  CHECK((sum - state).cwiseAbs().maxCoeff() <= 1e-15 * scale);
}

TEST_CASE("fine-time states can be recomputed from coarse snapshots") {
  auto prob = make_problem(2, 0.25, 1.0 / 16, 1.0 / 16, unit_rhs(), 1.0);
  LsmConfig cfg{std::move(prob)};
  cfg.T = 0.25;
  cfg.ell_mode = EllMode::explicit_value;
  cfg.ell = 4;
  FactorizationCache cache;
  auto result = run_lsm(cfg, cache);
  REQUIRE(result.companions.size() == result.snapshots.size());

  SECTION("replaying an interval reproduces its coarse snapshot bitwise") {
    long n_res = cfg.n_res();
    for (long k : {1L, 3L}) {
      auto states = recompute_fine_levels(cfg, result, k, {n_res}, cache);
      REQUIRE(states.size() == 1);
      CHECK(states[0] == result.snapshots[k - 1]);
    }
  }
  SECTION("level 1 of the first interval reconstructs the starting data") {
    auto states = recompute_fine_levels(cfg, result, 1, {0, 1}, cache);
    CHECK(states[0].norm() == 0.0);  // zero initial condition
    double tau = cfg.problem.tau;
    Vector expect = Vector::Constant(states[1].size(), tau * tau / 2.0);
    CHECK((states[1] - expect).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SECTION("interior fine levels match the global run when patches cover") {
    auto prob2 = make_problem(2, 0.25, 1.0 / 16, 1.0 / 16, unit_rhs(), 1.0);
    LsmConfig full{std::move(prob2)};
    full.T = 0.25;
    full.ell_mode = EllMode::explicit_value;
    full.ell = 16;
    FactorizationCache c2;
    auto rfull = run_lsm(full, c2);
    auto states = recompute_fine_levels(full, rfull, 2, {2}, c2);
    // global level (k-1)*n_res + 2 = 6
    ProblemSpec ref = full.problem;
    ref.snapshot_steps = {6};
    auto traj = run_global_cn(ref, c2);
    CHECK((states[0] - traj.snapshots[0]).cwiseAbs().maxCoeff() <=
          1e-12 * traj.snapshots[0].cwiseAbs().maxCoeff());
  }
}

TEST_CASE("lsm handles general sources like separable ones") {
  auto space = [](double x, double y) { return 1.0 + x * y; };
  auto qt = [](double t) { return std::cos(t); };
  auto make_cfg = [&](Rhs rhs) {
    auto prob = make_problem(2, 0.25, 1.0 / 16, 1.0 / 16, std::move(rhs), 0.5);
    LsmConfig cfg{std::move(prob)};
    cfg.T = 0.25;
    cfg.ell_mode = EllMode::explicit_value;
    cfg.ell = 3;
    return cfg;
  };
  FactorizationCache c1, c2;
  auto rs = run_lsm(make_cfg(Rhs::separable(space, qt)), c1);
  auto rg = run_lsm(make_cfg(Rhs::general([&](double x, double y, double t) {
                      return space(x, y) * qt(t);
                    })),
                    c2);
  for (std::size_t k = 0; k < rs.snapshots.size(); ++k)
    CHECK((rs.snapshots[k] - rg.snapshots[k]).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("cg fallback matches the direct patch solver") {
  auto make_cfg = [&](PatchSolver s) {
    auto prob = make_problem(2, 0.25, 1.0 / 32, 1.0 / 32, unit_rhs(), 0.5);
    LsmConfig cfg{std::move(prob)};
    cfg.T = 0.25;
    cfg.ell_mode = EllMode::explicit_value;
    cfg.ell = 6;
    cfg.solver = s;
    cfg.cg_tol = 1e-14;
    return cfg;
  };
  FactorizationCache c1, c2;
  auto rd = run_lsm(make_cfg(PatchSolver::direct), c1);
  auto rc = run_lsm(make_cfg(PatchSolver::cg), c2);
  for (std::size_t k = 0; k < rd.snapshots.size(); ++k) {
    double scale = rd.snapshots[k].norm();
    CHECK((rd.snapshots[k] - rc.snapshots[k]).norm() <= 1e-9 * scale);
  }
}
