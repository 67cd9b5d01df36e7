#pragma once

#include <chrono>
#include <cmath>
#include <future>
#include <map>
#include <memory>
#include <set>
#include <tuple>
#include <utility>

#include "lsm/pou.hpp"
#include "lsm/timestepping.hpp"

namespace lsm {

// ---------------------------------------------------------------------------
// Layer-count selection.
// ---------------------------------------------------------------------------

/// Experimentally sufficient choice ell = ceil(C * H/h), C = 2 by default.
inline int choose_ell_heuristic(double H, double h, double C = 2.0) {
  return static_cast<int>(std::ceil(C * H / h));
}

/// Theory-driven choice
///   ell = ceil(c * C_th * ((T/tau) log(C_th T/tau) + |log h| + |log theta|
///              + (t_fin/T) |log H|)),  C_th = (beta/alpha)(tau/h + h/tau).
/// The proportionality constant is a calibration knob; the default c makes
/// the formula agree with the heuristic 2H/h at the reference configuration
/// h=2^-8, H=T=2^-4, tau=h, A=1.
inline int choose_ell_theory(double tau, double h, double T, double H,
                             double t_fin, double theta, double alpha,
                             double beta, double c = 0.1443) {
  require(theta > 0.0 && theta < 1.0, "choose_ell: theta must be in (0,1)");
  double Cth = (beta / alpha) * (tau / h + h / tau);
  double value = (T / tau) * std::log(Cth * T / tau) + std::abs(std::log(h)) +
                 std::abs(std::log(theta)) +
                 (t_fin / T) * std::abs(std::log(H));
  return static_cast<int>(std::ceil(c * Cth * value));
}

enum class EllMode { explicit_value, heuristic, theory };
enum class PatchSolver { direct, cg };

// ---------------------------------------------------------------------------
// Configuration of one local-superposition run.
// ---------------------------------------------------------------------------
struct LsmConfig {
  ProblemSpec problem;
  double T = 0.0;  // coarse step (reset period)
  EllMode ell_mode = EllMode::heuristic;
  int ell = -1;              // used when ell_mode == explicit_value
  double theta = -1.0;       // theory mode accuracy target; default h + tau^2
  double theory_c = 0.1443;  // theory mode calibration constant
  int parallelism = 1;
  PatchSolver solver = PatchSolver::direct;
  double cg_tol = 1e-13;
  long reset_guard = 1000000;
  /// Keep the companion level kT + tau of every coarse snapshot, which is
  /// the starting data needed to recompute fine-time states inside a coarse
  /// interval retroactively (fine states are never stored by default).
  bool store_companions = true;

  long n_res() const { return static_cast<long>(std::llround(T / problem.tau)); }
  long n_resets() const {
    return static_cast<long>(std::llround(problem.t_fin / T));
  }

  int resolve_ell() const {
    const auto& p = problem;
    switch (ell_mode) {
      case EllMode::explicit_value:
        require(ell >= 0, "lsm: explicit ell must be nonnegative");
        return ell;
      case EllMode::heuristic:
        return choose_ell_heuristic(p.mesh.H(), p.mesh.h());
      case EllMode::theory:
      default: {
        double th = theta > 0.0 ? theta : p.mesh.h() + p.tau * p.tau;
        return choose_ell_theory(p.tau, p.mesh.h(), T, p.mesh.H(), p.t_fin, th,
                                 p.coeff.alpha(), p.coeff.beta(), theory_c);
      }
    }
  }

  void validate() const {
    problem.validate();
    require(T > 0.0, "lsm: coarse step T must be positive");
    long nr = n_res();
    require(nr >= 1 && std::abs(nr * problem.tau - T) <= 1e-9 * T,
            "lsm: T/tau must be a positive integer");
    long nk = n_resets();
    require(nk >= 1 && std::abs(nk * T - problem.t_fin) <= 1e-9 * problem.t_fin,
            "lsm: t_fin/T must be a positive integer");
    require(nk <= reset_guard, "lsm: reset count exceeds the guard");
    require(parallelism >= 0, "lsm: parallelism must be nonnegative");
  }
};

// ---------------------------------------------------------------------------
// One subdomain: support omega_i, extended patch N_ell(omega_i), local dofs,
// partition weights, and the local operators. Congruent patches (same box
// size, same coefficient restriction) share operators and factorization.
// ---------------------------------------------------------------------------
struct PatchOperators {
  SparseOperator M, S, K;
  FactorizationPtr F;  // null in CG mode
};

struct Patch {
  int index = 0;
  ElementSet support;
  ElementSet extended;
  std::vector<int> nodes;  // local dof -> global node, ascending
  std::vector<int> gdof;   // local dof -> global dof
  Vector pou_w;            // local dof -> partition weight (0 outside omega_i)
  std::shared_ptr<const PatchOperators> ops;

  int local_size() const { return static_cast<int>(nodes.size()); }

  Vector gather(const Vector& global) const {
    Vector out(local_size());
    for (int l = 0; l < local_size(); ++l) out[l] = global[gdof[l]];
    return out;
  }
  Vector gather_localized(const Vector& global) const {
    Vector out(local_size());
    for (int l = 0; l < local_size(); ++l)
      out[l] = pou_w[l] * global[gdof[l]];
    return out;
  }
  void scatter_add(const Vector& local, Vector& global) const {
    for (int l = 0; l < local_size(); ++l) global[gdof[l]] += local[l];
  }
  Vector extend_to_global(const Vector& local, int global_size) const {
    Vector out = Vector::Zero(global_size);
    scatter_add(local, out);
    return out;
  }
};

namespace detail {

/// Build-once cache keyed by a 64-bit fingerprint; concurrent requests for
/// the same key block on one build.
template <class V>
class KeyedOnceCache {
 public:
  template <class Fn>
  std::shared_ptr<const V> get_or_build(std::uint64_t key, Fn&& build) {
    std::promise<std::shared_ptr<const V>> prom;
    std::shared_future<std::shared_ptr<const V>> fut;
    bool creator = false;
    {
      std::lock_guard<std::mutex> g(mutex_);
      auto it = map_.find(key);
      if (it == map_.end()) {
        fut = prom.get_future().share();
        map_.emplace(key, fut);
        creator = true;
      } else {
        fut = it->second;
      }
    }
    if (creator) {
      try {
        prom.set_value(build());
      } catch (...) {
        prom.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> g(mutex_);
    return map_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::shared_future<std::shared_ptr<const V>>> map_;
};

struct PatchBox {
  int xlo, xhi, ylo, yhi;  // element ranges [lo, hi)
};

inline PatchBox patch_box(const MeshHierarchy& m, int cx, int cy, int ell) {
  int r = m.refinement();
  int nc = m.cells_per_axis();
  PatchBox b;
  b.xlo = std::max(0, (cx - 1) * r - ell);
  b.xhi = std::min(nc, (cx + 1) * r + ell);
  if (m.dim() == 1) {
    b.ylo = 0;
    b.yhi = 1;
  } else {
    b.ylo = std::max(0, (cy - 1) * r - ell);
    b.yhi = std::min(nc, (cy + 1) * r + ell);
  }
  return b;
}

/// The same second-order start as the global scheme: u^0 = I_h u0 and
/// M u^1 = M(u^0 + tau I_h v0) + (tau^2/2)(M f^0 - S u^0); with zero initial
/// data this is u^1 = (tau^2/2) f^0 without a solve or assembly.
inline std::pair<Vector, Vector> initial_pair(const ProblemSpec& p,
                                              const DofMap& dofs,
                                              FactorizationCache& cache) {
  const MeshHierarchy& m = p.mesh;
  Vector u0 = p.u0 ? nodal_interpolate(m, dofs, p.u0, 0.0)
                   : Vector::Zero(dofs.size());
  Vector v0 = p.v0 ? nodal_interpolate(m, dofs, p.v0, 0.0)
                   : Vector::Zero(dofs.size());
  Vector f0 = p.rhs.slice(m, dofs, 0.0);
  double tau = p.tau;
  if (u0.isZero(0.0) && v0.isZero(0.0))
    return {std::move(u0), (tau * tau / 2.0) * f0};
  auto region = m.all_elements();
  auto M = assemble_mass(m, region, dofs);
  auto S = assemble_stiffness(m, p.coeff, region, dofs);
  Vector rhs = M * (u0 + tau * v0 + (tau * tau / 2.0) * f0) -
               (tau * tau / 2.0) * (S * u0);
  Vector b = cache.factorize(M)->solve(rhs);
  return {std::move(u0), std::move(b)};
}

}  // namespace detail

/// Builds all patches: omega_i from the coarse supports, N_ell(omega_i) by
/// ell rings of vertex-adjacent elements (an axis-aligned box on these
/// meshes), local operators restricted to the patch interior and factorized
/// once.  Congruent patches (same box size, same coefficient restriction)
/// share operators and factorization.
inline std::vector<Patch> build_patches(const MeshHierarchy& m,
                                        const CoefficientField& A, double tau,
                                        int ell, const DofMap& global_dofs,
                                        const PartitionOfUnity& pou,
                                        int parallelism = 1,
                                        PatchSolver solver = PatchSolver::direct,
                                        FactorizationCache* fcache = nullptr) {
  require(ell >= 0, "build_patches: ell must be nonnegative");
  auto supports = coarse_supports(m);
  require(supports.size() == pou.size(),
          "build_patches: supports and partition entries must align");
  std::vector<Patch> patches(supports.size());
  detail::KeyedOnceCache<PatchOperators> shape_cache;
  FactorizationCache local_fcache;
  FactorizationCache& fc = fcache ? *fcache : local_fcache;

  parallel_for(supports.size(), parallelism, [&](std::size_t i) {
    const auto& entry = pou.entries[i];
    Patch& p = patches[i];
    p.index = static_cast<int>(i);
    p.support = supports[i];
    auto box = detail::patch_box(m, entry.cx, entry.cy, ell);
    p.extended = m.element_box(box.xlo, box.xhi, box.ylo, box.yhi);

    // Local dofs: nodes strictly inside the box (box faces are either on the
    // domain boundary or on the patch closure boundary, so they carry no dof).
    int nylo = m.dim() == 1 ? 0 : box.ylo + 1;
    int nyhi = m.dim() == 1 ? 0 : box.yhi - 1;
    for (int iy = nylo; iy <= nyhi; ++iy)
      for (int ix = box.xlo + 1; ix <= box.xhi - 1; ++ix)
        p.nodes.push_back(m.node_index(ix, iy));
    check(!p.nodes.empty(), "build_patches: empty patch interior");
    p.gdof.resize(p.nodes.size());
    p.pou_w.resize(p.nodes.size());
    for (std::size_t l = 0; l < p.nodes.size(); ++l) {
      int dof = global_dofs.dof_of_node[p.nodes[l]];
      check(dof >= 0, "build_patches: patch node is not a global dof");
      p.gdof[l] = dof;
      p.pou_w[l] = entry.weight_node(m, p.nodes[l]);
    }

    // Shape key: box dimensions plus the coefficient restriction in local
    // element order; equal keys imply bitwise-equal local operators.
    Fnv1a key;
    key.add(box.xhi - box.xlo);
    key.add(m.dim() == 2 ? box.yhi - box.ylo : 1);
    for (int e : p.extended.elems) key.add(A[e]);
    p.ops = shape_cache.get_or_build(key.value(), [&] {
      auto ops = std::make_shared<PatchOperators>();
      DofMap dm = make_dof_map(m, p.extended);
      ops->M = assemble_mass(m, p.extended, dm);
      ops->S = assemble_stiffness(m, A, p.extended, dm);
      ops->K = combine(ops->M, ops->S, tau);
      if (solver == PatchSolver::direct) ops->F = fc.factorize(ops->K);
      return ops;
    });
    check(p.ops->M.n == p.local_size(),
          "build_patches: shared operators do not match the patch layout");
  });
  return patches;
}

/// Local Crank-Nicolson on one patch: starts from the local pair (a, b) at
/// local levels 0 and 1, performs n_steps steps with zero Dirichlet values on
/// the patch boundary, and returns the final pair (levels n_steps, n_steps+1).
/// f_hat(j) supplies the averaged local source for local step j (null means
/// a vanishing source at that step).
inline std::pair<Vector, Vector> run_patch_cn_local(
    const Patch& p, double tau,
    const std::function<const Vector*(long)>& f_hat, Vector a, Vector b,
    long n_steps, PatchSolver solver = PatchSolver::direct,
    double cg_tol = 1e-13) {
  require(a.size() == p.local_size() && b.size() == p.local_size(),
          "run_patch_cn: initial data does not match the patch layout");
  WaveState st{std::move(a), std::move(b), 1, tau};
  const Vector zero = Vector::Zero(p.local_size());
  for (long j = 1; j <= n_steps; ++j) {
    const Vector* fh = f_hat(j);
    if (solver == PatchSolver::direct) {
      st = cn_step(*p.ops->F, p.ops->M, p.ops->S, st, fh ? *fh : zero);
    } else {
      st = cn_step_cg(p.ops->K, p.ops->M, p.ops->S, st, fh ? *fh : zero,
                      cg_tol);
    }
  }
  return {std::move(st.u_prev), std::move(st.u_curr)};
}

/// Spec-facing variant with data given as global-length localized vectors and
/// results extended by zero to the global dof set.
inline std::pair<Vector, Vector> run_patch_cn(
    const Patch& p, double tau, const std::vector<Vector>& local_f_slices,
    const Vector& a_global, const Vector& b_global, long n_res,
    PatchSolver solver = PatchSolver::direct, double cg_tol = 1e-13) {
  require(static_cast<long>(local_f_slices.size()) == 0 ||
              static_cast<long>(local_f_slices.size()) >= n_res + 2,
          "run_patch_cn: need source slices for local levels 0..n_res+1");
  std::vector<Vector> local_slices;
  for (const auto& s : local_f_slices) local_slices.push_back(p.gather(s));
  Vector fh_storage;
  auto f_hat = [&](long j) -> const Vector* {
    if (local_slices.empty()) return nullptr;
    fh_storage = 0.25 * (local_slices[j + 1] + 2.0 * local_slices[j] +
                         local_slices[j - 1]);
    return &fh_storage;
  };
  auto [a_end, b_end] =
      run_patch_cn_local(p, tau, f_hat, p.gather(a_global), p.gather(b_global),
                         n_res, solver, cg_tol);
  int n = static_cast<int>(a_global.size());
  return {p.extend_to_global(a_end, n), p.extend_to_global(b_end, n)};
}

// ---------------------------------------------------------------------------
// The local superposition run.
// ---------------------------------------------------------------------------
struct LsmResult {
  std::vector<Vector> snapshots;   // u at coarse times kT, k = 1..N_T
  std::vector<Vector> companions;  // u at kT + tau (when store_companions)
  int ell = 0;
  long patch_count = 0;
  long distinct_shapes = 0;
  std::vector<double> interval_seconds;
};

inline LsmResult run_lsm(const LsmConfig& cfg, FactorizationCache& cache) {
  cfg.validate();
  const ProblemSpec& p = cfg.problem;
  const MeshHierarchy& m = p.mesh;
  const double tau = p.tau;
  const long n_res = cfg.n_res();
  const long n_k = cfg.n_resets();
  const int ell = cfg.resolve_ell();

  auto region = m.all_elements();
  DofMap dofs = make_dof_map(m, region);
  PartitionOfUnity pou = build_pou(m);
  std::vector<Patch> patches =
      build_patches(m, p.coeff, tau, ell, dofs, pou, cfg.parallelism,
                    cfg.solver, &cache);

  // Initial pair at levels 0 and 1 (same bootstrap as the global scheme).
  auto [a, b] = detail::initial_pair(p, dofs, cache);

  // Separable sources keep one spatial profile per patch.
  const bool separable = p.rhs.is_separable();
  const bool has_rhs = !p.rhs.is_zero();
  Vector f_space;
  std::vector<Vector> patch_f_space(patches.size());
  if (has_rhs && separable) {
    f_space = p.rhs.space_vector(m, dofs);
    for (std::size_t i = 0; i < patches.size(); ++i)
      patch_f_space[i] = patches[i].gather_localized(f_space);
  }

  LsmResult result;
  result.ell = ell;
  result.patch_count = static_cast<long>(patches.size());
  {
    std::set<const PatchOperators*> distinct;
    for (const auto& patch : patches) distinct.insert(patch.ops.get());
    result.distinct_shapes = static_cast<long>(distinct.size());
  }
  std::vector<std::pair<Vector, Vector>> slots(patches.size());
  std::vector<Vector> general_slices;  // global source levels m .. m+n_res+1

  for (long k = 1; k <= n_k; ++k) {
    auto t_start = std::chrono::steady_clock::now();
    const long m0 = (k - 1) * n_res;
    if (has_rhs && !separable) {
      general_slices.clear();
      for (long j = 0; j <= n_res + 1; ++j)
        general_slices.push_back(p.rhs.slice(m, dofs, (m0 + j) * tau));
    }
    parallel_for(patches.size(), cfg.parallelism, [&](std::size_t i) {
      const Patch& patch = patches[i];
      Vector fh_storage;
      std::vector<Vector> local_slices;
      if (has_rhs && !separable) {
        local_slices.reserve(general_slices.size());
        for (const auto& s : general_slices)
          local_slices.push_back(patch.gather_localized(s));
      }
      auto f_hat = [&](long j) -> const Vector* {
        if (!has_rhs) return nullptr;
        if (separable) {
          long n = m0 + j;
          double q = hat_average(p.rhs.time_factor((n - 1) * tau),
                                 p.rhs.time_factor(n * tau),
                                 p.rhs.time_factor((n + 1) * tau));
          fh_storage = q * patch_f_space[i];
          return &fh_storage;
        }
        fh_storage = 0.25 * (local_slices[j + 1] + 2.0 * local_slices[j] +
                             local_slices[j - 1]);
        return &fh_storage;
      };
      slots[i] = run_patch_cn_local(patch, tau, f_hat,
                                    patch.gather_localized(a),
                                    patch.gather_localized(b), n_res,
                                    cfg.solver, cfg.cg_tol);
    });
    // Superposition in fixed patch order (independent of the parallelism).
    a.setZero();
    b.setZero();
    for (std::size_t i = 0; i < patches.size(); ++i) {
      patches[i].scatter_add(slots[i].first, a);
      patches[i].scatter_add(slots[i].second, b);
    }
    result.snapshots.push_back(a);
    if (cfg.store_companions) result.companions.push_back(b);
    result.interval_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count());
  }
  return result;
}

/// Recomputes the superposed states at fine levels inside coarse interval k
/// (1-based; local level j corresponds to global time (k-1)T + j tau) by
/// replaying the interval from its stored starting pair.  Level n_res of
/// interval k reproduces snapshot k bit for bit.
inline std::vector<Vector> recompute_fine_levels(
    const LsmConfig& cfg, const LsmResult& result, long k,
    const std::vector<long>& local_levels, FactorizationCache& cache) {
  cfg.validate();
  const ProblemSpec& p = cfg.problem;
  const MeshHierarchy& m = p.mesh;
  const double tau = p.tau;
  const long n_res = cfg.n_res();
  require(k >= 1 && k <= cfg.n_resets(), "recompute: interval out of range");
  for (long j : local_levels)
    require(j >= 0 && j <= n_res + 1, "recompute: level out of range");
  require(k == 1 || (cfg.store_companions &&
                     result.companions.size() == result.snapshots.size()),
          "recompute: companions were not stored");

  auto region = m.all_elements();
  DofMap dofs = make_dof_map(m, region);
  PartitionOfUnity pou = build_pou(m);
  std::vector<Patch> patches = build_patches(
      m, p.coeff, tau, result.ell, dofs, pou, cfg.parallelism, cfg.solver,
      &cache);

  Vector a, b;
  if (k == 1) {
    std::tie(a, b) = detail::initial_pair(p, dofs, cache);
  } else {
    a = result.snapshots[k - 2];
    b = result.companions[k - 2];
  }

  const long m0 = (k - 1) * n_res;
  const bool has_rhs = !p.rhs.is_zero();
  const bool separable = p.rhs.is_separable();
  Vector f_space;
  if (has_rhs && separable) f_space = p.rhs.space_vector(m, dofs);
  std::vector<Vector> general_slices;
  if (has_rhs && !separable)
    for (long j = 0; j <= n_res + 1; ++j)
      general_slices.push_back(p.rhs.slice(m, dofs, (m0 + j) * tau));

  // per patch: captured local values at the requested levels
  std::vector<std::vector<Vector>> captured(patches.size());
  parallel_for(patches.size(), cfg.parallelism, [&](std::size_t i) {
    const Patch& patch = patches[i];
    Vector fh_storage;
    Vector f_loc;
    std::vector<Vector> local_slices;
    if (has_rhs && separable) f_loc = patch.gather_localized(f_space);
    if (has_rhs && !separable)
      for (const auto& s : general_slices)
        local_slices.push_back(patch.gather_localized(s));
    auto f_hat = [&](long j) -> const Vector* {
      if (!has_rhs) return nullptr;
      if (separable) {
        long n = m0 + j;
        double q = hat_average(p.rhs.time_factor((n - 1) * tau),
                               p.rhs.time_factor(n * tau),
                               p.rhs.time_factor((n + 1) * tau));
        fh_storage = q * f_loc;
        return &fh_storage;
      }
      fh_storage = 0.25 * (local_slices[j + 1] + 2.0 * local_slices[j] +
                           local_slices[j - 1]);
      return &fh_storage;
    };
    std::vector<Vector> levels(n_res + 2);
    levels[0] = patch.gather_localized(a);
    levels[1] = patch.gather_localized(b);
    WaveState st{levels[0], levels[1], 1, tau};
    const Vector zero = Vector::Zero(patch.local_size());
    for (long j = 1; j <= n_res; ++j) {
      const Vector* fh = f_hat(j);
      if (cfg.solver == PatchSolver::direct)
        st = cn_step(*patch.ops->F, patch.ops->M, patch.ops->S, st,
                     fh ? *fh : zero);
      else
        st = cn_step_cg(patch.ops->K, patch.ops->M, patch.ops->S, st,
                        fh ? *fh : zero, cfg.cg_tol);
      levels[j + 1] = st.u_curr;
    }
    for (long j : local_levels) captured[i].push_back(std::move(levels[j]));
  });

  std::vector<Vector> out(local_levels.size(),
                          Vector::Zero(dofs.size()));
  for (std::size_t i = 0; i < patches.size(); ++i)
    for (std::size_t q = 0; q < local_levels.size(); ++q)
      patches[i].scatter_add(captured[i][q], out[q]);
  return out;
}

// ---------------------------------------------------------------------------
// LSM vs. global Crank-Nicolson comparison in the coarse-time a-norm.
// ---------------------------------------------------------------------------
struct ErrorReport {
  int d = 0;
  double h = 0, tau = 0, H = 0, T = 0;
  int ell = 0;
  double alpha = 1, beta = 1;
  std::uint64_t seed = 0;
  double rel_error = 0;                // || lsm - ref ||_{h,T} / || ref ||_{h,T}
  std::vector<double> snapshot_errors; // per coarse snapshot, a-norm
  double lsm_seconds = 0;
  double reference_seconds = 0;
};

inline ErrorReport compare_to_global(const LsmConfig& cfg,
                                     FactorizationCache& cache) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  LsmResult lsm = run_lsm(cfg, cache);
  auto t1 = std::chrono::steady_clock::now();

  ProblemSpec ref = cfg.problem;
  ref.snapshot_steps.clear();
  long n_res = cfg.n_res();
  for (long k = 1; k <= cfg.n_resets(); ++k)
    ref.snapshot_steps.push_back(k * n_res);
  Trajectory global = run_global_cn(ref, cache);
  auto t2 = std::chrono::steady_clock::now();
  check(global.snapshots.size() == lsm.snapshots.size(),
        "compare_to_global: snapshot counts do not match");

  DofMap dofs = make_dof_map(cfg.problem.mesh, cfg.problem.mesh.all_elements());
  NormWorkspace ws(cfg.problem.mesh, cfg.problem.coeff, cfg.problem.tau, dofs);
  ErrorReport rep;
  rep.d = cfg.problem.mesh.dim();
  rep.h = cfg.problem.mesh.h();
  rep.tau = cfg.problem.tau;
  rep.H = cfg.problem.mesh.H();
  rep.T = cfg.T;
  rep.ell = lsm.ell;
  rep.alpha = cfg.problem.coeff.alpha();
  rep.beta = cfg.problem.coeff.beta();
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < lsm.snapshots.size(); ++k) {
    Vector diff = lsm.snapshots[k] - global.snapshots[k];
    double e2 = ws.a_sq(diff);
    rep.snapshot_errors.push_back(std::sqrt(e2));
    num += cfg.T * e2;
    den += cfg.T * ws.a_sq(global.snapshots[k]);
  }
  rep.rel_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  rep.lsm_seconds = std::chrono::duration<double>(t1 - t0).count();
  rep.reference_seconds = std::chrono::duration<double>(t2 - t1).count();
  return rep;
}

}  // namespace lsm
