#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "lsm/assembly.hpp"
#include "lsm/coefficient.hpp"
#include "lsm/mesh.hpp"
#include "lsm/norms.hpp"
#include "lsm/solver.hpp"

namespace lsm {

// ---------------------------------------------------------------------------
// Right-hand side f(x,t).  All shipped experiments use space-time separable
// sources, which collapse the per-step averaging to one scalar; a general
// point-evaluable form is supported as well.
// ---------------------------------------------------------------------------
class Rhs {
 public:
  static Rhs zero() { return Rhs(); }

  static Rhs separable(SpaceFn space, std::function<double(double)> time) {
    Rhs r;
    r.space_ = std::move(space);
    r.time_ = std::move(time);
    r.kind_ = Kind::separable;
    return r;
  }

  static Rhs general(SpaceTimeFn f) {
    Rhs r;
    r.general_ = std::move(f);
    r.kind_ = Kind::general;
    return r;
  }

  bool is_zero() const { return kind_ == Kind::zero; }
  bool is_separable() const { return kind_ != Kind::general; }

  /// Spatial profile on the dof set (zero for the zero rhs).
  Vector space_vector(const MeshHierarchy& m, const DofMap& dm) const {
    if (kind_ == Kind::zero) return Vector::Zero(dm.size());
    require(kind_ == Kind::separable, "rhs: not separable");
    return nodal_interpolate(
        m, dm, [&](double x, double y, double) { return space_(x, y); }, 0.0);
  }

  double time_factor(double t) const {
    if (kind_ == Kind::zero) return 0.0;
    require(kind_ == Kind::separable, "rhs: not separable");
    return time_(t);
  }

  /// Nodal slice f(., t) on the dof set (any kind).
  Vector slice(const MeshHierarchy& m, const DofMap& dm, double t) const {
    switch (kind_) {
      case Kind::zero:
        return Vector::Zero(dm.size());
      case Kind::separable:
        return time_(t) * space_vector(m, dm);
      case Kind::general:
      default:
        return nodal_interpolate(m, dm, general_, t);
    }
  }

 private:
  enum class Kind { zero, separable, general };
  Kind kind_ = Kind::zero;
  SpaceFn space_;
  std::function<double(double)> time_;
  SpaceTimeFn general_;
};

/// The averaged source (f^{n+1} + 2 f^n + f^{n-1})/4 at level n.
inline double hat_average(double fm, double f0, double fp) {
  return (fp + 2.0 * f0 + fm) / 4.0;
}

// ---------------------------------------------------------------------------
// Problem definition for one wave-equation run.
// ---------------------------------------------------------------------------
struct ProblemSpec {
  MeshHierarchy mesh;
  CoefficientField coeff;
  Rhs rhs;
  SpaceTimeFn u0;  // nullptr-like: zero
  SpaceTimeFn v0;
  double t_fin = 1.0;
  double tau = 0.0;
  bool record_energy = false;
  std::vector<long> snapshot_steps;  // strictly increasing step indices

  long steps() const { return static_cast<long>(std::llround(t_fin / tau)); }

  void validate() const {
    require(tau > 0.0 && t_fin > 0.0, "problem: tau and t_fin must be positive");
    require(std::abs(steps() * tau - t_fin) <= 1e-9 * t_fin,
            "problem: t_fin/tau must be an integer");
    for (std::size_t i = 1; i < snapshot_steps.size(); ++i)
      require(snapshot_steps[i] > snapshot_steps[i - 1],
              "problem: snapshot steps must be strictly increasing");
  }
};

/// The pair (u^{n-1}, u^n) of dof vectors plus the step index.
struct WaveState {
  Vector u_prev;
  Vector u_curr;
  long step = 1;  // index of u_curr
  double tau = 0.0;

  Vector half_step_mean() const { return 0.5 * (u_curr + u_prev); }
  Vector half_step_diff() const { return (u_curr - u_prev) / tau; }
};

struct EnergyLog {
  std::vector<long> steps;       // pair (u^n, u^{n+1}) logged under n
  std::vector<double> energy;    // E^{n+1/2}
  std::vector<double> stability_bound;  // sqrt(E^{1/2}) + sum (tau/sqrt2)||f_hat||
};

struct Trajectory {
  std::vector<long> steps;
  std::vector<Vector> snapshots;  // u at the recorded steps
  EnergyLog energy;
  WaveState final_state;
};

struct GlobalOperators {
  DofMap dofs;
  SparseOperator M, S, K;
  FactorizationPtr F;
};

inline GlobalOperators build_global_operators(const MeshHierarchy& m,
                                              const CoefficientField& A,
                                              double tau,
                                              FactorizationCache& cache,
                                              bool factorize = true) {
  GlobalOperators ops;
  auto region = m.all_elements();
  ops.dofs = make_dof_map(m, region);
  ops.M = assemble_mass(m, region, ops.dofs);
  ops.S = assemble_stiffness(m, A, region, ops.dofs);
  ops.K = combine(ops.M, ops.S, tau);
  if (factorize) ops.F = cache.factorize(ops.K);
  return ops;
}

/// Second-order Taylor start: u^0 = I_h u0 and
/// M u^1 = M (u^0 + tau I_h v0) + (tau^2/2)(M f^0 - S u^0).
/// With zero initial data this reduces to u^1 = (tau^2/2) f^0 without a solve.
inline WaveState bootstrap(const ProblemSpec& p, const GlobalOperators& ops,
                           FactorizationCache& cache) {
  const auto& dm = ops.dofs;
  Vector u0 = p.u0 ? nodal_interpolate(p.mesh, dm, p.u0, 0.0)
                   : Vector::Zero(dm.size());
  Vector v0 = p.v0 ? nodal_interpolate(p.mesh, dm, p.v0, 0.0)
                   : Vector::Zero(dm.size());
  Vector f0 = p.rhs.slice(p.mesh, dm, 0.0);
  double tau = p.tau;
  Vector u1;
  if (u0.isZero(0.0) && v0.isZero(0.0)) {
    u1 = (tau * tau / 2.0) * f0;
  } else {
    Vector rhs = ops.M * (u0 + tau * v0 + (tau * tau / 2.0) * f0) -
                 (tau * tau / 2.0) * (ops.S * u0);
    auto FM = cache.factorize(ops.M);
    u1 = FM->solve(rhs);
  }
  return WaveState{std::move(u0), std::move(u1), 1, tau};
}

/// One Crank-Nicolson step: solve
/// K u^{n+1} = tau^2 M f_hat + M (2u^n - u^{n-1}) - (tau^2/4) S (2u^n + u^{n-1}).
inline WaveState cn_step(const Factorization& F, const SparseOperator& M,
                         const SparseOperator& S, const WaveState& st,
                         const Vector& f_hat) {
  double tau = st.tau;
  Vector rhs = M * (tau * tau * f_hat + 2.0 * st.u_curr - st.u_prev) -
               (tau * tau / 4.0) * (S * (2.0 * st.u_curr + st.u_prev));
  Vector u_next = F.solve(rhs);
  return WaveState{st.u_curr, std::move(u_next), st.step + 1, tau};
}

/// Same step with the iterative fallback solver.
inline WaveState cn_step_cg(const SparseOperator& K, const SparseOperator& M,
                            const SparseOperator& S, const WaveState& st,
                            const Vector& f_hat, double tol) {
  double tau = st.tau;
  Vector rhs = M * (tau * tau * f_hat + 2.0 * st.u_curr - st.u_prev) -
               (tau * tau / 4.0) * (S * (2.0 * st.u_curr + st.u_prev));
  Vector u_next = cg_solve(K, rhs, tol);
  return WaveState{st.u_curr, std::move(u_next), st.step + 1, tau};
}

namespace detail {

/// Supplies the averaged source vector for step n; separable sources reuse
/// one spatial profile, general ones keep a three-slice ring buffer.
class RhsSeries {
 public:
  RhsSeries(const ProblemSpec& p, const DofMap& dm) : p_(&p), dm_(&dm) {
    if (p.rhs.is_zero()) return;
    if (p.rhs.is_separable()) {
      space_ = p.rhs.space_vector(p.mesh, dm);
      return;
    }
    slices_[0] = p.rhs.slice(p.mesh, dm, 0.0);
    slices_[1] = p.rhs.slice(p.mesh, dm, p.tau);
    slices_[2] = p.rhs.slice(p.mesh, dm, 2.0 * p.tau);
    loaded_ = 1;  // slices centered at level `loaded_`
  }

  /// f_hat at level n (writes into out; returns nullptr when f == 0).
  const Vector* f_hat(long n, Vector& out) {
    if (p_->rhs.is_zero()) return nullptr;
    double tau = p_->tau;
    if (p_->rhs.is_separable()) {
      double q = hat_average(p_->rhs.time_factor((n - 1) * tau),
                             p_->rhs.time_factor(n * tau),
                             p_->rhs.time_factor((n + 1) * tau));
      out = q * space_;
      return &out;
    }
    while (loaded_ < n) {
      ++loaded_;
      slices_[0] = std::move(slices_[1]);
      slices_[1] = std::move(slices_[2]);
      slices_[2] = p_->rhs.slice(p_->mesh, *dm_, (loaded_ + 1) * tau);
    }
    require(loaded_ == n, "rhs series consumed out of order");
    out = 0.25 * (slices_[2] + 2.0 * slices_[1] + slices_[0]);
    return &out;
  }

 private:
  const ProblemSpec* p_;
  const DofMap* dm_;
  Vector space_;
  Vector slices_[3];
  long loaded_ = -1;
};

}  // namespace detail

/// Run the global scheme for n_steps from `start`, recording snapshots and
/// (optionally) the discrete energy with its stability bound.
inline Trajectory run_cn(const ProblemSpec& p, const GlobalOperators& ops,
                         WaveState start, long n_steps) {
  Trajectory traj;
  NormWorkspace ws(p.mesh, p.coeff, p.tau, ops.dofs);
  detail::RhsSeries series(p, ops.dofs);
  double fsum = 0.0;
  double e0 = 0.0;
  auto log_energy = [&](const WaveState& st) {
    if (!p.record_energy) return;
    double e = ws.discrete_energy(st.u_prev, st.u_curr);
    if (traj.energy.steps.empty()) e0 = e;
    traj.energy.steps.push_back(st.step - 1);
    traj.energy.energy.push_back(e);
    traj.energy.stability_bound.push_back(std::sqrt(e0) + fsum);
  };
  std::size_t snap_idx = 0;
  auto maybe_record = [&](long step, const Vector& u) {
    while (snap_idx < p.snapshot_steps.size() &&
           p.snapshot_steps[snap_idx] < step)
      ++snap_idx;
    if (snap_idx < p.snapshot_steps.size() &&
        p.snapshot_steps[snap_idx] == step) {
      traj.steps.push_back(step);
      traj.snapshots.push_back(u);
      ++snap_idx;
    }
  };
  log_energy(start);
  maybe_record(start.step - 1, start.u_prev);
  maybe_record(start.step, start.u_curr);
  WaveState st = std::move(start);
  const Vector zero = Vector::Zero(ops.dofs.size());
  Vector fhat_storage;
  for (long i = 0; i < n_steps; ++i) {
    long n = st.step;  // producing level n+1
    const Vector* fh = series.f_hat(n, fhat_storage);
    if (p.record_energy && fh) fsum += p.tau / std::sqrt(2.0) * ws.l2(*fh);
    st = cn_step(*ops.F, ops.M, ops.S, st, fh ? *fh : zero);
    log_energy(st);
    maybe_record(st.step, st.u_curr);
  }
  traj.final_state = std::move(st);
  return traj;
}

/// The full global Crank-Nicolson run: assemble, factorize once, bootstrap,
/// then iterate to t_fin.
inline Trajectory run_global_cn(const ProblemSpec& p,
                                FactorizationCache& cache) {
  p.validate();
  auto ops = build_global_operators(p.mesh, p.coeff, p.tau, cache);
  WaveState start = bootstrap(p, ops, cache);
  return run_cn(p, ops, std::move(start), p.steps() - 1);
}

}  // namespace lsm
