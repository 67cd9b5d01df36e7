#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "lsm/superposition.hpp"

namespace lsm {

// ---------------------------------------------------------------------------
// Least-squares exponential fit y ~ exp(a) * rate^x on the log scale.
// ---------------------------------------------------------------------------
struct ExponentialFit {
  double rate = 0.0;           // per-unit decay factor (exp of the slope)
  double log_intercept = 0.0;  // natural log of the x=0 value
  double r_squared = 0.0;

  double value_at(double x) const {
    return std::exp(log_intercept + x * std::log(rate));
  }
};

inline ExponentialFit fit_exponential(const std::vector<double>& xs,
                                      const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() >= 2,
          "fit_exponential: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = xs.size();
  std::vector<double> logy(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(ys[i] > 0.0, "fit_exponential: values must be positive");
    logy[i] = std::log(ys[i]);
    sx += xs[i];
    sy += logy[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * logy[i];
  }
  double denom = n * sxx - sx * sx;
  require(denom != 0.0, "fit_exponential: degenerate abscissae");
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0, mean = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = intercept + slope * xs[i];
    ss_res += (logy[i] - pred) * (logy[i] - pred);
    ss_tot += (logy[i] - mean) * (logy[i] - mean);
  }
  ExponentialFit fit;
  fit.rate = std::exp(slope);
  fit.log_intercept = intercept;
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

/// gamma = sqrt((C + 1/2)/(1 + C)) for a decay driver C > 0.
inline double gamma_from_c(double C) { return std::sqrt((C + 0.5) / (1.0 + C)); }

/// Inverse of gamma_from_c: the driver consistent with an observed rate.
inline double c_from_gamma(double gamma) {
  require(gamma > std::sqrt(0.5) && gamma < 1.0,
          "c_from_gamma: rate must lie in (sqrt(1/2), 1)");
  double g2 = gamma * gamma;
  return (g2 - 0.5) / (1.0 - g2);
}

/// The decay-rate driver C_{tau,h} = (beta/alpha)(tau/h + h/tau).
inline double decay_driver(double tau, double h, double alpha, double beta) {
  return beta / alpha * (tau / h + h / tau);
}

// ---------------------------------------------------------------------------
// Sequence of (ell, value) pairs with optional theoretical bound.
// ---------------------------------------------------------------------------
struct DecayProfile {
  enum class Semantics { matrix_band, triple_tail, relative_error };
  Semantics semantics = Semantics::triple_tail;
  std::vector<int> ell;
  std::vector<double> value;
  std::vector<double> bound;  // empty or of equal length
};

// ---------------------------------------------------------------------------
// Inverse-matrix decay probe: |K^{-1}| magnitudes and band means over the
// Chebyshev graph distance between node grid coordinates.
// ---------------------------------------------------------------------------
struct MatrixDecayResult {
  int n = 0;                      // dof count (matrix dimension)
  Eigen::MatrixXd magnitude;      // |K^{-1}|
  std::vector<double> band_mean;  // index = Chebyshev distance
  ExponentialFit fit;             // on distances 1..fit_limit
  int fit_limit = 0;
  // The per-layer rate gamma(C_{tau,h}) is an upper bound for the observed
  // rate; c_hat inverts the fitted rate back to a driver when the rate lies
  // on the representable branch (above sqrt(1/2)) and is 0 otherwise.
  double gamma_formula = 0.0;
  double c_hat = 0.0;
};

inline MatrixDecayResult matrix_decay(double h, double tau, int d,
                                      int fit_limit = 10) {
  MeshHierarchy m(d, h, h);
  auto A = constant_coefficient(m, 1.0);
  auto region = m.all_elements();
  auto dm = make_dof_map(m, region);
  auto M = assemble_mass(m, region, dm);
  auto S = assemble_stiffness(m, A, region, dm);
  auto K = combine(M, S, tau);
  MatrixDecayResult out;
  out.n = K.n;
  out.magnitude = dense_inverse(K).cwiseAbs();

  int maxdist = 0;
  std::vector<std::array<int, 2>> coords(dm.size());
  for (int i = 0; i < dm.size(); ++i)
    coords[i] = m.node_coords(dm.node_of_dof[i]);
  for (int i = 0; i < dm.size(); ++i) {
    auto ci = coords[i];
    maxdist = std::max(maxdist,
                       std::max(std::max(ci[0] - 1, m.cells_per_axis() - 1 - ci[0]),
                                d == 2 ? std::max(ci[1] - 1,
                                                  m.cells_per_axis() - 1 - ci[1])
                                       : 0));
  }
  std::vector<double> sum(maxdist + 1, 0.0);
  std::vector<long> count(maxdist + 1, 0);
  for (int i = 0; i < dm.size(); ++i)
    for (int j = 0; j < dm.size(); ++j) {
      int dist = std::abs(coords[i][0] - coords[j][0]);
      if (d == 2)
        dist = std::max(dist, std::abs(coords[i][1] - coords[j][1]));
      sum[dist] += out.magnitude(i, j);
      ++count[dist];
    }
  for (std::size_t k = 0; k < sum.size(); ++k)
    out.band_mean.push_back(count[k] > 0 ? sum[k] / count[k] : 0.0);

  out.fit_limit = std::min<int>(fit_limit, maxdist);
  std::vector<double> xs, ys;
  for (int k = 1; k <= out.fit_limit; ++k) {
    xs.push_back(k);
    ys.push_back(out.band_mean[k]);
  }
  out.fit = fit_exponential(xs, ys);
  out.gamma_formula = gamma_from_c(decay_driver(tau, h, 1.0, 1.0));
  if (out.fit.rate > std::sqrt(0.5) && out.fit.rate < 1.0)
    out.c_hat = c_from_gamma(out.fit.rate);
  return out;
}

namespace detail {

/// Checks that a dof vector vanishes outside the interior-node set of omega.
inline void require_supported(const MeshHierarchy& m, const DofMap& dofs,
                              const Vector& v, const ElementSet& omega,
                              const char* what) {
  auto inside = m.interior_nodes(omega);
  std::vector<char> ok(m.node_count(), 0);
  for (int n : inside) ok[n] = 1;
  for (int d = 0; d < dofs.size(); ++d)
    if (v[d] != 0.0)
      require(ok[dofs.node_of_dof[d]],
              std::string(what) + ": data not supported in omega");
}

/// Per-element contributions of the triple norm squared, bucketed by the
/// Chebyshev element distance to omega; suffix sums give every tail at once.
inline std::vector<double> triple_tail_by_layer(const MeshHierarchy& m,
                                                const CoefficientField& A,
                                                double tau, const DofMap& dofs,
                                                const Vector& v,
                                                const std::vector<int>& dist,
                                                int ell_max) {
  std::vector<double> bucket(ell_max + 2, 0.0);
  int nodes[4];
  double x[4];
  double w = tau * tau / 4.0;
  for (long e = 0; e < m.element_count(); ++e) {
    int layer = dist[e];
    int idx = layer > ell_max ? ell_max + 1 : layer;
    int k = m.element_nodes(static_cast<int>(e), nodes);
    for (int a = 0; a < k; ++a) {
      int d = dofs.dof_of_node[nodes[a]];
      x[a] = d >= 0 ? v[d] : 0.0;
    }
    double mass = 0, stiff = 0;
    if (m.dim() == 1) {
      auto Me = element_mass_1d(m.h());
      auto Se = element_stiffness_1d(m.h());
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          mass += x[a] * Me[a][b] * x[b];
          stiff += x[a] * Se[a][b] * x[b];
        }
    } else {
      auto Me = element_mass_2d(m.h());
      auto Se = element_stiffness_2d();
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          mass += x[a] * Me[a][b] * x[b];
          stiff += x[a] * Se[a][b] * x[b];
        }
    }
    bucket[idx] += mass + w * A[static_cast<int>(e)] * stiff;
  }
  // tail(ell) = sum of contributions with dist > ell
  std::vector<double> tail(ell_max + 1, 0.0);
  double suffix = bucket[ell_max + 1];
  for (int ell = ell_max; ell >= 0; --ell) {
    tail[ell] = suffix;
    suffix += bucket[ell];
  }
  return tail;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Triple-norm tail of the discrete solution outside N_ell(omega) after n
// steps, for ell = 0..ell_max, with the fitted-rate bound
// (ell+1)^{n/2} gamma^ell max_k |||u^{k+1/2}|||.
// ---------------------------------------------------------------------------
struct DecayProbeResult {
  DecayProfile profile;
  double max_triple = 0.0;  // max_k |||u^{k+1/2}|||
  double gamma_fit = 0.0;
  double gamma_formula = 0.0;  // from C_{tau,h} up to its unknown constant
};

inline DecayProbeResult decay_profile(const ProblemSpec& p,
                                      const ElementSet& omega, long n,
                                      int ell_max, FactorizationCache& cache,
                                      const WaveState* start = nullptr) {
  p.validate();
  require(n >= 0, "decay_profile: n must be nonnegative");
  auto ops = build_global_operators(p.mesh, p.coeff, p.tau, cache);
  WaveState st = start ? *start : bootstrap(p, ops, cache);
  detail::require_supported(p.mesh, ops.dofs, st.u_prev, omega,
                            "decay_profile u0");
  detail::require_supported(p.mesh, ops.dofs, st.u_curr, omega,
                            "decay_profile u1");
  if (!p.rhs.is_zero())
    detail::require_supported(p.mesh, ops.dofs,
                              p.rhs.slice(p.mesh, ops.dofs, 0.0), omega,
                              "decay_profile f");

  NormWorkspace ws(p.mesh, p.coeff, p.tau, ops.dofs);
  double max_triple = ws.triple(st.half_step_mean());
  detail::RhsSeries series(p, ops.dofs);
  Vector storage;
  for (long j = 1; j <= n; ++j) {
    const Vector* fh = series.f_hat(j, storage);
    st = cn_step(*ops.F, ops.M, ops.S, st,
                 fh ? *fh : Vector::Zero(ops.dofs.size()));
    max_triple = std::max(max_triple, ws.triple(st.half_step_mean()));
  }
  Vector mean = st.half_step_mean();

  auto dist = p.mesh.element_distance(omega);
  auto tails = detail::triple_tail_by_layer(p.mesh, p.coeff, p.tau, ops.dofs,
                                            mean, dist, ell_max);
  DecayProbeResult out;
  out.max_triple = max_triple;
  out.profile.semantics = DecayProfile::Semantics::triple_tail;
  std::vector<double> xs, ys;
  for (int ell = 0; ell <= ell_max; ++ell) {
    double v = std::sqrt(std::max(0.0, tails[ell]));
    out.profile.ell.push_back(ell);
    out.profile.value.push_back(v);
    if (ell >= 1 && v > 1e-14 * max_triple) {
      xs.push_back(ell);
      ys.push_back(v);
    }
  }
  if (xs.size() >= 2) out.gamma_fit = fit_exponential(xs, ys).rate;
  out.gamma_formula = gamma_from_c(
      decay_driver(p.tau, p.mesh.h(), p.coeff.alpha(), p.coeff.beta()));
  double g = out.gamma_fit > 0 ? out.gamma_fit : out.gamma_formula;
  for (int ell = 0; ell <= ell_max; ++ell)
    out.profile.bound.push_back(std::pow(ell + 1.0, n / 2.0) *
                                std::pow(g, ell) * max_triple);
  return out;
}

// ---------------------------------------------------------------------------
// Localization error |||u^{n+1/2} - u_loc^{n+1/2}||| between the global
// scheme and the same scheme restricted to N_ell(omega) with zero Dirichlet
// patch boundary, both fed the identical omega-supported data.
// ---------------------------------------------------------------------------
inline double localization_error(const ProblemSpec& p, const ElementSet& omega,
                                 int ell, long n, FactorizationCache& cache,
                                 const WaveState* start = nullptr) {
  p.validate();
  auto ops = build_global_operators(p.mesh, p.coeff, p.tau, cache);
  WaveState st = start ? *start : bootstrap(p, ops, cache);
  detail::require_supported(p.mesh, ops.dofs, st.u_prev, omega,
                            "localization_error u0");
  detail::require_supported(p.mesh, ops.dofs, st.u_curr, omega,
                            "localization_error u1");
  if (!p.rhs.is_zero())
    detail::require_supported(p.mesh, ops.dofs,
                              p.rhs.slice(p.mesh, ops.dofs, 0.0), omega,
                              "localization_error f");

  ElementSet patch = extend_patch(p.mesh, omega, ell);
  DofMap pdm = make_dof_map(p.mesh, patch);
  auto Ml = assemble_mass(p.mesh, patch, pdm);
  auto Sl = assemble_stiffness(p.mesh, p.coeff, patch, pdm);
  auto Kl = combine(Ml, Sl, p.tau);
  auto Fl = cache.factorize(Kl);

  auto gather = [&](const Vector& g) {
    Vector out(pdm.size());
    for (int l = 0; l < pdm.size(); ++l)
      out[l] = g[ops.dofs.dof_of_node[pdm.node_of_dof[l]]];
    return out;
  };

  // xi^n is measured on the half-step pair below step n, (u^{n-1}, u^n), so
  // that xi^0 and xi^1 vanish identically (both schemes still sit on the
  // shared initial pair there).
  WaveState loc{gather(st.u_prev), gather(st.u_curr), 1, p.tau};
  detail::RhsSeries series(p, ops.dofs);
  Vector storage;
  const Vector zero_g = Vector::Zero(ops.dofs.size());
  const Vector zero_l = Vector::Zero(pdm.size());
  for (long j = 1; j + 1 <= n; ++j) {
    const Vector* fh = series.f_hat(j, storage);
    st = cn_step(*ops.F, ops.M, ops.S, st, fh ? *fh : zero_g);
    loc = cn_step(*Fl, Ml, Sl, loc, fh ? gather(*fh) : zero_l);
  }
  NormWorkspace ws(p.mesh, p.coeff, p.tau, ops.dofs);
  Vector diff;
  if (n == 0) {
    diff = st.u_prev;
    for (int l = 0; l < pdm.size(); ++l)
      diff[ops.dofs.dof_of_node[pdm.node_of_dof[l]]] -= loc.u_prev[l];
  } else {
    diff = st.half_step_mean();
    Vector lmean = loc.half_step_mean();
    for (int l = 0; l < pdm.size(); ++l)
      diff[ops.dofs.dof_of_node[pdm.node_of_dof[l]]] -= lmean[l];
  }
  return ws.triple(diff);
}

/// ell-sweep of the localization error at a fixed step.
inline DecayProfile localization_error_sweep(const ProblemSpec& p,
                                             const ElementSet& omega,
                                             const std::vector<int>& ells,
                                             long n,
                                             FactorizationCache& cache) {
  DecayProfile prof;
  prof.semantics = DecayProfile::Semantics::relative_error;
  for (int ell : ells) {
    prof.ell.push_back(ell);
    prof.value.push_back(localization_error(p, omega, ell, n, cache));
  }
  return prof;
}

// ---------------------------------------------------------------------------
// Relative coarse-time error against a manufactured exact solution,
// || u - I_h u_exact ||_{h,T} / || I_h u_exact ||_{h,T}.
// ---------------------------------------------------------------------------
inline double exact_error(const MeshHierarchy& m, const CoefficientField& A,
                          double tau, const std::vector<Vector>& snapshots,
                          const std::vector<double>& times, double T,
                          const SpaceTimeFn& u_exact) {
  require(snapshots.size() == times.size(),
          "exact_error: snapshot/time count mismatch");
  DofMap dofs = make_dof_map(m, m.all_elements());
  NormWorkspace ws(m, A, tau, dofs);
  double num = 0, den = 0;
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    Vector exact = nodal_interpolate(m, dofs, u_exact, times[k]);
    num += T * ws.a_sq(snapshots[k] - exact);
    den += T * ws.a_sq(exact);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace lsm
