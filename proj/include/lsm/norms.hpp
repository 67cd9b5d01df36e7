#pragma once

#include <cmath>
#include <optional>

#include "lsm/assembly.hpp"
#include "lsm/coefficient.hpp"
#include "lsm/mesh.hpp"

namespace lsm {

// ---------------------------------------------------------------------------
// Discrete norms evaluated element by element (exact for the closed-form Q1
// element matrices).  Vectors are dof vectors over the workspace's dof map;
// nodes outside the dof set contribute zero.  An optional region restricts
// all sums to that element set.  Element order is ascending, so squared
// norms are additive over any partition of the region.
// ---------------------------------------------------------------------------
class NormWorkspace {
 public:
  NormWorkspace(const MeshHierarchy& m, const CoefficientField& A, double tau,
                const DofMap& dm, const ElementSet* region = nullptr)
      : m_(&m), A_(&A), tau_(tau), dm_(&dm), region_(region) {}

  double tau() const { return tau_; }

  double l2_sq(const Vector& v) const { return quad(v, Kind::mass); }
  double a_sq(const Vector& v) const { return quad(v, Kind::stiffness); }
  /// |||v|||^2 = ||v||_L2^2 + (tau^2/4) ||v||_a^2, the K-induced norm.
  double triple_sq(const Vector& v) const {
    return l2_sq(v) + tau_ * tau_ / 4.0 * a_sq(v);
  }

  double l2(const Vector& v) const { return std::sqrt(l2_sq(v)); }
  double a(const Vector& v) const { return std::sqrt(a_sq(v)); }
  double triple(const Vector& v) const { return std::sqrt(triple_sq(v)); }

  /// ||pair||_E^2 = ||D_tau v||_L2^2 + ||v^{n+1/2}||_a^2 for the consecutive
  /// pair (v^n, v^{n+1}).
  double energy_sq(const Vector& v_n, const Vector& v_np1) const {
    Vector dt = (v_np1 - v_n) / tau_;
    Vector mid = 0.5 * (v_np1 + v_n);
    return l2_sq(dt) + a_sq(mid);
  }
  double energy(const Vector& v_n, const Vector& v_np1) const {
    return std::sqrt(energy_sq(v_n, v_np1));
  }
  /// The discrete energy E^{n+1/2} = (1/2) ||pair||_E^2.
  double discrete_energy(const Vector& v_n, const Vector& v_np1) const {
    return 0.5 * energy_sq(v_n, v_np1);
  }

  /// ||pair||_{E_h}^2 = |||D_tau v|||^2 + tau^-2 |||v^{n+1/2}|||^2.
  double eh_sq(const Vector& v_n, const Vector& v_np1) const {
    Vector dt = (v_np1 - v_n) / tau_;
    Vector mid = 0.5 * (v_np1 + v_n);
    return triple_sq(dt) + triple_sq(mid) / (tau_ * tau_);
  }
  double eh(const Vector& v_n, const Vector& v_np1) const {
    return std::sqrt(eh_sq(v_n, v_np1));
  }

  /// ||seq||_{h,T}^2 = sum_k T ||v^k||_a^2 over coarse-time snapshots.
  double hT_sq(const std::vector<Vector>& snapshots, double T) const {
    double s = 0.0;
    for (const auto& v : snapshots) s += T * a_sq(v);
    return s;
  }
  double hT(const std::vector<Vector>& snapshots, double T) const {
    return std::sqrt(hT_sq(snapshots, T));
  }

 private:
  enum class Kind { mass, stiffness };

  double quad(const Vector& v, Kind kind) const {
    require(v.size() == dm_->size(), "norm: vector/dof length mismatch");
    double mat[4][4];
    int k = m_->dim() == 1 ? 2 : 4;
    if (m_->dim() == 1) {
      auto E = kind == Kind::mass ? element_mass_1d(m_->h())
                                  : element_stiffness_1d(m_->h());
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) mat[a][b] = E[a][b];
    } else {
      if (kind == Kind::mass) {
        auto E = element_mass_2d(m_->h());
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) mat[a][b] = E[a][b];
      } else {
        auto E = element_stiffness_2d();
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) mat[a][b] = E[a][b];
      }
    }
    bool weighted = kind == Kind::stiffness;
    double total = 0.0;
    int nodes[4];
    double x[4];
    auto accumulate = [&](int e) {
      m_->element_nodes(e, nodes);
      for (int a = 0; a < k; ++a) {
        int d = dm_->dof_of_node[nodes[a]];
        x[a] = d >= 0 ? v[d] : 0.0;
      }
      double s = 0.0;
      for (int a = 0; a < k; ++a) {
        double row = 0.0;
        for (int b = 0; b < k; ++b) row += mat[a][b] * x[b];
        s += x[a] * row;
      }
      total += weighted ? (*A_)[e] * s : s;
    };
    if (region_) {
      for (int e : region_->elems) accumulate(e);
    } else {
      for (long e = 0; e < m_->element_count(); ++e)
        accumulate(static_cast<int>(e));
    }
    return total;
  }

  const MeshHierarchy* m_;
  const CoefficientField* A_;
  double tau_;
  const DofMap* dm_;
  const ElementSet* region_;
};

}  // namespace lsm
