#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "lsm/coefficient.hpp"
#include "lsm/mesh.hpp"
#include "lsm/sparse.hpp"

namespace lsm {

/// Point-evaluable scalar field f(x, y, t); y is ignored in 1D.
using SpaceTimeFn = std::function<double(double, double, double)>;
/// Point-evaluable scalar field f(x, y).
using SpaceFn = std::function<double(double, double)>;

// ---------------------------------------------------------------------------
// Degrees of freedom over a region.  Dofs are the region's interior nodes in
// ascending global node order; zero Dirichlet values on everything else are
// implicit.  `all_region_nodes` instead takes every node of the region's
// elements (unconstrained operators, used by tests and probes).
// ---------------------------------------------------------------------------
struct DofMap {
  std::vector<int> node_of_dof;
  std::vector<int> dof_of_node;  // -1 where not a dof

  int size() const { return static_cast<int>(node_of_dof.size()); }
};

inline DofMap make_dof_map(const MeshHierarchy& m, const ElementSet& region,
                           bool all_region_nodes = false) {
  require(!region.empty(), "dof map: empty region");
  DofMap dm;
  if (all_region_nodes) {
    std::vector<char> seen(m.node_count(), 0);
    int nodes[4];
    for (int e : region.elems) {
      int k = m.element_nodes(e, nodes);
      for (int a = 0; a < k; ++a) seen[nodes[a]] = 1;
    }
    for (long n = 0; n < m.node_count(); ++n)
      if (seen[n]) dm.node_of_dof.push_back(static_cast<int>(n));
  } else {
    dm.node_of_dof = m.interior_nodes(region);
    require(!dm.node_of_dof.empty(), "dof map: region has no interior nodes");
  }
  dm.dof_of_node.assign(m.node_count(), -1);
  for (int d = 0; d < dm.size(); ++d) dm.dof_of_node[dm.node_of_dof[d]] = d;
  return dm;
}

// ---------------------------------------------------------------------------
// Exact Q1 element matrices on axis-aligned cells of edge length h.  Local
// node order is lexicographic with x fastest.  The coefficient is constant
// per element, so these closed forms integrate exactly.
// ---------------------------------------------------------------------------
inline std::array<std::array<double, 2>, 2> element_mass_1d(double h) {
  return {{{h * 2 / 6, h * 1 / 6}, {h * 1 / 6, h * 2 / 6}}};
}

inline std::array<std::array<double, 2>, 2> element_stiffness_1d(double h) {
  return {{{1 / h, -1 / h}, {-1 / h, 1 / h}}};
}

inline std::array<std::array<double, 4>, 4> element_mass_2d(double h) {
  double c = h * h / 36.0;
  return {{{4 * c, 2 * c, 2 * c, 1 * c},
           {2 * c, 4 * c, 1 * c, 2 * c},
           {2 * c, 1 * c, 4 * c, 2 * c},
           {1 * c, 2 * c, 2 * c, 4 * c}}};
}

/// Scale-free in 2D: the same for every cell size.
inline std::array<std::array<double, 4>, 4> element_stiffness_2d() {
  double c = 1.0 / 6.0;
  return {{{4 * c, -1 * c, -1 * c, -2 * c},
           {-1 * c, 4 * c, -2 * c, -1 * c},
           {-1 * c, -2 * c, 4 * c, -1 * c},
           {-2 * c, -1 * c, -1 * c, 4 * c}}};
}

namespace detail {

inline std::vector<std::vector<int>> build_pattern(const MeshHierarchy& m,
                                                   const ElementSet& region,
                                                   const DofMap& dm) {
  std::vector<std::vector<int>> cols(dm.size());
  int nodes[4];
  for (int e : region.elems) {
    int k = m.element_nodes(e, nodes);
    for (int a = 0; a < k; ++a) {
      int da = dm.dof_of_node[nodes[a]];
      if (da < 0) continue;
      for (int b = 0; b < k; ++b) {
        int db = dm.dof_of_node[nodes[b]];
        if (db >= 0) cols[da].push_back(db);
      }
    }
  }
  for (auto& r : cols) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  return cols;
}

/// Elements are visited in ascending index order so that values of a patch
/// matrix agree bit for bit with the corresponding global entries.
template <class ElementMatrixFn>
SparseOperator assemble(const MeshHierarchy& m, const ElementSet& region,
                        const DofMap& dm, ElementMatrixFn&& elem) {
  CsrBuilder builder(build_pattern(m, region, dm));
  int nodes[4];
  double mat[4][4];
  for (int e : region.elems) {
    int k = m.element_nodes(e, nodes);
    elem(e, mat);
    for (int a = 0; a < k; ++a) {
      int da = dm.dof_of_node[nodes[a]];
      if (da < 0) continue;
      for (int b = 0; b < k; ++b) {
        int db = dm.dof_of_node[nodes[b]];
        if (db >= 0) builder.add(da, db, mat[a][b]);
      }
    }
  }
  return builder.take();
}

}  // namespace detail

inline SparseOperator assemble_mass(const MeshHierarchy& m,
                                    const ElementSet& region,
                                    const DofMap& dm) {
  require(!region.empty(), "assemble_mass: empty region");
  if (m.dim() == 1) {
    auto Me = element_mass_1d(m.h());
    return detail::assemble(m, region, dm, [&](int, double out[4][4]) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out[a][b] = Me[a][b];
    });
  }
  auto Me = element_mass_2d(m.h());
  return detail::assemble(m, region, dm, [&](int, double out[4][4]) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out[a][b] = Me[a][b];
  });
}

inline SparseOperator assemble_stiffness(const MeshHierarchy& m,
                                         const CoefficientField& A,
                                         const ElementSet& region,
                                         const DofMap& dm) {
  require(!region.empty(), "assemble_stiffness: empty region");
  if (m.dim() == 1) {
    auto Se = element_stiffness_1d(m.h());
    return detail::assemble(m, region, dm, [&](int e, double out[4][4]) {
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) out[a][b] = A[e] * Se[a][b];
    });
  }
  auto Se = element_stiffness_2d();
  return detail::assemble(m, region, dm, [&](int e, double out[4][4]) {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) out[a][b] = A[e] * Se[a][b];
  });
}

/// Nodal interpolation I_h f(., t) onto the dof set (boundary values are
/// implicitly zero for members of V_h).
inline Vector nodal_interpolate(const MeshHierarchy& m, const DofMap& dm,
                                const SpaceTimeFn& f, double t) {
  Vector v(dm.size());
  for (int d = 0; d < dm.size(); ++d) {
    auto p = m.node_position(dm.node_of_dof[d]);
    double val = f(p[0], p[1], t);
    check(std::isfinite(val), "nodal_interpolate: non-finite evaluation");
    v[d] = val;
  }
  return v;
}

}  // namespace lsm
