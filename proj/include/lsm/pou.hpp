#pragma once

#include "lsm/assembly.hpp"
#include "lsm/mesh.hpp"

namespace lsm {

/// How to treat the weight that the omitted boundary coarse hats would carry
/// near the domain boundary.
enum class PouBoundary {
  /// Add each boundary hat's weight to the nearest interior coarse node
  /// (ties split equally).  Keeps sum_i Lambda_i = 1 at every fine node and
  /// makes the reconstruction sum_i I_h(Lambda_i v) = v exact on V_h.
  reassign_to_nearest,
  /// Plain interior hats; the partition property degrades within distance H
  /// of the boundary.
  plain,
};

// ---------------------------------------------------------------------------
// One partition-of-unity member: a tensor-product weight box over fine nodes.
// Weights are dyadic rationals on the meshes used here, so sums and products
// evaluate exactly.
// ---------------------------------------------------------------------------
struct PouEntry {
  int cx = 0, cy = 0;      // coarse node (axis indices)
  int lox = 0, hix = 0;    // inclusive fine-node coordinate range, x axis
  int loy = 0, hiy = 0;
  std::vector<double> wx;  // axis weights, size hix-lox+1
  std::vector<double> wy;

  double weight(int ix, int iy) const {
    if (ix < lox || ix > hix || iy < loy || iy > hiy) return 0.0;
    double w = wx[ix - lox];
    if (!wy.empty()) w *= wy[iy - loy];
    return w;
  }
  double weight_node(const MeshHierarchy& m, int node) const {
    auto c = m.node_coords(node);
    return weight(c[0], c[1]);
  }
};

struct PartitionOfUnity {
  std::vector<PouEntry> entries;  // lexicographic over interior coarse nodes
  PouBoundary boundary = PouBoundary::reassign_to_nearest;

  std::size_t size() const { return entries.size(); }
};

namespace detail {

struct AxisWeights {
  int lo, hi;  // inclusive node range with nonzero weight
  std::vector<double> w;
};

inline AxisWeights pou_axis(int c, int r, int nc, int ncH, PouBoundary policy) {
  bool left_edge = (policy == PouBoundary::reassign_to_nearest) && c == 1;
  bool right_edge =
      (policy == PouBoundary::reassign_to_nearest) && c == ncH - 1;
  int lo = left_edge ? 0 : (c - 1) * r + 1;
  int hi = right_edge ? nc : (c + 1) * r - 1;
  AxisWeights aw{lo, hi, {}};
  aw.w.reserve(hi - lo + 1);
  for (int ix = lo; ix <= hi; ++ix) {
    if ((left_edge && ix <= c * r) || (right_edge && ix >= c * r)) {
      aw.w.push_back(1.0);  // absorbed boundary hat: plateau up to the wall
    } else {
      int num = r - std::abs(ix - c * r);
      aw.w.push_back(static_cast<double>(num) / r);
    }
  }
  return aw;
}

}  // namespace detail

/// Coarse Q1 hat functions at the interior coarse nodes, evaluated at fine
/// nodes.  With the default boundary policy the missing boundary hats are
/// folded into their nearest interior neighbor, so the weights at each fine
/// node sum to one exactly.
inline PartitionOfUnity build_pou(
    const MeshHierarchy& m,
    PouBoundary policy = PouBoundary::reassign_to_nearest) {
  require(m.coarse_cells_per_axis() >= 2,
          "build_pou: no interior coarse node (need 1/H >= 2)");
  PartitionOfUnity pou;
  pou.boundary = policy;
  int r = m.refinement();
  int nc = m.cells_per_axis();
  int ncH = m.coarse_cells_per_axis();
  if (m.dim() == 1) {
    for (int c = 1; c < ncH; ++c) {
      auto ax = detail::pou_axis(c, r, nc, ncH, policy);
      PouEntry e;
      e.cx = c;
      e.lox = ax.lo;
      e.hix = ax.hi;
      e.wx = std::move(ax.w);
      pou.entries.push_back(std::move(e));
    }
    return pou;
  }
  for (int cy = 1; cy < ncH; ++cy)
    for (int cx = 1; cx < ncH; ++cx) {
      auto axx = detail::pou_axis(cx, r, nc, ncH, policy);
      auto axy = detail::pou_axis(cy, r, nc, ncH, policy);
      PouEntry e;
      e.cx = cx;
      e.cy = cy;
      e.lox = axx.lo;
      e.hix = axx.hi;
      e.wx = std::move(axx.w);
      e.loy = axy.lo;
      e.hiy = axy.hi;
      e.wy = std::move(axy.w);
      pou.entries.push_back(std::move(e));
    }
  return pou;
}

/// I_h(Lambda_i v): entrywise product of a dof vector with the weights of one
/// partition member; the result is supported in omega_i.
inline Vector localize(const MeshHierarchy& m, const DofMap& dm,
                       const Vector& v, const PouEntry& entry) {
  require(v.size() == dm.size(), "localize: vector/dof size mismatch");
  Vector out = Vector::Zero(dm.size());
  for (int iy = entry.loy; iy <= entry.hiy; ++iy)
    for (int ix = entry.lox; ix <= entry.hix; ++ix) {
      int node = m.node_index(ix, iy);
      int d = dm.dof_of_node[node];
      if (d >= 0) out[d] = v[d] * entry.weight(ix, iy);
    }
  return out;
}

}  // namespace lsm
