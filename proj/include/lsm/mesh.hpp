#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "lsm/common.hpp"

namespace lsm {

/// Sorted, duplicate-free set of fine-element indices.
struct ElementSet {
  std::vector<int> elems;

  bool empty() const { return elems.empty(); }
  std::size_t size() const { return elems.size(); }
  bool operator==(const ElementSet& o) const { return elems == o.elems; }
};

// ---------------------------------------------------------------------------
// Nested uniform tensor-product meshes on (0,1)^d, d in {1,2}.
//
// Nodes and elements are numbered lexicographically with x fastest.  Node i
// sits at (ix*h, iy*h); element e covers [ex*h,(ex+1)*h] x [ey*h,(ey+1)*h].
// The coarse mesh shares the node lattice: coarse cell c spans r fine cells
// per axis, r = H/h.
// ---------------------------------------------------------------------------
class MeshHierarchy {
 public:
  MeshHierarchy(int d, double H, double h) : d_(d) {
    require(d == 1 || d == 2, "mesh: only d in {1,2} is supported");
    require(h > 0.0 && H >= h && H < 1.0, "mesh: need 0 < h <= H < 1");
    nc_ = static_cast<int>(std::llround(1.0 / h));
    require(nc_ >= 1 && std::abs(nc_ * h - 1.0) <= 1e-12 * nc_,
            "mesh: 1/h must be an integer");
    ncH_ = static_cast<int>(std::llround(1.0 / H));
    require(ncH_ >= 1 && std::abs(ncH_ * H - 1.0) <= 1e-12 * ncH_,
            "mesh: 1/H must be an integer");
    require(nc_ % ncH_ == 0, "mesh: H/h must be an integer");
    r_ = nc_ / ncH_;
    h_ = 1.0 / nc_;
    H_ = 1.0 / ncH_;
    np_ = nc_ + 1;
  }

  int dim() const { return d_; }
  double h() const { return h_; }
  double H() const { return H_; }
  /// Fine cells per coarse cell and per axis ratio r = H/h.
  int refinement() const { return r_; }
  int cells_per_axis() const { return nc_; }
  int coarse_cells_per_axis() const { return ncH_; }
  int nodes_per_axis() const { return np_; }

  long node_count() const { return d_ == 1 ? np_ : long(np_) * np_; }
  long element_count() const { return d_ == 1 ? nc_ : long(nc_) * nc_; }
  long coarse_element_count() const {
    return d_ == 1 ? ncH_ : long(ncH_) * ncH_;
  }
  /// Number of interior coarse nodes, M = (1/H - 1)^d.
  long coarse_interior_count() const {
    long m = ncH_ - 1;
    return d_ == 1 ? m : m * m;
  }

  int node_index(int ix, int iy = 0) const {
    return d_ == 1 ? ix : ix + np_ * iy;
  }
  int element_index(int ex, int ey = 0) const {
    return d_ == 1 ? ex : ex + nc_ * ey;
  }
  std::array<int, 2> node_coords(int n) const {
    return d_ == 1 ? std::array<int, 2>{n, 0}
                   : std::array<int, 2>{n % np_, n / np_};
  }
  std::array<int, 2> element_coords(int e) const {
    return d_ == 1 ? std::array<int, 2>{e, 0}
                   : std::array<int, 2>{e % nc_, e / nc_};
  }
  std::array<double, 2> node_position(int n) const {
    auto c = node_coords(n);
    return {c[0] * h_, c[1] * h_};
  }

  bool is_boundary_node(int n) const {
    auto c = node_coords(n);
    if (c[0] == 0 || c[0] == nc_) return true;
    return d_ == 2 && (c[1] == 0 || c[1] == nc_);
  }

  /// Nodes of element e, lexicographic (x fastest): 2 in 1D, 4 in 2D.
  int element_nodes(int e, int out[4]) const {
    auto c = element_coords(e);
    if (d_ == 1) {
      out[0] = c[0];
      out[1] = c[0] + 1;
      return 2;
    }
    out[0] = node_index(c[0], c[1]);
    out[1] = node_index(c[0] + 1, c[1]);
    out[2] = node_index(c[0], c[1] + 1);
    out[3] = node_index(c[0] + 1, c[1] + 1);
    return 4;
  }

  ElementSet all_elements() const {
    ElementSet s;
    s.elems.resize(element_count());
    for (long e = 0; e < element_count(); ++e) s.elems[e] = static_cast<int>(e);
    return s;
  }

  /// Axis-aligned block of fine elements [xlo,xhi) x [ylo,yhi).
  ElementSet element_box(int xlo, int xhi, int ylo = 0, int yhi = 1) const {
    ElementSet s;
    if (d_ == 1) {
      for (int ex = xlo; ex < xhi; ++ex) s.elems.push_back(ex);
      return s;
    }
    for (int ey = ylo; ey < yhi; ++ey)
      for (int ex = xlo; ex < xhi; ++ex) s.elems.push_back(element_index(ex, ey));
    return s;
  }

  /// Fine nodes whose full nodal support lies in the open interior of the
  /// set: every incident element belongs to the set and the node is not on
  /// the domain boundary.  For the full element set this is exactly the set
  /// of non-boundary mesh nodes.
  std::vector<int> interior_nodes(const ElementSet& set) const {
    std::vector<char> in_set(element_count(), 0);
    for (int e : set.elems) in_set[e] = 1;
    std::vector<int> result;
    std::vector<char> seen(node_count(), 0);
    int nodes[4];
    for (int e : set.elems) {
      int k = element_nodes(e, nodes);
      for (int a = 0; a < k; ++a) {
        int n = nodes[a];
        if (seen[n]) continue;
        seen[n] = 1;
        if (is_boundary_node(n)) continue;
        if (node_fully_covered(n, in_set)) result.push_back(n);
      }
    }
    std::sort(result.begin(), result.end());
    return result;
  }

  /// Chebyshev distance (in element layers) from every fine element to the
  /// given set; 0 on the set itself.  One ring of vertex-adjacent elements
  /// increases the distance by one, so N_l(set) = { e : dist(e) <= l }.
  std::vector<int> element_distance(const ElementSet& from) const {
    const int big = std::numeric_limits<int>::max() / 4;
    std::vector<int> dist(element_count(), big);
    for (int e : from.elems) dist[e] = 0;
    if (d_ == 1) {
      for (int e = 1; e < nc_; ++e) dist[e] = std::min(dist[e], dist[e - 1] + 1);
      for (int e = nc_ - 2; e >= 0; --e)
        dist[e] = std::min(dist[e], dist[e + 1] + 1);
      return dist;
    }
    // Two-pass chamfer transform; exact for the Chebyshev metric.
    auto at = [&](int x, int y) -> int& { return dist[x + nc_ * y]; };
    for (int y = 0; y < nc_; ++y)
      for (int x = 0; x < nc_; ++x) {
        int& v = at(x, y);
        if (x > 0) v = std::min(v, at(x - 1, y) + 1);
        if (y > 0) {
          v = std::min(v, at(x, y - 1) + 1);
          if (x > 0) v = std::min(v, at(x - 1, y - 1) + 1);
          if (x + 1 < nc_) v = std::min(v, at(x + 1, y - 1) + 1);
        }
      }
    for (int y = nc_ - 1; y >= 0; --y)
      for (int x = nc_ - 1; x >= 0; --x) {
        int& v = at(x, y);
        if (x + 1 < nc_) v = std::min(v, at(x + 1, y) + 1);
        if (y + 1 < nc_) {
          v = std::min(v, at(x, y + 1) + 1);
          if (x + 1 < nc_) v = std::min(v, at(x + 1, y + 1) + 1);
          if (x > 0) v = std::min(v, at(x - 1, y + 1) + 1);
        }
      }
    return dist;
  }

 private:
  bool node_fully_covered(int n, const std::vector<char>& in_set) const {
    auto c = node_coords(n);
    if (d_ == 1) {
      for (int ex = c[0] - 1; ex <= c[0]; ++ex) {
        if (ex < 0 || ex >= nc_) continue;
        if (!in_set[ex]) return false;
      }
      return true;
    }
    for (int ey = c[1] - 1; ey <= c[1]; ++ey)
      for (int ex = c[0] - 1; ex <= c[0]; ++ex) {
        if (ex < 0 || ex >= nc_ || ey < 0 || ey >= nc_) continue;
        if (!in_set[element_index(ex, ey)]) return false;
      }
    return true;
  }

  int d_;
  int nc_, ncH_, r_, np_;
  double h_, H_;
};

inline MeshHierarchy build_hierarchy(int d, double H, double h) {
  return MeshHierarchy(d, H, h);
}

/// Supports of the interior coarse nodal basis functions: omega_i is the
/// union of the (up to) 2^d coarse elements touching interior coarse node i,
/// expressed in fine elements.  Listed lexicographically over coarse nodes.
inline std::vector<ElementSet> coarse_supports(const MeshHierarchy& m) {
  std::vector<ElementSet> supports;
  int ncH = m.coarse_cells_per_axis();
  int r = m.refinement();
  if (m.dim() == 1) {
    for (int c = 1; c < ncH; ++c)
      supports.push_back(m.element_box((c - 1) * r, (c + 1) * r));
    return supports;
  }
  for (int cy = 1; cy < ncH; ++cy)
    for (int cx = 1; cx < ncH; ++cx)
      supports.push_back(m.element_box((cx - 1) * r, (cx + 1) * r,
                                       (cy - 1) * r, (cy + 1) * r));
  return supports;
}

/// N_l(omega): grow the set by l rings of closure-adjacent (vertex-adjacent)
/// elements, clipped at the domain boundary; N_0 is the set itself.
inline ElementSet extend_patch(const MeshHierarchy& m, const ElementSet& omega,
                               int ell) {
  require(ell >= 0, "extend_patch: ell must be nonnegative");
  require(!omega.empty(), "extend_patch: empty element set");
  if (ell == 0) return omega;
  std::vector<int> dist = m.element_distance(omega);
  ElementSet out;
  for (long e = 0; e < m.element_count(); ++e)
    if (dist[e] <= ell) out.elems.push_back(static_cast<int>(e));
  return out;
}

}  // namespace lsm
