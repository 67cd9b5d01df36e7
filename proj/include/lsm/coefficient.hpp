#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <vector>

#include "lsm/common.hpp"
#include "lsm/mesh.hpp"

namespace lsm {

/// Piecewise-constant scalar coefficient, one value per fine element,
/// bounded by 0 < alpha <= value <= beta.
class CoefficientField {
 public:
  CoefficientField(const MeshHierarchy& m, std::vector<double> values,
                   double alpha, double beta)
      : values_(std::move(values)), alpha_(alpha), beta_(beta) {
    require(alpha_ > 0.0 && alpha_ <= beta_,
            "coefficient: need 0 < alpha <= beta");
    require(static_cast<long>(values_.size()) == m.element_count(),
            "coefficient: one value per fine element required");
    for (double v : values_)
      require(v >= alpha_ && v <= beta_,
              "coefficient: value outside [alpha, beta]");
  }

  double operator[](int e) const { return values_[e]; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const std::vector<double>& values() const { return values_; }

  std::uint64_t fingerprint() const {
    Fnv1a f;
    f.add_span(values_);
    return f.value();
  }

  /// Flat CSV (element index, value), exact round-trip formatting.
  void write_csv(std::ostream& os) const {
    for (std::size_t e = 0; e < values_.size(); ++e) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e, values_[e]);
      os << buf;
    }
  }

  static CoefficientField read_csv(const MeshHierarchy& m, std::istream& is,
                                   double alpha, double beta) {
    std::vector<double> vals(m.element_count(), 0.0);
    std::size_t e;
    double v;
    char comma;
    while (is >> e >> comma >> v) {
      require(comma == ',' && e < vals.size(), "coefficient: malformed CSV");
      vals[e] = v;
    }
    return CoefficientField(m, std::move(vals), alpha, beta);
  }

 private:
  std::vector<double> values_;
  double alpha_, beta_;
};

inline CoefficientField constant_coefficient(const MeshHierarchy& m,
                                             double value) {
  return CoefficientField(
      m, std::vector<double>(m.element_count(), value), value, value);
}

/// Piecewise-constant random field on blocks of edge length eps_A: one draw
/// per block, in lexicographic block order (x fastest), value drawn as
/// alpha + (beta - alpha) * u with u in [0,1) from the seeded generator.
inline CoefficientField random_coefficient(const MeshHierarchy& m,
                                           std::uint64_t seed, double eps_A,
                                           double alpha, double beta) {
  require(alpha > 0.0 && alpha <= beta, "random_coefficient: need alpha <= beta");
  require(eps_A >= m.h(), "random_coefficient: eps_A must be >= h");
  double ratio = eps_A / m.h();
  int bs = static_cast<int>(std::llround(ratio));
  require(std::abs(bs - ratio) <= 1e-12 && bs >= 1 &&
              m.cells_per_axis() % bs == 0,
          "random_coefficient: eps_A must be an integer multiple of h that "
          "divides the domain");
  int nb = m.cells_per_axis() / bs;
  Pcg32 rng(seed);
  std::vector<double> vals(m.element_count(), alpha);
  if (m.dim() == 1) {
    for (int b = 0; b < nb; ++b) {
      double v = alpha + (beta - alpha) * rng.next_double();
      for (int e = b * bs; e < (b + 1) * bs; ++e) vals[e] = v;
    }
  } else {
    for (int by = 0; by < nb; ++by)
      for (int bx = 0; bx < nb; ++bx) {
        double v = alpha + (beta - alpha) * rng.next_double();
        for (int ey = by * bs; ey < (by + 1) * bs; ++ey)
          for (int ex = bx * bs; ex < (bx + 1) * bs; ++ex)
            vals[m.element_index(ex, ey)] = v;
      }
  }
  return CoefficientField(m, std::move(vals), alpha, beta);
}

}  // namespace lsm
