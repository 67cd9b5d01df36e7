#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "lsm/common.hpp"
#include "lsm/mesh.hpp"
#include "lsm/sparse.hpp"

namespace lsm {

/// Shortest round-trip double formatting, locale independent.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);  // binary: byte-stable newlines
  check(os.good(), "cannot open output file: " + path.string());
  return os;
}

/// Dof vector expanded to all fine nodes as (node index, value) rows.
inline void write_snapshot_csv(std::ostream& os, const std::string& echo,
                               const MeshHierarchy& m,
                               const std::vector<int>& node_of_dof,
                               const Vector& v) {
  os << "# " << echo << "\n";
  os << "node,value\n";
  std::vector<double> full(m.node_count(), 0.0);
  for (std::size_t d = 0; d < node_of_dof.size(); ++d)
    full[node_of_dof[d]] = v[d];
  for (long n = 0; n < m.node_count(); ++n)
    os << n << "," << fmt_double(full[n]) << "\n";
}

/// 8-bit PGM with logarithmic magnitude scaling; the scaling is recorded in
/// the comment line (floor clamps zeros and denormals).
inline void write_pgm_log(std::ostream& os, const Eigen::MatrixXd& magnitude,
                          double floor_value = 1e-16) {
  double vmax = magnitude.maxCoeff();
  double lo = std::log10(floor_value);
  double hi = std::log10(std::max(vmax, floor_value * 10));
  os << "P5\n# log10 scale: " << fmt_double(lo) << " (black) to "
     << fmt_double(hi) << " (white)\n"
     << magnitude.cols() << " " << magnitude.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < magnitude.rows(); ++i)
    for (Eigen::Index j = 0; j < magnitude.cols(); ++j) {
      double v = std::max(magnitude(i, j), floor_value);
      double s = (std::log10(v) - lo) / (hi - lo);
      int px = static_cast<int>(255.0 * std::clamp(s, 0.0, 1.0));
      os.put(static_cast<char>(px));
    }
}

inline std::string tuple_hash(const std::string& echo) {
  Fnv1a f;
  f.add_bytes(echo.data(), echo.size());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%012llx",
                static_cast<unsigned long long>(f.value() & 0xffffffffffffULL));
  return buf;
}

}  // namespace lsm
