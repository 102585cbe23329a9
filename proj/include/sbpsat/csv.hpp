#pragma once

#include <Eigen/Dense>

#include <cstdio>
#include <ostream>
#include <string>

namespace sbpsat {

/// Scientific notation with 17 significant digits (round-trips a double).
inline std::string format_sci(double value)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", value);
  return buf;
}

/// Dense matrix as row-major CSV, no header.
inline void write_dense_csv(std::ostream& os, const Eigen::MatrixXd& m)
{
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_sci(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace sbpsat
