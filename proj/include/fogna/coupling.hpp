#pragma once

// Banded Toeplitz mutual coupling over physical sensor separations.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "fogna/errors.hpp"
#include "fogna/geometry.hpp"

namespace fogna {

using cplx = std::complex<double>;

struct CouplingModel {
  cplx c1 = std::polar(0.3, std::numbers::pi / 3);
  int band = 100;  // B: separations beyond this do not couple

  /// c_l for l >= 0. c_0 = 1, c_l = c1 e^{-j(l-1)pi/8} / l for 2 <= l <= B.
  cplx coefficient(std::int64_t l) const {
    if (l < 0) l = -l;
    if (l == 0) return 1.0;
    if (l > band) return 0.0;
    if (l == 1) return c1;
    return c1 * std::polar(1.0, -static_cast<double>(l - 1) * std::numbers::pi / 8) / static_cast<double>(l);
  }

  void validate() const {
    if (band < 0) throw ParameterError("coupling band must be non-negative");
    if (!(std::abs(c1) < 1.0)) throw ParameterError("|c1| must be below 1");
  }
};

inline Eigen::MatrixXcd coupling_matrix(const SensorArray& s, const CouplingModel& m = {}) {
  m.validate();
  const auto n = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXcd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      c(i, j) = m.coefficient(s[static_cast<std::size_t>(i)] - s[static_cast<std::size_t>(j)]);
  return c;
}

/// ||C - diag(C)||_F / ||C||_F.
inline double coupling_leakage(const Eigen::MatrixXcd& c) {
  if (c.rows() != c.cols()) throw ParameterError("coupling matrix must be square");
  const double total = c.norm();
  if (total == 0.0) throw PreconditionError("leakage undefined for a zero matrix");
  const double diag = c.diagonal().norm();
  return std::sqrt(std::max(0.0, total * total - diag * diag)) / total;
}

inline double coupling_leakage(const SensorArray& s, const CouplingModel& m = {}) {
  return coupling_leakage(coupling_matrix(s, m));
}

struct PublishedLeakage {
  int sensors;
  std::vector<int> split;
  double leakage;
};

/// FOGNA rows of the mutual coupling leakage table as printed.
inline const std::vector<PublishedLeakage>& published_fogna_leakage() {
  static const std::vector<PublishedLeakage> rows = {
      {9, {4, 2, 3}, 0.2347},   {10, {4, 3, 3}, 0.2236}, {11, {5, 3, 3}, 0.2137},
      {19, {9, 5, 5}, 0.2018},  {21, {9, 6, 6}, 0.2139}, {23, {12, 5, 6}, 0.2077},
  };
  return rows;
}

}  // namespace fogna
