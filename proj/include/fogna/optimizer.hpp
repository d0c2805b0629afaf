#pragma once

// Sensor allocation search over the three FOGNA subarrays.

#include <cstdint>
#include <ostream>
#include <vector>

#include "fogna/errors.hpp"
#include "fogna/geometry.hpp"

namespace fogna {

/// DOF expression scored by the allocation search: 2(2N3+1)(2E1+N2(2E1+1))+1.
inline std::int64_t allocation_dof(const FognaParams& p) {
  return 2 * (2 * std::int64_t{p.n3} + 1) * (2 * p.e1 + p.n2 * (2 * p.e1 + 1)) + 1;
}

/// E1 as a function of N1 alone.
inline std::int64_t cna_aperture(int n1) {
  const std::int64_t m1 = round_nearest_div(n1 - 1, 4);
  return -2 * m1 * m1 + (n1 - 1) * m1 + (n1 - 1);
}

/// f(N3) with N2 eliminated through N2 = N - N1 - N3. Defined for any integer
/// N3 (including infeasible ones, which is what the stationary-point argument
/// needs).
inline std::int64_t dof_quadratic(int n, int n1, int n3) {
  const std::int64_t e1 = cna_aperture(n1);
  const std::int64_t w = 2 * e1 + 1, r = n - n1, x = n3;
  return 2 * (-2 * x * x * w + (4 * e1 + 2 * r * w - w) * x + 2 * e1 + r * w) + 1;
}

/// Optimal subarray-2/3 sizes for a given N1.
inline std::pair<int, int> tail_sizes(int n, int n1) {
  const int r = 2 * (n - n1);
  const int n2 = (r - 1 + 3) / 4;  // ceil((r-1)/4); r >= 4 here so r-1 > 0
  const int n3 = (r + 1) / 4;
  return {n2, n3};
}

struct TraceRow {
  FognaParams params;
  std::int64_t dof = 0;
};

struct OptimizerResult {
  FognaParams best;
  std::int64_t dof_star = 0;
  std::vector<TraceRow> trace;
  bool n1_lower_bound_binding = false;  // optimum sits at N1 = 2
};

/// Scans N1 = 2..N-2, sizes subarrays 2 and 3 in closed form and keeps the split
/// with the largest DOF (first one wins on ties).
inline OptimizerResult optimize(int n) {
  if (n < 4) throw ParameterError("optimize needs N >= 4, got " + std::to_string(n));
  OptimizerResult res;
  for (int n1 = 2; n1 <= n - 2; ++n1) {
    const auto [n2, n3] = tail_sizes(n, n1);
    if (n2 < 1 || n3 < 1 || n1 + n2 + n3 != n) continue;
    TraceRow row{FognaParams::from_split(n1, n2, n3), 0};
    row.dof = allocation_dof(row.params);
    if (res.trace.empty() || row.dof > res.dof_star) {
      res.dof_star = row.dof;
      res.best = row.params;
    }
    res.trace.push_back(row);
  }
  if (res.trace.empty()) throw InvariantViolation("no feasible split for N=" + std::to_string(n));
  res.n1_lower_bound_binding = res.best.n1 == 2;
  return res;
}

/// Best DOF over every feasible (N1, N2, N3) with N1+N2+N3 = N. Diagnostic only.
inline TraceRow exhaustive_optimum(int n) {
  if (n < 4) throw ParameterError("exhaustive_optimum needs N >= 4");
  TraceRow best;
  bool have = false;
  for (int n1 = 2; n1 <= n - 2; ++n1)
    for (int n3 = 1; n1 + n3 <= n - 1; ++n3) {
      const auto p = FognaParams::from_split(n1, n - n1 - n3, n3);
      const auto d = allocation_dof(p);
      if (!have || d > best.dof) {
        best = {p, d};
        have = true;
      }
    }
  return best;
}

/// dof_star / (N^4 / 2).
inline double dof_growth_ratio(int n) {
  if (n < 8 || n % 4 != 0) throw ParameterError("dof_growth_ratio needs N >= 8 and N divisible by 4");
  const double bound = 0.5 * static_cast<double>(n) * n * n * n;
  return static_cast<double>(optimize(n).dof_star) / bound;
}

inline void write_trace_csv(std::ostream& os, const OptimizerResult& r) {
  os << "N1,N2,N3,M1,M2,E1,E2,DOF\n";
  for (const auto& row : r.trace) {
    const auto& p = row.params;
    os << p.n1 << ',' << p.n2 << ',' << p.n3 << ',' << p.m1 << ',' << p.m2 << ',' << p.e1 << ',' << p.e2 << ','
       << row.dof << '\n';
  }
}

}  // namespace fogna
