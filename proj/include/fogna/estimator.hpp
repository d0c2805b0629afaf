#pragma once

// Sample fourth-order cumulants, redundancy-averaged co-array measurement,
// spatial-smoothing MUSIC and RMSE scoring.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "fogna/coarray.hpp"
#include "fogna/errors.hpp"
#include "fogna/signalsim.hpp"

namespace fogna {

/// Conjugation pattern per case: true marks a conjugated factor.
inline constexpr std::array<bool, 4> conjugation_pattern(FocCase c) {
  switch (c) {
    case FocCase::One: return {false, false, false, true};
    case FocCase::Two: return {false, true, false, true};
    case FocCase::Three: return {true, true, true, false};
  }
  return {false, false, false, false};
}

/// Per-case N^2 x N^2 cumulant matrices. Entry (l1 N + l2, l3 N + l4) holds
/// cum(y1, y2, y3, y4) with y_i = x_{l_i} or its conjugate per the case
/// pattern; reading the matrix row-major gives the flat quadruple index.
struct CumulantBank {
  std::size_t n = 0;
  std::int64_t k = 0;
  std::array<Eigen::MatrixXcd, 3> tensors;

  const Eigen::MatrixXcd& of(FocCase c) const { return tensors[static_cast<std::size_t>(c) - 1]; }

  cplx at(FocCase c, const std::array<std::uint16_t, 4>& idx) const {
    const auto nn = static_cast<Eigen::Index>(n);
    return of(c)(idx[0] * nn + idx[1], idx[2] * nn + idx[3]);
  }
  cplx at(const Generator& g) const { return at(g.foc_case, g.idx); }
};

/// Biased (1/K) sample cumulants for all three conjugation patterns.
inline CumulantBank sample_cumulants(const Eigen::MatrixXcd& x) {
  const Eigen::Index n = x.rows(), k = x.cols();
  if (k < 2) throw EstimationError("fourth-order cumulants need at least 2 snapshots");
  if (n < 1) throw EstimationError("snapshot matrix has no sensors");
  const double inv_k = 1.0 / static_cast<double>(k);

  const Eigen::MatrixXcd xc = x.conjugate();
  const Eigen::MatrixXcd q = x * x.transpose() * inv_k;  // E{x_a x_b}
  const Eigen::MatrixXcd r = x * x.adjoint() * inv_k;    // E{x_a x_b^*}
  const Eigen::MatrixXcd qc = q.conjugate();
  const Eigen::MatrixXcd rt = r.transpose();  // E{x_a^* x_b}
  auto second = [&](bool ca, bool cb) -> const Eigen::MatrixXcd& {
    if (!ca && !cb) return q;
    if (ca && cb) return qc;
    return ca ? rt : r;
  };
  auto pairs = [&](const Eigen::MatrixXcd& f, const Eigen::MatrixXcd& g) {
    Eigen::MatrixXcd p(n * n, k);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) p.row(a * n + b) = f.row(a).cwiseProduct(g.row(b));
    return p;
  };

  CumulantBank bank;
  bank.n = static_cast<std::size_t>(n);
  bank.k = k;
  for (FocCase c : kAllFocCases) {
    const auto cj = conjugation_pattern(c);
    const auto& f1 = cj[0] ? xc : x;
    const auto& f2 = cj[1] ? xc : x;
    const auto& f3 = cj[2] ? xc : x;
    const auto& f4 = cj[3] ? xc : x;
    Eigen::MatrixXcd m = pairs(f1, f2) * pairs(f3, f4).transpose() * inv_k;
    const auto& e13 = second(cj[0], cj[2]);
    const auto& e24 = second(cj[1], cj[3]);
    const auto& e14 = second(cj[0], cj[3]);
    const auto& e23 = second(cj[1], cj[2]);
    const auto& e12 = second(cj[0], cj[1]);
    const auto& e34 = second(cj[2], cj[3]);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index c3 = 0; c3 < n; ++c3)
          for (Eigen::Index d = 0; d < n; ++d)
            m(a * n + b, c3 * n + d) -=
                e13(a, c3) * e24(b, d) + e14(a, d) * e23(b, c3) + e12(a, b) * e34(c3, d);
    bank.tensors[static_cast<std::size_t>(c) - 1] = std::move(m);
  }
  return bank;
}

inline CumulantBank sample_cumulants(const SnapshotMatrix& x) { return sample_cumulants(x.data); }

/// Largest |case3 - conj(case1)| entry; zero up to rounding for any data.
inline double conjugacy_defect(const CumulantBank& b) {
  return (b.of(FocCase::Three) - b.of(FocCase::One).conjugate()).cwiseAbs().maxCoeff();
}

struct FoecaMeasurement {
  Lag half_span = 0;                 // Lc; lags run over [-Lc, Lc]
  std::vector<cplx> values;          // index m + Lc
  std::vector<std::uint64_t> counts; // contributors per lag

  cplx value(Lag m) const { return values[static_cast<std::size_t>(m + half_span)]; }
  std::uint64_t count(Lag m) const { return counts[static_cast<std::size_t>(m + half_span)]; }
};

/// Averages every cumulant entry whose virtual position equals m, for each m
/// in the central consecutive segment of `coarray`, then symmetrises
/// v(m) <- (v(m) + conj(v(-m))) / 2. `coarray` must carry generators; pass
/// the FOECA for the full measurement or a single FOCA for one case only.
inline FoecaMeasurement assemble_foeca(const CumulantBank& bank, const LagMultiset& coarray) {
  if (!coarray.has_generators()) throw PreconditionError("co-array was built without generators");
  const auto seg = analyze_segment(coarray);
  const auto& gens = coarray.generators();
  FoecaMeasurement out;
  out.half_span = seg.half_span;
  const auto len = static_cast<std::size_t>(2 * seg.half_span + 1);
  std::vector<cplx> raw(len);
  out.counts.assign(len, 0);
  for (Lag m = -seg.half_span; m <= seg.half_span; ++m) {
    auto it = gens.find(m);
    if (it == gens.end() || it->second.empty())
      throw InvariantViolation("lag " + std::to_string(m) + " inside the consecutive segment has no contributors");
    cplx acc = 0.0;
    for (const auto& g : it->second) {
      if (g.idx[0] >= bank.n || g.idx[1] >= bank.n || g.idx[2] >= bank.n || g.idx[3] >= bank.n)
        throw PreconditionError("co-array and cumulant bank refer to different arrays");
      acc += bank.at(g);
    }
    const auto i = static_cast<std::size_t>(m + seg.half_span);
    raw[i] = acc / static_cast<double>(it->second.size());
    out.counts[i] = it->second.size();
  }
  out.values.resize(len);
  for (std::size_t i = 0; i < len; ++i) out.values[i] = 0.5 * (raw[i] + std::conj(raw[len - 1 - i]));
  return out;
}

inline FoecaMeasurement assemble_foeca(const CumulantBank& bank, const SensorArray& s) {
  if (s.size() != bank.n) throw PreconditionError("array size does not match the cumulant bank");
  return assemble_foeca(bank, foeca(s, true));
}

// ---------------------------------------------------------------------------
// SS-MUSIC

struct DoaEstimate {
  std::vector<double> angles_deg;  // sorted ascending
  std::vector<double> grid_deg;
  std::vector<double> spectrum;    // pseudo-spectrum on grid_deg (linear)
  bool degenerate = false;         // smoothed covariance rank below D
  bool incomplete = false;         // fewer than D local maxima found
};

inline std::vector<double> angle_grid(double step) {
  if (!(step > 0.0) || step >= 90.0) throw ParameterError("grid step must be in (0, 90) degrees");
  std::vector<double> g;
  for (long i = 1;; ++i) {
    const double a = -90.0 + static_cast<double>(i) * step;
    if (a >= 90.0 - 1e-12) break;
    g.push_back(a);
  }
  return g;
}

/// Smoothed covariance of the virtual ULA over [-Lc, Lc]: Lc+1 subvectors of
/// length Lc+1, averaged outer products.
inline Eigen::MatrixXcd smoothed_covariance(const FoecaMeasurement& meas) {
  const auto l = static_cast<Eigen::Index>(meas.half_span + 1);
  Eigen::Map<const Eigen::VectorXcd> v(meas.values.data(), static_cast<Eigen::Index>(meas.values.size()));
  Eigen::MatrixXcd z(l, l);  // column j is subvector j
  for (Eigen::Index j = 0; j < l; ++j) z.col(j) = v.segment(j, l);
  return z * z.adjoint() / static_cast<double>(l);
}

inline DoaEstimate ss_music(const FoecaMeasurement& meas, int d, double grid_step_deg = 0.05) {
  if (d < 1) throw ParameterError("source count must be at least 1");
  if (d > meas.half_span)
    throw PreconditionError("over capacity: " + std::to_string(d) + " sources but only " +
                            std::to_string(meas.half_span) + " resolvable");
  const Eigen::MatrixXcd rs = smoothed_covariance(meas);
  const Eigen::Index l = rs.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rs);
  if (eig.info() != Eigen::Success) throw EstimationError("eigendecomposition failed");

  DoaEstimate est;
  const auto& w = eig.eigenvalues();  // ascending
  const double tol = std::max(w.cwiseAbs().maxCoeff(), 1e-300) * 1e-10;
  est.degenerate = (w.array() > tol).count() < d;
  const Eigen::MatrixXcd es = eig.eigenvectors().rightCols(d);

  est.grid_deg = angle_grid(grid_step_deg);
  const auto g = static_cast<Eigen::Index>(est.grid_deg.size());
  Eigen::MatrixXcd a(l, g);
  for (Eigen::Index j = 0; j < g; ++j) {
    const double u = std::numbers::pi * std::sin(est.grid_deg[static_cast<std::size_t>(j)] * std::numbers::pi / 180.0);
    for (Eigen::Index i = 0; i < l; ++i) a(i, j) = std::polar(1.0, u * static_cast<double>(i));
  }
  const Eigen::RowVectorXd proj = (es.adjoint() * a).cwiseAbs2().colwise().sum();
  est.spectrum.resize(static_cast<std::size_t>(g));
  for (Eigen::Index j = 0; j < g; ++j)
    est.spectrum[static_cast<std::size_t>(j)] = 1.0 / std::max(static_cast<double>(l) - proj(j), 1e-12);

  const auto& p = est.spectrum;
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    if (p[i] > p[i - 1] && p[i] >= p[i + 1]) peaks.push_back(i);
  std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t x, std::size_t y) { return p[x] > p[y]; });
  if (peaks.size() > static_cast<std::size_t>(d)) peaks.resize(static_cast<std::size_t>(d));
  est.incomplete = peaks.size() < static_cast<std::size_t>(d);

  // three-point parabola through the dB values around each grid maximum
  for (std::size_t i : peaks) {
    const double lo = std::log(p[i - 1]), mid = std::log(p[i]), hi = std::log(p[i + 1]);
    const double den = lo - 2 * mid + hi;
    double off = den != 0.0 ? 0.5 * (lo - hi) / den : 0.0;
    off = std::clamp(off, -0.5, 0.5);
    est.angles_deg.push_back(est.grid_deg[i] + off * grid_step_deg);
  }
  std::sort(est.angles_deg.begin(), est.angles_deg.end());
  return est;
}

// ---------------------------------------------------------------------------
// Scoring

/// Greedy nearest-angle assignment: repeatedly pairs the closest unmatched
/// (estimate, truth). Returns |error| per truth, in the truth order. Truths
/// left without an estimate take the distance to the nearest estimate of any
/// kind (90 degrees when there are none at all).
inline std::vector<double> match_errors(const std::vector<double>& estimates, const std::vector<double>& truths) {
  std::vector<double> err(truths.size(), -1.0);
  std::vector<bool> used(estimates.size(), false);
  for (std::size_t round = 0; round < std::min(estimates.size(), truths.size()); ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t j = 0; j < truths.size(); ++j) {
      if (err[j] >= 0) continue;
      for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (used[i]) continue;
        const double e = std::abs(estimates[i] - truths[j]);
        if (e < best) {
          best = e;
          bi = i;
          bj = j;
        }
      }
    }
    used[bi] = true;
    err[bj] = best;
  }
  for (std::size_t j = 0; j < truths.size(); ++j) {
    if (err[j] >= 0) continue;
    double best = 90.0;
    for (double e : estimates) best = std::min(best, std::abs(e - truths[j]));
    err[j] = best;
  }
  return err;
}

/// sqrt(sum of squared errors / (T D)) over per-trial error lists.
inline double rmse(const std::vector<std::vector<double>>& trial_errors) {
  if (trial_errors.empty()) throw EstimationError("rmse needs at least one trial");
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& t : trial_errors) {
    for (double e : t) acc += e * e;
    count += t.size();
  }
  if (count == 0) throw EstimationError("rmse needs at least one source");
  return std::sqrt(acc / static_cast<double>(count));
}

inline double rmse(const std::vector<double>& estimates, const std::vector<double>& truths) {
  return rmse(std::vector<std::vector<double>>{match_errors(estimates, truths)});
}

}  // namespace fogna
