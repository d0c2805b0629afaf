#pragma once

// Far-field narrowband snapshot generation: X = (C) A S + noise.
//
// RNG contract: one std::mt19937_64 seeded with the scene seed. For each
// snapshot t = 0..K-1 the D source samples are drawn first (source order),
// then the N noise samples (sensor order, real part then imaginary part).
// Noise samples are drawn at unit scale and multiplied by the SNR-dependent
// standard deviation, so the streams are identical at every SNR (including
// the noiseless case), and the first K' columns of a K-snapshot run equal a K'-snapshot run.

#include <cmath>
#include <complex>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fogna/coupling.hpp"
#include "fogna/errors.hpp"
#include "fogna/geometry.hpp"

namespace fogna {

using Rng = std::mt19937_64;

enum class SourceKind { BpskReal, CustomIid };

struct SourceScene {
  std::vector<double> angles_deg;
  SourceKind kind = SourceKind::BpskReal;
  double power = 1.0;
  std::uint64_t seed = 0;
  // Used only for CustomIid; must return one zero-mean sample per call.
  std::function<cplx(Rng&)> sampler;

  void validate() const {
    if (angles_deg.empty()) throw ParameterError("scene needs at least one source");
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
      const double a = angles_deg[i];
      if (!(std::abs(a) < 90.0)) throw ParameterError("source angle must lie in (-90, 90) degrees");
      for (std::size_t j = 0; j < i; ++j)
        if (angles_deg[j] == a) throw ParameterError("source angles must be distinct");
    }
    if (!(power > 0.0)) throw ParameterError("source power must be positive");
    if (kind == SourceKind::CustomIid && !sampler) throw ParameterError("custom source kind needs a sampler");
  }
};

/// Circular complex Gaussian samples of the given variance (a source with zero
/// fourth-order cumulants).
inline std::function<cplx(Rng&)> gaussian_sampler(double power) {
  return [sd = std::sqrt(power / 2)](Rng& rng) {
    std::normal_distribution<double> g(0.0, sd);
    const double re = g(rng);
    return cplx(re, g(rng));
  };
}

struct SnapshotMatrix {
  Eigen::MatrixXcd data;  // N x K, rows in array order
  SensorArray array;
  double snr_db = std::numeric_limits<double>::infinity();
  bool coupled = false;

  Eigen::Index sensors() const { return data.rows(); }
  Eigen::Index snapshots() const { return data.cols(); }
};

/// Element n = exp(j pi p_n sin(theta)) for half-wavelength unit spacing.
inline Eigen::VectorXcd steering_vector(const SensorArray& s, double theta_deg) {
  if (!(std::abs(theta_deg) < 90.0)) throw ParameterError("steering angle must lie in (-90, 90) degrees");
  const double u = std::numbers::pi * std::sin(theta_deg * std::numbers::pi / 180.0);
  Eigen::VectorXcd a(static_cast<Eigen::Index>(s.size()));
  for (std::size_t n = 0; n < s.size(); ++n)
    a(static_cast<Eigen::Index>(n)) = std::polar(1.0, u * static_cast<double>(s[n]));
  return a;
}

inline Eigen::MatrixXcd steering_matrix(const SensorArray& s, const std::vector<double>& angles_deg) {
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(angles_deg.size()));
  for (std::size_t d = 0; d < angles_deg.size(); ++d) a.col(static_cast<Eigen::Index>(d)) = steering_vector(s, angles_deg[d]);
  return a;
}

/// Noise variance per sensor for a per-source power and SNR in dB.
inline double noise_variance(double power, double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return power / std::pow(10.0, snr_db / 10.0);
}

/// Pass snr_db = +infinity for a noiseless run.
inline SnapshotMatrix simulate(const SensorArray& s, const SourceScene& scene, double snr_db, std::int64_t k,
                               const std::optional<CouplingModel>& coupling = std::nullopt) {
  scene.validate();
  if (k < 1) throw ParameterError("snapshot count must be at least 1");
  if (std::isnan(snr_db)) throw ParameterError("SNR must be a number");

  const auto n = static_cast<Eigen::Index>(s.size());
  const auto d = static_cast<Eigen::Index>(scene.angles_deg.size());
  Eigen::MatrixXcd a = steering_matrix(s, scene.angles_deg);
  if (coupling) a = coupling_matrix(s, *coupling) * a;

  const double sd = std::sqrt(noise_variance(scene.power, snr_db) / 2);
  const double amp = std::sqrt(scene.power);

  Rng rng(scene.seed);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> gauss;  // standard; scaled per SNR below

  Eigen::MatrixXcd src(d, k);
  Eigen::MatrixXcd noise = Eigen::MatrixXcd::Zero(n, k);
  for (std::int64_t t = 0; t < k; ++t) {
    for (Eigen::Index i = 0; i < d; ++i)
      src(i, t) = scene.kind == SourceKind::BpskReal ? cplx(coin(rng) ? amp : -amp, 0.0) : scene.sampler(rng);
    // drawn even when noiseless so the stream is the same at every SNR
    for (Eigen::Index i = 0; i < n; ++i) {
      const double re = gauss(rng);
      noise(i, t) = sd * cplx(re, gauss(rng));
    }
  }

  SnapshotMatrix out;
  out.data = a * src + noise;
  out.array = s;
  out.snr_db = snr_db;
  out.coupled = coupling.has_value();
  return out;
}

// ---------------------------------------------------------------------------
// CSV dump: first line "N,K"; then N lines, each holding K "re,im" pairs
// separated by commas (row-major, 2K numbers per line).

inline void write_snapshots_csv(std::ostream& os, const SnapshotMatrix& x) {
  os.precision(std::numeric_limits<double>::max_digits10);
  os << x.sensors() << ',' << x.snapshots() << '\n';
  for (Eigen::Index i = 0; i < x.sensors(); ++i) {
    for (Eigen::Index t = 0; t < x.snapshots(); ++t) {
      if (t) os << ',';
      os << x.data(i, t).real() << ',' << x.data(i, t).imag();
    }
    os << '\n';
  }
}

inline Eigen::MatrixXcd read_snapshots_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParameterError("snapshot CSV: missing header");
  long long n = 0, k = 0;
  char comma = 0;
  std::istringstream hs(line);
  if (!(hs >> n >> comma >> k) || comma != ',' || n < 1 || k < 1)
    throw ParameterError("snapshot CSV line 1: expected 'N,K'");
  Eigen::MatrixXcd x(n, k);
  for (long long i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw ParameterError("snapshot CSV: missing row " + std::to_string(i + 2));
    std::istringstream rs(line);
    for (long long t = 0; t < k; ++t) {
      double re = 0, im = 0;
      if (t && !(rs >> comma)) throw ParameterError("snapshot CSV line " + std::to_string(i + 2) + ": short row");
      if (!(rs >> re >> comma >> im)) throw ParameterError("snapshot CSV line " + std::to_string(i + 2) + ": bad value");
      x(i, t) = cplx(re, im);
    }
  }
  return x;
}

}  // namespace fogna
