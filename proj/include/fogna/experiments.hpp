#pragma once

// Monte-Carlo drivers: one trial = simulate -> cumulants -> co-array
// measurement -> SS-MUSIC -> match. Trials run on a bounded worker pool and
// results are stored by trial index, so output never depends on --jobs.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fogna/coarray.hpp"
#include "fogna/coupling.hpp"
#include "fogna/estimator.hpp"
#include "fogna/signalsim.hpp"

namespace fogna {

/// splitmix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of trial t under a base seed. Independent of SNR and K, so sweeps
/// reuse the same source/noise streams at every point.
constexpr std::uint64_t trial_seed(std::uint64_t base, std::uint64_t t) { return mix64(mix64(base) ^ t); }

/// Evenly spaced angles over [lo, hi] (inclusive).
inline std::vector<double> uniform_angles(int d, double lo, double hi) {
  if (d < 1) throw ParameterError("source count must be at least 1");
  std::vector<double> out;
  for (int i = 0; i < d; ++i) out.push_back(d == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (d - 1));
  return out;
}

/// Which fourth-order co-array feeds the estimator.
enum class MeasurementMode { Foeca, Fodca };

/// Array-level data shared by every trial.
struct Pipeline {
  SensorArray array;
  LagMultiset coarray;  // with generators
  SegmentReport segment;
  std::optional<CouplingModel> coupling;
  double grid_step = 0.05;

  static Pipeline make(const SensorArray& s, MeasurementMode mode = MeasurementMode::Foeca,
                       std::optional<CouplingModel> coupling = std::nullopt, double grid_step = 0.05) {
    Pipeline p;
    p.array = s;
    p.coarray = mode == MeasurementMode::Foeca ? foeca(s, true) : foca(s, FocCase::Two, true);
    p.segment = analyze_segment(p.coarray);
    p.coupling = coupling;
    p.grid_step = grid_step;
    return p;
  }
};

struct TrialSpec {
  std::vector<double> angles_deg;
  double snr_db = 0.0;
  std::int64_t snapshots = 10000;
  std::uint64_t seed = 0;
};

struct TrialResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  std::int64_t snapshots = 0;
  std::vector<double> truths;
  std::vector<double> estimates;
  std::vector<double> errors;  // per truth, after matching
  double rmse = 0.0;
  bool degenerate = false;
  bool incomplete = false;
  std::string failure;  // non-empty when the trial threw
};

inline TrialResult run_trial(const Pipeline& p, const TrialSpec& spec) {
  TrialResult r;
  r.seed = spec.seed;
  r.snr_db = spec.snr_db;
  r.snapshots = spec.snapshots;
  r.truths = spec.angles_deg;
  SourceScene scene;
  scene.angles_deg = spec.angles_deg;
  scene.seed = spec.seed;
  const auto x = simulate(p.array, scene, spec.snr_db, spec.snapshots, p.coupling);
  const auto meas = assemble_foeca(sample_cumulants(x), p.coarray);
  const auto est = ss_music(meas, static_cast<int>(spec.angles_deg.size()), p.grid_step);
  r.estimates = est.angles_deg;
  r.degenerate = est.degenerate;
  r.incomplete = est.incomplete;
  r.errors = match_errors(r.estimates, r.truths);
  r.rmse = rmse({r.errors});
  return r;
}

/// Runs every spec on up to `jobs` threads; result i belongs to spec i.
/// Exceptions inside a trial are recorded in TrialResult::failure.
inline std::vector<TrialResult> run_trials(const Pipeline& p, const std::vector<TrialSpec>& specs, int jobs = 1) {
  std::vector<TrialResult> out(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) {
      try {
        out[i] = run_trial(p, specs[i]);
      } catch (const std::exception& e) {
        out[i] = TrialResult{};
        out[i].seed = specs[i].seed;
        out[i].snr_db = specs[i].snr_db;
        out[i].snapshots = specs[i].snapshots;
        out[i].truths = specs[i].angles_deg;
        out[i].failure = e.what();
      }
      out[i].index = i;
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(specs.size(), 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

inline nlohmann::json to_json(const TrialResult& r) {
  nlohmann::json j{{"trial", r.index},   {"seed", r.seed},         {"snr_db", r.snr_db},
                   {"snapshots", r.snapshots}, {"truths", r.truths}, {"estimates", r.estimates},
                   {"errors", r.errors}, {"rmse", r.rmse},         {"degenerate", r.degenerate},
                   {"incomplete", r.incomplete}};
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

// ---------------------------------------------------------------------------
// Resolution

/// Success: exactly D estimates, each truth matched within `tol` degrees.
inline bool resolved(const TrialResult& r, double tol) {
  if (!r.failure.empty() || r.incomplete || r.estimates.size() != r.truths.size()) return false;
  return std::all_of(r.errors.begin(), r.errors.end(), [tol](double e) { return e <= tol; });
}

struct ResolveSummary {
  std::vector<TrialResult> trials;
  std::size_t successes = 0;
  double success_rate() const { return trials.empty() ? 0.0 : static_cast<double>(successes) / trials.size(); }
};

inline ResolveSummary run_resolve(const Pipeline& p, const std::vector<double>& angles, double snr_db,
                                  std::int64_t k, int trials, std::uint64_t base_seed, double tol, int jobs = 1) {
  if (trials < 1) throw ParameterError("trial count must be at least 1");
  std::vector<TrialSpec> specs;
  for (int t = 0; t < trials; ++t) specs.push_back({angles, snr_db, k, trial_seed(base_seed, static_cast<std::uint64_t>(t))});
  ResolveSummary s;
  s.trials = run_trials(p, specs, jobs);
  for (const auto& r : s.trials) s.successes += resolved(r, tol) ? 1 : 0;
  return s;
}

// ---------------------------------------------------------------------------
// RMSE sweep

struct SweepPoint {
  double snr_db = 0.0;
  std::int64_t snapshots = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;  // trials that threw
  double median_rmse = 0.0;
  double mean_rmse = 0.0;
  double pooled_rmse = 0.0;  // over all trials and sources
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw EstimationError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline SweepPoint summarize(const std::vector<TrialResult>& trials, double snr_db, std::int64_t k) {
  SweepPoint pt;
  pt.snr_db = snr_db;
  pt.snapshots = k;
  pt.trials = trials.size();
  std::vector<double> per;
  std::vector<std::vector<double>> errs;
  for (const auto& r : trials) {
    if (!r.failure.empty()) {
      ++pt.failures;
      continue;
    }
    per.push_back(r.rmse);
    errs.push_back(r.errors);
  }
  if (per.empty()) throw EstimationError("every trial failed at this sweep point");
  pt.median_rmse = median(per);
  double s = 0;
  for (double v : per) s += v;
  pt.mean_rmse = s / static_cast<double>(per.size());
  pt.pooled_rmse = rmse(errs);
  return pt;
}

/// Sweeps (snr, K) pairs with the same trial seeds at every point.
inline std::vector<SweepPoint> run_rmse_sweep(const Pipeline& p, const std::vector<double>& angles,
                                              const std::vector<std::pair<double, std::int64_t>>& points,
                                              int trials, std::uint64_t base_seed, int jobs = 1,
                                              std::vector<TrialResult>* log = nullptr) {
  if (trials < 1) throw ParameterError("trial count must be at least 1");
  std::vector<SweepPoint> out;
  for (const auto& [snr, k] : points) {
    std::vector<TrialSpec> specs;
    for (int t = 0; t < trials; ++t) specs.push_back({angles, snr, k, trial_seed(base_seed, static_cast<std::uint64_t>(t))});
    auto res = run_trials(p, specs, jobs);
    out.push_back(summarize(res, snr, k));
    if (log) log->insert(log->end(), res.begin(), res.end());
  }
  return out;
}

}  // namespace fogna
