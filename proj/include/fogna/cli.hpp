#pragma once

// Subcommand bodies. Each takes a resolved Config plus an output context and
// returns a process exit code: 0 success, 1 some requested rows failed,
// 2 usage/config error (thrown as ConfigError/ParameterError and mapped by
// the caller).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fogna/coarray.hpp"
#include "fogna/config.hpp"
#include "fogna/coupling.hpp"
#include "fogna/experiments.hpp"
#include "fogna/geometry.hpp"
#include "fogna/optimizer.hpp"

namespace fogna::cli {

inline constexpr const char* kOutDirEnv = "FOGNA_OUT_DIR";

struct Context {
  std::filesystem::path out_dir;
  int jobs = 1;
  std::ostream* out = &std::cout;
};

/// --out wins, then $FOGNA_OUT_DIR, then ./out.
inline std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "out";
}

inline std::ofstream open_output(const Context& ctx, const std::string& name) {
  std::filesystem::create_directories(ctx.out_dir);
  const auto path = ctx.out_dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

inline std::string join(const auto& v, const char* sep = " ") {
  std::ostringstream os;
  bool first = true;
  for (const auto& x : v) {
    if (!first) os << sep;
    os << x;
    first = false;
  }
  return os.str();
}

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

inline int to_int(std::int64_t v, const Config& cfg, const std::string& key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(cfg.entry(key).origin + ": '" + key + "' out of range");
  return static_cast<int>(v);
}

// ---------------------------------------------------------------------------
// Array selection shared by coarray/resolve/rmse:
//   positions = 0,1,5,8 | split = n1,n2,n3 | N = 9 (optimised FOGNA)
//   | cna = m1,m2 | ula = n | nested = n1,n2

inline const std::set<std::string> kArrayKeys = {"positions", "split", "N", "cna", "ula", "nested"};

inline SensorArray array_from_config(const Config& cfg) {
  int given = 0;
  for (const auto& k : kArrayKeys) given += cfg.has(k) ? 1 : 0;
  if (given != 1) throw ConfigError("exactly one of positions/split/N/cna/ula/nested must be given");
  auto ints = [&](const std::string& key, std::size_t arity) {
    auto v = cfg.get_ints(key);
    if (arity && v.size() != arity)
      throw ConfigError(cfg.entry(key).origin + ": '" + key + "' needs " + std::to_string(arity) + " values");
    std::vector<int> out;
    for (auto x : v) out.push_back(to_int(x, cfg, key));
    return out;
  };
  if (cfg.has("positions")) {
    const auto v = cfg.get_ints("positions");
    const std::set<std::int64_t> distinct(v.begin(), v.end());
    if (distinct.size() != v.size()) throw ConfigError(cfg.entry("positions").origin + ": duplicate positions");
    return SensorArray::normalized(std::vector<Position>(v.begin(), v.end()), "custom");
  }
  if (cfg.has("split")) {
    const auto s = ints("split", 3);
    return build_fogna(s[0], s[1], s[2]);
  }
  if (cfg.has("N")) return build_fogna(optimize(to_int(cfg.get_int("N"), cfg, "N")).best);
  if (cfg.has("cna")) {
    const auto s = ints("cna", 2);
    return build_cna(s[0], s[1]);
  }
  if (cfg.has("ula")) return build_ula(to_int(cfg.get_int("ula"), cfg, "ula"));
  const auto s = ints("nested", 2);
  return build_nested(s[0], s[1]);
}

inline std::optional<CouplingModel> coupling_from_config(const Config& cfg) {
  if (!cfg.get_bool("coupling", false)) return std::nullopt;
  CouplingModel m;
  if (cfg.has("coupling_band")) m.band = to_int(cfg.get_int("coupling_band"), cfg, "coupling_band");
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------

inline int cmd_design(const Config& cfg, const Context& ctx) {
  cfg.check_known({"N"});
  const int n = to_int(cfg.get_int("N"), cfg, "N");
  const auto res = optimize(n);
  const auto arr = build_fogna(res.best);
  auto& o = *ctx.out;
  const auto& b = res.best;
  o << "N = " << n << "\n";
  o << "split (N1,N2,N3) = (" << b.n1 << "," << b.n2 << "," << b.n3 << ")\n";
  o << "CNA (M1,M2) = (" << b.m1 << "," << b.m2 << "), E1 = " << b.e1 << ", E2 = " << b.e2 << "\n";
  o << "DOF = " << res.dof_star << "\n";
  o << "aperture = " << arr.aperture() << "\n";
  o << "positions = {" << join(arr.positions(), ",") << "}\n";
  if (res.n1_lower_bound_binding) o << "note: optimum at N1 = 2, the lower end of the search range\n";
  const std::string name = "design_N" + std::to_string(n) + "_trace.csv";
  auto f = open_output(ctx, name);
  write_trace_csv(f, res);
  o << "trace -> " << (ctx.out_dir / name).string() << "\n";
  return 0;
}

inline CoarrayKind parse_kind(const std::string& s) {
  static const std::map<std::string, CoarrayKind> m = {
      {"sca", CoarrayKind::Sca},     {"dca", CoarrayKind::Dca},     {"foca1", CoarrayKind::Foca1},
      {"foca2", CoarrayKind::Foca2}, {"foca3", CoarrayKind::Foca3}, {"foeca", CoarrayKind::Foeca}};
  auto it = m.find(s);
  if (it == m.end()) throw ConfigError("unknown co-array kind '" + s + "' (sca, dca, foca1, foca2, foca3, foeca, all)");
  return it->second;
}

/// JSON document with positions and one report per requested co-array.
inline nlohmann::json coarray_report(const SensorArray& arr, const std::vector<CoarrayKind>& kinds, bool entries) {
  nlohmann::json doc;
  doc["positions"] = std::vector<Position>(arr.positions().begin(), arr.positions().end());
  doc["sensors"] = arr.size();
  if (const auto& sp = arr.split()) doc["split"] = {sp->n1, sp->n2, sp->n3};
  for (auto k : kinds) {
    const auto l = build_coarray(arr, k);
    auto j = to_json(l, entries);
    j["segment"] = to_json(analyze_segment(l));
    LagSet pos_holes;
    for (Lag h : analyze_segment(l).holes)
      if (h > 0) pos_holes.push_back(h);
    j["positive_holes"] = pos_holes;
    doc["coarrays"][to_string(k)] = std::move(j);
  }
  return doc;
}

inline int cmd_coarray(const Config& cfg, const Context& ctx) {
  auto known = kArrayKeys;
  known.insert({"kind", "entries"});
  cfg.check_known(known);
  const auto arr = array_from_config(cfg);
  std::vector<CoarrayKind> kinds;
  const std::string kind = cfg.get_string("kind", std::string("foeca"));
  if (kind == "all")
    kinds = {CoarrayKind::Sca, CoarrayKind::Dca, CoarrayKind::Foca1, CoarrayKind::Foca2, CoarrayKind::Foca3,
             CoarrayKind::Foeca};
  else
    for (const auto& s : [&] {
           std::vector<std::string> v;
           std::stringstream ss(kind);
           for (std::string t; std::getline(ss, t, ',');) v.push_back(Config::trim(t));
           return v;
         }())
      kinds.push_back(parse_kind(s));
  const auto doc = coarray_report(arr, kinds, cfg.get_bool("entries", false));
  *ctx.out << doc.dump(2) << "\n";
  auto f = open_output(ctx, "coarray.json");
  f << doc.dump(2) << "\n";
  return 0;
}

/// One CSV row per published family row for the requested N plus the
/// optimised FOGNA with its measured co-array DOF.
inline int cmd_dof_table(const Config& cfg, const Context& ctx) {
  cfg.check_known({"N", "measure"});
  const auto ns = cfg.get_ints("N");
  const bool measure = cfg.get_bool("measure", true);
  std::ostringstream csv;
  csv << "family,N,split,formula_dof,published_dof,measured_dof,note\n";
  int failures = 0;
  for (auto n64 : ns) {
    const int n = to_int(n64, cfg, "N");
    for (const auto& row : published_dof_table()) {
      if (row.sensors != n || row.family == ArrayFamily::Fogna) continue;
      const auto formula = competitor_dof(row.family, row.split);
      std::string note;
      if (formula != row.dof) note = "formula disagrees with published value";
      csv << to_string(row.family) << ',' << n << ",\"" << join(row.split, ",") << "\"," << formula << ','
          << row.dof << ",," << note << '\n';
    }
    try {
      const auto res = optimize(n);
      const auto& b = res.best;
      const std::vector<int> split{b.n1, b.n2, b.n3};
      const auto pub = published_dof(ArrayFamily::Fogna, split);
      std::string measured;
      if (measure) measured = std::to_string(analyze_segment(foeca(build_fogna(b))).dof);
      std::string note;
      if (pub && *pub != res.dof_star) note = "formula disagrees with published value";
      if (measure && std::stoll(measured) != res.dof_star)
        note += std::string(note.empty() ? "" : "; ") + "measured run differs from formula";
      csv << "FOGNA," << n << ",\"" << join(split, ",") << "\"," << res.dof_star << ','
          << (pub ? std::to_string(*pub) : "") << ',' << measured << ',' << note << '\n';
    } catch (const ParameterError& e) {
      ++failures;
      csv << "FOGNA," << n << ",,,,,error: " << e.what() << '\n';
    }
  }
  *ctx.out << csv.str();
  auto f = open_output(ctx, "dof_table.csv");
  f << csv.str();
  return failures ? 1 : 0;
}

inline int cmd_coupling_table(const Config& cfg, const Context& ctx) {
  cfg.check_known({"N", "split", "coupling_band"});
  CouplingModel model;
  if (cfg.has("coupling_band")) model.band = to_int(cfg.get_int("coupling_band"), cfg, "coupling_band");
  std::ostringstream csv;
  csv << "family,N,split,source,leakage,published_leakage,delta\n";
  auto emit = [&](int n, const FognaParams& p, const std::string& source, std::optional<double> pub) {
    const double l = coupling_leakage(build_fogna(p), model);
    csv << "FOGNA," << n << ",\"" << p.n1 << ',' << p.n2 << ',' << p.n3 << "\"," << source << ',' << fmt(l, 4)
        << ',' << (pub ? fmt(*pub, 4) : "") << ',' << (pub ? fmt(l - *pub, 4) : "") << '\n';
  };
  int failures = 0;
  if (cfg.has("split")) {
    const auto s = cfg.get_ints("split");
    if (s.size() != 3) throw ConfigError(cfg.entry("split").origin + ": 'split' needs 3 values");
    const auto p = FognaParams::from_split(to_int(s[0], cfg, "split"), to_int(s[1], cfg, "split"),
                                           to_int(s[2], cfg, "split"));
    emit(p.total(), p, "given", std::nullopt);
  }
  for (auto n64 : cfg.get_ints("N", std::vector<std::int64_t>{})) {
    const int n = to_int(n64, cfg, "N");
    try {
      std::optional<double> pub;
      for (const auto& row : published_fogna_leakage())
        if (row.sensors == n) {
          pub = row.leakage;
          emit(n, FognaParams::from_split(row.split[0], row.split[1], row.split[2]), "printed_split", pub);
        }
      emit(n, optimize(n).best, "optimized_split", pub);
    } catch (const ParameterError& e) {
      ++failures;
      csv << "FOGNA," << n << ",,error,,,\n";
    }
  }
  *ctx.out << csv.str();
  auto f = open_output(ctx, "coupling_table.csv");
  f << csv.str();
  return failures ? 1 : 0;
}

// Keys shared by the two Monte-Carlo commands.
inline std::set<std::string> monte_carlo_keys() {
  auto k = kArrayKeys;
  k.insert({"seed", "trials", "grid_step", "coupling", "coupling_band", "mode"});
  return k;
}

inline Pipeline pipeline_from_config(const Config& cfg) {
  const std::string mode = cfg.get_string("mode", std::string("foeca"));
  MeasurementMode mm;
  if (mode == "foeca") mm = MeasurementMode::Foeca;
  else if (mode == "fodca") mm = MeasurementMode::Fodca;
  else throw ConfigError(cfg.entry("mode").origin + ": 'mode' must be foeca or fodca");
  return Pipeline::make(array_from_config(cfg), mm, coupling_from_config(cfg), cfg.get_double("grid_step", 0.05));
}

inline std::vector<double> angles_from_config(const Config& cfg) {
  if (cfg.has("angles")) return cfg.get_doubles("angles");
  const int d = to_int(cfg.get_int("sources"), cfg, "sources");
  const auto range = cfg.get_doubles("angle_range", std::vector<double>{-60.0, 60.0});
  if (range.size() != 2) throw ConfigError(cfg.entry("angle_range").origin + ": 'angle_range' needs 2 values");
  return uniform_angles(d, range[0], range[1]);
}

inline void write_jsonl(std::ostream& os, const std::vector<TrialResult>& trials) {
  for (const auto& t : trials) os << to_json(t).dump() << '\n';
}

inline int cmd_resolve(const Config& cfg, const Context& ctx) {
  auto known = monte_carlo_keys();
  known.insert({"angles", "sources", "angle_range", "snr_db", "snapshots", "tol"});
  cfg.check_known(known);
  const auto seed = cfg.get_seed("seed");
  const auto p = pipeline_from_config(cfg);
  const auto angles = angles_from_config(cfg);
  const double snr = cfg.get_double("snr_db", 0.0);
  const auto k = cfg.get_int("snapshots", 10000);
  const int trials = to_int(cfg.get_int("trials", 20), cfg, "trials");
  const double tol = cfg.get_double("tol", 0.4);
  const auto s = run_resolve(p, angles, snr, k, trials, seed, tol, ctx.jobs);

  std::ostringstream csv;
  csv << "trial,seed,resolved,max_error_deg,estimates_deg\n";
  int failures = 0;
  for (const auto& r : s.trials) {
    double worst = 0;
    for (double e : r.errors) worst = std::max(worst, e);
    if (!r.failure.empty()) ++failures;
    std::vector<std::string> est;
    for (double e : r.estimates) est.push_back(fmt(e, 4));
    csv << r.index << ',' << r.seed << ',' << (resolved(r, tol) ? 1 : 0) << ',' << fmt(worst, 4) << ",\""
        << join(est, " ") << "\"\n";
  }
  auto f = open_output(ctx, "resolve.csv");
  f << csv.str();
  auto jl = open_output(ctx, "resolve_trials.jsonl");
  write_jsonl(jl, s.trials);

  auto& o = *ctx.out;
  o << "seed = " << seed << "\n";
  o << "array = {" << join(p.array.positions(), ",") << "}, Lc = " << p.segment.half_span << "\n";
  o << "resolved " << s.successes << " / " << s.trials.size() << " trials (tol " << tol << " deg)\n";
  if (failures) o << failures << " trial(s) failed; see resolve_trials.jsonl\n";
  return failures ? 1 : 0;
}

inline int cmd_rmse(const Config& cfg, const Context& ctx) {
  auto known = monte_carlo_keys();
  known.insert({"angles", "sources", "angle_range", "snr_db", "snapshots"});
  cfg.check_known(known);
  const auto seed = cfg.get_seed("seed");
  const auto p = pipeline_from_config(cfg);
  const auto angles = angles_from_config(cfg);
  const auto snrs = cfg.get_doubles("snr_db", std::vector<double>{-7, -4, -1, 2, 5, 8});
  const auto ks = cfg.get_ints("snapshots", std::vector<std::int64_t>{14000});
  const int trials = to_int(cfg.get_int("trials", 50), cfg, "trials");
  std::vector<std::pair<double, std::int64_t>> points;
  for (double s : snrs)
    for (auto k : ks) points.emplace_back(s, k);
  std::vector<TrialResult> log;
  const auto sweep = run_rmse_sweep(p, angles, points, trials, seed, ctx.jobs, &log);

  std::ostringstream csv;
  csv << "snr_db,snapshots,trials,failures,median_rmse_deg,mean_rmse_deg,pooled_rmse_deg\n";
  std::size_t failures = 0;
  for (const auto& pt : sweep) {
    failures += pt.failures;
    csv << fmt(pt.snr_db, 2) << ',' << pt.snapshots << ',' << pt.trials << ',' << pt.failures << ','
        << fmt(pt.median_rmse, 6) << ',' << fmt(pt.mean_rmse, 6) << ',' << fmt(pt.pooled_rmse, 6) << '\n';
  }
  auto f = open_output(ctx, "rmse.csv");
  f << csv.str();
  auto jl = open_output(ctx, "rmse_trials.jsonl");
  write_jsonl(jl, log);
  *ctx.out << "seed = " << seed << "\n" << csv.str();
  return failures ? 1 : 0;
}

}  // namespace fogna::cli
