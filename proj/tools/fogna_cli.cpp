// fogna_cli: array design, co-array analysis and DOA experiments.
//
// Every subcommand reads a flat key=value file (--config) and accepts the
// same keys as flags; flags override the file. Lists are comma separated;
// negative leading values need the --key=value form (e.g. --snr_db=-7,-1,5).

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <list>
#include <map>

#include "fogna/cli.hpp"

namespace {

struct KeyFlags {
  // std::list keeps element addresses stable for CLI11 bindings
  std::list<std::pair<std::string, std::string>> values;
  std::vector<std::pair<CLI::Option*, std::string*>> bound;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    auto& slot = values.emplace_back(key, "");
    auto* opt = app->add_option("--" + key, slot.second, help);
    bound.emplace_back(opt, &slot.second);
  }

  void apply(fogna::Config& cfg) const {
    for (const auto& [opt, value] : bound)
      if (opt->count()) cfg.set(opt->get_name().substr(2), *value, opt->get_name());
  }
};

struct Command {
  CLI::App* app = nullptr;
  KeyFlags flags;
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> positional;  // joined with commas into positional_key
  std::string positional_key;
  std::function<int(const fogna::Config&, const fogna::cli::Context&)> run;
};

void add_array_flags(Command& c) {
  c.flags.add(c.app, "positions", "explicit sensor positions, e.g. 0,1,5,8");
  c.flags.add(c.app, "split", "FOGNA split N1,N2,N3");
  c.flags.add(c.app, "N", "FOGNA with the optimised split for N sensors");
  c.flags.add(c.app, "cna", "concatenated nested array M1,M2");
  c.flags.add(c.app, "ula", "uniform linear array of n sensors");
  c.flags.add(c.app, "nested", "two-level nested array n1,n2");
}

void add_monte_carlo_flags(Command& c) {
  add_array_flags(c);
  c.flags.add(c.app, "seed", "base seed (required)");
  c.flags.add(c.app, "trials", "Monte-Carlo trials");
  c.flags.add(c.app, "angles", "source angles in degrees");
  c.flags.add(c.app, "sources", "number of uniformly spread sources (instead of --angles)");
  c.flags.add(c.app, "angle_range", "lo,hi for --sources (default -60,60)");
  c.flags.add(c.app, "snapshots", "snapshot count K (list for rmse)");
  c.flags.add(c.app, "snr_db", "SNR in dB (list for rmse)");
  c.flags.add(c.app, "grid_step", "MUSIC grid step in degrees (default 0.05)");
  c.flags.add(c.app, "coupling", "apply the mutual coupling model (on/off)");
  c.flags.add(c.app, "coupling_band", "coupling band B (default 100)");
  c.flags.add(c.app, "mode", "foeca (default) or fodca");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FOGNA sparse array design and fourth-order DOA estimation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_flag;
  int jobs = 1;
  app.add_option("--out", out_flag, std::string("output directory (default $") + fogna::cli::kOutDirEnv + " or ./out)");
  app.add_option("--jobs,-j", jobs, "worker threads for Monte-Carlo trials")->check(CLI::PositiveNumber);

  std::map<std::string, Command> cmds;
  auto make = [&](const std::string& name, const std::string& desc, auto run) -> Command& {
    auto& c = cmds[name];
    c.app = app.add_subcommand(name, desc);
    c.app->add_option("--config,-c", c.config_path, "key=value config file");
    c.app->add_option("--set", c.sets, "extra key=value override (repeatable)");
    c.run = run;
    return c;
  };

  {
    auto& c = make("design", "optimal FOGNA split for N sensors", fogna::cli::cmd_design);
    c.positional_key = "N";
    c.app->add_option("n", c.positional, "sensor count");
    c.flags.add(c.app, "N", "sensor count");
  }
  {
    auto& c = make("coarray", "co-array and hole report (JSON)", fogna::cli::cmd_coarray);
    add_array_flags(c);
    c.flags.add(c.app, "kind", "sca, dca, foca1, foca2, foca3, foeca (default) or all; comma list allowed");
    c.flags.add(c.app, "entries", "include lag multiplicities (on/off)");
  }
  {
    auto& c = make("dof-table", "DOF comparison rows for the given sensor counts", fogna::cli::cmd_dof_table);
    c.positional_key = "N";
    c.app->add_option("n", c.positional, "sensor counts, e.g. 9,11,19");
    c.flags.add(c.app, "N", "sensor counts");
    c.flags.add(c.app, "measure", "also measure the co-array DOF (default on)");
  }
  {
    auto& c = make("coupling-table", "FOGNA mutual coupling leakage rows", fogna::cli::cmd_coupling_table);
    c.positional_key = "N";
    c.app->add_option("n", c.positional, "sensor counts, e.g. 10,11,19");
    c.flags.add(c.app, "N", "sensor counts");
    c.flags.add(c.app, "split", "extra FOGNA split N1,N2,N3");
    c.flags.add(c.app, "coupling_band", "coupling band B (default 100)");
  }
  {
    auto& c = make("resolve", "two-or-more source resolution trials", fogna::cli::cmd_resolve);
    add_monte_carlo_flags(c);
    c.flags.add(c.app, "tol", "success tolerance in degrees (default 0.4)");
  }
  {
    auto& c = make("rmse", "RMSE sweep over SNR x K", fogna::cli::cmd_rmse);
    add_monte_carlo_flags(c);
  }

  for (auto& [name, c] : cmds)
    if (!c.positional_key.empty()) c.app->get_option("n")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  for (auto& [name, c] : cmds) {
    if (!c.app->parsed()) continue;
    try {
      fogna::Config cfg;
      if (!c.config_path.empty()) cfg.load_file(c.config_path);
      if (!c.positional.empty()) cfg.set(c.positional_key, fogna::cli::join(c.positional, ","), "argument");
      c.flags.apply(cfg);
      for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw fogna::ConfigError("--set " + s + ": expected key=value");
        cfg.set(fogna::Config::trim(s.substr(0, eq)), s.substr(eq + 1), "--set " + s);
      }
      fogna::cli::Context ctx;
      ctx.out_dir = fogna::cli::resolve_out_dir(out_flag);
      ctx.jobs = jobs;
      return c.run(cfg, ctx);
    } catch (const fogna::ParameterError& e) {
      std::cerr << "fogna_cli " << name << ": " << e.what() << "\n";
      return 2;
    } catch (const fogna::PreconditionError& e) {
      std::cerr << "fogna_cli " << name << ": " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "fogna_cli " << name << ": " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}
