// Command-line front end: coverage sweeps, height optimization, plot data
// and analytic-vs-simulation validation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dronecell/dronecell.hpp"

namespace dc = dronecell;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;

struct CommonArgs {
  std::string config;
  std::vector<std::string> metrics;
  std::vector<std::string> envs;
  std::optional<int> model;
  std::string out = "-";
  unsigned workers = 1;
  bool no_timing = false;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
};

struct SweepArgs {
  std::string var = "h";
  std::optional<double> from, to, step;
  std::int64_t mc_trials = 0;
  std::uint64_t seed = 42;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool config_required) {
  auto* cfg = cmd->add_option("--config", a.config, "config file (key = value)");
  if (config_required) cfg->required();
  cmd->add_option("--metric", a.metrics, "tbs_ul, abs_ul, tsue_dl or asd_dl (repeatable; default all)");
  cmd->add_option("--env", a.envs,
                  "environment preset name (repeatable; 'all' = every Model 1 preset)");
  cmd->add_option("--model", a.model, "LOS-probability model")->check(CLI::IsMember({1, 2}));
  cmd->add_option("--out", a.out, "output path ('-' for stdout)");
  cmd->add_option("--workers", a.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-timing", a.no_timing, "write wall_ms as 0 (byte-identical reruns)");
  cmd->add_option("--rel-tol", a.rel_tol, "quadrature relative tolerance");
  cmd->add_option("--abs-tol", a.abs_tol, "quadrature absolute tolerance");
}

void add_sweep(CLI::App* cmd, SweepArgs& s) {
  cmd->add_option("--var", s.var, "sweep variable")->check(CLI::IsMember({"h", "d"}));
  cmd->add_option("--from", s.from, "first grid value (m)");
  cmd->add_option("--to", s.to, "last grid value (m)");
  cmd->add_option("--step", s.step, "grid step (m)");
  cmd->add_option("--mc-trials", s.mc_trials, "Monte Carlo trials per point (0 = analytic only)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", s.seed, "Monte Carlo seed");
}

struct Setup {
  dc::SystemParams params;
  std::vector<dc::AerialEnvironment> envs;
  std::vector<dc::Metric> metrics;
  dc::QuadratureSpec quad;
};

Setup make_setup(const CommonArgs& a) {
  Setup s;
  dc::RawConfig cfg;
  if (!a.config.empty()) {
    cfg = dc::load_config(a.config);
    s.params = dc::build_params(cfg);
  } else {
    s.params = dc::default_params();
  }

  dc::AerialEnvironment base_env = dc::environment_preset(dc::ChannelModel::Model1, "urban");
  if (cfg.count("env_model")) base_env = dc::build_environment(cfg);
  const dc::ChannelModel model =
      a.model ? (*a.model == 2 ? dc::ChannelModel::Model2 : dc::ChannelModel::Model1) : base_env.model;
  if (a.envs.empty()) {
    if (a.model && model != base_env.model) {
      s.envs.push_back(dc::environment_preset(model, base_env.name));
    } else {
      s.envs.push_back(base_env);
    }
  } else {
    for (const std::string& name : a.envs) {
      if (name == "all") {
        for (auto n : dc::kModel1EnvironmentNames) {
          s.envs.push_back(dc::environment_preset(dc::ChannelModel::Model1, n));
        }
      } else {
        s.envs.push_back(dc::environment_preset(model, name));
      }
    }
  }

  if (a.metrics.empty()) {
    s.metrics.assign(dc::kAllMetrics.begin(), dc::kAllMetrics.end());
  } else {
    for (const std::string& m : a.metrics) {
      const auto parsed = dc::parse_metric(m);
      if (!parsed) throw dc::InvalidValue("metric", "unknown metric '" + m + "'");
      s.metrics.push_back(*parsed);
    }
  }
  s.quad = {a.rel_tol, a.abs_tol, 30};
  s.quad.validate();
  return s;
}

dc::SweepSpec make_sweep(const SweepArgs& a) {
  dc::SweepSpec s;
  if (a.var == "d") {
    s.variable = dc::SweepVariable::Distance;
    s.from = a.from.value_or(150.0);
    s.to = a.to.value_or(450.0);
    s.step = a.step.value_or(50.0);
  } else {
    s.from = a.from.value_or(200.0);
    s.to = a.to.value_or(1000.0);
    s.step = a.step.value_or(10.0);
  }
  s.validate();
  return s;
}

void warn_heights(double lo, double hi) {
  if (lo < 200.0 || hi > 1000.0) {
    std::cerr << "warning: heights outside 200..1000 m are outside the studied range\n";
  }
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw dc::InvalidValue("out", "cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int run_sweep_cmd(const CommonArgs& a, const SweepArgs& sa) {
  const Setup s = make_setup(a);
  const dc::SweepSpec sweep = make_sweep(sa);
  if (sweep.variable == dc::SweepVariable::Height) {
    warn_heights(sweep.from, sweep.to);
  } else {
    warn_heights(s.params.h, s.params.h);
  }
  dc::SweepOptions opt;
  opt.mc_trials = sa.mc_trials;
  opt.seed = sa.seed;
  opt.quad = s.quad;
  opt.workers = a.workers;
  opt.record_timing = !a.no_timing;

  Output out(a.out);
  std::ostream& os = out.stream();
  os << dc::kCsvHeader << '\n';
  bool failed = false;
  for (const auto& env : s.envs) {
    const auto rows = dc::run_sweep(s.params, env, sweep, s.metrics, opt);
    dc::write_csv(os, rows, false);
    for (const auto& r : rows) {
      if (!r.failure.empty()) {
        failed = true;
        std::cerr << "error: h=" << r.h << " d=" << r.d << " " << r.env << " "
                  << dc::to_string(r.metric) << ": " << r.failure << '\n';
      }
    }
  }
  return failed ? kExitNumerics : kExitOk;
}

int run_optimize_cmd(const CommonArgs& a, const SweepArgs& sa) {
  const Setup s = make_setup(a);
  const double lo = sa.from.value_or(200.0);
  const double hi = sa.to.value_or(1000.0);
  const double step = sa.step.value_or(1.0);
  warn_heights(lo, hi);
  Output out(a.out);
  std::ostream& os = out.stream();
  os << "metric,env,d_m,h_star_m,coverage,analytic_err\n";
  for (const auto& env : s.envs) {
    for (dc::Metric m : s.metrics) {
      const auto best = dc::find_best_height(s.params, env, m, lo, hi, step, 10.0, s.quad);
      os << dc::to_string(m) << ',' << env.name << ',' << dc::format_number(s.params.d) << ','
         << dc::format_number(best.h) << ',' << dc::format_number(best.coverage) << ','
         << dc::format_number(best.error, 3) << '\n';
    }
  }
  return kExitOk;
}

int run_validate_cmd(const CommonArgs& a, SweepArgs sa, double tol) {
  const Setup s = make_setup(a);
  if (sa.mc_trials == 0) sa.mc_trials = 1000000;
  if (!sa.step) sa.step = 200.0;
  const dc::SweepSpec sweep = make_sweep(sa);
  dc::SweepOptions opt;
  opt.mc_trials = sa.mc_trials;
  opt.seed = sa.seed;
  opt.quad = s.quad;
  opt.workers = a.workers;
  opt.record_timing = !a.no_timing;

  Output out(a.out);
  std::ostream& os = out.stream();
  int failures = 0;
  for (const auto& env : s.envs) {
    for (const auto& r : dc::run_sweep(s.params, env, sweep, s.metrics, opt)) {
      const bool ok = r.analytic && r.mc_mean &&
                      std::abs(*r.analytic - *r.mc_mean) <= tol + *r.analytic_err;
      if (!ok) ++failures;
      char line[256];
      std::snprintf(line, sizeof line, "%s h=%g d=%g %s %s analytic=%s mc=%s diff=%s\n",
                    ok ? "PASS" : "FAIL", r.h, r.d, r.env.c_str(),
                    std::string(dc::to_string(r.metric)).c_str(),
                    dc::format_optional(r.analytic, 6).c_str(),
                    dc::format_optional(r.mc_mean, 6).c_str(),
                    r.analytic && r.mc_mean ? dc::format_number(*r.analytic - *r.mc_mean, 3).c_str()
                                            : "NA");
      os << line;
    }
  }
  os << (failures == 0 ? "validation passed" : "validation FAILED: " + std::to_string(failures) +
                                                   " rows out of tolerance")
     << '\n';
  return failures == 0 ? kExitOk : kExitValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coverage analysis for a terrestrial cell with an underlay drone cell over a stadium"};
  app.require_subcommand(1);

  CommonArgs sweep_common, opt_common, val_common;
  SweepArgs sweep_args, opt_args, val_args;
  double val_tol = 0.005;
  std::string plot_csv, plot_dir;

  auto* sweep = app.add_subcommand("sweep", "coverage over an h or d grid, as CSV");
  add_common(sweep, sweep_common, true);
  add_sweep(sweep, sweep_args);

  auto* optimize = app.add_subcommand("optimize", "coverage-maximizing ABS height per metric");
  add_common(optimize, opt_common, true);
  optimize->add_option("--from", opt_args.from, "lowest height (m)");
  optimize->add_option("--to", opt_args.to, "highest height (m)");
  optimize->add_option("--step", opt_args.step, "final grid resolution (m)");

  auto* plotdata = app.add_subcommand("plotdata", "split a sweep CSV into plot-ready series files");
  plotdata->add_option("--csv", plot_csv, "sweep CSV")->required();
  plotdata->add_option("--out", plot_dir, "output directory")->required();

  auto* validate = app.add_subcommand("validate", "compare analytic coverage with simulation");
  add_common(validate, val_common, false);
  add_sweep(validate, val_args);
  validate->add_option("--tol", val_tol, "allowed |analytic - mc| beyond the quadrature bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sweep) return run_sweep_cmd(sweep_common, sweep_args);
    if (*optimize) return run_optimize_cmd(opt_common, opt_args);
    if (*validate) return run_validate_cmd(val_common, val_args, val_tol);
    if (*plotdata) {
      const auto series = dc::emit_plot_data(plot_csv, plot_dir);
      std::cout << "wrote " << series.size() << " series to " << plot_dir << '\n';
      return kExitOk;
    }
  } catch (const dc::QuadratureFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerics;
  } catch (const dc::PrecisionLoss& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerics;
  } catch (const dc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
