#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dronecell/analytic.hpp"
#include "dronecell/errors.hpp"
#include "dronecell/metric.hpp"
#include "dronecell/montecarlo.hpp"
#include "dronecell/params.hpp"

namespace dronecell {

enum class SweepVariable { Height, Distance };

struct SweepSpec {
  SweepVariable variable = SweepVariable::Height;
  double from = 200.0;
  double to = 1000.0;
  double step = 10.0;

  void validate() const {
    if (!std::isfinite(from) || !std::isfinite(to) || !(from <= to)) {
      throw InvalidValue("from", "from <= to required");
    }
    if (!(step > 0.0) || !std::isfinite(step)) throw InvalidValue("step", "step > 0 required");
  }
};

/// Inclusive grid from, from + step, ..., up to `to` (with a small slack so
/// that a nominal endpoint is not lost to rounding). Points are computed as
/// from + i * step, never by accumulation.
inline std::vector<double> sweep_grid(double from, double to, double step) {
  const auto n = static_cast<std::int64_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  for (std::int64_t i = 0; i < n; ++i) g.push_back(from + static_cast<double>(i) * step);
  return g;
}

struct SweepOptions {
  bool analytic = true;
  std::int64_t mc_trials = 0;  // 0 disables the simulation
  std::uint64_t seed = 42;
  QuadratureSpec quad;
  unsigned workers = 1;
  bool record_timing = true;  // false writes wall_ms = 0 for byte-stable output
};

struct SweepRow {
  double h = 0.0;
  double d = 0.0;
  std::string env;
  Metric metric = Metric::TbsUplink;
  std::optional<double> analytic;
  std::optional<double> analytic_err;
  std::optional<double> mc_mean;
  std::optional<double> mc_ci95;
  std::string regime;
  std::int64_t wall_ms = 0;
  std::string failure;  // non-empty when the analytic evaluation failed
};

namespace detail {

inline std::int64_t elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
      .count();
}

/// All rows for one sweep point, in metric order.
inline std::vector<SweepRow> evaluate_point(const SystemParams& p, const AerialEnvironment& env,
                                            std::span<const Metric> metrics,
                                            const SweepOptions& opt) {
  std::vector<SweepRow> rows;
  std::optional<std::array<McEstimate, kAllMetrics.size()>> mc;
  std::int64_t mc_ms = 0;
  if (opt.mc_trials > 0) {
    const auto t0 = std::chrono::steady_clock::now();
    mc = estimate_all(p, env, opt.mc_trials, opt.seed);
    mc_ms = elapsed_ms(t0);
  }
  const std::string regime(to_string(classify_regime(p).branch));
  // The simulation always carries the analytic value along.
  const bool analytic = opt.analytic || opt.mc_trials > 0;
  for (Metric m : metrics) {
    SweepRow row;
    row.h = p.h;
    row.d = p.d;
    row.env = env.name;
    row.metric = m;
    row.regime = regime;
    const auto t0 = std::chrono::steady_clock::now();
    if (analytic) {
      try {
        const CoverageResult c = coverage(m, p, env, opt.quad);
        row.analytic = c.value;
        row.analytic_err = c.est_error;
      } catch (const QuadratureFailure& e) {
        row.failure = e.what();
      } catch (const PrecisionLoss& e) {
        row.failure = e.what();
      }
    }
    if (mc) {
      const McEstimate& e = (*mc)[static_cast<std::size_t>(m)];
      row.mc_mean = e.mean;
      row.mc_ci95 = e.half_width_95;
    }
    row.wall_ms = opt.record_timing ? elapsed_ms(t0) + mc_ms : 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Evaluates every metric at every grid point of the sweep. Points are
/// spread over `opt.workers` threads; rows always come back in sweep order
/// (point-major, then metric order as given). Configuration errors at a
/// point (for instance d >= R1 in a distance sweep) throw InvalidValue;
/// quadrature failures are recorded in SweepRow::failure.
inline std::vector<SweepRow> run_sweep(const SystemParams& base, const AerialEnvironment& env,
                                       const SweepSpec& sweep, std::span<const Metric> metrics,
                                       const SweepOptions& opt = {}) {
  sweep.validate();
  opt.quad.validate();
  env.validate();
  const std::vector<double> grid = sweep_grid(sweep.from, sweep.to, sweep.step);
  std::vector<SystemParams> points;
  points.reserve(grid.size());
  for (double x : grid) {
    SystemParams p = base;
    (sweep.variable == SweepVariable::Height ? p.h : p.d) = x;
    p.validate();
    points.push_back(p);
  }

  std::vector<std::vector<SweepRow>> per_point(points.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(points.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      per_point[i] = detail::evaluate_point(points[i], env, metrics, opt);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < points.size(); i = next++) {
            per_point[i] = detail::evaluate_point(points[i], env, metrics, opt);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(points.size() * metrics.size());
  for (auto& v : per_point) {
    for (auto& r : v) rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader =
    "h_m,d_m,env,metric,analytic,analytic_err,mc_mean,mc_ci95,regime,wall_ms";

inline std::string format_number(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string format_optional(const std::optional<double>& v, int digits = 12) {
  return v ? format_number(*v, digits) : "NA";
}

inline std::string csv_line(const SweepRow& r) {
  std::string s;
  s += format_number(r.h) + ',' + format_number(r.d) + ',' + r.env + ',' +
       std::string(to_string(r.metric)) + ',';
  s += format_optional(r.analytic) + ',' + format_optional(r.analytic_err, 3) + ',';
  s += format_optional(r.mc_mean) + ',' + format_optional(r.mc_ci95, 6) + ',';
  s += r.regime + ',' + std::to_string(r.wall_ms);
  return s;
}

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool header = true) {
  if (header) out << kCsvHeader << '\n';
  for (const SweepRow& r : rows) out << csv_line(r) << '\n';
}

// ---------------------------------------------------------------------------
// Height optimization

struct BestHeight {
  double h = 0.0;
  double coverage = 0.0;
  double error = 0.0;
};

/// Argmax of `eval(h) -> CoverageResult` over a grid. Ties go to the smallest
/// height whatever the grid order.
template <class Eval>
BestHeight argmax_grid(std::span<const double> heights, Eval&& eval) {
  if (heights.empty()) throw InvalidValue("h", "empty height grid");
  BestHeight best;
  bool have = false;
  for (double h : heights) {
    const CoverageResult c = eval(h);
    if (!have || c.value > best.coverage || (c.value == best.coverage && h < best.h)) {
      best = {h, c.value, c.est_error};
      have = true;
    }
  }
  return best;
}

/// Grid argmax of the analytic metric over the given heights.
inline BestHeight argmax_height(const SystemParams& base, const AerialEnvironment& env, Metric m,
                                std::span<const double> heights, const QuadratureSpec& q = {}) {
  return argmax_grid(heights, [&](double h) {
    SystemParams p = base;
    p.h = h;
    return coverage(m, p, env, q);
  });
}

/// Grid argmax over [lo, hi] at resolution `step`. When `coarse_step`
/// exceeds `step` the grid is searched at `coarse_step` first and then
/// refined at `step` within one coarse step of the coarse optimum.
inline BestHeight find_best_height(const SystemParams& base, const AerialEnvironment& env, Metric m,
                                   double lo, double hi, double step, double coarse_step = 0.0,
                                   const QuadratureSpec& q = {}) {
  SweepSpec{SweepVariable::Height, lo, hi, step}.validate();
  if (!(coarse_step > step)) {
    const auto grid = sweep_grid(lo, hi, step);
    return argmax_height(base, env, m, grid, q);
  }
  const auto coarse = sweep_grid(lo, hi, coarse_step);
  const BestHeight c = argmax_height(base, env, m, coarse, q);
  // Refine on the fine grid anchored at lo, so results are points of the
  // full fine grid.
  const double a = std::max(lo, c.h - coarse_step);
  const double b = std::min(hi, c.h + coarse_step);
  std::vector<double> fine;
  for (double h : sweep_grid(lo, hi, step)) {
    if (h >= a - 1e-9 && h <= b + 1e-9) fine.push_back(h);
  }
  return argmax_height(base, env, m, fine, q);
}

// ---------------------------------------------------------------------------
// Plot data

struct PlotSeries {
  std::string metric;
  std::string env;
  std::string file;
  std::size_t rows = 0;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Splits a sweep CSV into one whitespace-separated series file per
/// (metric, env), named <metric>_<env>.dat, plus manifest.txt. Field text is
/// copied verbatim. Throws InvalidValue on an empty or malformed CSV.
inline std::vector<PlotSeries> emit_plot_data(const std::string& csv_path,
                                              const std::string& out_dir) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidValue("csv", "cannot open '" + csv_path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidValue("csv", "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw InvalidValue("csv", "unexpected header");

  const std::size_t kFields = detail::split_csv(kCsvHeader).size();
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> series;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != kFields) {
      throw InvalidValue("csv", "line " + std::to_string(lineno) + ": expected " +
                                    std::to_string(kFields) + " fields");
    }
    if (!parse_metric(f[3])) {
      throw InvalidValue("csv", "line " + std::to_string(lineno) + ": unknown metric '" + f[3] + "'");
    }
    const auto key = std::make_pair(f[3], f[2]);
    auto [it, inserted] = series.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(f[0] + ' ' + f[1] + ' ' + f[4] + ' ' + f[5] + ' ' + f[6] + ' ' + f[7]);
  }
  if (order.empty()) throw InvalidValue("csv", "no data rows");

  std::filesystem::create_directories(out_dir);
  std::vector<PlotSeries> out;
  for (const auto& key : order) {
    PlotSeries s{key.first, key.second, key.first + "_" + key.second + ".dat", series[key].size()};
    std::ofstream f(std::filesystem::path(out_dir) / s.file);
    if (!f) throw InvalidValue("out", "cannot write '" + s.file + "'");
    f << "# h_m d_m analytic analytic_err mc_mean mc_ci95\n";
    for (const auto& row : series[key]) f << row << '\n';
    out.push_back(std::move(s));
  }
  std::ofstream manifest(std::filesystem::path(out_dir) / "manifest.txt");
  manifest << "# file metric env rows\n";
  for (const auto& s : out) manifest << s.file << ' ' << s.metric << ' ' << s.env << ' ' << s.rows << '\n';
  return out;
}

}  // namespace dronecell
