#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "dronecell/errors.hpp"
#include "dronecell/units.hpp"

namespace dronecell {

// Upper bound on the Nakagami orders; the analytic derivative stacks are
// fixed-size.
inline constexpr int kMaxFadingOrder = 16;

/// Radio and geometry parameters of the TBS cell plus the stadium drone cell.
/// All powers in watts, all ratios linear, all lengths in metres.
///
/// Frame: stadium centre at the origin, TBS on the ground at (d, 0), ABS at
/// height h above the origin.
struct SystemParams {
  double r1 = 500.0;  // TBS cell radius
  double r2 = 100.0;  // stadium radius
  double d = 200.0;   // stadium centre to TBS
  double h = 400.0;   // ABS height

  double alpha_b = 4.0;     // terrestrial path-loss exponent
  double alpha_los = 2.5;   // aerial LOS exponent
  double alpha_nlos = 4.0;  // aerial NLOS exponent
  double eta_los = 1.0;     // aerial LOS attenuation
  double eta_nlos = 0.01;   // aerial NLOS attenuation
  int m_los = 5;
  int m_nlos = 1;

  double rho_b = units::dbm_to_watt(-75.0);  // TBS uplink sensitivity
  double rho_d = units::dbm_to_watt(-50.0);  // ABS uplink sensitivity
  double p_max = units::dbm_to_watt(20.0);   // AsD power cap
  double p_t = units::dbm_to_watt(40.0);     // TBS transmit power
  double p_a = units::dbm_to_watt(20.0);     // ABS transmit power

  double gamma_ul_tbs = 1.0;   // TBS uplink SINR threshold
  double gamma_ul_abs = 1.0;   // ABS uplink SINR threshold
  double gamma_dl_tsue = 1.0;  // TsUE downlink SINR threshold
  double gamma_dl_asd = 1.0;   // AsD downlink SINR threshold

  double sigma2 = units::dbm_to_watt(-100.0);

  /// Throws InvalidValue naming the first violated invariant.
  void validate() const;
};

/// The evaluation parameters used throughout the reported experiments, with
/// the ABS at 400 m.
inline SystemParams default_params() { return SystemParams{}; }

inline void SystemParams::validate() const {
  auto require = [](bool ok, const char* name, const char* reason) {
    if (!ok) throw InvalidValue(name, reason);
  };
  auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };

  require(finite_positive(r2), "r2_m", "R2 > 0 required");
  require(finite_positive(r1) && r1 > r2, "r1_m", "R1 > R2 required");
  require(std::isfinite(d) && d >= 0.0, "d_m", "d >= 0 required");
  // The stadium centre has to lie inside the cell so that the TsUE region
  // around the ABS axis is a proper annulus/arc family.
  require(d < r1, "d_m", "d < R1 required");
  require(finite_positive(h), "h_m", "h > 0 required");

  require(std::isfinite(alpha_b) && alpha_b >= 2.0, "alpha_b", "exponent >= 2 required");
  require(std::isfinite(alpha_los) && alpha_los >= 2.0, "alpha_los", "exponent >= 2 required");
  require(std::isfinite(alpha_nlos) && alpha_nlos >= 2.0, "alpha_nlos",
          "exponent >= 2 required");
  require(finite_positive(eta_nlos), "eta_nlos_db", "eta_N > 0 required");
  require(std::isfinite(eta_los) && eta_los > eta_nlos, "eta_los_db", "eta_L > eta_N required");

  require(m_los >= 1 && m_los <= kMaxFadingOrder, "m_los", "integer in [1, 16] required");
  require(m_nlos >= 1 && m_nlos <= kMaxFadingOrder, "m_nlos", "integer in [1, 16] required");

  require(finite_positive(rho_b), "rho_b_dbm", "power must be > 0");
  require(finite_positive(rho_d), "rho_d_dbm", "power must be > 0");
  require(finite_positive(p_max), "p_max_dbm", "power must be > 0");
  require(finite_positive(p_t), "p_t_dbm", "power must be > 0");
  require(finite_positive(p_a), "p_a_dbm", "power must be > 0");
  require(finite_positive(gamma_ul_tbs), "gamma_u_t_db", "threshold must be > 0");
  require(finite_positive(gamma_ul_abs), "gamma_u_a_db", "threshold must be > 0");
  require(finite_positive(gamma_dl_tsue), "gamma_d_t_db", "threshold must be > 0");
  require(finite_positive(gamma_dl_asd), "gamma_d_a_db", "threshold must be > 0");
  require(finite_positive(sigma2), "sigma2_dbm", "noise power must be > 0");
}

// ---------------------------------------------------------------------------
// Aerial LOS-probability environments

enum class ChannelModel { Model1, Model2 };

struct AerialEnvironment {
  ChannelModel model = ChannelModel::Model1;
  double c = 9.6117;
  double b = 0.1581;
  std::string name = "urban";

  void validate() const {
    if (!(std::isfinite(c) && c > 0.0)) throw InvalidValue("env_c", "c > 0 required");
    if (!(std::isfinite(b) && b > 0.0)) throw InvalidValue("env_b", "b > 0 required");
  }
};

inline constexpr std::array<std::string_view, 4> kModel1EnvironmentNames = {
    "suburban", "urban", "dense-urban", "high-rise-urban"};

/// Named presets. Model 1 covers all four environments; Model 2 only has
/// urban constants. Throws InvalidValue for an unknown combination.
inline AerialEnvironment environment_preset(ChannelModel model, std::string_view name) {
  struct Preset {
    ChannelModel model;
    std::string_view name;
    double c, b;
  };
  static constexpr std::array<Preset, 5> presets = {{
      {ChannelModel::Model1, "suburban", 4.88, 0.43},
      {ChannelModel::Model1, "urban", 9.6117, 0.1581},
      {ChannelModel::Model1, "dense-urban", 11.95, 0.136},
      {ChannelModel::Model1, "high-rise-urban", 27.23, 0.08},
      {ChannelModel::Model2, "urban", 0.6, 0.11},
  }};
  for (const auto& p : presets) {
    if (p.model == model && p.name == name) {
      return AerialEnvironment{model, p.c, p.b, std::string(name)};
    }
  }
  throw InvalidValue("env_name", "no preset '" + std::string(name) + "' for model " +
                                     (model == ChannelModel::Model1 ? "1" : "2"));
}

// ---------------------------------------------------------------------------
// Regime-boundary heights of the AsD power-control law

struct RegimeBoundaries {
  double zmax_los = 0.0;   // serving distance at which a LOS AsD hits P_max
  double zmax_nlos = 0.0;  // same for NLOS
  double hcrit_los = 0.0;  // height above which the stadium edge hits P_max (LOS)
  double hcrit_nlos = 0.0;
};

inline RegimeBoundaries regime_boundaries(const SystemParams& p) {
  RegimeBoundaries rb;
  rb.zmax_los = std::pow(p.p_max * p.eta_los / p.rho_d, 1.0 / p.alpha_los);
  rb.zmax_nlos = std::pow(p.p_max * p.eta_nlos / p.rho_d, 1.0 / p.alpha_nlos);
  const double r2sq = p.r2 * p.r2;
  rb.hcrit_los = std::sqrt(std::max(0.0, rb.zmax_los * rb.zmax_los - r2sq));
  rb.hcrit_nlos = std::sqrt(std::max(0.0, rb.zmax_nlos * rb.zmax_nlos - r2sq));
  return rb;
}

// ---------------------------------------------------------------------------
// Config files: "key = value" lines, '#' or ';' comments, optional [section]
// headers. Section names only group keys; lookups use the bare key.

using RawConfig = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace detail

inline RawConfig parse_config(std::string_view text) {
  RawConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw InvalidValue("line " + std::to_string(lineno), "unterminated section header");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidValue("line " + std::to_string(lineno), "expected 'key = value'");
    }
    std::string key = detail::trim(std::string_view(t).substr(0, eq));
    std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw InvalidValue("line " + std::to_string(lineno), "empty key");
    if (!cfg.emplace(key, value).second) throw InvalidValue(key, "duplicate key");
  }
  return cfg;
}

inline RawConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidValue("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

namespace detail {

inline const std::string& require_key(const RawConfig& cfg, const std::string& key) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) throw MissingKey(key);
  return it->second;
}

inline double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidValue(key, "not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw InvalidValue(key, "not a finite number: '" + text + "'");
  }
  return v;
}

inline double number_key(const RawConfig& cfg, const std::string& key) {
  return parse_number(key, require_key(cfg, key));
}

inline int integer_key(const RawConfig& cfg, const std::string& key) {
  const double v = number_key(cfg, key);
  if (v != std::floor(v) || std::abs(v) > 1e6) {
    throw InvalidValue(key, "integer required");
  }
  return static_cast<int>(v);
}

}  // namespace detail

/// Builds validated parameters from a raw key/value map. Power keys are in
/// dBm, ratio keys in dB, lengths in metres.
inline SystemParams build_params(const RawConfig& cfg) {
  using detail::integer_key;
  using detail::number_key;
  SystemParams p;
  p.r1 = number_key(cfg, "r1_m");
  p.r2 = number_key(cfg, "r2_m");
  p.d = number_key(cfg, "d_m");
  p.h = number_key(cfg, "h_m");
  p.alpha_b = number_key(cfg, "alpha_b");
  p.alpha_los = number_key(cfg, "alpha_los");
  p.alpha_nlos = number_key(cfg, "alpha_nlos");
  p.eta_los = units::db_to_linear(number_key(cfg, "eta_los_db"));
  p.eta_nlos = units::db_to_linear(number_key(cfg, "eta_nlos_db"));
  p.m_los = integer_key(cfg, "m_los");
  p.m_nlos = integer_key(cfg, "m_nlos");
  p.rho_b = units::dbm_to_watt(number_key(cfg, "rho_b_dbm"));
  p.rho_d = units::dbm_to_watt(number_key(cfg, "rho_d_dbm"));
  p.p_max = units::dbm_to_watt(number_key(cfg, "p_max_dbm"));
  p.p_t = units::dbm_to_watt(number_key(cfg, "p_t_dbm"));
  p.p_a = units::dbm_to_watt(number_key(cfg, "p_a_dbm"));
  p.gamma_ul_tbs = units::db_to_linear(number_key(cfg, "gamma_u_t_db"));
  p.gamma_ul_abs = units::db_to_linear(number_key(cfg, "gamma_u_a_db"));
  p.gamma_dl_tsue = units::db_to_linear(number_key(cfg, "gamma_d_t_db"));
  p.gamma_dl_asd = units::db_to_linear(number_key(cfg, "gamma_d_a_db"));
  p.sigma2 = units::dbm_to_watt(number_key(cfg, "sigma2_dbm"));
  p.validate();
  return p;
}

inline ChannelModel parse_channel_model(const std::string& key, const std::string& text) {
  if (text == "1" || text == "model1" || text == "Model1") return ChannelModel::Model1;
  if (text == "2" || text == "model2" || text == "Model2") return ChannelModel::Model2;
  throw InvalidValue(key, "expected 1 or 2, got '" + text + "'");
}

/// env_model selects the LOS model; env_name picks a preset, or env_c/env_b
/// give custom constants (which also override a preset's values).
inline AerialEnvironment build_environment(const RawConfig& cfg) {
  const ChannelModel model = parse_channel_model("env_model", detail::require_key(cfg, "env_model"));
  const auto name_it = cfg.find("env_name");
  const bool has_c = cfg.count("env_c") != 0;
  const bool has_b = cfg.count("env_b") != 0;

  AerialEnvironment env;
  if (name_it != cfg.end() && name_it->second != "custom") {
    env = environment_preset(model, name_it->second);
  } else {
    if (!has_c) throw MissingKey("env_c");
    if (!has_b) throw MissingKey("env_b");
    env.model = model;
    env.name = "custom";
  }
  if (has_c) env.c = detail::number_key(cfg, "env_c");
  if (has_b) env.b = detail::number_key(cfg, "env_b");
  env.validate();
  return env;
}

}  // namespace dronecell
