#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string_view>

#include "dronecell/errors.hpp"
#include "dronecell/params.hpp"
#include "dronecell/rng.hpp"

namespace dronecell {

enum class LosState { Los, Nlos };

inline std::string_view to_string(LosState s) { return s == LosState::Los ? "LOS" : "NLOS"; }

/// Elevation angle in degrees of a link of 3-D length z from height h.
inline double elevation_deg(double h, double z) {
  return std::asin(std::min(1.0, h / z)) * (180.0 / std::numbers::pi);
}

/// LOS probability of an aerial link with ABS height h and 3-D length z.
///
/// Model 2 is an empirical fit that goes negative below 15 degrees and can
/// exceed 1 for large C2; its output is clamped to [0, 1].
inline double p_los(const AerialEnvironment& env, double h, double z) {
  if (!(h > 0.0) || !(z > 0.0) || h > z * (1.0 + 1e-12)) {
    throw DomainError("p_los: need 0 < h <= z");
  }
  const double theta = elevation_deg(h, z);
  switch (env.model) {
    case ChannelModel::Model1:
      return 1.0 / (1.0 + env.c * std::exp(-env.b * (theta - env.c)));
    case ChannelModel::Model2: {
      const double base = theta - 15.0;
      if (base <= 0.0) return 0.0;
      return std::clamp(env.c * std::pow(base, env.b), 0.0, 1.0);
    }
  }
  return 0.0;
}

inline double p_nlos(const AerialEnvironment& env, double h, double z) {
  return 1.0 - p_los(env, h, z);
}

struct AerialLink {
  double eta;
  double alpha;
  int m;
};

inline AerialLink aerial_link(LosState s, const SystemParams& p) {
  return s == LosState::Los ? AerialLink{p.eta_los, p.alpha_los, p.m_los}
                            : AerialLink{p.eta_nlos, p.alpha_nlos, p.m_nlos};
}

/// Average aerial power gain eta_k * z^-alpha_k.
inline double aerial_path_gain(LosState s, double z, const SystemParams& p) {
  const AerialLink k = aerial_link(s, p);
  return k.eta * std::pow(z, -k.alpha);
}

/// Average terrestrial power gain l^-alpha_b.
inline double terrestrial_path_gain(double l, const SystemParams& p) {
  return std::pow(l, -p.alpha_b);
}

// Small-scale fading power gains, all with unit mean.

enum class FadingLink { Terrestrial, AerialLos, AerialNlos };

inline FadingLink fading_link(LosState s) {
  return s == LosState::Los ? FadingLink::AerialLos : FadingLink::AerialNlos;
}

/// Terrestrial links are Rayleigh (exponential power gain); aerial links are
/// Nakagami-m (gamma power gain with shape m and mean 1).
inline double sample_fading(FadingLink link, const SystemParams& p, RandomStream& rng) {
  switch (link) {
    case FadingLink::Terrestrial:
      return rng.exponential();
    case FadingLink::AerialLos:
      return rng.gamma_unit_mean(p.m_los);
    case FadingLink::AerialNlos:
      return rng.gamma_unit_mean(p.m_nlos);
  }
  return 1.0;
}

}  // namespace dronecell
