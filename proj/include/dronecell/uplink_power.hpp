#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include "dronecell/channel.hpp"
#include "dronecell/geometry.hpp"
#include "dronecell/params.hpp"

namespace dronecell {

/// AsD transmit power: channel inversion towards the ABS sensitivity,
/// capped at P_max.
inline double asd_tx_power(LosState s, double z, const SystemParams& p) {
  const AerialLink k = aerial_link(s, p);
  return std::min(p.p_max, (p.rho_d / k.eta) * std::pow(z, k.alpha));
}

inline double inversion_power(LosState s, double z, const SystemParams& p) {
  const AerialLink k = aerial_link(s, p);
  return (p.rho_d / k.eta) * std::pow(z, k.alpha);
}

/// How the power cap acts on one aerial link state across the whole stadium.
enum class CapState {
  Inversion,  // no AsD reaches P_max (h <= hcrit_k)
  Split,      // AsDs beyond zmax_k are capped (hcrit_k < h < zmax_k)
  Capped,     // every AsD transmits P_max (h >= zmax_k)
};

enum class RegimeBranch { Cond1L, Cond4or8, Cond5, Cond6, Cond7or9, Cond3N };

inline std::string_view to_string(RegimeBranch b) {
  switch (b) {
    case RegimeBranch::Cond1L: return "1L";
    case RegimeBranch::Cond4or8: return "4|8";
    case RegimeBranch::Cond5: return "5";
    case RegimeBranch::Cond6: return "6";
    case RegimeBranch::Cond7or9: return "7|9";
    case RegimeBranch::Cond3N: return "3N";
  }
  return "?";
}

struct PowerRegime {
  RegimeBranch branch = RegimeBranch::Cond3N;
  CapState los = CapState::Inversion;
  CapState nlos = CapState::Inversion;

  CapState state(LosState s) const { return s == LosState::Los ? los : nlos; }
  friend bool operator==(const PowerRegime&, const PowerRegime&) = default;
};

inline CapState cap_state(double h, double zmax, double hcrit) {
  if (h >= zmax) return CapState::Capped;
  if (h <= hcrit) return CapState::Inversion;
  return CapState::Split;
}

/// Maps the ABS height to the piecewise case of the uplink Laplace transform
/// and ABS coverage formulas. Each link state is classified on its own
/// (inclusive at h = zmax_k and at h = hcrit_k); the pair determines the
/// case. A LOS split with a fully inverted NLOS state, only possible when
/// zmax_N > zmax_L, is reported as Cond5, whose limits it shares for the LOS
/// term.
inline PowerRegime classify_regime(const SystemParams& p) {
  const RegimeBoundaries rb = regime_boundaries(p);
  PowerRegime r;
  r.los = cap_state(p.h, rb.zmax_los, rb.hcrit_los);
  r.nlos = cap_state(p.h, rb.zmax_nlos, rb.hcrit_nlos);
  using C = CapState;
  if (r.los == C::Capped) {
    r.branch = RegimeBranch::Cond1L;
  } else if (r.los == C::Split) {
    r.branch = r.nlos == C::Capped ? RegimeBranch::Cond4or8 : RegimeBranch::Cond5;
  } else {
    switch (r.nlos) {
      case C::Capped: r.branch = RegimeBranch::Cond6; break;
      case C::Split: r.branch = RegimeBranch::Cond7or9; break;
      case C::Inversion: r.branch = RegimeBranch::Cond3N; break;
    }
  }
  return r;
}

/// One z-interval over which the AsD power follows a single law.
struct PowerSegment {
  double z_lo, z_hi;
  bool capped;
};

/// Integration limits over the AsD distance for one link state, as dictated
/// by the regime: all-inversion, all-P_max, or split at zmax_k.
inline std::vector<PowerSegment> power_segments(LosState s, const PowerRegime& regime,
                                                const SystemParams& p) {
  const AsdSupport sup = asd_support(p);
  const RegimeBoundaries rb = regime_boundaries(p);
  const double zmax = s == LosState::Los ? rb.zmax_los : rb.zmax_nlos;
  switch (regime.state(s)) {
    case CapState::Inversion: return {{sup.z_lo, sup.z_hi, false}};
    case CapState::Capped: return {{sup.z_lo, sup.z_hi, true}};
    case CapState::Split: return {{sup.z_lo, zmax, false}, {zmax, sup.z_hi, true}};
  }
  return {};
}

inline double segment_power(LosState s, double z, bool capped, const SystemParams& p) {
  return capped ? p.p_max : inversion_power(s, z, p);
}

}  // namespace dronecell
