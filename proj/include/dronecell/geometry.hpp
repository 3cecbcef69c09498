#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dronecell/errors.hpp"
#include "dronecell/params.hpp"
#include "dronecell/rng.hpp"

namespace dronecell {

inline constexpr double kPi = std::numbers::pi;

/// A ground position in the frame with the stadium centre at the origin and
/// the TBS at (d, 0). Angles are measured at the stadium centre from the
/// direction of the TBS.
struct GroundPoint {
  double x = 0.0;
  double y = 0.0;

  double radius() const { return std::hypot(x, y); }
  double angle() const { return std::atan2(y, x); }
  double distance_to_tbs(const SystemParams& p) const { return std::hypot(x - p.d, y); }
  double distance_to_abs(const SystemParams& p) const {
    return std::sqrt(x * x + y * y + p.h * p.h);
  }
  bool in_stadium(const SystemParams& p) const { return x * x + y * y <= p.r2 * p.r2; }
  bool in_cell(const SystemParams& p) const {
    return (x - p.d) * (x - p.d) + y * y <= p.r1 * p.r1;
  }
};

inline double ground_radius(double z, double h) { return std::sqrt(std::max(0.0, z * z - h * h)); }

// ---------------------------------------------------------------------------
// AsD side: uniform in the stadium disk

struct AsdSupport {
  double z_lo;  // h
  double z_hi;  // sqrt(h^2 + R2^2)
};

inline AsdSupport asd_support(const SystemParams& p) {
  return {p.h, std::sqrt(p.h * p.h + p.r2 * p.r2)};
}

/// Density of the AsD-to-ABS distance.
inline double pdf_Zd(double z, const SystemParams& p) {
  const AsdSupport s = asd_support(p);
  if (z < s.z_lo || z > s.z_hi) return 0.0;
  return 2.0 * z / (p.r2 * p.r2);
}

// ---------------------------------------------------------------------------
// TsUE side: uniform over the cell minus the stadium

/// Radii (ground projections) delimiting the two branches. For r in
/// [r_lo, r_ring_hi] the whole circle of radius r lies in the TsUE region;
/// for r in (r_ring_hi, r_hi] only the arc |omega| <= omega_hat(r) does.
/// When the stadium pokes out of the cell (d + R2 > R1) the ring branch is
/// empty and the arc branch starts at R2.
struct TsueSupport {
  double r_lo, r_ring_hi, r_hi;
  double z_lo, z_ring_hi, z_hi;
  double area;     // |S1 \ S2|
  double tau_max;  // omega_hat at r_ring_hi (pi unless the stadium pokes out)
};

inline double omega_hat_at_radius(double r, const SystemParams& p) {
  const double c = (p.d * p.d + r * r - p.r1 * p.r1) / (2.0 * p.d * r);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline TsueSupport tsue_support(const SystemParams& p) {
  TsueSupport s{};
  const double h2 = p.h * p.h;
  s.r_lo = p.r2;
  s.r_hi = p.r1 + p.d;
  s.r_ring_hi = std::max(p.r2, p.r1 - p.d);
  s.z_lo = std::sqrt(s.r_lo * s.r_lo + h2);
  s.z_ring_hi = std::sqrt(s.r_ring_hi * s.r_ring_hi + h2);
  s.z_hi = std::sqrt(s.r_hi * s.r_hi + h2);
  if (p.d + p.r2 <= p.r1) {
    s.area = kPi * (p.r1 * p.r1 - p.r2 * p.r2);
    s.tau_max = kPi;
  } else {
    // Cell area minus the lens shared with the stadium.
    const double R = p.r1, r = p.r2, d = p.d;
    const double lens = r * r * std::acos(std::clamp((d * d + r * r - R * R) / (2 * d * r), -1.0, 1.0)) +
                        R * R * std::acos(std::clamp((d * d + R * R - r * r) / (2 * d * R), -1.0, 1.0)) -
                        0.5 * std::sqrt(std::max(0.0, (-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R)));
    s.area = kPi * R * R - lens;
    s.tau_max = omega_hat_at_radius(s.r_ring_hi, p);
  }
  return s;
}

inline bool in_arc_branch(double z, const SystemParams& p) {
  const TsueSupport s = tsue_support(p);
  return p.d > 0.0 && z > s.z_ring_hi && z <= s.z_hi;
}

/// Half-angle of the arc of the circle of ground radius sqrt(z^2 - h^2)
/// (centred on the stadium) that lies inside the cell.
inline double omega_hat(double z, const SystemParams& p) {
  if (!in_arc_branch(z, p)) throw DomainError("omega_hat: z outside the arc branch");
  return omega_hat_at_radius(ground_radius(z, p.h), p);
}

/// The same half-angle in arcsec form; kept as a cross-check of omega_hat.
inline double omega_hat_arcsec(double z, const SystemParams& p) {
  if (!in_arc_branch(z, p)) throw DomainError("omega_hat_arcsec: z outside the arc branch");
  const double r = ground_radius(z, p.h);
  const double x = 2.0 * p.d * r / (p.d * p.d + z * z - p.h * p.h - p.r1 * p.r1);
  return std::acos(std::clamp(1.0 / x, -1.0, 1.0));
}

/// Density of the TsUE-to-ABS distance.
inline double pdf_Zc(double z, const SystemParams& p) {
  const TsueSupport s = tsue_support(p);
  if (z < s.z_lo || z > s.z_hi) return 0.0;
  if (z <= s.z_ring_hi || p.d == 0.0) return 2.0 * z * kPi / s.area;
  return 2.0 * z * omega_hat(z, p) / s.area;
}

/// Conditional density of the TsUE angle given its distance z to the ABS.
inline double pdf_Omega(double omega, double z, const SystemParams& p) {
  const TsueSupport s = tsue_support(p);
  if (z < s.z_lo || z > s.z_hi) throw DomainError("pdf_Omega: z outside the TsUE support");
  if (z <= s.z_ring_hi || p.d == 0.0) return 1.0 / (2.0 * kPi);
  const double w = omega_hat(z, p);
  return std::abs(omega) <= w ? 1.0 / (2.0 * w) : 0.0;
}

/// Ground distance to the TBS of a node at 3-D distance z from the ABS and
/// angle `angle` (cosine rule).
inline double ground_distance_to_tbs(double z, double angle, const SystemParams& p) {
  const double r = ground_radius(z, p.h);
  const double sq = r * r + p.d * p.d - 2.0 * r * p.d * std::cos(angle);
  return std::sqrt(std::max(0.0, sq));
}

/// Ground radius on the cell boundary in direction tau. On the arc branch
/// omega_hat(arc_radius(tau)) == tau, which lets the arc branch be integrated
/// over tau instead of z without the square-root endpoint behaviour of
/// omega_hat.
inline double arc_radius(double tau, const SystemParams& p) {
  const double st = std::sin(tau);
  return p.d * std::cos(tau) + std::sqrt(p.r1 * p.r1 - p.d * p.d * st * st);
}

inline double arc_radius_derivative(double tau, const SystemParams& p) {
  const double st = std::sin(tau);
  const double root = std::sqrt(p.r1 * p.r1 - p.d * p.d * st * st);
  return -p.d * st * (1.0 + p.d * std::cos(tau) / root);
}

// ---------------------------------------------------------------------------
// Position samplers

inline GroundPoint sample_asd_position(const SystemParams& p, RandomStream& rng) {
  const double r = p.r2 * std::sqrt(rng.uniform());
  const double phi = 2.0 * kPi * rng.uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

/// Uniform over the cell minus the stadium, by rejection from the cell disk.
inline GroundPoint sample_tsue_position(const SystemParams& p, RandomStream& rng) {
  for (;;) {
    const double r = p.r1 * std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    const GroundPoint g{p.d + r * std::cos(phi), r * std::sin(phi)};
    if (g.x * g.x + g.y * g.y >= p.r2 * p.r2) return g;
  }
}

}  // namespace dronecell
