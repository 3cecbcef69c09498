#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <utility>

#include "dronecell/channel.hpp"
#include "dronecell/errors.hpp"
#include "dronecell/geometry.hpp"
#include "dronecell/metric.hpp"
#include "dronecell/params.hpp"
#include "dronecell/quadrature.hpp"
#include "dronecell/uplink_power.hpp"

namespace dronecell {

using DerivStack = FixedVec<kMaxFadingOrder>;

struct CoverageResult {
  double value = 0.0;
  double est_error = 0.0;
  PowerRegime regime;
};

namespace detail {

inline double rising_factorial(int m, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= m + i;
  return r;
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// (1/w) * integral of g over [0, w]: the mean of an even integrand over a
/// symmetric angular range [-w, w] with uniform density 1/(2w).
template <class G>
auto angular_mean(G&& g, double w, const QuadratureSpec& q) {
  using V = std::decay_t<std::invoke_result_t<G&, double>>;
  const auto r = integrate(g, 0.0, w, q);
  return Estimate<V>{(1.0 / w) * r.value, r.error / w};
}

/// Integral over the TsUE region of g(z, omega) f_Omega(omega|z) f_Zc(z).
/// `make_inner(z)` returns the angular integrand for a fixed distance z.
///
/// The ring branch is integrated over z. The arc branch is integrated over
/// tau = omega_hat(z) instead: z(tau) follows the cell boundary, is smooth in
/// tau, and the Jacobian absorbs the square-root behaviour omega_hat has at
/// both ends of the branch.
template <class MakeInner>
auto integrate_tsue_region(const SystemParams& p, const QuadratureSpec& q, MakeInner&& make_inner) {
  using Inner = std::invoke_result_t<MakeInner&, double>;
  using V = std::decay_t<std::invoke_result_t<Inner&, double>>;
  const TsueSupport sup = tsue_support(p);
  const QuadratureSpec outer_q{q.rel_tol, q.abs_tol / 2.0, q.max_depth};
  const QuadratureSpec inner_q = outer_q.inner();

  QuadResult<V> total;
  bool have = false;
  auto accumulate = [&](const QuadResult<Estimate<V>>& r) {
    total.value = have ? total.value + r.value.value : r.value.value;
    total.error += r.error;
    total.evaluations += r.evaluations;
    have = true;
  };

  if (sup.z_ring_hi > sup.z_lo) {
    auto ring = [&](double z) {
      const auto inner = make_inner(z);
      const auto m = angular_mean(inner, kPi, inner_q);
      const double w = pdf_Zc(z, p);
      return Estimate<V>{w * m.value, w * m.error};
    };
    accumulate(integrate(ring, sup.z_lo, sup.z_ring_hi, outer_q));
  }
  if (p.d > 0.0) {
    auto arc = [&](double tau) {
      const double r = arc_radius(tau, p);
      const double z = std::sqrt(r * r + p.h * p.h);
      // f_Zc(z) dz with omega_hat(z) == tau and dz = (r / z) dr.
      const double density = 2.0 * z * tau / sup.area;
      const double jac = (r / z) * std::abs(arc_radius_derivative(tau, p));
      const auto inner = make_inner(z);
      const auto m = angular_mean(inner, tau, inner_q);
      const double w = density * jac;
      return Estimate<V>{w * m.value, w * m.error};
    };
    accumulate(integrate(arc, 0.0, sup.tau_max, outer_q));
  }
  if (!have) total.value = V{};
  return total;
}

inline double to_probability(double v, double err, const QuadratureSpec& q, const char* what) {
  if (v >= 0.0 && v <= 1.0) return v;
  const double overshoot = v < 0.0 ? -v : v - 1.0;
  if (overshoot < std::max(q.abs_tol, err)) return std::clamp(v, 0.0, 1.0);
  throw PrecisionLoss(std::string(what) + ": probability out of [0, 1]: " + std::to_string(v));
}

}  // namespace detail

/// Pr[G > s (I + sigma2)] for G ~ Gamma(m, 1/m), written as the finite
/// expansion
///   sum_{n<m} (-s)^n/n! e^{-s sigma2} sum_{k<=n} C(n,k) (-sigma2)^{n-k} L^(k)(s)
/// in terms of the derivatives L^(k)(s) of the Laplace transform of I.
/// Throws PrecisionLoss if a partial sum leaves [-10, 10].
inline double gamma_ccdf_series(int m, double s, double sigma2, std::span<const double> derivs) {
  if (m < 1 || static_cast<std::size_t>(m) > derivs.size()) {
    throw DomainError("gamma_ccdf_series: need m derivatives");
  }
  detail::CompensatedSum total;
  const double noise = std::exp(-s * sigma2);
  double s_pow = 1.0;  // (-s)^n / n!
  for (int n = 0; n < m; ++n) {
    if (n > 0) s_pow *= -s / n;
    detail::CompensatedSum inner;
    double binom = 1.0;                                 // C(n, k)
    double noise_pow = std::pow(-sigma2, static_cast<double>(n));  // (-sigma2)^{n-k}
    for (int k = 0; k <= n; ++k) {
      inner.add(binom * noise_pow * derivs[k]);
      binom = binom * (n - k) / (k + 1);
      noise_pow = sigma2 != 0.0 ? noise_pow / -sigma2 : (k + 1 == n ? 1.0 : 0.0);
    }
    total.add(s_pow * noise * inner.value());
    const double partial = total.value();
    if (!std::isfinite(partial) || std::abs(partial) > 10.0) {
      throw PrecisionLoss("gamma_ccdf_series: cancellation drove a partial sum to " +
                          std::to_string(partial));
    }
  }
  return total.value();
}

/// The same expansion written in terms of t_k = (-s)^k / k! L^(k)(s), all of
/// which are nonnegative for a Laplace transform:
///   e^{-s sigma2} sum_{n<m} sum_{k<=n} t_k (s sigma2)^{n-k} / (n-k)!.
/// `t_error` bounds the error of each t_k; the returned error is the exact
/// image of that bound through the (positive) coefficients.
inline Estimate<double> gamma_ccdf_series_scaled(int m, double s, double sigma2,
                                                 std::span<const double> t, double t_error) {
  if (m < 1 || static_cast<std::size_t>(m) > t.size()) {
    throw DomainError("gamma_ccdf_series: need m derivatives");
  }
  const double x = s * sigma2;
  std::array<double, kMaxFadingOrder> noise_terms{};  // x^j / j!
  noise_terms[0] = 1.0;
  for (int j = 1; j < m; ++j) noise_terms[j] = noise_terms[j - 1] * x / j;
  detail::CompensatedSum total;
  double coef_sum = 0.0;
  for (int n = 0; n < m; ++n) {
    for (int k = 0; k <= n; ++k) {
      total.add(t[k] * noise_terms[n - k]);
      coef_sum += noise_terms[n - k];
    }
  }
  const double noise = std::exp(-x);
  const double v = noise * total.value();
  if (!std::isfinite(v) || std::abs(v) > 10.0) {
    throw PrecisionLoss("gamma_ccdf_series: partial sum out of range: " + std::to_string(v));
  }
  return {v, noise * coef_sum * t_error};
}

// ---------------------------------------------------------------------------
// TBS uplink

/// Laplace transform of the AsD interference at the TBS, averaged over the
/// AsD position, its LOS state towards the ABS, and the Rayleigh fading of
/// the AsD-TBS link.
inline QuadResult<double> laplace_tbs_uplink(double s, const SystemParams& p,
                                             const AerialEnvironment& env,
                                             const QuadratureSpec& q = {}) {
  if (!(s >= 0.0)) throw DomainError("laplace_tbs_uplink: s >= 0 required");
  QuadResult<double> out;
  if (s == 0.0) {
    out.value = 1.0;
    return out;
  }
  const PowerRegime regime = classify_regime(p);
  const QuadratureSpec outer_q{q.rel_tol, q.abs_tol / 4.0, q.max_depth};
  const QuadratureSpec inner_q = outer_q.inner();
  const double half_alpha = p.alpha_b / 2.0;

  for (LosState state : {LosState::Los, LosState::Nlos}) {
    for (const PowerSegment& seg : power_segments(state, regime, p)) {
      if (seg.z_hi <= seg.z_lo) continue;
      auto outer = [&](double z) {
        const double r = ground_radius(z, p.h);
        const double sp = s * segment_power(state, z, seg.capped, p);
        const double pl = p_los(env, p.h, z);
        const double w = (state == LosState::Los ? pl : 1.0 - pl) * pdf_Zd(z, p);
        auto inner = [&](double theta) {
          const double da2 = r * r + p.d * p.d - 2.0 * r * p.d * std::cos(theta);
          const double da_pow = std::pow(std::max(da2, 0.0), half_alpha);
          return da_pow / (da_pow + sp);
        };
        const auto m = detail::angular_mean(inner, kPi, inner_q);
        return Estimate<double>{w * m.value, w * m.error};
      };
      const auto r = integrate(outer, seg.z_lo, seg.z_hi, outer_q);
      out.value += r.value.value;
      out.error += r.error;
      out.evaluations += r.evaluations;
    }
  }
  return out;
}

inline CoverageResult coverage_tbs_uplink(const SystemParams& p, const AerialEnvironment& env,
                                          const QuadratureSpec& q = {}) {
  const double s = p.gamma_ul_tbs / p.rho_b;
  const auto lt = laplace_tbs_uplink(s, p, env, q);
  const double noise = std::exp(-s * p.sigma2);
  CoverageResult c;
  c.est_error = noise * lt.error;
  c.value = detail::to_probability(noise * lt.value, c.est_error, q, "coverage_tbs_uplink");
  c.regime = classify_regime(p);
  return c;
}

// ---------------------------------------------------------------------------
// ABS uplink

namespace detail {

/// Integrates, over the TsUE region, the stack of s-derivatives k = 0..kmax
/// of the interference Laplace transform at the ABS. Each mixture term
/// m^m (m + s a)^-m, with a = rho_b eta_k d_T^alpha_b / z^alpha_k, is
/// differentiated under the integral:
///   (-a)^k m^m rising(m, k) (m + s a)^{-m-k}.
/// With `scaled` set, entry k is multiplied by (-s)^k / k! instead, which
/// keeps every entry in [0, C(m+k-1, k)] and gives the quadrature a
/// meaningful absolute tolerance.
inline QuadResult<DerivStack> abs_uplink_deriv_stack(double s, int kmax, bool scaled,
                                                     const SystemParams& p,
                                                     const AerialEnvironment& env,
                                                     const QuadratureSpec& q) {
  if (!(s >= 0.0)) throw DomainError("laplace_abs_uplink: s >= 0 required");
  if (kmax < 0 || kmax >= kMaxFadingOrder) throw DomainError("laplace_abs_uplink: order out of range");
  const double half_alpha = p.alpha_b / 2.0;
  // Per-order coefficient: rising(m, k), or C(m+k-1, k) = rising(m, k) / k!.
  std::array<double, kMaxFadingOrder> coef_los{}, coef_nlos{};
  double fact = 1.0;
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) fact *= k;
    coef_los[k] = rising_factorial(p.m_los, k) / (scaled ? fact : 1.0);
    coef_nlos[k] = rising_factorial(p.m_nlos, k) / (scaled ? fact : 1.0);
  }

  auto make_inner = [&](double z) {
    const double r = ground_radius(z, p.h);
    const double pl = p_los(env, p.h, z);
    const double c_los = p.rho_b * p.eta_los * std::pow(z, -p.alpha_los);
    const double c_nlos = p.rho_b * p.eta_nlos * std::pow(z, -p.alpha_nlos);
    return [=, &p, &coef_los, &coef_nlos](double omega) {
      const double dt2 = r * r + p.d * p.d - 2.0 * r * p.d * std::cos(omega);
      const double dt_pow = std::pow(std::max(dt2, 0.0), half_alpha);
      DerivStack out;
      auto add_term = [&](double weight, int m, double a, const auto& coef) {
        if (weight == 0.0) return;
        const double base = m + s * a;
        double term = weight * std::pow(m / base, m);
        const double ratio = scaled ? s * a / base : -a / base;
        for (int k = 0; k <= kmax; ++k) {
          out[k] += term * coef[k];
          term *= ratio;
        }
      };
      add_term(pl, p.m_los, c_los * dt_pow, coef_los);
      add_term(1.0 - pl, p.m_nlos, c_nlos * dt_pow, coef_nlos);
      return out;
    };
  };
  return integrate_tsue_region(p, q, make_inner);
}

}  // namespace detail

/// Derivatives d^k/ds^k, k = 0..kmax, of the Laplace transform of the TsUE
/// interference at the ABS.
inline QuadResult<DerivStack> laplace_abs_uplink_derivs(double s, int kmax, const SystemParams& p,
                                                        const AerialEnvironment& env,
                                                        const QuadratureSpec& q = {}) {
  return detail::abs_uplink_deriv_stack(s, kmax, false, p, env, q);
}

inline QuadResult<double> laplace_abs_uplink_deriv(double s, int k, const SystemParams& p,
                                                   const AerialEnvironment& env,
                                                   const QuadratureSpec& q = {}) {
  if (k < 0 || k > std::max(p.m_los, p.m_nlos) - 1) {
    throw DomainError("laplace_abs_uplink_deriv: k must lie in [0, max(m_L, m_N) - 1]");
  }
  const auto r = laplace_abs_uplink_derivs(s, k, p, env, q);
  return {r.value[k], r.error, r.evaluations, r.panels};
}

/// ABS uplink coverage: the serving-distance integral, per link state and
/// per power segment of the regime, of the gamma-CCDF expansion at
/// s = m_k gamma z^alpha_k / (eta_k P). Under channel inversion s reduces to
/// m_k gamma / rho_d, so the interference derivatives are shared across the
/// whole segment.
inline CoverageResult coverage_abs_uplink(const SystemParams& p, const AerialEnvironment& env,
                                          const QuadratureSpec& q = {}) {
  const PowerRegime regime = classify_regime(p);
  const QuadratureSpec outer_q{q.rel_tol, q.abs_tol / 4.0, q.max_depth};
  const QuadratureSpec inner_q = outer_q.inner();
  std::map<std::pair<double, int>, QuadResult<DerivStack>> cache;
  auto terms_at = [&](double s, int kmax, bool reuse) {
    if (!reuse) return detail::abs_uplink_deriv_stack(s, kmax, true, p, env, inner_q);
    const auto key = std::make_pair(s, kmax);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache.emplace(key, detail::abs_uplink_deriv_stack(s, kmax, true, p, env, inner_q)).first;
    }
    return it->second;
  };

  CoverageResult c;
  c.regime = regime;
  double total = 0.0;
  for (LosState state : {LosState::Los, LosState::Nlos}) {
    const AerialLink link = aerial_link(state, p);
    for (const PowerSegment& seg : power_segments(state, regime, p)) {
      if (seg.z_hi <= seg.z_lo) continue;
      auto outer = [&](double z) {
        const double s = seg.capped
                             ? link.m * p.gamma_ul_abs * std::pow(z, link.alpha) / (link.eta * p.p_max)
                             : link.m * p.gamma_ul_abs / p.rho_d;
        const auto t = terms_at(s, link.m - 1, !seg.capped);
        const auto series = gamma_ccdf_series_scaled(link.m, s, p.sigma2, t.value.v, t.error);
        const double pl = p_los(env, p.h, z);
        const double w = (state == LosState::Los ? pl : 1.0 - pl) * pdf_Zd(z, p);
        return Estimate<double>{w * series.value, w * series.error};
      };
      const auto r = integrate(outer, seg.z_lo, seg.z_hi, outer_q);
      total += r.value.value;
      c.est_error += r.error;
    }
  }
  c.value = detail::to_probability(total, c.est_error, q, "coverage_abs_uplink");
  return c;
}

// ---------------------------------------------------------------------------
// TsUE downlink

/// Laplace transform of the ABS interference at a TsUE at distance z from
/// the ABS, averaged over the LOS state and Nakagami fading of that link.
inline double laplace_tsue_downlink(double s, double z, const SystemParams& p,
                                    const AerialEnvironment& env) {
  const double pl = p_los(env, p.h, z);
  const double a_los = s * p.p_a * p.eta_los * std::pow(z, -p.alpha_los);
  const double a_nlos = s * p.p_a * p.eta_nlos * std::pow(z, -p.alpha_nlos);
  return pl * std::pow(p.m_los / (p.m_los + a_los), p.m_los) +
         (1.0 - pl) * std::pow(p.m_nlos / (p.m_nlos + a_nlos), p.m_nlos);
}

inline CoverageResult coverage_tsue_downlink(const SystemParams& p, const AerialEnvironment& env,
                                             const QuadratureSpec& q = {}) {
  const double half_alpha = p.alpha_b / 2.0;
  const double k = p.gamma_dl_tsue / p.p_t;
  auto make_inner = [&](double z) {
    const double r = ground_radius(z, p.h);
    const double pl = p_los(env, p.h, z);
    const double g_los = p.p_a * p.eta_los * std::pow(z, -p.alpha_los);
    const double g_nlos = p.p_a * p.eta_nlos * std::pow(z, -p.alpha_nlos);
    return [=, &p](double omega) {
      const double dt2 = r * r + p.d * p.d - 2.0 * r * p.d * std::cos(omega);
      const double s = k * std::pow(std::max(dt2, 0.0), half_alpha);
      const double lt = pl * std::pow(p.m_los / (p.m_los + s * g_los), p.m_los) +
                        (1.0 - pl) * std::pow(p.m_nlos / (p.m_nlos + s * g_nlos), p.m_nlos);
      return std::exp(-s * p.sigma2) * lt;
    };
  };
  const auto r = detail::integrate_tsue_region(p, q, make_inner);
  CoverageResult c;
  c.est_error = r.error;
  c.value = detail::to_probability(r.value, r.error, q, "coverage_tsue_downlink");
  c.regime = classify_regime(p);
  return c;
}

// ---------------------------------------------------------------------------
// AsD downlink

/// k-th s-derivative of the Laplace transform 1/(1 + s P_t / d_A^alpha_b) of
/// the TBS interference at an AsD at ground distance d_A from the TBS:
/// k! (-b)^k (1 + s b)^{-k-1} with b = P_t / d_A^alpha_b.
inline double laplace_asd_downlink_deriv(double s, int k, double d_a, const SystemParams& p) {
  const double b = p.p_t / std::pow(d_a, p.alpha_b);
  const double base = 1.0 + s * b;
  double v = 1.0 / base;
  for (int j = 1; j <= k; ++j) v *= j * (-b / base);
  return v;
}

inline CoverageResult coverage_asd_downlink(const SystemParams& p, const AerialEnvironment& env,
                                            const QuadratureSpec& q = {}) {
  const AsdSupport sup = asd_support(p);
  const QuadratureSpec outer_q{q.rel_tol, q.abs_tol / 2.0, q.max_depth};
  const QuadratureSpec inner_q = outer_q.inner();
  const double half_alpha = p.alpha_b / 2.0;

  CoverageResult c;
  c.regime = classify_regime(p);
  double total = 0.0;
  for (LosState state : {LosState::Los, LosState::Nlos}) {
    const AerialLink link = aerial_link(state, p);
    auto outer = [&](double z) {
      const double r = ground_radius(z, p.h);
      const double s = link.m * p.gamma_dl_asd * std::pow(z, link.alpha) / (p.p_a * link.eta);
      const double pl = p_los(env, p.h, z);
      const double w = (state == LosState::Los ? pl : 1.0 - pl) * pdf_Zd(z, p);
      auto inner = [&](double theta) {
        const double da2 = r * r + p.d * p.d - 2.0 * r * p.d * std::cos(theta);
        // t_k = (-s)^k/k! D_k = u (1 - u)^k with u = 1 / (1 + s b).
        const double da_pow = std::pow(std::max(da2, 0.0), half_alpha);
        const double denom = da_pow + s * p.p_t;
        const double u = denom > 0.0 ? da_pow / denom : 1.0;
        std::array<double, kMaxFadingOrder> t{};
        double v = u;
        for (int k = 0; k < link.m; ++k) {
          t[k] = v;
          v *= 1.0 - u;
        }
        return gamma_ccdf_series_scaled(link.m, s, p.sigma2, t, 0.0).value;
      };
      const auto m = detail::angular_mean(inner, kPi, inner_q);
      return Estimate<double>{w * m.value, w * m.error};
    };
    const auto r = integrate(outer, sup.z_lo, sup.z_hi, outer_q);
    total += r.value.value;
    c.est_error += r.error;
  }
  c.value = detail::to_probability(total, c.est_error, q, "coverage_asd_downlink");
  return c;
}

inline CoverageResult coverage(Metric m, const SystemParams& p, const AerialEnvironment& env,
                               const QuadratureSpec& q = {}) {
  switch (m) {
    case Metric::TbsUplink: return coverage_tbs_uplink(p, env, q);
    case Metric::AbsUplink: return coverage_abs_uplink(p, env, q);
    case Metric::TsueDownlink: return coverage_tsue_downlink(p, env, q);
    case Metric::AsdDownlink: return coverage_asd_downlink(p, env, q);
  }
  throw DomainError("coverage: unknown metric");
}

}  // namespace dronecell
