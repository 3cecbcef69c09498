#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "dronecell/errors.hpp"

namespace dronecell {

struct QuadratureSpec {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  int max_depth = 30;

  void validate() const {
    if (!(rel_tol > 0.0)) throw InvalidValue("rel_tol", "tolerance must be > 0");
    if (!(abs_tol > 0.0)) throw InvalidValue("abs_tol", "tolerance must be > 0");
    if (max_depth < 1) throw InvalidValue("max_depth", "max_depth >= 1 required");
  }

  // Spec for an integral nested inside another one.
  QuadratureSpec inner() const { return {rel_tol / 10.0, abs_tol / 10.0, max_depth}; }
};

// ---------------------------------------------------------------------------
// Value types the integrator accepts. Anything with +, scalar *, quad_norm()
// and quad_carried() works; double and the two below are provided.

inline double quad_norm(double v) { return std::abs(v); }
inline double quad_carried(double) { return 0.0; }

/// Fixed-capacity vector of doubles, used for stacks of Laplace-transform
/// derivatives that are integrated together.
template <std::size_t N>
struct FixedVec {
  std::array<double, N> v{};

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  FixedVec& operator+=(const FixedVec& o) {
    for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  friend FixedVec operator+(FixedVec a, const FixedVec& b) { return a += b; }
  friend FixedVec operator-(FixedVec a, const FixedVec& b) {
    for (std::size_t i = 0; i < N; ++i) a.v[i] -= b.v[i];
    return a;
  }
  friend FixedVec operator*(double s, FixedVec a) {
    for (auto& x : a.v) x *= s;
    return a;
  }
  friend double quad_norm(const FixedVec& a) {
    double m = 0.0;
    for (double x : a.v) m = std::max(m, std::abs(x));
    return m;
  }
  friend double quad_carried(const FixedVec&) { return 0.0; }
};

/// A value paired with the error already accumulated in computing it (for
/// instance by an inner quadrature). The carried error integrates linearly
/// alongside the value.
template <class V>
struct Estimate {
  V value{};
  double error = 0.0;

  friend Estimate operator+(const Estimate& a, const Estimate& b) {
    return {a.value + b.value, a.error + b.error};
  }
  friend Estimate operator-(const Estimate& a, const Estimate& b) {
    return {a.value - b.value, a.error + b.error};
  }
  friend Estimate operator*(double s, const Estimate& a) {
    return {s * a.value, std::abs(s) * a.error};
  }
  friend double quad_norm(const Estimate& a) { return quad_norm(a.value); }
  friend double quad_carried(const Estimate& a) { return a.error + quad_carried(a.value); }
};

template <class V>
struct QuadResult {
  V value{};
  double error = 0.0;  // rule error plus carried inner error
  int evaluations = 0;
  int panels = 0;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600445127218, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7, 9).
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class V>
struct Panel {
  double a, b;
  int depth;
  V kronrod;
  double rule_error;  // |K - G|
  double carried;
};

template <class V, class F>
Panel<V> apply_rule(F& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const V fc = f(center);
  V kronrod = kKronrodWeights[10] * fc;
  V gauss{};
  bool gauss_init = false;
  for (std::size_t i = 0; i < 10; ++i) {
    const double dx = half * kKronrodNodes[i];
    const V pair = f(center - dx) + f(center + dx);
    kronrod = kronrod + kKronrodWeights[i] * pair;
    if (i % 2 == 1) {
      const V g = kGaussWeights[i / 2] * pair;
      gauss = gauss_init ? gauss + g : g;
      gauss_init = true;
    }
  }
  kronrod = half * kronrod;
  gauss = half * gauss;
  const double rule_error = quad_norm(kronrod - gauss);
  const double carried = quad_carried(kronrod);
  return {a, b, depth, std::move(kronrod), rule_error, carried};
}

}  // namespace detail

/// Globally adaptive 21-point Gauss-Kronrod integration over the panels
/// delimited by `breakpoints` (sorted, at least two entries). The panel with
/// the largest rule error is bisected until the total error bound satisfies
/// max(abs_tol, rel_tol * |I|). Throws QuadratureFailure when only panels at
/// max_depth remain and the bound is still not met.
template <class F>
auto integrate(F&& f, std::span<const double> breakpoints, const QuadratureSpec& spec)
    -> QuadResult<std::decay_t<std::invoke_result_t<F&, double>>> {
  using V = std::decay_t<std::invoke_result_t<F&, double>>;
  using detail::Panel;

  if (breakpoints.size() < 2) throw DomainError("integrate: need at least two breakpoints");
  std::vector<Panel<V>> panels;
  int evaluations = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (!(b >= a)) throw DomainError("integrate: breakpoints must be nondecreasing");
    if (b == a) continue;
    panels.push_back(detail::apply_rule<V>(f, a, b, 0));
    evaluations += 21;
  }

  QuadResult<V> out;
  if (panels.empty()) {
    // Degenerate interval: the zero of V is whatever the integrand returns
    // scaled by zero.
    out.value = 0.0 * f(breakpoints.front());
    out.evaluations = 1;
    return out;
  }

  constexpr std::size_t kMaxPanels = 20000;
  for (;;) {
    V total = panels.front().kronrod;
    double err = panels.front().rule_error + panels.front().carried;
    for (std::size_t i = 1; i < panels.size(); ++i) {
      total = total + panels[i].kronrod;
      err += panels[i].rule_error + panels[i].carried;
    }
    const double tol = std::max(spec.abs_tol, spec.rel_tol * quad_norm(total));
    if (err <= tol) {
      out.value = std::move(total);
      out.error = err;
      out.evaluations = evaluations;
      out.panels = static_cast<int>(panels.size());
      return out;
    }

    std::size_t worst = panels.size();
    double worst_err = -1.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (panels[i].depth < spec.max_depth && panels[i].rule_error > worst_err) {
        worst_err = panels[i].rule_error;
        worst = i;
      }
    }
    if (worst == panels.size() || worst_err <= 0.0 || panels.size() >= kMaxPanels) {
      throw QuadratureFailure("adaptive quadrature did not converge: error bound " +
                              std::to_string(err) + " > tolerance " + std::to_string(tol));
    }
    const Panel<V> p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    panels[worst] = detail::apply_rule<V>(f, p.a, mid, p.depth + 1);
    panels.push_back(detail::apply_rule<V>(f, mid, p.b, p.depth + 1));
    evaluations += 42;
  }
}

template <class F>
auto integrate(F&& f, double a, double b, const QuadratureSpec& spec) {
  const std::array<double, 2> pts = {a, b};
  return integrate(std::forward<F>(f), std::span<const double>(pts), spec);
}

/// Sorted breakpoints in [lo, hi]: the endpoints plus any interior points.
inline std::vector<double> panel_breaks(double lo, double hi, std::initializer_list<double> interior) {
  std::vector<double> pts = {lo};
  for (double x : interior) {
    if (x > lo && x < hi) pts.push_back(x);
  }
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace dronecell
