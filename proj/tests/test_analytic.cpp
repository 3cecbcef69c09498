#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "dronecell/analytic.hpp"
#include "dronecell/montecarlo.hpp"
#include "oracles.hpp"

using namespace dronecell;

namespace {

const AerialEnvironment kUrban = environment_preset(ChannelModel::Model1, "urban");

SystemParams at(double h) {
  SystemParams p;
  p.h = h;
  return p;
}

double db(double x) { return std::pow(10.0, x / 10.0); }

}  // namespace

// ---------------------------------------------------------------------------
// Gamma-CCDF expansion

// With a deterministic interference I, L(s) = exp(-s I) and the expansion
// must equal the regularized upper incomplete gamma Q(m, s (I + sigma2)).
TEST(GammaSeries, MatchesIncompleteGammaForPointInterference) {
  for (int m : {1, 2, 5, 9}) {
    for (double s : {0.1, 1.0, 3.0}) {
      const double interference = 0.7, sigma2 = 0.4;
      std::vector<double> raw(m), scaled(m);
      double fact = 1.0;
      for (int k = 0; k < m; ++k) {
        if (k > 0) fact *= k;
        raw[k] = std::pow(-interference, k) * std::exp(-s * interference);
        scaled[k] = std::pow(-s, k) / fact * raw[k];
      }
      const double expect = boost::math::gamma_q(m, s * (interference + sigma2));
      EXPECT_NEAR(gamma_ccdf_series(m, s, sigma2, raw), expect, 1e-13) << m << " " << s;
      EXPECT_NEAR(gamma_ccdf_series_scaled(m, s, sigma2, scaled, 0.0).value, expect, 1e-13);
    }
  }
}

TEST(GammaSeries, RayleighTermIsNoiseTimesLaplace) {
  const std::vector<double> d = {0.37};
  EXPECT_DOUBLE_EQ(gamma_ccdf_series(1, 2.0, 0.5, d), std::exp(-1.0) * 0.37);
}

TEST(GammaSeries, ReportsPrecisionLoss) {
  const std::vector<double> wild = {1.0, -1e6, 1e9};
  EXPECT_THROW(gamma_ccdf_series(3, 1.0, 0.0, wild), PrecisionLoss);
  const std::vector<double> short_stack = {1.0};
  EXPECT_THROW(gamma_ccdf_series(2, 1.0, 0.0, short_stack), DomainError);
}

TEST(GammaSeries, ErrorBoundScalesWithCoefficients) {
  const std::vector<double> t = {0.5, 0.2};
  const auto e = gamma_ccdf_series_scaled(2, 1.0, 1.0, t, 1e-6);
  // Coefficients: n=0 -> 1; n=1 -> x + 1 with x = 1; total 3, times e^-1.
  EXPECT_NEAR(e.error, 3.0 * std::exp(-1.0) * 1e-6, 1e-18);
}

// ---------------------------------------------------------------------------
// Laplace transforms

TEST(LaplaceTbsUplink, UnitAtZeroAndDecreasing) {
  const SystemParams p = at(400.0);
  EXPECT_EQ(laplace_tbs_uplink(0.0, p, kUrban).value, 1.0);
  double prev = 1.0;
  for (double s : {1e6, 1e7, 1e8, 1e9, 1e10}) {
    const double v = laplace_tbs_uplink(s, p, kUrban).value;
    EXPECT_LE(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
  EXPECT_THROW(laplace_tbs_uplink(-1.0, p, kUrban), DomainError);
}

TEST(LaplaceTbsUplink, VanishingInterferenceFarAway) {
  SystemParams p = at(400.0);
  p.d = 10.0 * p.r1;  // outside the validated geometry on purpose
  EXPECT_GE(laplace_tbs_uplink(p.gamma_ul_tbs / p.rho_b, p, kUrban).value, 0.999);
}

// Monte Carlo oracle for E[exp(-s I)] written from the model description:
// AsD uniform in the stadium, LOS towards the ABS with p_los, power inverted
// towards the ABS and capped, Rayleigh fading on the AsD-TBS link.
TEST(LaplaceTbsUplink, MatchesMonteCarloOracle) {
  const SystemParams p = at(400.0);
  const double s = p.gamma_ul_tbs / p.rho_b;
  RandomStream rng(2024, 0);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = p.r2 * std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    const double x = r * std::cos(phi), y = r * std::sin(phi);
    const double z = std::sqrt(r * r + p.h * p.h);
    const double theta = std::asin(p.h / z) * 180.0 / kPi;
    const double plos = 1.0 / (1.0 + kUrban.c * std::exp(-kUrban.b * (theta - kUrban.c)));
    const bool los = rng.uniform() < plos;
    const double eta = los ? p.eta_los : p.eta_nlos;
    const double alpha = los ? p.alpha_los : p.alpha_nlos;
    const double power = std::min(p.p_max, p.rho_d / eta * std::pow(z, alpha));
    const double fade = -std::log(1.0 - rng.uniform());
    const double da = std::hypot(x - p.d, y);
    const double v = std::exp(-s * power * fade * std::pow(da, -p.alpha_b));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  EXPECT_NEAR(laplace_tbs_uplink(s, p, kUrban).value, mean, 3.0 * se);
}

TEST(LaplaceAbsUplink, NormalizationAndAlternatingSigns) {
  const SystemParams p = at(400.0);
  EXPECT_NEAR(laplace_abs_uplink_deriv(0.0, 0, p, kUrban).value, 1.0, 1e-8);
  const double s_star = p.m_los * p.gamma_ul_abs / p.rho_d;
  for (double s : {0.01 * s_star, s_star, 10.0 * s_star}) {
    const auto stack = laplace_abs_uplink_derivs(s, p.m_los - 1, p, kUrban);
    for (int k = 0; k < p.m_los; ++k) {
      const double v = stack.value[k];
      EXPECT_NE(v, 0.0);
      EXPECT_EQ(std::signbit(v), k % 2 == 1) << "k=" << k << " s=" << s;
    }
  }
}

TEST(LaplaceAbsUplink, NonincreasingInS) {
  const SystemParams p = at(600.0);
  double prev = 1.0 + 1e-9;
  for (double s = 1e7; s < 1e11; s *= 3.0) {
    const double v = laplace_abs_uplink_deriv(s, 0, p, kUrban).value;
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(LaplaceAbsUplink, FirstDerivativeMatchesFiniteDifference) {
  const SystemParams p = at(400.0);
  const QuadratureSpec tight{1e-11, 1e-15, 40};
  const double s_star = p.m_los * p.gamma_ul_abs / p.rho_d;
  const double step = 1e-4 * s_star;
  const double up = laplace_abs_uplink_deriv(s_star + step, 0, p, kUrban, tight).value;
  const double dn = laplace_abs_uplink_deriv(s_star - step, 0, p, kUrban, tight).value;
  const double fd = (up - dn) / (2.0 * step);
  const double d1 = laplace_abs_uplink_deriv(s_star, 1, p, kUrban, tight).value;
  EXPECT_LT(std::abs(d1 - fd) / std::abs(d1), 1e-4);
}

TEST(LaplaceAbsUplink, OrderOutOfRange) {
  const SystemParams p = at(400.0);
  EXPECT_THROW(laplace_abs_uplink_deriv(1.0, p.m_los, p, kUrban), DomainError);
  EXPECT_THROW(laplace_abs_uplink_deriv(1.0, -1, p, kUrban), DomainError);
  EXPECT_THROW(laplace_abs_uplink_deriv(-1.0, 0, p, kUrban), DomainError);
}

TEST(LaplaceAsdDownlink, DerivativesMatchFiniteDifference) {
  const SystemParams p = at(400.0);
  const double da = 150.0, s = 3e7, h = 1e-4 * s;
  for (int k = 0; k < 4; ++k) {
    const double fd = (laplace_asd_downlink_deriv(s + h, k, da, p) -
                       laplace_asd_downlink_deriv(s - h, k, da, p)) / (2.0 * h);
    const double exact = laplace_asd_downlink_deriv(s, k + 1, da, p);
    EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact)) << k;
  }
  EXPECT_DOUBLE_EQ(laplace_asd_downlink_deriv(0.0, 0, da, p), 1.0);
}

// ---------------------------------------------------------------------------
// Coverage

TEST(Coverage, ZeroThresholdsGiveFullCoverage) {
  SystemParams p = at(400.0);
  p.gamma_ul_tbs = p.gamma_ul_abs = p.gamma_dl_tsue = p.gamma_dl_asd = 1e-30;
  for (Metric m : kAllMetrics) {
    EXPECT_NEAR(coverage(m, p, kUrban).value, 1.0, 1e-8) << to_string(m);
  }
}

TEST(Coverage, ValuesAreProbabilitiesAndNonincreasingInThreshold) {
  const SystemParams base = at(400.0);
  for (Metric m : kAllMetrics) {
    const double step = m == Metric::AbsUplink ? 5.0 : 2.0;
    double prev = 1.0 + 1e-9;
    for (double t = -10.0; t <= 10.0 + 1e-9; t += step) {
      SystemParams p = base;
      threshold(m, p) = db(t);
      const CoverageResult c = coverage(m, p, kUrban);
      EXPECT_GE(c.value, 0.0);
      EXPECT_LE(c.value, 1.0);
      EXPECT_LE(c.value, prev + c.est_error) << to_string(m) << " " << t;
      prev = c.value;
    }
  }
}

// Noise-only TsUE coverage, integrated in polar coordinates around the TBS
// with the stadium chord as breakpoints.
TEST(Coverage, TsueDownlinkWithoutInterferenceMatchesPolarOracle) {
  SystemParams p = at(400.0);
  p.p_a = 0.0;
  p.sigma2 = 1e-9;
  const double k = p.gamma_dl_tsue / p.p_t * p.sigma2;
  const QuadratureSpec q{1e-10, 1e-13, 40};
  auto over_angle = [&](double phi) {
    // Ray from the TBS towards direction phi; the stadium sits at angle pi.
    const double ux = std::cos(phi);
    const double b = p.d * ux;
    const double disc = b * b - (p.d * p.d - p.r2 * p.r2);
    auto f = [&](double rho) { return std::exp(-k * std::pow(rho, p.alpha_b)) * rho; };
    double v = integrate(f, 0.0, p.r1, q).value;
    if (disc > 0.0) {
      const double r_in = std::max(0.0, -b - std::sqrt(disc));
      const double r_out = std::min(p.r1, -b + std::sqrt(disc));
      if (r_out > r_in) v -= integrate(f, r_in, r_out, q).value;
    }
    return v;
  };
  const double asin_lim = std::asin(p.r2 / p.d);
  const auto pts = panel_breaks(0.0, 2.0 * kPi, {kPi - asin_lim, kPi + asin_lim});
  const double total = integrate(over_angle, std::span<const double>(pts), q).value;
  const double expect = total / (kPi * (p.r1 * p.r1 - p.r2 * p.r2));
  EXPECT_NEAR(coverage_tsue_downlink(p, kUrban).value, expect, 1e-8);
  EXPECT_LT(expect, 0.9);  // the oracle is not trivially one
}

TEST(Coverage, AsdDownlinkNoInterferenceNoNoise) {
  SystemParams p = at(400.0);
  p.p_t = 0.0;
  p.m_los = p.m_nlos = 1;
  p.sigma2 = 1e-300;
  const CoverageResult c = coverage_asd_downlink(p, kUrban);
  EXPECT_NEAR(c.value, 1.0, c.est_error);
}

TEST(Coverage, RayleighReductionAbsUplink) {
  SystemParams p = at(400.0);
  p.m_los = p.m_nlos = 1;
  const QuadratureSpec q{1e-10, 1e-12, 40};
  const CoverageResult general = coverage_abs_uplink(p, kUrban, q);

  const double direct = oracle::rayleigh_abs_uplink(p, kUrban, q);
  EXPECT_NEAR(general.value, direct, 1e-10);
}

TEST(Coverage, RayleighReductionAsdDownlink) {
  SystemParams p = at(400.0);
  p.m_los = p.m_nlos = 1;
  const QuadratureSpec q{1e-11, 1e-13, 40};
  const CoverageResult general = coverage_asd_downlink(p, kUrban, q);
  const double direct = oracle::rayleigh_asd_downlink(p, kUrban);
  EXPECT_NEAR(general.value, direct, 1e-10);
}

TEST(Coverage, ContinuousAcrossRegimeBoundaries) {
  const RegimeBoundaries rb = regime_boundaries(SystemParams{});
  for (double b : {rb.zmax_nlos, rb.hcrit_los, rb.zmax_los}) {
    const SystemParams lo = at(b - 1e-3), hi = at(b + 1e-3);
    EXPECT_NE(classify_regime(lo).branch, classify_regime(hi).branch) << b;
    for (Metric m : {Metric::TbsUplink, Metric::AbsUplink}) {
      const double a = coverage(m, lo, kUrban).value;
      const double c = coverage(m, hi, kUrban).value;
      EXPECT_LT(std::abs(a - c), 1e-3) << to_string(m) << " at " << b;
    }
  }
}

TEST(Coverage, TbsUplinkIsNoiseTimesLaplace) {
  const SystemParams p = at(500.0);
  const double s = p.gamma_ul_tbs / p.rho_b;
  EXPECT_NEAR(coverage_tbs_uplink(p, kUrban).value,
              std::exp(-s * p.sigma2) * laplace_tbs_uplink(s, p, kUrban).value, 1e-15);
}

TEST(Coverage, LensGeometryEvaluates) {
  SystemParams p = at(400.0);
  p.d = 450.0;
  for (Metric m : kAllMetrics) {
    const CoverageResult c = coverage(m, p, kUrban);
    EXPECT_GT(c.value, 0.0);
    EXPECT_LT(c.value, 1.0);
  }
}

// Every coverage expression against the simulator at randomized parameter points drawn
// within +-50% of the reference values.
TEST(Coverage, MatchesSimulationAtRandomizedPoints) {
  RandomStream rng(777, 0);
  auto jitter = [&](double v) { return v * (0.5 + rng.uniform()); };
  const std::int64_t n = 1000000;
  for (int point = 0; point < 10; ++point) {
    SystemParams p;
    do {
      p.r1 = jitter(500.0);
      p.r2 = jitter(100.0);
      p.d = jitter(200.0);
    } while (!(p.r1 > p.r2 && p.d + p.r2 <= p.r1));
    p.h = jitter(400.0);
    p.eta_nlos = jitter(0.01);
    p.rho_b = jitter(p.rho_b);
    p.rho_d = jitter(p.rho_d);
    p.p_max = jitter(p.p_max);
    p.p_t = jitter(p.p_t);
    p.p_a = jitter(p.p_a);
    p.sigma2 = jitter(p.sigma2);
    for (Metric m : kAllMetrics) threshold(m, p) = jitter(1.0);
    ASSERT_NO_THROW(p.validate());

    const auto mc = estimate_all(p, kUrban, n, 1000 + point);
    for (Metric m : kAllMetrics) {
      const CoverageResult c = coverage(m, p, kUrban);
      const McEstimate& e = mc[static_cast<std::size_t>(m)];
      const double se = std::sqrt(e.mean * (1.0 - e.mean) / n);
      EXPECT_LE(std::abs(c.value - e.mean), std::max(3.0 * se, c.est_error))
          << "point " << point << " " << to_string(m) << " analytic " << c.value << " mc " << e.mean;
    }
  }
}
