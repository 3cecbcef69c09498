#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "dronecell/channel.hpp"
#include "dronecell/errors.hpp"
#include "dronecell/geometry.hpp"
#include "dronecell/metric.hpp"
#include "dronecell/params.hpp"
#include "dronecell/rng.hpp"
#include "dronecell/uplink_power.hpp"

namespace dronecell {

/// One joint realization of every random quantity in the four SINRs.
struct LinkSample {
  GroundPoint asd_pos, tsue_pos;
  double z_d = 0.0, z_c = 0.0;  // 3-D distances to the ABS
  double d_a = 0.0, d_t = 0.0;  // ground distances to the TBS
  LosState los_d = LosState::Los, los_c = LosState::Los;
  // Terrestrial Rayleigh power gains.
  double h_u_t = 1.0, h_u_a = 1.0, h_d_t = 1.0, h_d_a = 1.0;
  // Aerial Nakagami power gains.
  double g_u_a = 1.0, g_u_t = 1.0, g_d_t = 1.0, g_d_a = 1.0;
  double p_asd = 0.0;
};

struct TrialOptions {
  bool aerial_fading = true;  // false pins every G gain to 1
};

inline LinkSample simulate_trial(const SystemParams& p, const AerialEnvironment& env,
                                 RandomStream& rng, TrialOptions opt = {}) {
  LinkSample s;
  s.asd_pos = sample_asd_position(p, rng);
  s.tsue_pos = sample_tsue_position(p, rng);
  s.z_d = s.asd_pos.distance_to_abs(p);
  s.z_c = s.tsue_pos.distance_to_abs(p);
  s.d_a = s.asd_pos.distance_to_tbs(p);
  s.d_t = s.tsue_pos.distance_to_tbs(p);
  s.los_d = rng.bernoulli(p_los(env, p.h, s.z_d)) ? LosState::Los : LosState::Nlos;
  s.los_c = rng.bernoulli(p_los(env, p.h, s.z_c)) ? LosState::Los : LosState::Nlos;

  s.h_u_t = rng.exponential();
  s.h_u_a = rng.exponential();
  s.h_d_t = rng.exponential();
  s.h_d_a = rng.exponential();
  const FadingLink fd = fading_link(s.los_d);
  const FadingLink fc = fading_link(s.los_c);
  s.g_u_a = sample_fading(fd, p, rng);
  s.g_u_t = sample_fading(fc, p, rng);
  s.g_d_t = sample_fading(fc, p, rng);
  s.g_d_a = sample_fading(fd, p, rng);
  if (!opt.aerial_fading) s.g_u_a = s.g_u_t = s.g_d_t = s.g_d_a = 1.0;

  s.p_asd = asd_tx_power(s.los_d, s.z_d, p);
  return s;
}

/// The four SINRs. The TsUE inverts its path loss towards the TBS, so it
/// transmits rho_b * d_T^alpha_b; the TBS and ABS transmit at fixed power.
inline double sinr(Metric m, const LinkSample& s, const SystemParams& p) {
  switch (m) {
    case Metric::TbsUplink:
      return p.rho_b * s.h_u_t /
             (s.p_asd * s.h_u_a * terrestrial_path_gain(s.d_a, p) + p.sigma2);
    case Metric::AbsUplink: {
      const double tsue_power = p.rho_b * std::pow(s.d_t, p.alpha_b);
      return s.p_asd * s.g_u_a * aerial_path_gain(s.los_d, s.z_d, p) /
             (tsue_power * s.g_u_t * aerial_path_gain(s.los_c, s.z_c, p) + p.sigma2);
    }
    case Metric::TsueDownlink:
      return p.p_t * s.h_d_t * terrestrial_path_gain(s.d_t, p) /
             (p.p_a * s.g_d_t * aerial_path_gain(s.los_c, s.z_c, p) + p.sigma2);
    case Metric::AsdDownlink:
      return p.p_a * s.g_d_a * aerial_path_gain(s.los_d, s.z_d, p) /
             (p.p_t * s.h_d_a * terrestrial_path_gain(s.d_a, p) + p.sigma2);
  }
  return 0.0;
}

struct McEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::int64_t n_trials = 0;
  std::uint64_t seed = 0;
  std::int64_t successes = 0;
};

inline McEstimate make_estimate(std::int64_t successes, std::int64_t n, std::uint64_t seed) {
  McEstimate e;
  e.successes = successes;
  e.n_trials = n;
  e.seed = seed;
  e.mean = static_cast<double>(successes) / static_cast<double>(n);
  e.half_width_95 = 1.96 * std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(n));
  return e;
}

struct McOptions {
  TrialOptions trial;
  unsigned workers = 1;  // 0 = hardware concurrency
};

using SuccessCounts = std::array<std::int64_t, kAllMetrics.size()>;

/// Success counts of every metric over trials [begin, end).
inline SuccessCounts count_successes(const SystemParams& p, const AerialEnvironment& env,
                                     std::uint64_t seed, std::int64_t begin, std::int64_t end,
                                     TrialOptions opt) {
  SuccessCounts counts{};
  std::array<double, kAllMetrics.size()> thresholds{};
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) thresholds[i] = threshold(kAllMetrics[i], p);
  for (std::int64_t t = begin; t < end; ++t) {
    RandomStream rng(seed, static_cast<std::uint64_t>(t));
    const LinkSample s = simulate_trial(p, env, rng, opt);
    for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
      if (sinr(kAllMetrics[i], s, p) > thresholds[i]) ++counts[i];
    }
  }
  return counts;
}

/// Coverage estimates of all four metrics from one shared set of trials.
/// Trial t always uses stream (seed, t), so the result is identical for any
/// number of workers.
inline std::array<McEstimate, kAllMetrics.size()> estimate_all(const SystemParams& p,
                                                               const AerialEnvironment& env,
                                                               std::int64_t n_trials,
                                                               std::uint64_t seed,
                                                               McOptions opt = {}) {
  if (n_trials < 1) throw InvalidValue("n_trials", "n_trials >= 1 required");
  p.validate();
  env.validate();
  unsigned workers = opt.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.workers;
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, n_trials));

  std::vector<SuccessCounts> partial(workers);
  if (workers == 1) {
    partial[0] = count_successes(p, env, seed, 0, n_trials, opt.trial);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::int64_t begin = n_trials * w / workers;
      const std::int64_t end = n_trials * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        partial[w] = count_successes(p, env, seed, begin, end, opt.trial);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::array<McEstimate, kAllMetrics.size()> out;
  for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
    std::int64_t total = 0;
    for (const auto& c : partial) total += c[i];
    out[i] = make_estimate(total, n_trials, seed);
  }
  return out;
}

inline McEstimate estimate_coverage(Metric m, const SystemParams& p, const AerialEnvironment& env,
                                    std::int64_t n_trials, std::uint64_t seed,
                                    unsigned workers = 1) {
  return estimate_all(p, env, n_trials, seed, {TrialOptions{true}, workers})[static_cast<std::size_t>(m)];
}

inline McEstimate estimate_no_fading(Metric m, const SystemParams& p, const AerialEnvironment& env,
                                     std::int64_t n_trials, std::uint64_t seed,
                                     unsigned workers = 1) {
  return estimate_all(p, env, n_trials, seed, {TrialOptions{false}, workers})[static_cast<std::size_t>(m)];
}

}  // namespace dronecell
