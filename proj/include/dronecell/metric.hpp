#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "dronecell/params.hpp"

namespace dronecell {

/// The four coverage probabilities of the two-cell system.
enum class Metric { TbsUplink, AbsUplink, TsueDownlink, AsdDownlink };

inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::TbsUplink, Metric::AbsUplink,
                                                       Metric::TsueDownlink, Metric::AsdDownlink};

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::TbsUplink: return "tbs_ul";
    case Metric::AbsUplink: return "abs_ul";
    case Metric::TsueDownlink: return "tsue_dl";
    case Metric::AsdDownlink: return "asd_dl";
  }
  return "?";
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

inline double& threshold(Metric m, SystemParams& p) {
  switch (m) {
    case Metric::TbsUplink: return p.gamma_ul_tbs;
    case Metric::AbsUplink: return p.gamma_ul_abs;
    case Metric::TsueDownlink: return p.gamma_dl_tsue;
    case Metric::AsdDownlink: return p.gamma_dl_asd;
  }
  return p.gamma_ul_tbs;
}

inline double threshold(Metric m, const SystemParams& p) {
  SystemParams copy = p;
  return threshold(m, copy);
}

}  // namespace dronecell
