#include "mvdisp/designs.hpp"

#include <cmath>

namespace mvdisp {

namespace {

struct GroupedRow {
  int p;
  int n;
  double gvc_L;
  double otcc_lcl, otcc_ucl;
  double otmc_lcl, otmc_ucl;
};

constexpr GroupedRow kGrouped[] = {
    {2, 3, 4.778, 0.056738, 8.746398, 0.036211, 9.726786},
    {2, 5, 3.571, 0.257927, 6.101049, 0.185008, 6.872069},
    {2, 10, 2.550, 0.646292, 4.301269, 0.517543, 4.823367},
    {10, 11, 0.660, 6.564921, 14.29510, 6.047177, 15.20931},
    {10, 15, 1.375, 7.120220, 13.45174, 6.650895, 14.19955},
    {10, 20, 1.435, 7.572200, 12.81552, 7.156457, 13.42693},
};

struct MewmsRow {
  int p;
  double omega;
  double L;
};

constexpr MewmsRow kMewms[] = {
    {2, 0.2, 3.4964},
    {2, 0.9, 4.9},
    {10, 0.2, 3.02},
    {10, 0.9, 3.779},
};

}  // namespace

std::optional<ChartConfig> published_design(ChartKind kind, int p, double n_or_omega) {
  if (kind == ChartKind::Mewms) {
    for (const auto& r : kMewms)
      if (r.p == p && std::abs(r.omega - n_or_omega) < 1e-12)
        return ChartConfig{ChartKind::Mewms, p, 1, r.omega, MewmsWidth{r.L}};
    return std::nullopt;
  }
  const int n = static_cast<int>(std::lround(n_or_omega));
  for (const auto& r : kGrouped) {
    if (r.p != p || r.n != n) continue;
    switch (kind) {
      case ChartKind::Gvc: return ChartConfig{kind, p, n, 0.0, GvcWidth{r.gvc_L}};
      case ChartKind::Ntcc: return ChartConfig{kind, p, n, 0.0, TypeOneError{0.0027 * n}};
      case ChartKind::Otcc: return ChartConfig{kind, p, n, 0.0, FixedLimits{r.otcc_lcl, r.otcc_ucl}};
      case ChartKind::Otmc: return ChartConfig{kind, p, n, 0.0, FixedLimits{r.otmc_lcl, r.otmc_ucl}};
      case ChartKind::Mewms: break;
    }
  }
  return std::nullopt;
}

std::vector<ChartConfig> published_designs() {
  std::vector<ChartConfig> out;
  for (const auto& r : kMewms) out.push_back(*published_design(ChartKind::Mewms, r.p, r.omega));
  for (ChartKind k : {ChartKind::Gvc, ChartKind::Ntcc, ChartKind::Otcc, ChartKind::Otmc})
    for (const auto& r : kGrouped) out.push_back(*published_design(k, r.p, r.n));
  return out;
}

}  // namespace mvdisp
