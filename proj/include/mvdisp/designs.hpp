#pragma once

#include <optional>
#include <vector>

#include "mvdisp/charts.hpp"

namespace mvdisp {

// Chart designs tuned for an in-control ATS of 370 (p = 2 and p = 10).
//   MEWMS: L for omega in {0.2, 0.9}
//   GVC:   L_GVC for n in {3, 5, 10} (p = 2) and {11, 15, 20} (p = 10)
//   NTCC:  alpha = 0.0027 n
//   OTCC / OTMC: explicit (LCL, UCL) pairs
// `n_or_omega` is the subgroup size for grouped charts and omega for MEWMS.
std::optional<ChartConfig> published_design(ChartKind kind, int p, double n_or_omega);

// Every published design, in table order.
std::vector<ChartConfig> published_designs();

}  // namespace mvdisp
