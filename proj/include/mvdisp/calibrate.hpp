#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvdisp/charts.hpp"
#include "mvdisp/simulate.hpp"

namespace mvdisp {

struct BracketPoint {
  double value;  // searched parameter (L, L_GVC, or tail probability c)
  double ats;
  bool exceeded;  // ATS known only to exceed the evaluation cap
};

struct CalibrationResult {
  ChartConfig chart;           // base config with the solved limits filled in
  double parameter = 0.0;      // solved L, L_GVC, alpha, or tail probability c
  ControlLimits limits{};      // resolved (asymptotic for MEWMS)
  AtsEstimate achieved;
  int iterations = 0;
  std::vector<BracketPoint> history;
  bool converged = false;      // ATS within tolerance (false: bracket collapsed)
};

struct CalibrationOptions {
  double target_ats = 370.0;
  double tolerance = 0.0;          // 0: max(1, 2 * stderr)
  std::int64_t replications = 10000;
  std::uint64_t master_seed = 20190618;
  SimOptions sim;
  int threads = 0;
  int max_iterations = 60;
  std::optional<std::pair<double, double>> bracket;  // initial search interval
};

// Finds the chart constant giving the target steady-state in-control ATS.
//   MEWMS: L; GVC: L_GVC; OTCC/OTMC: tail probability c of the equal-tail
//   chi-square pair; NTCC: alpha = n / target in closed form.
// Every candidate is evaluated with the same master seed (common random
// numbers). Throws CalibrationError if the bracket cannot be established or
// the evaluated ATS values are not monotone in the constant.
CalibrationResult solve_constant(const ChartConfig& base, const CalibrationOptions& opts,
                                 const ProcessModel& model = ProcessModel::standard(2));

}  // namespace mvdisp
