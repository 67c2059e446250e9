#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mvdisp/numerics.hpp"
#include "mvdisp/windows.hpp"

namespace mvdisp {

enum class ChartKind { Mewms, Gvc, Ntcc, Otcc, Otmc };

std::string_view to_string(ChartKind kind);
ChartKind parse_chart_kind(std::string_view name);
Aggregation required_aggregation(ChartKind kind);

// Limit specifications. Each chart accepts a subset (see validate()).
struct MewmsWidth { double L; };      // p +- L sqrt(2 p C_t)
struct GvcWidth { double L; };        // b1 +- L sqrt(b2), LCL floored at 0
struct TypeOneError { double alpha; };  // equal-tail chi-square limits
struct FixedLimits { double lcl; double ucl; };
using LimitSpec = std::variant<MewmsWidth, GvcWidth, TypeOneError, FixedLimits>;

struct ChartConfig {
  ChartKind kind = ChartKind::Mewms;
  int p = 2;
  int n = 1;           // subgroup size; 1 for MEWMS
  double omega = 0.2;  // MEWMS smoothing constant
  LimitSpec limits = MewmsWidth{3.0};

  AggregationPolicy policy() const;
};

// Throws ConfigError for out-of-range parameters or a limit spec the chart
// does not accept.
void validate(const ChartConfig& cfg);

struct ControlLimits {
  double lcl;
  double ucl;
};

struct ChartOutput {
  std::int64_t time = 0;
  double statistic = 0.0;
  double lcl = 0.0;
  double ucl = 0.0;
  bool signal = false;
};

inline bool is_signal(double statistic, const ControlLimits& lim) {
  return statistic > lim.ucl || statistic < lim.lcl;
}

// ---- MEWMS -----------------------------------------------------------------

// C_t = w/(2-w) + (2-2w)/(2-w) (1-w)^{2(t-1)}, so C_1 = 1.
double mewms_c(double omega, std::int64_t t);
ControlLimits mewms_limits(int p, double omega, double L, std::int64_t t);
ControlLimits mewms_asymptotic_limits(int p, double omega, double L);

struct MewmsState {
  std::int64_t t = 0;
  Matrix e;  // E_t
};

// Advances E_t = w y y' + (1-w) E_{t-1} (E_0 = y_1 y_1') and plots tr(E_t).
ChartOutput mewms_step(MewmsState& state, std::span<const double> y, const ChartConfig& cfg);

// ---- Grouped charts --------------------------------------------------------

struct GvcConstants {
  double b1;
  double b2;
};

// Throws ConfigError unless n >= p + 1.
GvcConstants gvc_constants(int p, int n);
ControlLimits gvc_limits(int p, int n, double L);

// Equal-tail limits chi2_{p(n-1), alpha/2} / (n-1) and chi2_{p(n-1), 1-alpha/2} / (n-1).
ControlLimits trace_chisq_limits(int p, int n, double alpha);

// Constant limits of a grouped chart; asymptotic limits for MEWMS.
ControlLimits resolve_limits(const ChartConfig& cfg);

// Statistics on the mean-centred sample covariance of the window.
double centered_cov_trace(const SubgroupWindow& w);
double centered_cov_det(const SubgroupWindow& w, std::vector<double>& scratch);
double centered_cov_det(const SubgroupWindow& w);
// tr(MSSD) from the n-1 within-window successive differences.
double mssd_trace(const SubgroupWindow& w);

ChartOutput gvc_step(const SubgroupWindow& w, const ControlLimits& lim);
ChartOutput trace_cov_step(const SubgroupWindow& w, const ControlLimits& lim);
ChartOutput mssd_step(const SubgroupWindow& w, const ControlLimits& lim);

// A configured chart: limits resolved once, MEWMS state carried between steps.
class Chart {
 public:
  explicit Chart(ChartConfig cfg);

  // Plots the statistic for one emission of the chart's aggregation policy.
  ChartOutput step(const SubgroupWindow& w);
  void reset();

  const ChartConfig& config() const { return cfg_; }
  const ControlLimits& limits() const { return limits_; }
  const MewmsState& mewms_state() const { return mewms_; }
  void set_mewms_state(MewmsState s);

 private:
  ChartConfig cfg_;
  ControlLimits limits_;
  MewmsState mewms_;
  std::vector<double> scratch_;
};

// Windowing plus chart: feed standardised observations, get plotted points.
class Monitor {
 public:
  explicit Monitor(ChartConfig cfg);

  std::optional<ChartOutput> observe(std::int64_t t, std::span<const double> y);
  bool observe_into(std::int64_t t, std::span<const double> y, ChartOutput& out);
  void reset();

  const Chart& chart() const { return chart_; }
  Chart& chart() { return chart_; }
  const Windower& windower() const { return windower_; }
  Windower& windower() { return windower_; }

 private:
  Chart chart_;
  Windower windower_;
  SubgroupWindow window_;
};

}  // namespace mvdisp
