#include "mvdisp/charts.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mvdisp {

std::string_view to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::Mewms: return "mewms";
    case ChartKind::Gvc: return "gvc";
    case ChartKind::Ntcc: return "ntcc";
    case ChartKind::Otcc: return "otcc";
    case ChartKind::Otmc: return "otmc";
  }
  return "?";
}

ChartKind parse_chart_kind(std::string_view name) {
  std::string s(name);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "mewms") return ChartKind::Mewms;
  if (s == "gvc") return ChartKind::Gvc;
  if (s == "ntcc") return ChartKind::Ntcc;
  if (s == "otcc") return ChartKind::Otcc;
  if (s == "otmc") return ChartKind::Otmc;
  throw ConfigError("unknown chart '" + std::string(name) + "' (expected mewms, gvc, ntcc, otcc or otmc)");
}

Aggregation required_aggregation(ChartKind kind) {
  switch (kind) {
    case ChartKind::Mewms: return Aggregation::Individual;
    case ChartKind::Gvc:
    case ChartKind::Ntcc: return Aggregation::NonOverlapping;
    case ChartKind::Otcc:
    case ChartKind::Otmc: return Aggregation::Overlapping;
  }
  return Aggregation::Individual;
}

AggregationPolicy ChartConfig::policy() const {
  return {required_aggregation(kind), kind == ChartKind::Mewms ? 1 : n};
}

void validate(const ChartConfig& cfg) {
  const std::string name(to_string(cfg.kind));
  if (cfg.p < 1) throw ConfigError(name + ": dimension p must be positive");
  if (cfg.kind == ChartKind::Mewms) {
    if (!(cfg.omega > 0.0 && cfg.omega < 1.0)) throw ConfigError("mewms: smoothing constant omega must lie in (0, 1)");
    if (cfg.n != 1) throw ConfigError("mewms monitors individual observations (n = 1)");
  } else if (cfg.n < cfg.p + 1) {
    throw ConfigError(name + ": subgroup size n = " + std::to_string(cfg.n) + " must be at least p + 1 = " +
                      std::to_string(cfg.p + 1));
  }

  const bool ok = std::visit(
      [&](const auto& spec) -> bool {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MewmsWidth>) {
          if (!(spec.L > 0.0)) throw ConfigError(name + ": L must be positive");
          return cfg.kind == ChartKind::Mewms;
        } else if constexpr (std::is_same_v<T, GvcWidth>) {
          if (!(spec.L > 0.0)) throw ConfigError(name + ": L_GVC must be positive");
          return cfg.kind == ChartKind::Gvc;
        } else if constexpr (std::is_same_v<T, TypeOneError>) {
          if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) throw ConfigError(name + ": alpha must lie in (0, 1)");
          return cfg.kind == ChartKind::Ntcc || cfg.kind == ChartKind::Otcc || cfg.kind == ChartKind::Otmc;
        } else {
          if (std::isnan(spec.lcl) || std::isnan(spec.ucl) || spec.lcl > spec.ucl)
            throw ConfigError(name + ": explicit limits need lcl <= ucl");
          return cfg.kind != ChartKind::Mewms;
        }
      },
      cfg.limits);
  if (!ok) throw ConfigError(name + ": limit specification does not apply to this chart");
}

// ---- MEWMS -----------------------------------------------------------------

double mewms_c(double omega, std::int64_t t) {
  const double a = omega / (2.0 - omega);
  const double b = (2.0 - 2.0 * omega) / (2.0 - omega);
  return a + b * std::pow(1.0 - omega, 2.0 * static_cast<double>(t - 1));
}

ControlLimits mewms_limits(int p, double omega, double L, std::int64_t t) {
  const double half = L * std::sqrt(2.0 * p * mewms_c(omega, t));
  return {p - half, p + half};
}

ControlLimits mewms_asymptotic_limits(int p, double omega, double L) {
  const double half = L * std::sqrt(2.0 * p * omega / (2.0 - omega));
  return {p - half, p + half};
}

ChartOutput mewms_step(MewmsState& state, std::span<const double> y, const ChartConfig& cfg) {
  const auto p = static_cast<std::size_t>(cfg.p);
  if (y.size() != p) throw DataError("mewms: observation has wrong dimension");
  const double w = cfg.omega;
  if (state.t == 0) {
    state.e = Matrix(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) state.e(i, j) = y[i] * y[j];
  }
  ++state.t;
  double trace = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) state.e(i, j) = w * y[i] * y[j] + (1.0 - w) * state.e(i, j);
    trace += state.e(i, i);
  }
  const double L = std::get<MewmsWidth>(cfg.limits).L;
  const ControlLimits lim = mewms_limits(cfg.p, w, L, state.t);
  return {state.t, trace, lim.lcl, lim.ucl, is_signal(trace, lim)};
}

// ---- Grouped charts --------------------------------------------------------

GvcConstants gvc_constants(int p, int n) {
  if (p < 1 || n < p + 1)
    throw ConfigError("gvc constants need n >= p + 1 (p = " + std::to_string(p) + ", n = " + std::to_string(n) + ")");
  const double m = n - 1.0;
  double prod = 1.0, upper = 1.0, lower = 1.0;
  for (int i = 1; i <= p; ++i) {
    prod *= (n - i) / m;
    upper *= (n - i + 2) / m;
    lower *= (n - i) / m;
  }
  return {prod, prod * (upper - lower)};
}

ControlLimits gvc_limits(int p, int n, double L) {
  const GvcConstants c = gvc_constants(p, n);
  const double half = L * std::sqrt(c.b2);
  return {std::max(c.b1 - half, 0.0), c.b1 + half};
}

ControlLimits trace_chisq_limits(int p, int n, double alpha) {
  const double dof = static_cast<double>(p) * (n - 1);
  return {chisq_quantile(dof, alpha / 2.0) / (n - 1), chisq_quantile(dof, 1.0 - alpha / 2.0) / (n - 1)};
}

ControlLimits resolve_limits(const ChartConfig& cfg) {
  validate(cfg);
  return std::visit(
      [&](const auto& spec) -> ControlLimits {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, MewmsWidth>) return mewms_asymptotic_limits(cfg.p, cfg.omega, spec.L);
        else if constexpr (std::is_same_v<T, GvcWidth>) return gvc_limits(cfg.p, cfg.n, spec.L);
        else if constexpr (std::is_same_v<T, TypeOneError>) return trace_chisq_limits(cfg.p, cfg.n, spec.alpha);
        else return {spec.lcl, spec.ucl};
      },
      cfg.limits);
}

double centered_cov_trace(const SubgroupWindow& w) {
  double total = 0.0;
  for (int i = 0; i < w.p; ++i) {
    double mean = 0.0;
    for (int k = 0; k < w.n; ++k) mean += w(i, k);
    mean /= w.n;
    for (int k = 0; k < w.n; ++k) {
      const double d = w(i, k) - mean;
      total += d * d;
    }
  }
  return total / (w.n - 1);
}

double centered_cov_det(const SubgroupWindow& w, std::vector<double>& scratch) {
  const auto p = static_cast<std::size_t>(w.p);
  std::vector<double> mean(p, 0.0);
  for (int k = 0; k < w.n; ++k)
    for (int i = 0; i < w.p; ++i) mean[static_cast<std::size_t>(i)] += w(i, k);
  for (double& m : mean) m /= w.n;

  scratch.assign(p * p, 0.0);
  for (int k = 0; k < w.n; ++k) {
    const auto col = w.column(k);
    for (std::size_t i = 0; i < p; ++i) {
      const double di = col[i] - mean[i];
      for (std::size_t j = 0; j <= i; ++j) scratch[i * p + j] += di * (col[j] - mean[j]);
    }
  }
  const double inv = 1.0 / (w.n - 1);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      scratch[i * p + j] *= inv;
      scratch[j * p + i] = scratch[i * p + j];
    }
  return det_lu(scratch, p);
}

double centered_cov_det(const SubgroupWindow& w) {
  std::vector<double> scratch;
  return centered_cov_det(w, scratch);
}

double mssd_trace(const SubgroupWindow& w) {
  double total = 0.0;
  for (int k = 1; k < w.n; ++k)
    for (int i = 0; i < w.p; ++i) {
      const double d = w(i, k) - w(i, k - 1);
      total += d * d;
    }
  return total / (2.0 * (w.n - 1));
}

namespace {
ChartOutput plot(const SubgroupWindow& w, double stat, const ControlLimits& lim) {
  return {w.end_time, stat, lim.lcl, lim.ucl, is_signal(stat, lim)};
}
}  // namespace

ChartOutput gvc_step(const SubgroupWindow& w, const ControlLimits& lim) {
  return plot(w, centered_cov_det(w), lim);
}

ChartOutput trace_cov_step(const SubgroupWindow& w, const ControlLimits& lim) {
  return plot(w, centered_cov_trace(w), lim);
}

ChartOutput mssd_step(const SubgroupWindow& w, const ControlLimits& lim) {
  return plot(w, mssd_trace(w), lim);
}

// ---- Chart / Monitor -------------------------------------------------------

Chart::Chart(ChartConfig cfg) : cfg_(cfg), limits_(resolve_limits(cfg_)) {}

void Chart::reset() { mewms_ = MewmsState{}; }

void Chart::set_mewms_state(MewmsState s) {
  if (s.t > 0 && (s.e.rows() != static_cast<std::size_t>(cfg_.p) || s.e.cols() != static_cast<std::size_t>(cfg_.p)))
    throw DataError("mewms state matrix has wrong dimension");
  mewms_ = std::move(s);
}

ChartOutput Chart::step(const SubgroupWindow& w) {
  switch (cfg_.kind) {
    case ChartKind::Mewms: {
      ChartOutput out = mewms_step(mewms_, w.column(w.n - 1), cfg_);
      out.time = w.end_time;
      return out;
    }
    case ChartKind::Gvc: return plot(w, centered_cov_det(w, scratch_), limits_);
    case ChartKind::Ntcc:
    case ChartKind::Otcc: return plot(w, centered_cov_trace(w), limits_);
    case ChartKind::Otmc: return plot(w, mssd_trace(w), limits_);
  }
  return {};
}

Monitor::Monitor(ChartConfig cfg) : chart_(cfg), windower_(cfg.policy(), cfg.p) {}

bool Monitor::observe_into(std::int64_t t, std::span<const double> y, ChartOutput& out) {
  if (!windower_.push_into(t, y, window_)) return false;
  out = chart_.step(window_);
  return true;
}

std::optional<ChartOutput> Monitor::observe(std::int64_t t, std::span<const double> y) {
  ChartOutput out;
  if (observe_into(t, y, out)) return out;
  return std::nullopt;
}

void Monitor::reset() {
  chart_.reset();
  windower_.reset();
}

}  // namespace mvdisp
