#include "mvdisp/simulate.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <string>

namespace mvdisp {

namespace {

bool is_identity(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

void apply(const Matrix& m, std::span<const double> z, std::span<double> out) {
  const std::size_t p = m.rows();
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += m(i, j) * z[j];
    for (std::size_t j = i + 1; j < p; ++j) s += m(i, j) * z[j];
    out[i] = s;
  }
}

}  // namespace

StreamGenerator::StreamGenerator(const StreamSpec& spec)
    : p_(spec.model.p()),
      mu0_(spec.model.mu0()),
      chol_in_(cholesky(spec.model.sigma0())),
      chol_shift_(cholesky(build_covariance(spec.model, spec.scenario))),
      std_in_(spec.model.whitener().matrix() * chol_in_),
      std_shift_(spec.model.whitener().matrix() * chol_shift_),
      z_(static_cast<std::size_t>(p_)) {
  if (spec.max_time < 1) throw ConfigError("max_time must be at least 1");
  if (spec.model.is_standard()) {
    std_in_ = Matrix::identity(static_cast<std::size_t>(p_));
    std_shift_ = chol_shift_;
  }
  std_in_identity_ = is_identity(std_in_);
}

void StreamGenerator::raw(std::int64_t t, std::optional<std::int64_t> tau, RngStream& rng, std::span<double> x) {
  rng.fill_normal(z_);
  const bool shifted = tau && t >= *tau;
  apply(shifted ? chol_shift_ : chol_in_, z_, x);
  for (int i = 0; i < p_; ++i) x[static_cast<std::size_t>(i)] += mu0_[static_cast<std::size_t>(i)];
}

void StreamGenerator::standardized(std::int64_t t, std::optional<std::int64_t> tau, RngStream& rng,
                                   std::span<double> y) {
  const bool shifted = tau && t >= *tau;
  if (!shifted && std_in_identity_) {
    rng.fill_normal(y.first(static_cast<std::size_t>(p_)));
    return;
  }
  rng.fill_normal(z_);
  apply(shifted ? std_shift_ : std_in_, z_, y);
}

std::vector<Observation> gen_stream(const StreamSpec& spec, RngStream& rng, std::int64_t count) {
  StreamGenerator gen(spec);
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  for (std::int64_t t = 1; t <= count; ++t) {
    Observation obs{t, std::vector<double>(static_cast<std::size_t>(gen.p()))};
    gen.raw(t, spec.scenario.tau, rng, obs.x);
    out.push_back(std::move(obs));
  }
  return out;
}

SteadyStateMethod effective_steady_method(const ChartConfig& cfg, const SimOptions& opts) {
  const Aggregation mode = required_aggregation(cfg.kind);
  SteadyStateMethod m = opts.steady;
  if (m == SteadyStateMethod::Auto)
    m = mode == Aggregation::NonOverlapping ? SteadyStateMethod::ZeroStateAligned : SteadyStateMethod::Simulated;
  if (mode == Aggregation::Individual && m != SteadyStateMethod::Simulated)
    throw ConfigError("mewms steady state is always simulated with a warm-up");
  return m;
}

namespace {

RunLength run_prepared(StreamGenerator& gen, Monitor& monitor, const ChartConfig& cfg, std::int64_t max_time,
                       RngStream& rng, Convention convention, const SimOptions& opts) {
  if (opts.warmup < 0) throw ConfigError("warm-up length must be non-negative");
  const bool simulated =
      convention == Convention::SteadyState && effective_steady_method(cfg, opts) == SteadyStateMethod::Simulated;

  std::int64_t warm = simulated ? opts.warmup : 0;
  if (simulated && required_aggregation(cfg.kind) == Aggregation::NonOverlapping)
    warm += static_cast<std::int64_t>(rng.next_u64() % static_cast<std::uint64_t>(cfg.n));
  const std::int64_t tau = warm + 1;
  const std::int64_t last = tau - 1 + max_time;

  monitor.reset();
  std::vector<double> y(static_cast<std::size_t>(cfg.p));
  ChartOutput out;
  RunLength result;

  constexpr std::int64_t kMaxRedraws = 1'000'000;
  for (;;) {
    bool restart = false;
    for (std::int64_t t = 1; t <= last; ++t) {
      gen.standardized(t, tau, rng, y);
      if (monitor.observe_into(t, y, out) && out.signal) {
        if (t < tau) {
          restart = true;
          break;
        }
        result.ticks = t - tau + 1;
        return result;
      }
    }
    if (!restart) {
      result.ticks = max_time;
      result.censored = true;
      return result;
    }
    if (++result.redraws > kMaxRedraws)
      throw ConfigError("chart alarms during every warm-up attempt; limits are too tight for steady-state runs");
    monitor.reset();
  }
}

}  // namespace

RunLength run_length(const ChartConfig& cfg, const StreamSpec& spec, RngStream& rng, Convention convention,
                     const SimOptions& opts) {
  StreamGenerator gen(spec);
  Monitor monitor(cfg);
  return run_prepared(gen, monitor, cfg, spec.max_time, rng, convention, opts);
}

RunLength run_length(const ChartConfig& cfg, const AggregationPolicy& policy, const StreamSpec& spec, RngStream& rng,
                     Convention convention, const SimOptions& opts) {
  const AggregationPolicy expected = cfg.policy();
  if (policy.mode != expected.mode || policy.n != expected.n)
    throw ConfigError(std::string(to_string(cfg.kind)) + " is incompatible with the requested aggregation policy");
  return run_length(cfg, spec, rng, convention, opts);
}

double convert_ats(double arl, const AggregationPolicy& policy, Convention convention) {
  const double n = policy.n;
  double ats = arl;
  switch (policy.mode) {
    case Aggregation::Individual: return arl;
    case Aggregation::NonOverlapping: ats = n * arl; break;
    case Aggregation::Overlapping: ats = arl + n - 1.0; break;
  }
  return convention == Convention::SteadyState ? ats + n / 2.0 : ats;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MVDISP_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return omp_get_max_threads();
}

namespace {

__extension__ typedef unsigned __int128 u128;

struct Totals {
  u128 sum_sq = 0;
  std::uint64_t sum = 0;
  std::int64_t done = 0;
  std::int64_t censored = 0;
  std::int64_t redraws = 0;

  void add(const RunLength& r) {
    const auto t = static_cast<std::uint64_t>(r.ticks);
    sum += t;
    sum_sq += static_cast<u128>(t) * t;
    ++done;
    censored += r.censored ? 1 : 0;
    redraws += r.redraws;
  }
};

constexpr std::int64_t kStopBlock = 256;

template <bool Parallel>
AtsEstimate estimate_impl(const ChartConfig& cfg, const StreamSpec& spec, const EstimateOptions& opts) {
  validate(cfg);
  if (opts.replications < 2) throw ConfigError("at least 2 replications are required");
  const SteadyStateMethod method = opts.convention == Convention::SteadyState
                                       ? effective_steady_method(cfg, opts.sim)
                                       : SteadyStateMethod::Simulated;
  const StreamGenerator gen_proto(spec);
  const Monitor monitor_proto(cfg);

  const std::int64_t total = opts.replications;
  const std::int64_t block = opts.stop_above ? kStopBlock : total;
  const int threads = Parallel ? resolve_thread_count(opts.threads) : 1;

  Totals totals;
  bool exceeded = false;
  std::vector<RunLength> runs;
  for (std::int64_t start = 0; start < total && !exceeded; start += block) {
    const std::int64_t count = std::min(block, total - start);
    runs.assign(static_cast<std::size_t>(count), RunLength{});
    if constexpr (Parallel) {
      bool failed = false;
      std::string message;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
      for (std::int64_t i = 0; i < count; ++i) {
        try {
          StreamGenerator gen = gen_proto;
          Monitor monitor = monitor_proto;
          RngStream rng(opts.master_seed, static_cast<std::uint64_t>(start + i));
          runs[static_cast<std::size_t>(i)] =
              run_prepared(gen, monitor, cfg, spec.max_time, rng, opts.convention, opts.sim);
        } catch (const std::exception& e) {
#pragma omp critical(mvdisp_estimate_error)
          {
            failed = true;
            message = e.what();
          }
        }
      }
      if (failed) throw ConfigError(message);
    } else {
      StreamGenerator gen = gen_proto;
      Monitor monitor = monitor_proto;
      for (std::int64_t i = 0; i < count; ++i) {
        RngStream rng(opts.master_seed, static_cast<std::uint64_t>(start + i));
        runs[static_cast<std::size_t>(i)] =
            run_prepared(gen, monitor, cfg, spec.max_time, rng, opts.convention, opts.sim);
      }
    }
    for (const auto& r : runs) totals.add(r);
    if (opts.stop_above && totals.done < total &&
        static_cast<double>(totals.sum) / static_cast<double>(total) > *opts.stop_above)
      exceeded = true;
  }

  AtsEstimate est;
  const auto n = static_cast<long double>(totals.done);
  const long double mean = static_cast<long double>(totals.sum) / n;
  const long double var =
      (static_cast<long double>(totals.sum_sq) - static_cast<long double>(totals.sum) * mean) / (n - 1.0L);
  est.ats = static_cast<double>(mean);
  est.stderr_ = static_cast<double>(std::sqrt(std::max(var, 0.0L) / n));
  est.replications = totals.done;
  est.convention = opts.convention;
  est.censored = totals.censored;
  est.censor_warning = static_cast<double>(totals.censored) > 0.001 * static_cast<double>(totals.done);
  est.exceeded = exceeded;
  est.redraws = totals.redraws;
  if (opts.convention == Convention::SteadyState && method == SteadyStateMethod::AdditiveHalfSubgroup)
    est.ats += cfg.n / 2.0;
  return est;
}

}  // namespace

AtsEstimate estimate_ats(const ChartConfig& cfg, const StreamSpec& spec, const EstimateOptions& opts) {
  return estimate_impl<true>(cfg, spec, opts);
}

AtsEstimate estimate_ats_serial(const ChartConfig& cfg, const StreamSpec& spec, const EstimateOptions& opts) {
  return estimate_impl<false>(cfg, spec, opts);
}

}  // namespace mvdisp
