#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvdisp/charts.hpp"
#include "mvdisp/model.hpp"
#include "mvdisp/rng.hpp"

namespace mvdisp {

struct StreamSpec {
  ProcessModel model = ProcessModel::standard(2);
  ShiftScenario scenario;
  // Cap on observations simulated after the changepoint; hitting it censors the run.
  std::int64_t max_time = 1'000'000;
};

// Draws X_t ~ N(mu0, Sigma0) before the changepoint and N(mu0, Sigma_shift)
// from it on, via Cholesky factors times standard normals.
class StreamGenerator {
 public:
  explicit StreamGenerator(const StreamSpec& spec);

  // Raw observation for time t given changepoint tau (nullopt: never shifts).
  void raw(std::int64_t t, std::optional<std::int64_t> tau, RngStream& rng, std::span<double> x);
  // Standardised observation Sigma0^{-1/2} (X_t - mu0), sampled directly.
  void standardized(std::int64_t t, std::optional<std::int64_t> tau, RngStream& rng, std::span<double> y);

  int p() const { return p_; }

 private:
  int p_;
  std::vector<double> mu0_;
  Matrix chol_in_;       // chol(Sigma0)
  Matrix chol_shift_;    // chol(Sigma_shift)
  Matrix std_in_;        // Sigma0^{-1/2} chol(Sigma0)
  Matrix std_shift_;     // Sigma0^{-1/2} chol(Sigma_shift)
  bool std_in_identity_ = false;
  std::vector<double> z_;
};

// Observations t = 1..count of one stream, using spec.scenario.tau.
std::vector<Observation> gen_stream(const StreamSpec& spec, RngStream& rng, std::int64_t count);

enum class Convention { ZeroState, SteadyState };

// How steady state is produced for subgrouped charts.
enum class SteadyStateMethod {
  Auto,                  // MEWMS and overlapping: Simulated; non-overlapping: ZeroStateAligned
  Simulated,             // in-control warm-up, shift, discard warm-up alarms
  ZeroStateAligned,      // shift at a subgroup boundary: equals the zero-state run
  AdditiveHalfSubgroup,  // zero-state ATS + n/2
};

struct SimOptions {
  std::int64_t warmup = 50;
  SteadyStateMethod steady = SteadyStateMethod::Auto;
};

// Method actually used for this chart under the steady-state convention.
SteadyStateMethod effective_steady_method(const ChartConfig& cfg, const SimOptions& opts);

struct RunLength {
  std::int64_t ticks = 0;  // observations from the changepoint to the first signal, inclusive
  bool censored = false;
  std::int64_t redraws = 0;  // warm-up false alarms discarded
};

// One replication. ZeroState: shift active from t = 1, returns the first
// signal time. SteadyState (simulated): warm-up of `warmup` in-control
// observations, runs alarming during warm-up restart on the same stream.
// For ZeroStateAligned / AdditiveHalfSubgroup this returns the zero-state run;
// estimate_ats applies the offset.
RunLength run_length(const ChartConfig& cfg, const StreamSpec& spec, RngStream& rng, Convention convention,
                     const SimOptions& opts = {});
// Same, asserting the policy matches the chart (MEWMS: individual, GVC/NTCC:
// non-overlapping, OTCC/OTMC: overlapping).
RunLength run_length(const ChartConfig& cfg, const AggregationPolicy& policy, const StreamSpec& spec, RngStream& rng,
                     Convention convention, const SimOptions& opts = {});

// Individual: ATS = ARL; non-overlapping: n ARL; overlapping: ARL + n - 1.
// Steady state adds n/2 to the zero-state value for subgrouped policies.
double convert_ats(double arl, const AggregationPolicy& policy, Convention convention);

struct AtsEstimate {
  double ats = 0.0;
  double stderr_ = 0.0;
  std::int64_t replications = 0;
  Convention convention = Convention::SteadyState;
  std::int64_t censored = 0;
  bool censor_warning = false;  // more than 0.1% of runs censored
  bool exceeded = false;        // stopped early: ATS proven above stop_above
  std::int64_t redraws = 0;
};

struct EstimateOptions {
  std::int64_t replications = 10000;
  std::uint64_t master_seed = 20190618;
  Convention convention = Convention::SteadyState;
  SimOptions sim;
  int threads = 0;  // 0: MVDISP_THREADS or the OpenMP default
  // Stop once the mean over all requested replications must exceed this value.
  std::optional<double> stop_above;
};

// Replication k draws from RngStream(master_seed, k); tick counts are summed
// as integers, so the estimate does not depend on the thread count.
AtsEstimate estimate_ats(const ChartConfig& cfg, const StreamSpec& spec, const EstimateOptions& opts);
// Single-threaded reference with identical results.
AtsEstimate estimate_ats_serial(const ChartConfig& cfg, const StreamSpec& spec, const EstimateOptions& opts);

int resolve_thread_count(int requested);

}  // namespace mvdisp
