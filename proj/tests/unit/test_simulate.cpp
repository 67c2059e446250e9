#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "mvdisp/designs.hpp"
#include "mvdisp/error.hpp"
#include "mvdisp/simulate.hpp"

using namespace mvdisp;

TEST_SUITE("simulate") {
  TEST_CASE("ARL to ATS conversions") {
    CHECK(convert_ats(37, AggregationPolicy::non_overlapping(10), Convention::ZeroState) == 370.0);
    CHECK(convert_ats(361, AggregationPolicy::overlapping(10), Convention::ZeroState) == 370.0);
    CHECK(convert_ats(36.5, AggregationPolicy::non_overlapping(10), Convention::SteadyState) == 370.0);
    CHECK(convert_ats(370, AggregationPolicy::individual(), Convention::SteadyState) == 370.0);
  }

  TEST_CASE("generated observations have the shifted covariance") {
    RngStream rng0(2, 0);
    const SymMatrix sig = testutil::random_spd(3, rng0);
    ShiftScenario sc{ShiftKind::OverallWithCorrelation, 1.5, 0.4, 0, 0, std::int64_t{1}};
    StreamSpec spec{ProcessModel({1.0, 2.0, 3.0}, sig), sc, 1000};
    RngStream rng(7, 0);
    const auto xs = gen_stream(spec, rng, 200000);
    const SymMatrix target = build_covariance(spec.model, sc);
    std::vector<double> mean(3, 0.0);
    for (const auto& o : xs)
      for (int i = 0; i < 3; ++i) mean[i] += o.x[i];
    for (auto& m : mean) m /= static_cast<double>(xs.size());
    for (int i = 0; i < 3; ++i) CHECK(mean[i] == doctest::Approx(spec.model.mu0()[i]).epsilon(0.01));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double c = 0.0;
        for (const auto& o : xs) c += (o.x[i] - mean[i]) * (o.x[j] - mean[j]);
        c /= static_cast<double>(xs.size() - 1);
        CHECK(c == doctest::Approx(target(i, j)).epsilon(0.03).scale(target(i, i)));
      }
  }

  TEST_CASE("standardized draws are N(0, S) on the standardized scale for any sigma0") {
    RngStream rng0(8, 0);
    const SymMatrix sig = testutil::random_spd(2, rng0);
    ShiftScenario sc;
    sc.delta = 2.0;
    StreamGenerator gen(StreamSpec{ProcessModel({0.0, 0.0}, sig), sc, 10});
    RngStream rng(1, 0);
    double s00 = 0, s11 = 0, s01 = 0;
    const int n = 200000;
    std::vector<double> y(2);
    for (int t = 1; t <= n; ++t) {
      gen.standardized(t, 1, rng, y);
      s00 += y[0] * y[0];
      s11 += y[1] * y[1];
      s01 += y[0] * y[1];
    }
    CHECK(s00 / n == doctest::Approx(2.0).epsilon(0.02));
    CHECK(s11 / n == doctest::Approx(2.0).epsilon(0.02));
    CHECK(std::abs(s01 / n) < 0.03);
  }

  TEST_CASE("parallel estimate equals the serial reference for any thread count") {
    ShiftScenario sc;
    sc.delta = 1.4;
    for (const auto& cfg : {*published_design(ChartKind::Mewms, 2, 0.2), *published_design(ChartKind::Gvc, 2, 5),
                            *published_design(ChartKind::Otmc, 2, 10), *published_design(ChartKind::Ntcc, 10, 11)}) {
      StreamSpec spec{ProcessModel::standard(cfg.p), sc, 1'000'000};
      EstimateOptions eo;
      eo.replications = 600;
      eo.master_seed = 99;
      const AtsEstimate ref = estimate_ats_serial(cfg, spec, eo);
      for (int threads : {1, 2, 3, 7}) {
        eo.threads = threads;
        const AtsEstimate par = estimate_ats(cfg, spec, eo);
        CHECK(par.ats == ref.ats);
        CHECK(par.stderr_ == ref.stderr_);
        CHECK(par.redraws == ref.redraws);
      }
    }
  }

  TEST_CASE("replication k uses stream k") {
    const ChartConfig cfg = *published_design(ChartKind::Otcc, 2, 5);
    ShiftScenario sc;
    sc.delta = 2.0;
    StreamSpec spec{ProcessModel::standard(2), sc, 1'000'000};
    EstimateOptions eo;
    eo.replications = 50;
    eo.master_seed = 5;
    const AtsEstimate est = estimate_ats(cfg, spec, eo);
    double sum = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
      RngStream rng(5, k);
      sum += static_cast<double>(run_length(cfg, spec, rng, Convention::SteadyState).ticks);
    }
    CHECK(est.ats == doctest::Approx(sum / 50.0).epsilon(1e-14));
  }

  TEST_CASE("NTCC in-control ATS matches n / alpha") {
    // Independent windows: geometric run length, ATS = n / alpha = 370.
    const ChartConfig cfg = *published_design(ChartKind::Ntcc, 2, 5);
    StreamSpec spec{ProcessModel::standard(2), ShiftScenario{}, 1'000'000};
    EstimateOptions eo;
    eo.replications = 20000;
    const AtsEstimate est = estimate_ats(cfg, spec, eo);
    CHECK(std::abs(est.ats - 370.37) < 3.0 * est.stderr_);
  }

  TEST_CASE("zero-state and additive conventions differ by n/2") {
    const ChartConfig cfg = *published_design(ChartKind::Gvc, 2, 10);
    ShiftScenario sc;
    sc.delta = 2.0;
    StreamSpec spec{ProcessModel::standard(2), sc, 1'000'000};
    EstimateOptions eo;
    eo.replications = 500;
    eo.convention = Convention::ZeroState;
    const AtsEstimate zs = estimate_ats(cfg, spec, eo);
    eo.convention = Convention::SteadyState;
    eo.sim.steady = SteadyStateMethod::AdditiveHalfSubgroup;
    const AtsEstimate add = estimate_ats(cfg, spec, eo);
    CHECK(add.ats == doctest::Approx(zs.ats + 5.0));
    eo.sim.steady = SteadyStateMethod::Auto;
    const AtsEstimate aligned = estimate_ats(cfg, spec, eo);
    CHECK(aligned.ats == zs.ats);
  }

  TEST_CASE("MEWMS rejects non-simulated steady state") {
    const ChartConfig cfg = *published_design(ChartKind::Mewms, 2, 0.2);
    SimOptions so;
    so.steady = SteadyStateMethod::AdditiveHalfSubgroup;
    CHECK_THROWS_AS(effective_steady_method(cfg, so), ConfigError);
  }

  TEST_CASE("censoring and early stop") {
    const ChartConfig cfg{ChartKind::Mewms, 2, 1, 0.2, MewmsWidth{40.0}};
    StreamSpec spec{ProcessModel::standard(2), ShiftScenario{}, 200};
    EstimateOptions eo;
    eo.replications = 100;
    const AtsEstimate est = estimate_ats(cfg, spec, eo);
    CHECK(est.censored == 100);
    CHECK(est.censor_warning);
    CHECK(est.ats == 200.0);

    const ChartConfig gvc = *published_design(ChartKind::Gvc, 2, 10);
    ShiftScenario low{ShiftKind::OverallWithCorrelation, 0.6, 0.6, 0, 0, std::nullopt};
    StreamSpec s2{ProcessModel::standard(2), low, 1'000'000};
    eo.replications = 2000;
    eo.stop_above = 10000.0;
    const AtsEstimate star = estimate_ats(gvc, s2, eo);
    CHECK(star.exceeded);
    CHECK(star.replications < 2000);
    CHECK(star.ats > 10000.0);
  }

  TEST_CASE("run_length policy check and replication count") {
    const ChartConfig cfg = *published_design(ChartKind::Otcc, 2, 5);
    StreamSpec spec{ProcessModel::standard(2), ShiftScenario{}, 1000};
    RngStream rng(1, 1);
    CHECK_THROWS_AS(run_length(cfg, AggregationPolicy::non_overlapping(5), spec, rng, Convention::ZeroState),
                    ConfigError);
    CHECK_NOTHROW(run_length(cfg, AggregationPolicy::overlapping(5), spec, rng, Convention::ZeroState));
    EstimateOptions eo;
    eo.replications = 1;
    CHECK_THROWS_AS(estimate_ats(cfg, spec, eo), ConfigError);
  }

  TEST_CASE("thread count resolution") {
    CHECK(resolve_thread_count(3) == 3);
    CHECK(resolve_thread_count(0) >= 1);
  }
}
