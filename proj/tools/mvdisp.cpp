// mvdisp: calibrate, simulate, reproduce and monitor multivariate dispersion charts.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "mvdisp/bench.hpp"
#include "mvdisp/calibrate.hpp"
#include "mvdisp/designs.hpp"
#include "mvdisp/error.hpp"
#include "mvdisp/io.hpp"

using namespace mvdisp;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kCalibration = 4, kNumeric = 5 };

struct ChartArgs {
  std::string chart = "mewms";
  int p = 2;
  int n = 0;
  double omega = 0.2;
  std::optional<double> L, alpha, lcl, ucl;

  void add(CLI::App* app, bool with_limits = true) {
    app->add_option("--chart", chart, "mewms, gvc, ntcc, otcc or otmc")->capture_default_str();
    app->add_option("--p", p, "number of quality characteristics")->capture_default_str();
    app->add_option("--n", n, "subgroup size (grouped charts)");
    app->add_option("--omega", omega, "MEWMS smoothing constant")->capture_default_str();
    if (!with_limits) return;
    app->add_option("--L", L, "MEWMS or GVC limit width");
    app->add_option("--alpha", alpha, "type I error of equal-tail chi-square limits");
    app->add_option("--lcl", lcl, "explicit lower control limit");
    app->add_option("--ucl", ucl, "explicit upper control limit");
  }

  // Without explicit limits the published design for (chart, p, n|omega) is used.
  ChartConfig resolve() const {
    const ChartKind kind = parse_chart_kind(chart);
    ChartConfig cfg{kind, p, kind == ChartKind::Mewms ? 1 : n, omega, MewmsWidth{1.0}};
    if (kind != ChartKind::Mewms && n == 0) throw ConfigError("--n is required for " + chart);
    const int given = (L ? 1 : 0) + (alpha ? 1 : 0) + ((lcl || ucl) ? 1 : 0);
    if (given > 1) throw ConfigError("give only one of --L, --alpha, or --lcl/--ucl");
    if (L) {
      if (kind == ChartKind::Gvc) cfg.limits = GvcWidth{*L};
      else cfg.limits = MewmsWidth{*L};
    } else if (alpha) {
      cfg.limits = TypeOneError{*alpha};
    } else if (lcl || ucl) {
      if (!(lcl && ucl)) throw ConfigError("--lcl and --ucl must be given together");
      cfg.limits = FixedLimits{*lcl, *ucl};
    } else {
      auto d = published_design(kind, p, kind == ChartKind::Mewms ? omega : n);
      if (!d) throw ConfigError("no published design for this chart/p/n; give --L, --alpha or --lcl/--ucl");
      cfg = *d;
    }
    validate(cfg);
    return cfg;
  }
};

struct ScenarioArgs {
  std::string shift = "overall";
  double delta = 1.0;
  double rho = 0.0;
  int q = 0;
  int corr_block = 0;

  void add(CLI::App* app) {
    app->add_option("--shift", shift, "overall, overall_corr or partial")->capture_default_str();
    app->add_option("--delta", delta, "variance multiplier")->capture_default_str();
    app->add_option("--rho", rho, "correlation after the shift")->capture_default_str();
    app->add_option("--q", q, "number of shifted variables (partial)");
    app->add_option("--corr-block", corr_block, "variables sharing rho (partial; 0 = q)");
  }

  ShiftScenario resolve() const {
    ShiftScenario s;
    s.kind = parse_shift_kind(shift);
    s.delta = delta;
    s.rho = rho;
    s.q = q;
    s.corr_block = corr_block;
    return s;
  }
};

struct SimArgs {
  std::int64_t reps = 10000;
  std::uint64_t seed = 20190618;
  std::string convention = "steady";
  std::int64_t warmup = 50;
  std::string steady_method = "auto";
  int threads = 0;

  void add(CLI::App* app, std::int64_t default_reps) {
    reps = default_reps;
    app->add_option("--reps", reps, "Monte Carlo replications")->capture_default_str();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
    app->add_option("--convention", convention, "steady or zero")->capture_default_str();
    app->add_option("--warmup", warmup, "in-control warm-up for simulated steady state")->capture_default_str();
    app->add_option("--steady-method", steady_method,
                    "auto, simulated, zero_state_aligned or additive_half_subgroup")
        ->capture_default_str();
    app->add_option("--threads", threads, "worker threads (default: MVDISP_THREADS or all cores)");
  }

  SimOptions sim() const {
    SimOptions o;
    o.warmup = warmup;
    if (steady_method == "auto") o.steady = SteadyStateMethod::Auto;
    else if (steady_method == "simulated") o.steady = SteadyStateMethod::Simulated;
    else if (steady_method == "zero_state_aligned") o.steady = SteadyStateMethod::ZeroStateAligned;
    else if (steady_method == "additive_half_subgroup") o.steady = SteadyStateMethod::AdditiveHalfSubgroup;
    else throw ConfigError("unknown --steady-method '" + steady_method + "'");
    return o;
  }
  Convention conv() const {
    if (convention == "steady") return Convention::SteadyState;
    if (convention == "zero") return Convention::ZeroState;
    throw ConfigError("--convention must be steady or zero");
  }
};

// Writes to the file if a path is given, else to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DataError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

json chart_log(const ChartConfig& cfg) {
  json j = chart_to_json(cfg);
  const auto lim = resolve_limits(cfg);
  j[cfg.kind == ChartKind::Mewms ? "asymptotic_lcl" : "resolved_lcl"] = lim.lcl;
  j[cfg.kind == ChartKind::Mewms ? "asymptotic_ucl" : "resolved_ucl"] = lim.ucl;
  return j;
}

void log_config(const std::string& command, const json& j) {
  std::cerr << "mvdisp " << command << " config " << j.dump() << "\n";
}

std::string steady_method_name(SteadyStateMethod m) {
  switch (m) {
    case SteadyStateMethod::Auto: return "auto";
    case SteadyStateMethod::Simulated: return "simulated";
    case SteadyStateMethod::ZeroStateAligned: return "zero_state_aligned";
    case SteadyStateMethod::AdditiveHalfSubgroup: return "additive_half_subgroup";
  }
  return "?";
}

json estimate_json(const AtsEstimate& e) {
  return json{{"ats", e.ats},
              {"stderr", e.stderr_},
              {"replications", e.replications},
              {"convention", e.convention == Convention::SteadyState ? "steady" : "zero"},
              {"censored", e.censored},
              {"censor_warning", e.censor_warning},
              {"exceeded", e.exceeded},
              {"warmup_redraws", e.redraws}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate dispersion control charts: calibration, ATS simulation and monitoring"};
  app.require_subcommand(1);

  // ats
  auto* ats_cmd = app.add_subcommand("ats", "estimate the average time to signal");
  ChartArgs ats_chart;
  ScenarioArgs ats_scen;
  SimArgs ats_sim;
  std::int64_t ats_max_time = 1'000'000;
  std::optional<double> ats_stop;
  std::string ats_out;
  ats_chart.add(ats_cmd);
  ats_scen.add(ats_cmd);
  ats_sim.add(ats_cmd, 10000);
  ats_cmd->add_option("--max-time", ats_max_time, "censoring cap in observations")->capture_default_str();
  ats_cmd->add_option("--stop-above", ats_stop, "stop early once the ATS must exceed this");
  ats_cmd->add_option("--out", ats_out, "output file (default stdout)");

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "solve for the chart constant giving a target in-control ATS");
  ChartArgs cal_chart;
  SimArgs cal_sim;
  CalibrationOptions cal_opts;
  std::vector<double> cal_bracket;
  std::string cal_out;
  cal_chart.add(cal_cmd, false);
  cal_sim.add(cal_cmd, 10000);
  cal_cmd->add_option("--target", cal_opts.target_ats, "target in-control ATS")->capture_default_str();
  cal_cmd->add_option("--tol", cal_opts.tolerance, "ATS tolerance (0: max(1, 2 stderr))")->capture_default_str();
  cal_cmd->add_option("--bracket", cal_bracket, "initial bracket: two values of the searched constant")
      ->expected(2);
  cal_cmd->add_option("--max-iter", cal_opts.max_iterations, "bisection iterations")->capture_default_str();
  cal_cmd->add_option("--out", cal_out, "report file (default stdout)");

  // reproduce
  auto* rep_cmd = app.add_subcommand("reproduce", "run an experiment manifest and write its result CSV");
  std::string rep_manifest, rep_builtin, rep_out, rep_dump;
  std::optional<std::int64_t> rep_reps;
  std::optional<std::uint64_t> rep_seed;
  int rep_threads = 0;
  rep_cmd->add_option("manifest", rep_manifest, "manifest JSON file");
  rep_cmd->add_option("--builtin", rep_builtin, "built-in manifest: table8..table11, fig1, fig2");
  rep_cmd->add_option("--reps", rep_reps, "override replications");
  rep_cmd->add_option("--seed", rep_seed, "override master seed");
  rep_cmd->add_option("--out", rep_out, "output CSV (default: manifest output)");
  rep_cmd->add_option("--dump-manifest", rep_dump, "write the resolved manifest JSON here and exit");
  rep_cmd->add_option("--threads", rep_threads, "worker threads (default: MVDISP_THREADS or all cores)");

  // phase1
  auto* p1_cmd = app.add_subcommand("phase1", "estimate the in-control model from Phase I data");
  std::string p1_csv, p1_out;
  p1_cmd->add_option("csv", p1_csv, "Phase I CSV (t,x1,...,xp)")->required();
  p1_cmd->add_option("--out", p1_out, "model file (default stdout)");

  // monitor
  auto* mon_cmd = app.add_subcommand("monitor", "run a chart over Phase II data");
  std::string mon_csv, mon_model, mon_out, mon_state_in, mon_state_out;
  ChartArgs mon_chart;
  mon_cmd->add_option("csv", mon_csv, "Phase II CSV (t,x1,...,xp)")->required();
  mon_cmd->add_option("--model", mon_model, "model file from `phase1`")->required();
  mon_chart.add(mon_cmd);
  mon_cmd->add_option("--state-in", mon_state_in, "resume from a saved monitor state");
  mon_cmd->add_option("--state-out", mon_state_out, "save the monitor state after the last observation");
  mon_cmd->add_option("--out", mon_out, "output CSV (default stdout)");

  // casestudy
  auto* cs_cmd = app.add_subcommand("casestudy", "Phase I estimation plus a simulated Phase II run of all six charts");
  std::string cs_phase1 = "data/phase1_fixture.csv", cs_out, cs_phase2_out;
  std::uint64_t cs_seed = 7;
  cs_cmd->add_option("--phase1", cs_phase1, "Phase I CSV")->capture_default_str();
  cs_cmd->add_option("--seed", cs_seed, "seed for the Phase II stream")->capture_default_str();
  cs_cmd->add_option("--out", cs_out, "chart series CSV (default stdout)");
  cs_cmd->add_option("--phase2-out", cs_phase2_out, "also write the simulated Phase II data");

  // make-fixture
  auto* fx_cmd = app.add_subcommand("make-fixture", "write a sample with a prescribed mean and covariance");
  std::vector<double> fx_mu = {4.04954, 7.08866};
  std::vector<double> fx_sigma = {0.0819, 0.0668, 0.0668, 0.1809};
  std::int64_t fx_rows = 100;
  std::uint64_t fx_seed = 1;
  std::string fx_out;
  fx_cmd->add_option("--mu", fx_mu, "mean vector")->capture_default_str();
  fx_cmd->add_option("--sigma", fx_sigma, "covariance, row-major")->capture_default_str();
  fx_cmd->add_option("--rows", fx_rows, "sample size")->capture_default_str();
  fx_cmd->add_option("--seed", fx_seed, "seed")->capture_default_str();
  fx_cmd->add_option("--out", fx_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*ats_cmd) {
      const ChartConfig cfg = ats_chart.resolve();
      StreamSpec spec{ProcessModel::standard(cfg.p), ats_scen.resolve(), ats_max_time};
      EstimateOptions eo;
      eo.replications = ats_sim.reps;
      eo.master_seed = ats_sim.seed;
      eo.convention = ats_sim.conv();
      eo.sim = ats_sim.sim();
      eo.threads = ats_sim.threads;
      eo.stop_above = ats_stop;
      json log{{"chart", chart_log(cfg)},
               {"scenario", scenario_to_json(spec.scenario)},
               {"replications", eo.replications},
               {"master_seed", eo.master_seed},
               {"convention", ats_sim.convention},
               {"warmup", eo.sim.warmup},
               {"steady_method", steady_method_name(effective_steady_method(cfg, eo.sim))},
               {"max_time", spec.max_time},
               {"threads", resolve_thread_count(eo.threads)}};
      if (ats_stop) log["stop_above"] = *ats_stop;
      log_config("ats", log);
      const AtsEstimate est = estimate_ats(cfg, spec, eo);
      json out{{"chart", chart_to_json(cfg)}, {"scenario", scenario_to_json(spec.scenario)},
               {"master_seed", eo.master_seed}, {"estimate", estimate_json(est)}};
      Output o(ats_out);
      o.stream() << out.dump(2) << "\n";
      if (est.censor_warning) std::cerr << "warning: " << est.censored << " runs censored at max_time\n";
    } else if (*cal_cmd) {
      // Placeholder limits; the solver replaces them.
      const ChartKind kind = parse_chart_kind(cal_chart.chart);
      ChartConfig base{kind, cal_chart.p, kind == ChartKind::Mewms ? 1 : cal_chart.n, cal_chart.omega,
                       TypeOneError{0.01}};
      if (kind == ChartKind::Mewms) base.limits = MewmsWidth{3.0};
      if (kind == ChartKind::Gvc) base.limits = GvcWidth{3.0};
      validate(base);
      cal_opts.replications = cal_sim.reps;
      cal_opts.master_seed = cal_sim.seed;
      cal_opts.sim = cal_sim.sim();
      cal_opts.threads = cal_sim.threads;
      if (cal_bracket.size() == 2) cal_opts.bracket = std::pair{cal_bracket[0], cal_bracket[1]};
      log_config("calibrate", json{{"chart", std::string(to_string(base.kind))},
                                   {"p", base.p},
                                   {"n", base.n},
                                   {"omega", base.omega},
                                   {"target", cal_opts.target_ats},
                                   {"tolerance", cal_opts.tolerance},
                                   {"replications", cal_opts.replications},
                                   {"master_seed", cal_opts.master_seed},
                                   {"warmup", cal_opts.sim.warmup},
                                   {"threads", resolve_thread_count(cal_opts.threads)}});
      const CalibrationResult r = solve_constant(base, cal_opts);
      json hist = json::array();
      for (const auto& h : r.history) hist.push_back(json{{"value", h.value}, {"ats", h.ats}, {"exceeded", h.exceeded}});
      json out{{"chart", chart_to_json(r.chart)},
               {"parameter", r.parameter},
               {"lcl", r.limits.lcl},
               {"ucl", r.limits.ucl},
               {"achieved", estimate_json(r.achieved)},
               {"target", cal_opts.target_ats},
               {"converged", r.converged},
               {"iterations", r.iterations},
               {"bracket_history", hist}};
      Output o(cal_out);
      o.stream() << out.dump(2) << "\n";
      if (!r.converged) std::cerr << "warning: bracket collapsed before the ATS reached tolerance\n";
    } else if (*rep_cmd) {
      if (rep_manifest.empty() == rep_builtin.empty())
        throw ConfigError("reproduce needs exactly one of a manifest path or --builtin");
      ExperimentManifest m = rep_builtin.empty() ? read_manifest_file(rep_manifest) : builtin_manifest(rep_builtin);
      if (rep_reps) m.replications = *rep_reps;
      if (rep_seed) m.master_seed = *rep_seed;
      if (!rep_out.empty()) m.output = rep_out;
      if (m.replications < 2) throw ConfigError("replications must be at least 2");
      json log = manifest_to_json(m);
      log["threads"] = resolve_thread_count(rep_threads);
      log_config("reproduce", log);
      if (!rep_dump.empty()) {
        std::ofstream d(rep_dump);
        if (!d) throw DataError("cannot write '" + rep_dump + "'");
        d << manifest_to_json(m).dump(2) << "\n";
        return kOk;
      }
      const ReproduceResult r = reproduce(m, rep_threads, &std::cerr);
      Output o(m.output);
      write_result_csv(o.stream(), r);
      std::cerr << "wrote " << m.output << "\n";
    } else if (*p1_cmd) {
      log_config("phase1", json{{"csv", p1_csv}, {"out", p1_out}});
      const auto obs = read_observations_csv_file(p1_csv);
      const ProcessModel model = phase1_estimate(obs);
      Output o(p1_out);
      o.stream() << model_to_json(model).dump(2) << "\n";
    } else if (*mon_cmd) {
      const ProcessModel model = read_model_file(mon_model);
      std::unique_ptr<Monitor> mon;
      if (!mon_state_in.empty()) {
        std::ifstream in(mon_state_in);
        if (!in) throw DataError("cannot open '" + mon_state_in + "'");
        json j;
        try {
          j = json::parse(in);
        } catch (const json::exception& e) {
          throw DataError(mon_state_in + ": " + e.what());
        }
        mon = std::make_unique<Monitor>(monitor_from_snapshot(j));
      } else {
        ChartArgs a = mon_chart;
        a.p = model.p();
        mon = std::make_unique<Monitor>(a.resolve());
      }
      const ChartConfig& cfg = mon->chart().config();
      if (cfg.p != model.p()) throw ConfigError("chart dimension does not match the model");
      log_config("monitor", json{{"csv", mon_csv}, {"model", model_to_json(model)}, {"chart", chart_log(cfg)},
                                 {"state_in", mon_state_in}, {"state_out", mon_state_out}});
      const auto obs = read_observations_csv_file(mon_csv);
      Output o(mon_out);
      write_chart_output_header(o.stream());
      std::vector<double> y(static_cast<std::size_t>(model.p()));
      ChartOutput row;
      std::int64_t signals = 0;
      for (const auto& x : obs) {
        if (static_cast<int>(x.x.size()) != model.p())
          throw DataError(mon_csv + ": observation at t=" + std::to_string(x.t) + " has " +
                          std::to_string(x.x.size()) + " values, model has p=" + std::to_string(model.p()));
        standardize_into(x.x, model, y);
        if (mon->observe_into(x.t, y, row)) {
          write_chart_output_row(o.stream(), row);
          signals += row.signal ? 1 : 0;
        }
      }
      std::cerr << "monitor: " << obs.size() << " observations, " << signals << " signals\n";
      if (!mon_state_out.empty()) {
        std::ofstream s(mon_state_out);
        if (!s) throw DataError("cannot write '" + mon_state_out + "'");
        s << monitor_snapshot(*mon).dump(2) << "\n";
      }
    } else if (*cs_cmd) {
      log_config("casestudy", json{{"phase1", cs_phase1}, {"seed", cs_seed}});
      const auto obs = read_observations_csv_file(cs_phase1);
      const CaseStudyResult r = case_study(obs, cs_seed);
      std::cerr << "phase1 model " << model_to_json(r.phase1).dump() << "\n";
      Output o(cs_out);
      write_case_study_csv(o.stream(), r);
      if (!cs_phase2_out.empty()) {
        Output p2(cs_phase2_out);
        write_observations_csv(p2.stream(), r.phase2);
      }
    } else if (*fx_cmd) {
      const std::size_t p = fx_mu.size();
      if (fx_sigma.size() != p * p) throw ConfigError("--sigma needs p*p values");
      Matrix s(p, p);
      for (std::size_t i = 0; i < p * p; ++i) s.data()[i] = fx_sigma[i];
      log_config("make-fixture", json{{"mu", fx_mu}, {"sigma", fx_sigma}, {"rows", fx_rows}, {"seed", fx_seed}});
      const auto sample = make_moment_matched_sample(fx_mu, SymMatrix(s), fx_rows, fx_seed);
      Output o(fx_out);
      write_observations_csv(o.stream(), sample);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return kCalibration;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
