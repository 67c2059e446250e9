#include "mvdisp/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "mvdisp/designs.hpp"
#include "mvdisp/error.hpp"
#include "mvdisp/io.hpp"

namespace mvdisp {

using nlohmann::json;

namespace {

const std::vector<double> kDeltas = {0.6, 0.7, 0.8, 0.9, 1.0, 1.2, 1.4, 1.6, 2.0, 2.5, 3.5, 4.0};

std::string steady_name(SteadyStateMethod m) {
  switch (m) {
    case SteadyStateMethod::Auto: return "auto";
    case SteadyStateMethod::Simulated: return "simulated";
    case SteadyStateMethod::ZeroStateAligned: return "zero_state_aligned";
    case SteadyStateMethod::AdditiveHalfSubgroup: return "additive_half_subgroup";
  }
  return "auto";
}

SteadyStateMethod parse_steady(const std::string& s) {
  if (s == "auto") return SteadyStateMethod::Auto;
  if (s == "simulated") return SteadyStateMethod::Simulated;
  if (s == "zero_state_aligned") return SteadyStateMethod::ZeroStateAligned;
  if (s == "additive_half_subgroup") return SteadyStateMethod::AdditiveHalfSubgroup;
  throw ConfigError("unknown steady_method '" + s +
                    "' (expected auto, simulated, zero_state_aligned or additive_half_subgroup)");
}

ManifestChart chart_entry(const json& j) {
  ManifestChart c;
  const bool has_limits = j.contains("L") || j.contains("alpha") || (j.contains("lcl") && j.contains("ucl"));
  if (has_limits) {
    c.config = chart_from_json(j);
  } else {
    const ChartKind kind = parse_chart_kind(j.at("chart").get<std::string>());
    const int p = j.at("p").get<int>();
    const double key = kind == ChartKind::Mewms ? j.value("omega", 0.2) : j.at("n").get<double>();
    auto d = published_design(kind, p, key);
    if (!d) {
      throw ConfigError("manifest chart " + std::string(to_string(kind)) + " p=" + std::to_string(p) +
                        (kind == ChartKind::Mewms ? " omega=" : " n=") + format_double(key) +
                        " has no calibrated limits; run `mvdisp calibrate` and give L, alpha or lcl/ucl");
    }
    c.config = *d;
  }
  c.label = j.value("label", std::string());
  if (c.label.empty()) {
    c.label = std::string(to_string(c.config.kind)) + "_p" + std::to_string(c.config.p) +
              (c.config.kind == ChartKind::Mewms ? "_w" + format_double(c.config.omega)
                                                  : "_n" + std::to_string(c.config.n));
  }
  return c;
}

ManifestChart published(ChartKind kind, int p, double key, std::string label) {
  return {std::move(label), *published_design(kind, p, key)};
}

std::vector<ManifestChart> table_charts(int p, int n) {
  const std::string ns = "n" + std::to_string(n);
  return {published(ChartKind::Otcc, p, n, "OTCC_" + ns), published(ChartKind::Otmc, p, n, "OTMC_" + ns),
          published(ChartKind::Ntcc, p, n, "NTCC_" + ns), published(ChartKind::Gvc, p, n, "GVC_" + ns),
          published(ChartKind::Mewms, p, 0.2, "MEWMS_w0.2"), published(ChartKind::Mewms, p, 0.9, "MEWMS_w0.9")};
}

std::vector<ShiftScenario> grid(ShiftKind kind, const std::vector<double>& rhos, const std::vector<double>& deltas,
                                int q = 0, int corr_block = 0) {
  std::vector<ShiftScenario> out;
  for (double rho : rhos)
    for (double d : deltas) {
      ShiftScenario s;
      s.kind = kind;
      s.rho = rho;
      s.delta = d;
      s.q = q;
      s.corr_block = corr_block;
      out.push_back(s);
    }
  return out;
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

ExperimentManifest manifest_from_json(const json& j) {
  try {
    ExperimentManifest m;
    m.id = j.at("id").get<std::string>();
    if (m.id.empty()) throw ConfigError("manifest: empty id");
    const std::string layout = j.value("layout", std::string("table"));
    if (layout == "table") m.layout = Layout::Table;
    else if (layout == "series") m.layout = Layout::Series;
    else throw ConfigError("manifest: layout must be table or series");
    m.replications = j.value("replications", m.replications);
    m.master_seed = j.value("master_seed", m.master_seed);
    const std::string conv = j.value("convention", std::string("steady"));
    if (conv == "steady") m.convention = Convention::SteadyState;
    else if (conv == "zero") m.convention = Convention::ZeroState;
    else throw ConfigError("manifest: convention must be steady or zero");
    m.sim.warmup = j.value("warmup", m.sim.warmup);
    m.sim.steady = parse_steady(j.value("steady_method", std::string("auto")));
    m.star_above = j.value("star_above", m.star_above);
    m.output = j.value("output", m.id + ".csv");
    for (const auto& c : j.at("charts")) m.charts.push_back(chart_entry(c));
    if (j.contains("scenarios")) {
      for (const auto& s : j.at("scenarios")) m.scenarios.push_back(scenario_from_json(s));
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      auto more = grid(parse_shift_kind(g.value("shift", std::string("overall_corr"))),
                       g.value("rho", std::vector<double>{0.0}), g.at("delta").get<std::vector<double>>(),
                       g.value("q", 0), g.value("corr_block", 0));
      m.scenarios.insert(m.scenarios.end(), more.begin(), more.end());
    }
    if (m.charts.empty()) throw ConfigError("manifest '" + m.id + "': no charts");
    if (m.scenarios.empty()) throw ConfigError("manifest '" + m.id + "': no scenarios");
    if (m.replications < 2) throw ConfigError("manifest '" + m.id + "': replications must be at least 2");
    for (const auto& c : m.charts)
      for (const auto& s : m.scenarios) standardized_shift(c.config.p, s);  // rejects invalid cells up front
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

json manifest_to_json(const ExperimentManifest& m) {
  json charts = json::array();
  for (const auto& c : m.charts) {
    json cj = chart_to_json(c.config);
    cj["label"] = c.label;
    charts.push_back(cj);
  }
  json scen = json::array();
  for (const auto& s : m.scenarios) scen.push_back(scenario_to_json(s));
  return json{{"id", m.id},
              {"layout", m.layout == Layout::Table ? "table" : "series"},
              {"replications", m.replications},
              {"master_seed", m.master_seed},
              {"convention", m.convention == Convention::SteadyState ? "steady" : "zero"},
              {"warmup", m.sim.warmup},
              {"steady_method", steady_name(m.sim.steady)},
              {"star_above", m.star_above},
              {"output", m.output},
              {"charts", charts},
              {"scenarios", scen}};
}

ExperimentManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return manifest_from_json(j);
}

std::vector<std::string> builtin_manifest_ids() {
  return {"table8", "table9", "table10", "table11", "fig1", "fig2"};
}

ExperimentManifest builtin_manifest(const std::string& id) {
  ExperimentManifest m;
  m.id = id;
  m.output = id + ".csv";
  if (id == "table8" || id == "table10") {
    const bool small = id == "table8";
    m.charts = small ? table_charts(2, 10) : table_charts(10, 11);
    m.scenarios = grid(ShiftKind::OverallWithCorrelation,
                       small ? std::vector<double>{0.0, 0.2, 0.6, 0.8} : std::vector<double>{0.0, 0.6}, kDeltas);
  } else if (id == "table9" || id == "table11") {
    const bool small = id == "table9";
    m.charts = small ? table_charts(2, 10) : table_charts(10, 11);
    // For p = 2 the correlation acts on both variables, for p = 10 on the shifted block.
    m.scenarios = small ? grid(ShiftKind::Partial, {0.0, 0.2, 0.6, 0.8}, kDeltas, 1, 2)
                        : grid(ShiftKind::Partial, {0.0, 0.6}, kDeltas, 3, 3);
  } else if (id == "fig1" || id == "fig2") {
    m.layout = Layout::Series;
    for (ChartKind k : {ChartKind::Gvc, ChartKind::Ntcc, ChartKind::Otcc, ChartKind::Otmc})
      for (auto [p, ns] : {std::pair{2, std::vector<int>{3, 5, 10}}, std::pair{10, std::vector<int>{11, 15, 20}}})
        for (int n : ns)
          m.charts.push_back(published(k, p, n, std::string(to_string(k)) + "_p" + std::to_string(p) + "_n" +
                                                    std::to_string(n)));
    m.scenarios = grid(ShiftKind::OverallWithCorrelation, {id == "fig1" ? 0.0 : 0.6}, kDeltas);
  } else {
    throw ConfigError("unknown built-in manifest '" + id + "'");
  }
  return m;
}

std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& id, std::uint64_t cell) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix_seed(mix_seed(master_seed, h), cell);
}

ReproduceResult reproduce(const ExperimentManifest& m, int threads, std::ostream* progress) {
  ReproduceResult r{m, {}};
  const std::size_t nc = m.charts.size();
  for (std::size_t s = 0; s < m.scenarios.size(); ++s) {
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& cfg = m.charts[c].config;
      StreamSpec spec{ProcessModel::standard(cfg.p), m.scenarios[s], 1'000'000};
      EstimateOptions eo;
      eo.replications = m.replications;
      eo.master_seed = cell_seed(m.master_seed, m.id, s * nc + c);
      eo.convention = m.convention;
      eo.sim = m.sim;
      eo.threads = threads;
      eo.stop_above = m.star_above;
      r.cells.push_back({s, c, estimate_ats(cfg, spec, eo)});
      if (progress) {
        const auto& e = r.cells.back().estimate;
        *progress << m.id << " [" << (s * nc + c + 1) << "/" << m.scenarios.size() * nc << "] " << m.charts[c].label
                  << " delta=" << format_double(m.scenarios[s].delta) << " rho=" << format_double(m.scenarios[s].rho)
                  << " ats=" << (e.exceeded ? ">" : "") << fmt_fixed(e.ats, 2) << "\n";
      }
    }
  }
  return r;
}

void write_result_csv(std::ostream& out, const ReproduceResult& r) {
  const auto& m = r.manifest;
  const std::size_t nc = m.charts.size();
  if (m.layout == Layout::Table) {
    out << "shift,rho,delta,q";
    for (const auto& c : m.charts) out << "," << c.label << "," << c.label << "_se";
    out << "\n";
    for (std::size_t s = 0; s < m.scenarios.size(); ++s) {
      const auto& sc = m.scenarios[s];
      out << to_string(sc.kind) << "," << format_double(sc.rho) << "," << format_double(sc.delta) << "," << sc.q;
      for (std::size_t c = 0; c < nc; ++c) {
        const auto& e = r.cells[s * nc + c].estimate;
        if (e.exceeded || e.ats > m.star_above) out << ",*,";
        else out << "," << fmt_fixed(e.ats, 2) << "," << fmt_fixed(e.stderr_, 2);
      }
      out << "\n";
    }
    return;
  }
  out << "chart,label,p,n,omega,shift,rho,delta,q,ats,stderr,exceeded,censored\n";
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cfg = m.charts[c].config;
    for (std::size_t s = 0; s < m.scenarios.size(); ++s) {
      const auto& sc = m.scenarios[s];
      const auto& e = r.cells[s * nc + c].estimate;
      out << to_string(cfg.kind) << "," << m.charts[c].label << "," << cfg.p << "," << cfg.n << ","
          << (cfg.kind == ChartKind::Mewms ? format_double(cfg.omega) : "") << "," << to_string(sc.kind) << ","
          << format_double(sc.rho) << "," << format_double(sc.delta) << "," << sc.q << "," << fmt_fixed(e.ats, 3)
          << "," << fmt_fixed(e.stderr_, 3) << "," << (e.exceeded ? 1 : 0) << "," << e.censored << "\n";
    }
  }
}

// ---- Case study --------------------------------------------------------

CaseStudyResult case_study(const std::vector<Observation>& phase1_data, std::uint64_t seed,
                           const CaseStudyPlan& plan) {
  CaseStudyResult res{phase1_estimate(phase1_data), {}, {}};
  const ProcessModel& model = res.phase1;
  const int p = model.p();

  ShiftScenario up;
  up.delta = plan.delta_up;
  ShiftScenario down;
  down.delta = plan.delta_down;
  StreamGenerator gen_in(StreamSpec{model, ShiftScenario{}, 1});
  StreamGenerator gen_up(StreamSpec{model, up, 1});
  StreamGenerator gen_down(StreamSpec{model, down, 1});

  RngStream rng(seed, 0);
  const std::int64_t total = plan.in_control + plan.increase + plan.decrease;
  for (std::int64_t t = 1; t <= total; ++t) {
    Observation o{t, std::vector<double>(static_cast<std::size_t>(p))};
    if (t <= plan.in_control) gen_in.raw(t, std::nullopt, rng, o.x);
    else if (t <= plan.in_control + plan.increase) gen_up.raw(t, 1, rng, o.x);
    else gen_down.raw(t, 1, rng, o.x);
    res.phase2.push_back(std::move(o));
  }

  const std::vector<std::pair<std::string, ChartConfig>> charts = {
      {"MEWMS_w0.2", ChartConfig{ChartKind::Mewms, p, 1, 0.2, MewmsWidth{3.4964}}},
      {"MEWMS_w0.9", ChartConfig{ChartKind::Mewms, p, 1, 0.9, MewmsWidth{4.9}}},
      {"GVC", *published_design(ChartKind::Gvc, p, plan.n)},
      {"NTCC", *published_design(ChartKind::Ntcc, p, plan.n)},
      {"OTCC", *published_design(ChartKind::Otcc, p, plan.n)},
      {"OTMC", *published_design(ChartKind::Otmc, p, plan.n)},
  };
  std::vector<double> y(static_cast<std::size_t>(p));
  for (const auto& [label, cfg] : charts) {
    Monitor mon(cfg);
    ChartSeries series{label, cfg, {}};
    ChartOutput out;
    for (const auto& o : res.phase2) {
      standardize_into(o.x, model, y);
      if (mon.observe_into(o.t, y, out)) series.points.push_back(out);
    }
    res.series.push_back(std::move(series));
  }
  return res;
}

void write_case_study_csv(std::ostream& out, const CaseStudyResult& r) {
  out << "chart,t,statistic,lcl,ucl,signal\n";
  for (const auto& s : r.series)
    for (const auto& pt : s.points) {
      out << s.label << ",";
      write_chart_output_row(out, pt);
    }
}

std::vector<Observation> make_moment_matched_sample(const std::vector<double>& mu, const SymMatrix& sigma,
                                                    std::int64_t m, std::uint64_t seed) {
  const std::size_t p = mu.size();
  if (sigma.dim() != p) throw ConfigError("moment-matched sample: mu and sigma dimensions disagree");
  if (m < static_cast<std::int64_t>(p) + 1) throw ConfigError("moment-matched sample: need at least p + 1 rows");
  RngStream rng(seed, 0);
  std::vector<std::vector<double>> z(static_cast<std::size_t>(m), std::vector<double>(p));
  for (auto& row : z) rng.fill_normal(row);

  std::vector<double> mean(p, 0.0);
  for (const auto& row : z)
    for (std::size_t i = 0; i < p; ++i) mean[i] += row[i];
  for (auto& v : mean) v /= static_cast<double>(m);
  Matrix c(p, p);
  for (auto& row : z) {
    for (std::size_t i = 0; i < p; ++i) row[i] -= mean[i];
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = 0; k < p; ++k) c(i, k) += row[i] * row[k];
  }
  for (auto& v : c.data()) v /= static_cast<double>(m - 1);
  const Matrix lc = cholesky(SymMatrix(c));
  const Matrix ls = cholesky(sigma);

  std::vector<Observation> out;
  std::vector<double> w(p);
  for (std::int64_t r = 0; r < m; ++r) {
    const auto& row = z[static_cast<std::size_t>(r)];
    // w = lc^{-1} row (forward substitution), so the w have identity covariance.
    for (std::size_t i = 0; i < p; ++i) {
      double s = row[i];
      for (std::size_t k = 0; k < i; ++k) s -= lc(i, k) * w[k];
      w[i] = s / lc(i, i);
    }
    Observation o{r + 1, mu};
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = 0; k <= i; ++k) o.x[i] += ls(i, k) * w[k];
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace mvdisp
