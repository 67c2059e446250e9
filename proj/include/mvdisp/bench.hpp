#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvdisp/charts.hpp"
#include "mvdisp/model.hpp"
#include "mvdisp/simulate.hpp"

namespace mvdisp {

enum class Layout {
  Table,   // one row per scenario, an ATS and a stderr column per chart
  Series,  // one row per (chart, scenario): plot-ready long format
};

struct ManifestChart {
  std::string label;
  ChartConfig config;
};

struct ExperimentManifest {
  std::string id;
  Layout layout = Layout::Table;
  std::vector<ManifestChart> charts;
  std::vector<ShiftScenario> scenarios;
  std::int64_t replications = 10000;
  std::uint64_t master_seed = 20190618;
  Convention convention = Convention::SteadyState;
  SimOptions sim;
  double star_above = 10000.0;  // table cells above this print as "*"
  std::string output;           // default <id>.csv
};

// Manifest JSON:
//   {"id", "layout": "table"|"series", "replications", "master_seed",
//    "convention": "steady"|"zero", "warmup", "steady_method", "star_above", "output",
//    "charts": [{"label", "chart", "p", "n"|"omega", optional limits}],
//    "scenarios": [{"shift", "delta", "rho", "q", "corr_block"}]
//      or "grid": {"shift", "delta": [...], "rho": [...], "q", "corr_block"}}
// A chart entry without limits takes the published design for (chart, p,
// n|omega); if none exists the manifest is rejected as uncalibrated.
ExperimentManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const ExperimentManifest& m);
ExperimentManifest read_manifest_file(const std::string& path);

// table8..table11, fig1, fig2
std::vector<std::string> builtin_manifest_ids();
ExperimentManifest builtin_manifest(const std::string& id);

struct CellResult {
  std::size_t scenario;
  std::size_t chart;
  AtsEstimate estimate;
};

struct ReproduceResult {
  ExperimentManifest manifest;
  std::vector<CellResult> cells;  // scenario-major
};

// Seed for one grid cell: a function of (master_seed, id, cell index) only.
std::uint64_t cell_seed(std::uint64_t master_seed, const std::string& id, std::uint64_t cell);

// Runs every cell in order; replications within a cell run in parallel.
ReproduceResult reproduce(const ExperimentManifest& m, int threads = 0, std::ostream* progress = nullptr);
void write_result_csv(std::ostream& out, const ReproduceResult& r);

// ---- Case study --------------------------------------------------------

struct CaseStudyPlan {
  std::int64_t in_control = 50;
  std::int64_t increase = 30;   // observations at delta_up
  std::int64_t decrease = 20;   // observations at delta_down
  double delta_up = 2.5;
  double delta_down = 0.5;
  int n = 5;
};

struct ChartSeries {
  std::string label;
  ChartConfig config;
  std::vector<ChartOutput> points;
};

struct CaseStudyResult {
  ProcessModel phase1;
  std::vector<Observation> phase2;
  std::vector<ChartSeries> series;
};

// Phase I estimation, then a simulated Phase II stream from the estimates
// (in control, variance increase, variance decrease), monitored by MEWMS
// (omega 0.2 and 0.9), GVC, NTCC, OTCC and OTMC.
CaseStudyResult case_study(const std::vector<Observation>& phase1_data, std::uint64_t seed,
                           const CaseStudyPlan& plan = {});
// Long format: chart,t,statistic,lcl,ucl,signal
void write_case_study_csv(std::ostream& out, const CaseStudyResult& r);

// m observations whose sample mean and (m-1)-divisor covariance equal mu and
// sigma up to rounding.
std::vector<Observation> make_moment_matched_sample(const std::vector<double>& mu, const SymMatrix& sigma,
                                                    std::int64_t m, std::uint64_t seed);

}  // namespace mvdisp
