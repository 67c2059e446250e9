#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvdisp/charts.hpp"
#include "mvdisp/model.hpp"
#include "mvdisp/simulate.hpp"

namespace mvdisp {

// Observation CSV: header `t,x1,...,xp` (the t column is optional and
// defaults to the 1-based row index). Errors name the offending line.
std::vector<Observation> read_observations_csv(std::istream& in, const std::string& source = "<input>");
std::vector<Observation> read_observations_csv_file(const std::string& path);
void write_observations_csv(std::ostream& out, const std::vector<Observation>& obs);

// Model file: JSON {"p", "mu0", "sigma0"} with doubles at round-trip precision.
nlohmann::json model_to_json(const ProcessModel& model);
ProcessModel model_from_json(const nlohmann::json& j);
ProcessModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const ProcessModel& model);

nlohmann::json chart_to_json(const ChartConfig& cfg);
ChartConfig chart_from_json(const nlohmann::json& j);

nlohmann::json scenario_to_json(const ShiftScenario& sc);
ShiftScenario scenario_from_json(const nlohmann::json& j);
ShiftKind parse_shift_kind(const std::string& name);
std::string to_string(ShiftKind kind);

// Everything needed to resume monitoring after a restart.
nlohmann::json monitor_snapshot(const Monitor& monitor);
Monitor monitor_from_snapshot(const nlohmann::json& j);

// Monitor output: t,statistic,lcl,ucl,signal
void write_chart_output_header(std::ostream& out);
void write_chart_output_row(std::ostream& out, const ChartOutput& row);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace mvdisp
