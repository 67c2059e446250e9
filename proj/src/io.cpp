#include "mvdisp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mvdisp/error.hpp"

namespace mvdisp {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto r = std::from_chars(first, last, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != last)
    throw DataError(where + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

std::vector<Observation> read_observations_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": empty file, expected header t,x1,...,xp");
  const bool has_t = header.front() == "t";
  const std::size_t p = header.size() - (has_t ? 1 : 0);
  if (p == 0) throw DataError(source + ":" + std::to_string(lineno) + ": header names no variables");
  for (std::size_t i = has_t ? 1 : 0; i < header.size(); ++i) {
    if (header[i].empty()) throw DataError(source + ":" + std::to_string(lineno) + ": empty column name");
    if (header[i] == "t") throw DataError(source + ":" + std::to_string(lineno) + ": time column must come first");
  }

  std::vector<Observation> obs;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " columns, found " +
                      std::to_string(fields.size()));
    Observation o;
    std::size_t k = 0;
    if (has_t) {
      const double t = parse_number(fields[0], where);
      if (t != std::floor(t) || std::abs(t) > 9e15) throw DataError(where + ": time '" + fields[0] + "' is not an integer");
      o.t = static_cast<std::int64_t>(t);
      k = 1;
    } else {
      o.t = static_cast<std::int64_t>(obs.size()) + 1;
    }
    o.x.reserve(p);
    for (; k < fields.size(); ++k) {
      const double v = parse_number(fields[k], where);
      if (!std::isfinite(v)) throw DataError(where + ": non-finite value '" + fields[k] + "'");
      o.x.push_back(v);
    }
    if (!obs.empty() && o.t <= obs.back().t)
      throw DataError(where + ": time " + std::to_string(o.t) + " does not increase");
    obs.push_back(std::move(o));
  }
  return obs;
}

std::vector<Observation> read_observations_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_observations_csv(in, path);
}

void write_observations_csv(std::ostream& out, const std::vector<Observation>& obs) {
  const std::size_t p = obs.empty() ? 0 : obs.front().x.size();
  out << "t";
  for (std::size_t i = 1; i <= p; ++i) out << ",x" << i;
  out << "\n";
  for (const auto& o : obs) {
    out << o.t;
    for (double v : o.x) out << "," << format_double(v);
    out << "\n";
  }
}

json model_to_json(const ProcessModel& model) {
  const int p = model.p();
  json sig = json::array();
  for (int i = 0; i < p; ++i) {
    json row = json::array();
    for (int j = 0; j < p; ++j) row.push_back(model.sigma0()(i, j));
    sig.push_back(row);
  }
  return json{{"p", p}, {"mu0", model.mu0()}, {"sigma0", sig}};
}

ProcessModel model_from_json(const json& j) {
  try {
    const int p = j.at("p").get<int>();
    auto mu = j.at("mu0").get<std::vector<double>>();
    auto rows = j.at("sigma0").get<std::vector<std::vector<double>>>();
    if (p < 1 || mu.size() != static_cast<std::size_t>(p) || rows.size() != static_cast<std::size_t>(p))
      throw DataError("model: p, mu0 and sigma0 dimensions disagree");
    for (const auto& r : rows)
      if (r.size() != static_cast<std::size_t>(p)) throw DataError("model: sigma0 must be p x p");
    return ProcessModel(std::move(mu), SymMatrix(Matrix::from_rows(rows)));
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const NumericError& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

namespace {
json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}
}  // namespace

ProcessModel read_model_file(const std::string& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_model_file(const std::string& path, const ProcessModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << model_to_json(model).dump(2) << "\n";
}

json chart_to_json(const ChartConfig& cfg) {
  json j{{"chart", std::string(to_string(cfg.kind))}, {"p", cfg.p}, {"n", cfg.n}};
  if (cfg.kind == ChartKind::Mewms) j["omega"] = cfg.omega;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MewmsWidth> || std::is_same_v<T, GvcWidth>) {
          j["L"] = s.L;
        } else if constexpr (std::is_same_v<T, TypeOneError>) {
          j["alpha"] = s.alpha;
        } else {
          j["lcl"] = s.lcl;
          j["ucl"] = s.ucl;
        }
      },
      cfg.limits);
  return j;
}

ChartConfig chart_from_json(const json& j) {
  try {
    ChartConfig cfg;
    cfg.kind = parse_chart_kind(j.at("chart").get<std::string>());
    cfg.p = j.at("p").get<int>();
    cfg.n = j.value("n", 1);
    cfg.omega = j.value("omega", 0.2);
    if (j.contains("L")) {
      const double L = j.at("L").get<double>();
      if (cfg.kind == ChartKind::Gvc) cfg.limits = GvcWidth{L};
      else cfg.limits = MewmsWidth{L};
    } else if (j.contains("alpha")) {
      cfg.limits = TypeOneError{j.at("alpha").get<double>()};
    } else if (j.contains("lcl") && j.contains("ucl")) {
      cfg.limits = FixedLimits{j.at("lcl").get<double>(), j.at("ucl").get<double>()};
    } else {
      throw ConfigError("chart " + std::string(to_string(cfg.kind)) + ": no limits (L, alpha, or lcl/ucl)");
    }
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("chart config: ") + e.what());
  }
}

std::string to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::Overall: return "overall";
    case ShiftKind::OverallWithCorrelation: return "overall_corr";
    case ShiftKind::Partial: return "partial";
  }
  return "?";
}

ShiftKind parse_shift_kind(const std::string& name) {
  if (name == "overall") return ShiftKind::Overall;
  if (name == "overall_corr") return ShiftKind::OverallWithCorrelation;
  if (name == "partial") return ShiftKind::Partial;
  throw ConfigError("unknown shift '" + name + "' (expected overall, overall_corr or partial)");
}

json scenario_to_json(const ShiftScenario& sc) {
  json j{{"shift", to_string(sc.kind)}, {"delta", sc.delta}, {"rho", sc.rho}};
  if (sc.kind == ShiftKind::Partial) {
    j["q"] = sc.q;
    j["corr_block"] = sc.corr_block;
  }
  if (sc.tau) j["tau"] = *sc.tau;
  return j;
}

ShiftScenario scenario_from_json(const json& j) {
  try {
    ShiftScenario sc;
    sc.kind = parse_shift_kind(j.value("shift", std::string("overall")));
    sc.delta = j.value("delta", 1.0);
    sc.rho = j.value("rho", 0.0);
    sc.q = j.value("q", 0);
    sc.corr_block = j.value("corr_block", 0);
    if (j.contains("tau")) sc.tau = j.at("tau").get<std::int64_t>();
    return sc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

json monitor_snapshot(const Monitor& monitor) {
  const auto& w = monitor.windower();
  json j{{"format", "mvdisp-monitor-1"},
         {"chart", chart_to_json(monitor.chart().config())},
         {"observations", w.observations()},
         {"emitted", w.emitted()},
         {"last_time", w.last_time()},
         {"buffer", w.buffered()}};
  if (monitor.chart().config().kind == ChartKind::Mewms) {
    const auto& st = monitor.chart().mewms_state();
    json e = json::array();
    for (std::size_t i = 0; i < st.e.rows(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < st.e.cols(); ++k) row.push_back(st.e(i, k));
      e.push_back(row);
    }
    j["mewms"] = json{{"t", st.t}, {"e", e}};
  }
  return j;
}

Monitor monitor_from_snapshot(const json& j) {
  try {
    if (j.value("format", std::string()) != "mvdisp-monitor-1") throw DataError("snapshot: unknown format");
    Monitor m(chart_from_json(j.at("chart")));
    m.windower().restore(j.at("last_time").get<std::int64_t>(), j.at("observations").get<std::int64_t>(),
                         j.at("emitted").get<std::int64_t>(),
                         j.at("buffer").get<std::vector<std::vector<double>>>());
    if (j.contains("mewms")) {
      MewmsState st;
      st.t = j.at("mewms").at("t").get<std::int64_t>();
      auto rows = j.at("mewms").at("e").get<std::vector<std::vector<double>>>();
      st.e = rows.empty() ? Matrix() : Matrix::from_rows(rows);
      m.chart().set_mewms_state(std::move(st));
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("snapshot: ") + e.what());
  }
}

void write_chart_output_header(std::ostream& out) { out << "t,statistic,lcl,ucl,signal\n"; }

void write_chart_output_row(std::ostream& out, const ChartOutput& row) {
  out << row.time << "," << format_double(row.statistic) << "," << format_double(row.lcl) << ","
      << format_double(row.ucl) << "," << (row.signal ? 1 : 0) << "\n";
}

}  // namespace mvdisp
