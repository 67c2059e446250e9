#include "mvdisp/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvdisp/error.hpp"

namespace mvdisp {
namespace {

// The search runs over a scalar s in which the in-control ATS increases.
// For the equal-tail charts s = -ln c, so the tail probability c = exp(-s).
struct Family {
  ChartKind kind;
  double lo, hi;       // default bracket in s
  double floor, ceil;  // hard limits on s during expansion

  ChartConfig apply(ChartConfig cfg, double s) const {
    switch (kind) {
      case ChartKind::Mewms: cfg.limits = MewmsWidth{s}; break;
      case ChartKind::Gvc: cfg.limits = GvcWidth{s}; break;
      default: cfg.limits = TypeOneError{std::exp(-s)}; break;
    }
    return cfg;
  }
  double parameter(double s) const { return kind == ChartKind::Mewms || kind == ChartKind::Gvc ? s : std::exp(-s); }
  double to_s(double parameter) const {
    return kind == ChartKind::Mewms || kind == ChartKind::Gvc ? parameter : -std::log(parameter);
  }
};

Family family_for(ChartKind kind) {
  switch (kind) {
    case ChartKind::Mewms: return {kind, 2.0, 5.0, 0.05, 50.0};
    case ChartKind::Gvc: return {kind, 0.2, 6.0, 1e-3, 200.0};
    default: return {kind, -std::log(0.05), -std::log(1e-5), -std::log(0.999), -std::log(1e-14)};
  }
}

struct Eval {
  double s;
  AtsEstimate est;
};

std::string describe(const std::vector<Eval>& evals, const Family& fam) {
  std::ostringstream os;
  os.precision(8);
  for (const auto& e : evals)
    os << "\n  " << fam.parameter(e.s) << " -> " << (e.est.exceeded ? ">" : "") << e.est.ats << " (se "
       << e.est.stderr_ << ")";
  return os.str();
}

void check_monotone(const std::vector<Eval>& evals, const Family& fam, ChartKind kind) {
  std::vector<const Eval*> sorted;
  for (const auto& e : evals) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const Eval* a, const Eval* b) { return a->s < b->s; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const auto& a = sorted[i]->est;
      const auto& b = sorted[j]->est;
      if (b.exceeded) continue;  // b is a lower bound above the cap, a cannot exceed it meaningfully
      // Warm-up redraws decouple paths slightly under common random numbers,
      // so allow two standard errors of slack before declaring a violation.
      const double slack = 2.0 * std::max(a.stderr_, b.stderr_);
      if (a.exceeded || a.ats > b.ats + slack) {
        throw CalibrationError(std::string(to_string(kind)) +
                               ": in-control ATS is not monotone in the searched constant" +
                               describe(evals, fam));
      }
    }
  }
}

}  // namespace

CalibrationResult solve_constant(const ChartConfig& base, const CalibrationOptions& opts, const ProcessModel& model) {
  if (!(opts.target_ats > 1.0)) throw ConfigError("calibrate: target ATS must exceed 1");
  if (opts.replications < 2) throw ConfigError("calibrate: need at least 2 replications per evaluation");
  if (model.p() != base.p) throw ConfigError("calibrate: model dimension does not match the chart");

  StreamSpec spec{model, ShiftScenario{}, 1'000'000};
  EstimateOptions eo;
  eo.replications = opts.replications;
  eo.master_seed = opts.master_seed;
  eo.convention = Convention::SteadyState;
  eo.sim = opts.sim;
  eo.threads = opts.threads;

  CalibrationResult res;
  auto tolerance_for = [&](const AtsEstimate& est) {
    return opts.tolerance > 0.0 ? opts.tolerance : std::max(1.0, 2.0 * est.stderr_);
  };

  if (base.kind == ChartKind::Ntcc) {
    // Non-overlapping windows are independent, so the run length in
    // subgroups is geometric and ATS = n / alpha.
    const double alpha = base.n / opts.target_ats;
    if (!(alpha < 1.0)) throw CalibrationError("ntcc: target ATS must exceed the subgroup size");
    res.chart = base;
    res.chart.limits = TypeOneError{alpha};
    validate(res.chart);
    res.parameter = alpha;
    res.limits = resolve_limits(res.chart);
    res.achieved = estimate_ats(res.chart, spec, eo);
    res.history.push_back({alpha, res.achieved.ats, res.achieved.exceeded});
    res.converged = std::abs(res.achieved.ats - opts.target_ats) <= tolerance_for(res.achieved);
    return res;
  }

  const Family fam = family_for(base.kind);
  // Evaluations stop early once the ATS is certain to exceed this cap; such
  // points only ever serve as upper bracket ends.
  eo.stop_above = 3.0 * opts.target_ats;

  std::vector<Eval> evals;
  auto evaluate = [&](double s) -> const Eval& {
    ChartConfig cfg = fam.apply(base, s);
    validate(cfg);
    evals.push_back({s, estimate_ats(cfg, spec, eo)});
    res.history.push_back({fam.parameter(s), evals.back().est.ats, evals.back().est.exceeded});
    check_monotone(evals, fam, base.kind);
    return evals.back();
  };
  auto above = [&](const Eval& e) { return e.est.exceeded || e.est.ats > opts.target_ats; };

  double lo = fam.lo, hi = fam.hi;
  if (opts.bracket) {
    lo = std::min(fam.to_s(opts.bracket->first), fam.to_s(opts.bracket->second));
    hi = std::max(fam.to_s(opts.bracket->first), fam.to_s(opts.bracket->second));
  }
  Eval elo = evaluate(lo);
  Eval ehi = evaluate(hi);
  for (int k = 0; above(elo) && k < 30; ++k) {
    const double w = hi - lo;
    hi = lo;
    ehi = elo;
    lo = std::max(fam.floor, lo - w);
    if (lo == hi) break;
    elo = evaluate(lo);
  }
  for (int k = 0; !above(ehi) && k < 30; ++k) {
    const double w = hi - lo;
    lo = hi;
    elo = ehi;
    hi = std::min(fam.ceil, hi + w);
    if (lo == hi) break;
    ehi = evaluate(hi);
  }
  if (above(elo) || !above(ehi)) {
    throw CalibrationError(std::string(to_string(base.kind)) + ": bracket does not straddle target ATS " +
                           std::to_string(opts.target_ats) + " after expansion" + describe(evals, fam));
  }

  auto finish = [&](const Eval& e, bool converged) {
    res.chart = fam.apply(base, e.s);
    res.parameter = fam.parameter(e.s);
    res.limits = resolve_limits(res.chart);
    res.achieved = e.est;
    res.converged = converged;
    return res;
  };

  for (const Eval* e : {&elo, &ehi})
    if (!e->est.exceeded && std::abs(e->est.ats - opts.target_ats) <= tolerance_for(e->est)) return finish(*e, true);

  const double resolution = 1e-9 * std::max(1.0, std::abs(hi));
  for (res.iterations = 1; res.iterations <= opts.max_iterations; ++res.iterations) {
    // Interpolate log ATS between the bracket ends (the ATS is roughly
    // exponential in the constant), safeguarded toward the midpoint.
    double s = 0.5 * (lo + hi);
    if (!ehi.est.exceeded && elo.est.ats > 0.0) {
      const double la = std::log(elo.est.ats), lb = std::log(ehi.est.ats), lt = std::log(opts.target_ats);
      if (lb > la) {
        const double guess = lo + (hi - lo) * (lt - la) / (lb - la);
        const double margin = 0.1 * (hi - lo);
        s = std::clamp(guess, lo + margin, hi - margin);
      }
    }
    const Eval& e = evaluate(s);
    if (!e.est.exceeded && std::abs(e.est.ats - opts.target_ats) <= tolerance_for(e.est)) return finish(e, true);
    if (above(e)) {
      hi = s;
      ehi = e;
    } else {
      lo = s;
      elo = e;
    }
    if (hi - lo < resolution) break;
  }
  // Bracket collapsed or iterations exhausted: report the closer end.
  const bool use_hi = !ehi.est.exceeded && std::abs(ehi.est.ats - opts.target_ats) < std::abs(elo.est.ats - opts.target_ats);
  return finish(use_hi ? ehi : elo, false);
}

}  // namespace mvdisp
