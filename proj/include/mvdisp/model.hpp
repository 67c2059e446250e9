#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mvdisp/numerics.hpp"

namespace mvdisp {

// In-control process: mean mu0 and covariance sigma0 of p characteristics.
class ProcessModel {
 public:
  ProcessModel(std::vector<double> mu0, SymMatrix sigma0);

  // N(0, I_p): the model every simulation runs in after standardisation.
  static ProcessModel standard(int p);

  int p() const { return static_cast<int>(mu0_.size()); }
  const std::vector<double>& mu0() const { return mu0_; }
  const SymMatrix& sigma0() const { return sigma0_; }
  // Sigma0^{-1/2}, cached at construction.
  const SymMatrix& whitener() const { return whitener_; }
  bool is_standard() const { return standard_; }

 private:
  std::vector<double> mu0_;
  SymMatrix sigma0_;
  SymMatrix whitener_;
  bool standard_ = false;
};

enum class ShiftKind {
  Overall,                 // Sigma1 = delta * Sigma0
  OverallWithCorrelation,  // delta * variances, pairwise correlation rho
  Partial,                 // first q variances * delta, rho within the leading block
};

struct ShiftScenario {
  ShiftKind kind = ShiftKind::Overall;
  double delta = 1.0;
  double rho = 0.0;
  int q = 0;
  // Number of leading variables sharing correlation rho under Partial; 0 means q.
  int corr_block = 0;
  // First out-of-control time index; nullopt means the stream never shifts.
  std::optional<std::int64_t> tau;

  static ShiftScenario in_control() { return {}; }
};

// Out-of-control covariance for the scenario. Built as
// Sigma0^{1/2} * S * Sigma0^{1/2}, where S is the shift pattern on the
// standardised scale; for diagonal Sigma0 this is the textbook form with
// sigma_i taken from Sigma0. Throws ConfigError on invalid parameters and
// NumericError if the result is not positive definite.
SymMatrix build_covariance(const ProcessModel& model, const ShiftScenario& scenario);

// Shift pattern on the standardised scale (Sigma0 = I).
SymMatrix standardized_shift(int p, const ShiftScenario& scenario);

struct Observation {
  std::int64_t t = 0;
  std::vector<double> x;
};

// y = Sigma0^{-1/2} (x - mu0)
Observation standardize(const Observation& x, const ProcessModel& model);
void standardize_into(std::span<const double> x, const ProcessModel& model, std::span<double> y);

// Phase I: sample mean and (m-1)-divisor sample covariance.
// Throws DataError for fewer than p+1 rows or a singular covariance.
ProcessModel phase1_estimate(std::span<const Observation> data);

}  // namespace mvdisp
