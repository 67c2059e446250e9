#include "mvdisp/model.hpp"

#include <cmath>
#include <string>

namespace mvdisp {

namespace {

bool is_identity(const SymMatrix& s) {
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = 0; j < s.dim(); ++j)
      if (s(i, j) != (i == j ? 1.0 : 0.0)) return false;
  return true;
}

bool is_diagonal(const SymMatrix& s) {
  for (std::size_t i = 0; i < s.dim(); ++i)
    for (std::size_t j = 0; j < s.dim(); ++j)
      if (i != j && s(i, j) != 0.0) return false;
  return true;
}

}  // namespace

ProcessModel::ProcessModel(std::vector<double> mu0, SymMatrix sigma0)
    : mu0_(std::move(mu0)), sigma0_(std::move(sigma0)) {
  if (mu0_.empty()) throw ConfigError("process model needs at least one characteristic");
  if (sigma0_.dim() != mu0_.size())
    throw ConfigError("process model: mu0 has " + std::to_string(mu0_.size()) + " entries but sigma0 is " +
                      std::to_string(sigma0_.dim()) + "x" + std::to_string(sigma0_.dim()));
  cholesky(sigma0_);  // rejects non-SPD covariance
  whitener_ = inv_sqrt_sym(sigma0_);
  bool zero_mean = true;
  for (double m : mu0_) zero_mean = zero_mean && m == 0.0;
  standard_ = zero_mean && is_identity(sigma0_);
}

ProcessModel ProcessModel::standard(int p) {
  if (p < 1) throw ConfigError("dimension p must be positive");
  return ProcessModel(std::vector<double>(static_cast<std::size_t>(p), 0.0), SymMatrix::identity(static_cast<std::size_t>(p)));
}

SymMatrix standardized_shift(int p, const ShiftScenario& sc) {
  if (p < 1) throw ConfigError("dimension p must be positive");
  if (!(sc.delta > 0.0)) throw ConfigError("shift delta must be positive");
  if (!(sc.rho >= 0.0 && sc.rho < 1.0)) throw ConfigError("correlation rho must lie in [0, 1)");

  const auto n = static_cast<std::size_t>(p);
  Matrix s(n, n);
  switch (sc.kind) {
    case ShiftKind::Overall:
      if (sc.rho != 0.0) throw ConfigError("overall shift takes no correlation; use overall_corr");
      for (std::size_t i = 0; i < n; ++i) s(i, i) = sc.delta;
      break;
    case ShiftKind::OverallWithCorrelation:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s(i, j) = sc.delta * (i == j ? 1.0 : sc.rho);
      break;
    case ShiftKind::Partial: {
      if (sc.q < 1 || sc.q > p) throw ConfigError("partial shift needs 1 <= q <= p");
      const int block = sc.corr_block == 0 ? sc.q : sc.corr_block;
      if (block < 1 || block > p) throw ConfigError("partial shift correlation block must lie in [1, p]");
      std::vector<double> sd(n, 1.0);
      for (int i = 0; i < sc.q; ++i) sd[static_cast<std::size_t>(i)] = std::sqrt(sc.delta);
      for (std::size_t i = 0; i < n; ++i) {
        s(i, i) = sd[i] * sd[i];
        for (std::size_t j = 0; j < n; ++j)
          if (i != j && i < static_cast<std::size_t>(block) && j < static_cast<std::size_t>(block))
            s(i, j) = sc.rho * sd[i] * sd[j];
      }
      break;
    }
  }
  SymMatrix out(std::move(s));
  try {
    cholesky(out);
  } catch (const NumericError& e) {
    throw NumericError(std::string("shifted covariance is not positive definite: ") + e.what());
  }
  return out;
}

SymMatrix build_covariance(const ProcessModel& model, const ShiftScenario& sc) {
  const SymMatrix shift = standardized_shift(model.p(), sc);
  if (is_identity(shift)) return model.sigma0();
  if (is_identity(model.sigma0())) return shift;

  Matrix root;
  if (is_diagonal(model.sigma0())) {
    std::vector<double> d(model.sigma0().dim());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::sqrt(model.sigma0()(i, i));
    root = Matrix::diagonal(d);
  } else {
    root = sqrt_sym(model.sigma0()).matrix();
  }
  Matrix out = root * shift.matrix() * root;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = i + 1; j < out.cols(); ++j) out(j, i) = out(i, j);
  SymMatrix result(std::move(out));
  cholesky(result);
  return result;
}

void standardize_into(std::span<const double> x, const ProcessModel& model, std::span<double> y) {
  const auto p = static_cast<std::size_t>(model.p());
  if (x.size() != p || y.size() != p)
    throw DataError("observation has " + std::to_string(x.size()) + " values, model expects " + std::to_string(p));
  if (model.is_standard()) {
    for (std::size_t i = 0; i < p; ++i) y[i] = x[i];
    return;
  }
  const SymMatrix& w = model.whitener();
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += w(i, j) * (x[j] - model.mu0()[j]);
    y[i] = s;
  }
}

Observation standardize(const Observation& x, const ProcessModel& model) {
  Observation y{x.t, std::vector<double>(x.x.size())};
  standardize_into(x.x, model, y.x);
  return y;
}

ProcessModel phase1_estimate(std::span<const Observation> data) {
  if (data.empty()) throw DataError("phase I data is empty");
  const std::size_t p = data.front().x.size();
  const std::size_t m = data.size();
  if (p == 0) throw DataError("phase I observations have no characteristics");
  if (m < p + 1)
    throw DataError("phase I needs at least p+1 = " + std::to_string(p + 1) + " observations, got " + std::to_string(m));

  std::vector<double> mean(p, 0.0);
  for (const auto& obs : data) {
    if (obs.x.size() != p) throw DataError("phase I observation at t=" + std::to_string(obs.t) + " has wrong dimension");
    for (std::size_t i = 0; i < p; ++i) mean[i] += obs.x[i];
  }
  for (double& v : mean) v /= static_cast<double>(m);

  Matrix cov(p, p);
  for (const auto& obs : data)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j <= i; ++j) cov(i, j) += (obs.x[i] - mean[i]) * (obs.x[j] - mean[j]);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      cov(i, j) /= static_cast<double>(m - 1);
      cov(j, i) = cov(i, j);
    }

  SymMatrix sigma(std::move(cov));
  try {
    cholesky(sigma);
  } catch (const NumericError&) {
    throw DataError("phase I sample covariance is singular; supply more (or more varied) observations");
  }
  return ProcessModel(std::move(mean), std::move(sigma));
}

}  // namespace mvdisp
