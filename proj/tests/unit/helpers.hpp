#pragma once

#include <Eigen/Dense>

#include "mvdisp/numerics.hpp"
#include "mvdisp/rng.hpp"

namespace testutil {

// A A' + p I with standard normal A: well conditioned, dense.
inline mvdisp::SymMatrix random_spd(std::size_t p, mvdisp::RngStream& rng) {
  mvdisp::Matrix a(p, p);
  for (auto& v : a.data()) v = rng.normal();
  mvdisp::Matrix s = a * a.transpose();
  for (std::size_t i = 0; i < p; ++i) s(i, i) += static_cast<double>(p);
  return mvdisp::SymMatrix(s);
}

inline Eigen::MatrixXd to_eigen(const mvdisp::Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
  return e;
}

}  // namespace testutil
