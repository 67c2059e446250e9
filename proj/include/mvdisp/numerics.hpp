#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvdisp/error.hpp"

namespace mvdisp {

// Dense row-major matrix. Sizes here are small (p <= a few dozen), so the
// class favours clarity over blocking or SIMD tricks.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transpose() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(double s, const Matrix& a);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Largest absolute entry.
double max_abs(const Matrix& a);

// y = a * x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

// A square matrix known to be symmetric to within 1e-12 (relative to its
// largest entry). Construction symmetrises the stored values exactly.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  static SymMatrix identity(std::size_t n) { return SymMatrix(Matrix::identity(n)); }
  static SymMatrix diagonal(std::span<const double> d) { return SymMatrix(Matrix::diagonal(d)); }

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& matrix() const { return m_; }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

// Lower-triangular Cholesky factor L with L * L^T = a.
// Throws NumericError naming the failing pivot when a is not positive definite.
Matrix cholesky(const SymMatrix& a);

struct SymEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k belongs to values[k]
};

// Cyclic Jacobi eigendecomposition. Deterministic: eigenpairs sorted ascending,
// each eigenvector's largest-magnitude component made positive.
SymEigen sym_eigen(const SymMatrix& a);

// Symmetric B with B * a * B = I, built from the eigendecomposition of a.
SymMatrix inv_sqrt_sym(const SymMatrix& a);

// Symmetric square root a^{1/2}.
SymMatrix sqrt_sym(const SymMatrix& a);

// Determinant by LU factorisation with partial pivoting.
double det_sym(const SymMatrix& a);
double det_lu(std::span<double> a, std::size_t n);  // in-place, row-major scratch

// Regularised lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
// Regularised upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);

double chisq_cdf(double dof, double x);
double chisq_sf(double dof, double x);

// x with P(chi2_dof <= x) = beta. Throws NumericError unless 0 < beta < 1.
double chisq_quantile(double dof, double beta);

}  // namespace mvdisp
