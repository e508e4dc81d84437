#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace saddle3::linalg {

using Vector = std::vector<double>;

// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> v);

  const std::vector<double>& values() const { return data_; }
  std::vector<double>& values() { return data_; }

  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
Vector multiply(const DenseMatrix& a, std::span<const double> x);
DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b, double alpha = 1.0, double beta = 1.0);
DenseMatrix scaled(const DenseMatrix& a, double s);
DenseMatrix symmetrized(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);
bool is_symmetric(const DenseMatrix& a, double rel_tol = 1e-12);

// Vector helpers.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector subtract(std::span<const double> x, std::span<const double> y);
Vector concat(std::span<const double> a, std::span<const double> b, std::span<const double> c);
bool all_finite(std::span<const double> x);
void require_finite(std::span<const double> x, const char* what);

// Cholesky A = L L^T, returns lower L. Throws NotSPD on a nonpositive pivot.
DenseMatrix dense_cholesky(const DenseMatrix& a);
// Solves L x = b in place.
void forward_solve(const DenseMatrix& lower, std::span<double> x);
// Solves L^T x = b in place.
void backward_solve_transposed(const DenseMatrix& lower, std::span<double> x);
// L^{-1} X for every column of X.
DenseMatrix forward_solve(const DenseMatrix& lower, const DenseMatrix& x);
DenseMatrix cholesky_inverse(const DenseMatrix& lower);

// LU with partial pivoting; throws InvalidArgument when singular to working precision.
struct LUFactor {
  DenseMatrix lu;
  std::vector<std::size_t> perm;
};
// Numerical row rank of X from Householder QR of X^T with pivoting: rows whose
// remaining norm falls below rel_tol times the first pivot do not count.
struct RankResult {
  std::size_t rank = 0;
  double smallest_ratio = 0.0;  // |R_kk| / |R_00| at the last counted pivot
};
RankResult numerical_row_rank(DenseMatrix x, double rel_tol = 1e-10);

LUFactor lu_factor(const DenseMatrix& a);
Vector lu_solve(const LUFactor& f, std::span<const double> b);
Vector solve_dense(const DenseMatrix& a, std::span<const double> b);

}  // namespace saddle3::linalg
