#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "saddle3/linalg/dense.hpp"
#include "saddle3/linalg/sparse.hpp"

namespace saddle3 {

using linalg::DenseMatrix;
using linalg::SparseMatrix;
using linalg::Vector;

enum class FactorKind { ExactDense, ExactSparse, Incomplete };

const char* to_string(FactorKind k);

// Lower-triangular factor L with L L^T equal to (or approximating) an SPD matrix.
class CholFactor {
 public:
  static CholFactor dense(DenseMatrix lower);
  static CholFactor sparse(SparseMatrix lower, FactorKind kind, double droptol);

  FactorKind kind() const { return kind_; }
  std::size_t order() const { return order_; }
  double droptol() const { return droptol_; }
  std::size_t nnz() const;

  // x <- (L L^T)^{-1} x
  void solve_in_place(std::span<double> x) const;
  Vector solve(std::span<const double> b) const;
  // x <- L^{-1} x and x <- L^{-T} x.
  void lower_solve_in_place(std::span<double> x) const;
  void lower_transpose_solve_in_place(std::span<double> x) const;
  // L L^T as a dense matrix (desk scale only).
  DenseMatrix product_dense() const;
  DenseMatrix lower_dense() const;

 private:
  FactorKind kind_ = FactorKind::ExactDense;
  std::size_t order_ = 0;
  double droptol_ = 0.0;
  DenseMatrix dense_lower_;
  SparseMatrix sparse_lower_;
};

// Threshold incomplete Cholesky. Entries of L with |L_ij| < droptol * ||A(:,j)||_2
// are dropped; droptol = 0 gives the exact sparse factor. Throws
// BreakdownNonpositivePivot when a diagonal becomes nonpositive.
CholFactor ichol_droptol(const SparseMatrix& a, double droptol);

struct FactorStrategy {
  std::size_t dense_threshold = 2048;
  // Unset means exact; set means incomplete with this drop tolerance.
  std::optional<double> droptol;
};

// Exact dense factor when order <= dense_threshold, otherwise sparse (exact or
// incomplete per strategy).
CholFactor factor_spd(const SparseMatrix& a, const FactorStrategy& strategy = {});
CholFactor factor_spd(const DenseMatrix& a);

Vector solve_chol(const CholFactor& f, std::span<const double> b);

}  // namespace saddle3
