#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "saddle3/linalg/dense.hpp"

namespace saddle3::linalg {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row storage. Column indices are strictly increasing within
// each row and no entry is duplicated; explicit zeros are allowed.
class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
               std::vector<std::size_t> col_idx, std::vector<double> values);

  // Duplicates are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries);
  // Keeps entries with |a_ij| > drop.
  static SparseMatrix from_dense(const DenseMatrix& a, double drop = 0.0);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix zero(std::size_t rows, std::size_t cols);
  static SparseMatrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_idx_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  // Stored value or zero.
  double at(std::size_t i, std::size_t j) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y);
Vector spmv(const SparseMatrix& a, std::span<const double> x);
// y += alpha * A x
void spmv_add(const SparseMatrix& a, double alpha, std::span<const double> x, std::span<double> y);
// y += alpha * A^T x
void spmv_transposed_add(const SparseMatrix& a, double alpha, std::span<const double> x,
                         std::span<double> y);

SparseMatrix transpose(const SparseMatrix& a);
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0,
                 double beta = 1.0);
SparseMatrix scaled(const SparseMatrix& a, double s);
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
// Row scaling diag(d) * A.
SparseMatrix scale_rows(const SparseMatrix& a, std::span<const double> d);
// Drops stored entries whose value is exactly zero.
SparseMatrix prune_zeros(const SparseMatrix& a);

Vector extract_diagonal(const SparseMatrix& a);
SparseMatrix extract_tridiagonal(const SparseMatrix& a);
SparseMatrix extract_tridiagonal(const DenseMatrix& a);

DenseMatrix to_dense(const SparseMatrix& a);
double max_abs(const SparseMatrix& a);
bool is_symmetric(const SparseMatrix& a, double rel_tol = 1e-12);

// Assembles a block matrix from a row-major grid. Null pointers are zero
// blocks; every block row and column must contain at least one block so its
// size is known, or the sizes are taken from row_sizes/col_sizes.
SparseMatrix assemble_blocks(const std::vector<std::vector<const SparseMatrix*>>& grid,
                             const std::vector<std::size_t>& row_sizes,
                             const std::vector<std::size_t>& col_sizes);

// Lower-triangular sparse solves, L stored in CSR with the diagonal last in each row.
void sparse_forward_solve(const SparseMatrix& lower, std::span<double> x);
void sparse_backward_solve_transposed(const SparseMatrix& lower, std::span<double> x);

}  // namespace saddle3::linalg
