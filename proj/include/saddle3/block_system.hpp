#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "saddle3/linalg/dense.hpp"
#include "saddle3/linalg/sparse.hpp"

namespace saddle3 {

using linalg::DenseMatrix;
using linalg::SparseMatrix;
using linalg::Vector;

// K = [[A, B^T, 0], [B, 0, C^T], [0, C, D]] acting on (x, y, z) with
// right-hand side (f, g, h). A is n x n, B is m x n, C is l x m, D is l x l.
struct BlockSystem {
  SparseMatrix A, B, C, D;
  Vector f, g, h;

  // Checks shapes and finiteness; throws DimensionMismatch / InvalidArgument.
  static BlockSystem create(SparseMatrix A, SparseMatrix B, SparseMatrix C, SparseMatrix D,
                            Vector f, Vector g, Vector h);
  // Same, with right-hand side K * ones.
  static BlockSystem with_unit_solution(SparseMatrix A, SparseMatrix B, SparseMatrix C,
                                        SparseMatrix D);

  std::size_t n() const { return A.rows(); }
  std::size_t m() const { return B.rows(); }
  std::size_t l() const { return C.rows(); }
  std::size_t order() const { return n() + m() + l(); }

  Vector rhs() const;
  SparseMatrix assemble() const;
  Vector apply(std::span<const double> u) const;
};

// Khat = [[A, 0, B^T], [0, D, C], [-B, -C^T, 0]] acting on (x, z, y) with
// right-hand side (f, h, -g).
struct HatBlockSystem {
  SparseMatrix A, B, C, D;
  Vector f, h, g_hat;

  std::size_t order() const { return A.rows() + B.rows() + C.rows(); }
  Vector rhs() const;
  SparseMatrix assemble() const;
};

HatBlockSystem standard_to_hat(const BlockSystem& s);
BlockSystem hat_to_standard(const HatBlockSystem& s);
// Maps a hat-ordered solution (x, z, y) to standard order (x, y, z) and back.
Vector hat_solution_to_standard(const HatBlockSystem& s, std::span<const double> u_hat);
Vector standard_solution_to_hat(const BlockSystem& s, std::span<const double> u);

double relative_residual(const BlockSystem& s, std::span<const double> u);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationCheck> checks;
  std::vector<std::string> warnings;
};

// Structural assumptions: A SPD, B full row rank, D symmetric positive
// semidefinite, and C full row rank whenever D is singular. Spectral checks run
// densely up to `dense_threshold`; larger blocks are checked by factorization.
ValidationReport validate(const BlockSystem& s, std::size_t dense_threshold = 2048);

}  // namespace saddle3
