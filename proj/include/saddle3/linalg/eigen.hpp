#pragma once

#include <complex>
#include <vector>

#include "saddle3/linalg/dense.hpp"

namespace saddle3::linalg {

// Eigenvalues ascending; column j of `vectors` belongs to values[j].
struct SymmetricEigen {
  Vector values;
  DenseMatrix vectors;
};

// Cyclic Jacobi rotations. Accurate for small matrices.
SymmetricEigen jacobi_eigen(const DenseMatrix& a);
// Householder tridiagonalization followed by implicit QL.
SymmetricEigen tridiagonal_ql_eigen(const DenseMatrix& a);
// Jacobi for small orders, tridiagonal QL otherwise.
SymmetricEigen symmetric_eigen(const DenseMatrix& a);
Vector symmetric_eigenvalues(const DenseMatrix& a);

// Eigenvalues of L^{-1} A L^{-T}, i.e. of the pencil (A, L L^T).
Vector symmetric_pencil_eigenvalues(const DenseMatrix& a, const DenseMatrix& lower);

// Balancing, Householder reduction to Hessenberg form and shifted Francis QR.
// Throws NonConvergence if an eigenvalue needs more than 100 sweeps.
std::vector<std::complex<double>> nonsymmetric_eigenvalues(const DenseMatrix& a);

// Residual ||A v - lambda v|| / ||v|| for the vector found by inverse iteration
// on A - lambda I. Small values certify lambda as an eigenvalue of A.
double inverse_iteration_residual(const DenseMatrix& a, std::complex<double> lambda,
                                  int iterations = 3);

// Principal square root and inverse square root of a symmetric positive
// (semi)definite matrix.
DenseMatrix matrix_sqrt_spd(const DenseMatrix& a);
DenseMatrix matrix_inverse_sqrt_spd(const DenseMatrix& a);

}  // namespace saddle3::linalg
