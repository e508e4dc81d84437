#include "doctest.h"
#include "saddle3/errors.hpp"
#include "saddle3/factorization.hpp"
#include "saddle3/problems.hpp"
#include "test_support.hpp"

using namespace saddle3;
using testing::max_diff;

namespace {

double relative_product_error(const CholFactor& f, const SparseMatrix& a) {
  DenseMatrix ad = linalg::to_dense(a);
  return max_diff(f.product_dense(), ad) / linalg::max_abs(ad);
}

}  // namespace

TEST_CASE("ichol of the identity is the identity") {
  CholFactor f = ichol_droptol(SparseMatrix::identity(5), 1e-8);
  CHECK(max_diff(f.lower_dense(), DenseMatrix::identity(5)) == 0.0);
  CHECK(f.kind() == FactorKind::Incomplete);
}

TEST_CASE("ichol is exact on tridiagonal matrices") {
  SparseMatrix t = stencils::second_difference(12);
  CholFactor f = ichol_droptol(t, 1e-8);
  CHECK(relative_product_error(f, t) < 1e-12);
  // No fill beyond the lower bidiagonal.
  CHECK(f.nnz() == 12 + 11);
}

TEST_CASE("ichol on the restoration A block stays close to A") {
  BlockSystem s = gen_image_restoration(4);
  CholFactor f = ichol_droptol(s.A, 1e-8);
  CHECK(relative_product_error(f, s.A) <= 1e-6);
}

TEST_CASE("ichol fill shrinks as droptol grows") {
  BlockSystem s = gen_image_restoration(5);
  std::size_t prev = ichol_droptol(s.A, 0.0).nnz();
  for (double tol : {1e-8, 1e-4, 1e-2, 1e-1}) {
    std::size_t nnz = ichol_droptol(s.A, tol).nnz();
    CHECK(nnz <= prev);
    prev = nnz;
  }
  CHECK(relative_product_error(ichol_droptol(s.A, 0.0), s.A) < 1e-12);
}

TEST_CASE("ichol reports nonpositive pivots") {
  SparseMatrix bad = SparseMatrix::from_dense(DenseMatrix::from_rows({{1, 2}, {2, 1}}));
  CHECK_THROWS_AS(ichol_droptol(bad, 0.0), BreakdownNonpositivePivot);
  CHECK_THROWS_AS(ichol_droptol(SparseMatrix::identity(2), -1.0), InvalidArgument);
}

TEST_CASE("solve_chol examples") {
  CholFactor f = factor_spd(DenseMatrix::from_rows({{4, 2}, {2, 5}}));
  Vector x = solve_chol(f, Vector{6, 7});
  CHECK(max_diff(x, Vector{1, 1}) < 1e-14);
  CholFactor i3 = factor_spd(DenseMatrix::identity(3));
  CHECK(solve_chol(i3, Vector{1, -2, 3}) == Vector{1, -2, 3});
}

TEST_CASE("factor_spd picks the factor kind by size and strategy") {
  SparseMatrix t = stencils::second_difference(10);
  CHECK(factor_spd(t).kind() == FactorKind::ExactDense);
  CHECK(factor_spd(t, FactorStrategy{4, std::nullopt}).kind() == FactorKind::ExactSparse);
  CHECK(factor_spd(t, FactorStrategy{4, 1e-3}).kind() == FactorKind::Incomplete);
  CHECK_THROWS_AS(factor_spd(SparseMatrix::from_dense(DenseMatrix::from_rows({{1, 2}, {2, 1}}))),
                  NotSPD);
}

TEST_CASE("all factor forms solve random SPD systems") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 3 + rng() % 20;
    DenseMatrix a = testing::random_spd(n, rng);
    SparseMatrix as = SparseMatrix::from_dense(a);
    Vector x = testing::random_vector(n, rng);
    Vector b = linalg::multiply(a, x);
    for (const CholFactor& f : {factor_spd(a), factor_spd(as, FactorStrategy{1, std::nullopt})}) {
      CHECK(testing::rel_error(f.solve(b), x) < 1e-10);
      // Split solves compose to the full solve.
      Vector y = b;
      f.lower_solve_in_place(y);
      f.lower_transpose_solve_in_place(y);
      CHECK(testing::rel_error(y, x) < 1e-10);
    }
  }
}
