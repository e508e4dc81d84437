#include <cmath>

#include "doctest.h"
#include "saddle3/errors.hpp"
#include "saddle3/problems.hpp"
#include "test_support.hpp"

using namespace saddle3;
using testing::max_diff;

namespace {

// Independent scalar formulas, 0-based indices.
double t_entry(int p, int i, int j) {
  double h2 = (p + 1.0) * (p + 1.0);
  return i == j ? 2.0 * h2 : (std::abs(i - j) == 1 ? -h2 : 0.0);
}
double f_entry(int p, int i, int j) {
  return i == j ? (p + 1.0) : (j == i + 1 ? -(p + 1.0) : 0.0);
}
double e_entry(int p, int i, int j) { return i == j ? 1.0 + double(i) * p : 0.0; }
double eye(int i, int j) { return i == j ? 1.0 : 0.0; }
double ehat_entry(int i, int j) { return j == i ? 2.0 : (j == i + 1 ? -1.0 : 0.0); }

// kron(X, Y)(r, c) with X, Y given by entry functions and Y of size ry x cy.
template <class X, class Y>
double kron_entry(X x, Y y, int ry, int cy, int r, int c) {
  return x(r / ry, c / cy) * y(r % ry, c % cy);
}

}  // namespace

TEST_CASE("stokes-modified dimensions") {
  BlockSystem s = gen_stokes_modified(32);
  CHECK(s.n() == 2048);
  CHECK(s.m() == 1024);
  CHECK(s.l() == 1024);
  CHECK(s.D.nnz() == 0);
}

TEST_CASE("image-restoration dimensions") {
  BlockSystem s = gen_image_restoration(40);
  CHECK(s.n() == 8040);
  CHECK(s.m() == 3200);
  CHECK(s.l() == 1640);
}

TEST_CASE("stencils") {
  DenseMatrix t2 = linalg::to_dense(stencils::second_difference(2));
  CHECK(max_diff(t2, DenseMatrix::from_rows({{18, -9}, {-9, 18}})) < 1e-12);
  DenseMatrix e2 = linalg::to_dense(stencils::restoration_difference(2));
  CHECK(max_diff(e2, DenseMatrix::from_rows({{2, -1, 0}, {0, 2, -1}})) == 0.0);
  DenseMatrix s3 = linalg::to_dense(stencils::strided_diagonal(3));
  CHECK(max_diff(s3, DenseMatrix::diagonal(Vector{1, 4, 7})) == 0.0);
  DenseMatrix f2 = linalg::to_dense(stencils::forward_difference(2));
  CHECK(max_diff(f2, DenseMatrix::from_rows({{3, -3}, {0, 3}})) < 1e-12);
}

TEST_CASE("stokes-modified blocks match scalar formulas") {
  for (int p : {2, 3, 4}) {
    BlockSystem s = gen_stokes_modified(p);
    const int q = p * p;
    auto T = [p](int i, int j) { return t_entry(p, i, j); };
    auto F = [p](int i, int j) { return f_entry(p, i, j); };
    auto E = [p](int i, int j) { return e_entry(p, i, j); };
    DenseMatrix a = linalg::to_dense(s.A), b = linalg::to_dense(s.B), c = linalg::to_dense(s.C);
    double err = 0.0;
    for (int r = 0; r < 2 * q; ++r)
      for (int col = 0; col < 2 * q; ++col) {
        double v = 0.0;
        if (r / q == col / q) {
          int rr = r % q, cc = col % q;
          v = kron_entry(eye, T, p, p, rr, cc) + kron_entry(T, eye, p, p, rr, cc);
        }
        err = std::max(err, std::abs(a(r, col) - v));
      }
    for (int r = 0; r < q; ++r)
      for (int col = 0; col < 2 * q; ++col) {
        double v = col < q ? kron_entry(eye, F, p, p, r, col) : kron_entry(F, eye, p, p, r, col - q);
        err = std::max(err, std::abs(b(r, col) - v));
      }
    for (int r = 0; r < q; ++r)
      for (int col = 0; col < q; ++col)
        err = std::max(err, std::abs(c(r, col) - kron_entry(E, F, p, p, r, col)));
    CHECK(err < 1e-12);
  }
}

TEST_CASE("image-restoration blocks match scalar formulas") {
  for (int p : {2, 3, 4}) {
    BlockSystem s = gen_image_restoration(p);
    const int pt = p * p, ph = p * (p + 1);
    DenseMatrix a = linalg::to_dense(s.A), b = linalg::to_dense(s.B), c = linalg::to_dense(s.C);
    auto w = [](int i, int j) {
      double x = (i + 1) / 3.0, y = (j + 1) / 3.0;
      return std::exp(-2.0 * (x * x + y * y));
    };
    double err = 0.0;
    for (int i = 0; i < ph; ++i)
      for (int j = 0; j < ph; ++j) {
        double v = eye(i, j);
        for (int k = 0; k < ph; ++k) v += 2.0 * w(k, i) * w(k, j);
        err = std::max(err, std::abs(a(i, j) - v));
      }
    for (int j = 1; j <= 2 * pt; ++j) {
      double d1 = j <= pt ? 1.0 : 1e-5 * (j - pt) * (j - pt);
      double d2 = 1e-5 * double(j + pt) * double(j + pt);
      err = std::max(err, std::abs(a(ph + j - 1, ph + j - 1) - d1));
      err = std::max(err, std::abs(a(ph + 2 * pt + j - 1, ph + 2 * pt + j - 1) - d2));
    }
    CHECK(a(ph, ph) == 1.0);
    auto E = [&](int r, int col) {
      return r < pt ? kron_entry(ehat_entry, eye, p, p, r, col)
                    : kron_entry(eye, ehat_entry, p, p + 1, r - pt, col);
    };
    for (int r = 0; r < 2 * pt; ++r) {
      for (int col = 0; col < ph; ++col) {
        err = std::max(err, std::abs(b(r, col) - E(r, col)));
        err = std::max(err, std::abs(c(col, r) - E(r, col)));
      }
      err = std::max(err, std::abs(b(r, ph + r) + 1.0));
      err = std::max(err, std::abs(b(r, ph + 2 * pt + r) + 1.0));
    }
    CHECK(err < 1e-12);
    CHECK(s.D.nnz() == 0);
  }
}

TEST_CASE("generated systems have the all-ones solution") {
  for (const BlockSystem& s : {gen_stokes_modified(4), gen_image_restoration(3), gen_random_valid(10, 4, 3, 5)})
    CHECK(relative_residual(s, Vector(s.order(), 1.0)) < 1e-14);
}

TEST_CASE("stokes-modified validates for p in 2..8") {
  for (int p = 2; p <= 8; ++p) {
    ValidationReport r = validate(gen_stokes_modified(p));
    CHECK_MESSAGE(r.ok, "p=" << p);
  }
}

TEST_CASE("image-restoration validates at desk scale") {
  for (int p : {2, 3, 4}) CHECK(validate(gen_image_restoration(p)).ok);
}

TEST_CASE("random generator is deterministic and valid") {
  BlockSystem a = gen_random_valid(12, 5, 4, 42), b = gen_random_valid(12, 5, 4, 42);
  CHECK(a.A.values() == b.A.values());
  CHECK(a.B.values() == b.B.values());
  CHECK(a.C.values() == b.C.values());
  CHECK(a.D.values() == b.D.values());
  CHECK(a.rhs() == b.rhs());
  CHECK(gen_random_valid(12, 5, 4, 43).A.values() != a.A.values());

  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed)
    if (!validate(gen_random_valid(12, 5, 4, seed)).ok) ++failures;
  CHECK(failures == 0);

  CHECK_THROWS_AS(gen_random_valid(12, 5, 0, 1), NotSupported);
  CHECK_THROWS_AS(gen_random_valid(4, 5, 2, 1), InvalidArgument);
}

TEST_CASE("poisson-control substitute") {
  HatBlockSystem h = gen_poisson_control(3);
  Vector row_sums = linalg::spmv(h.A, Vector(h.A.cols(), 1.0));
  for (double v : row_sums) CHECK(v > 0.0);
  // Mass matrix of the full grid sums to the domain area; interior rows lose the boundary share.
  double total = 0.0;
  for (double v : row_sums) total += v;
  CHECK(total < 1.0);
  CHECK(validate(hat_to_standard(h)).ok);
  CHECK_THROWS_AS(gen_poisson_control(2), InvalidArgument);
  CHECK_THROWS_AS(gen_poisson_control(3, 0.0), InvalidArgument);
}

TEST_CASE("fd-stokes substitute validates") {
  for (int cells : {3, 4, 6}) {
    BlockSystem s = hat_to_standard(gen_fd_stokes_substitute(cells));
    CHECK(validate(s).ok);
    CHECK(linalg::max_abs(s.D) > 0.0);
  }
}

TEST_CASE("generate dispatches by family") {
  ProblemSpec spec;
  spec.family = parse_problem_family("image-restoration");
  spec.size = 3;
  CHECK(generate(spec).n() == 5 * 9 + 3);
  CHECK_THROWS_AS(parse_problem_family("nope"), InvalidArgument);
  CHECK(std::string(to_string(ProblemFamily::StokesModified)) == "stokes-modified");
}
