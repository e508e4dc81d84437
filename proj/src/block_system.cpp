#include "saddle3/block_system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saddle3/errors.hpp"
#include "saddle3/factorization.hpp"
#include "saddle3/linalg/eigen.hpp"

namespace saddle3 {

BlockSystem BlockSystem::create(SparseMatrix A, SparseMatrix B, SparseMatrix C, SparseMatrix D,
                                Vector f, Vector g, Vector h) {
  const std::size_t n = A.rows(), m = B.rows(), l = C.rows();
  if (A.cols() != n) throw DimensionMismatch("A must be square");
  if (B.cols() != n) throw DimensionMismatch("B must have as many columns as A");
  if (C.cols() != m) throw DimensionMismatch("C must have as many columns as B has rows");
  if (D.rows() != l || D.cols() != l) throw DimensionMismatch("D must be l x l");
  if (m > n) throw DimensionMismatch("B must not have more rows than columns");
  if (f.size() != n || g.size() != m || h.size() != l)
    throw DimensionMismatch("right-hand side blocks do not match the matrix blocks");
  for (const SparseMatrix* blk : {&A, &B, &C, &D})
    linalg::require_finite(blk->values(), "matrix block");
  linalg::require_finite(f, "f");
  linalg::require_finite(g, "g");
  linalg::require_finite(h, "h");
  return BlockSystem{std::move(A), std::move(B), std::move(C), std::move(D),
                     std::move(f), std::move(g), std::move(h)};
}

BlockSystem BlockSystem::with_unit_solution(SparseMatrix A, SparseMatrix B, SparseMatrix C,
                                            SparseMatrix D) {
  const std::size_t n = A.rows(), m = B.rows(), l = C.rows();
  BlockSystem s = create(std::move(A), std::move(B), std::move(C), std::move(D), Vector(n),
                         Vector(m), Vector(l));
  Vector b = s.apply(Vector(s.order(), 1.0));
  s.f.assign(b.begin(), b.begin() + n);
  s.g.assign(b.begin() + n, b.begin() + n + m);
  s.h.assign(b.begin() + n + m, b.end());
  return s;
}

Vector BlockSystem::rhs() const { return linalg::concat(f, g, h); }

SparseMatrix BlockSystem::assemble() const {
  SparseMatrix bt = linalg::transpose(B), ct = linalg::transpose(C);
  return linalg::assemble_blocks({{&A, &bt, nullptr}, {&B, nullptr, &ct}, {nullptr, &C, &D}},
                                 {n(), m(), l()}, {n(), m(), l()});
}

Vector BlockSystem::apply(std::span<const double> u) const {
  if (u.size() != order()) throw DimensionMismatch("vector length does not match system order");
  auto x = u.subspan(0, n()), y = u.subspan(n(), m()), z = u.subspan(n() + m(), l());
  Vector out(order(), 0.0);
  std::span<double> o(out);
  auto o1 = o.subspan(0, n()), o2 = o.subspan(n(), m()), o3 = o.subspan(n() + m(), l());
  linalg::spmv_add(A, 1.0, x, o1);
  linalg::spmv_transposed_add(B, 1.0, y, o1);
  linalg::spmv_add(B, 1.0, x, o2);
  linalg::spmv_transposed_add(C, 1.0, z, o2);
  linalg::spmv_add(C, 1.0, y, o3);
  linalg::spmv_add(D, 1.0, z, o3);
  return out;
}

Vector HatBlockSystem::rhs() const { return linalg::concat(f, h, g_hat); }

SparseMatrix HatBlockSystem::assemble() const {
  SparseMatrix bt = linalg::transpose(B);
  SparseMatrix neg_b = linalg::scaled(B, -1.0);
  SparseMatrix neg_ct = linalg::scaled(linalg::transpose(C), -1.0);
  const std::size_t n = A.rows(), m = B.rows(), l = C.rows();
  return linalg::assemble_blocks(
      {{&A, nullptr, &bt}, {nullptr, &D, &C}, {&neg_b, &neg_ct, nullptr}}, {n, l, m}, {n, l, m});
}

HatBlockSystem standard_to_hat(const BlockSystem& s) {
  Vector g_hat(s.g.size());
  for (std::size_t i = 0; i < g_hat.size(); ++i) g_hat[i] = -s.g[i];
  return HatBlockSystem{s.A, s.B, s.C, s.D, s.f, s.h, std::move(g_hat)};
}

BlockSystem hat_to_standard(const HatBlockSystem& s) {
  Vector g(s.g_hat.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -s.g_hat[i];
  return BlockSystem::create(s.A, s.B, s.C, s.D, s.f, std::move(g), s.h);
}

Vector hat_solution_to_standard(const HatBlockSystem& s, std::span<const double> u) {
  const std::size_t n = s.A.rows(), m = s.B.rows(), l = s.C.rows();
  if (u.size() != n + m + l) throw DimensionMismatch("solution length");
  return linalg::concat(u.subspan(0, n), u.subspan(n + l, m), u.subspan(n, l));
}

Vector standard_solution_to_hat(const BlockSystem& s, std::span<const double> u) {
  const std::size_t n = s.n(), m = s.m(), l = s.l();
  if (u.size() != n + m + l) throw DimensionMismatch("solution length");
  return linalg::concat(u.subspan(0, n), u.subspan(n + m, l), u.subspan(n, m));
}

double relative_residual(const BlockSystem& s, std::span<const double> u) {
  Vector b = s.rhs();
  Vector r = linalg::subtract(b, s.apply(u));
  double nb = linalg::norm2(b);
  return nb == 0.0 ? linalg::norm2(r) : linalg::norm2(r) / nb;
}

namespace {

// Smallest and largest eigenvalue of a symmetric matrix.
std::pair<double, double> extreme_eigenvalues(const SparseMatrix& a) {
  linalg::Vector ev = linalg::symmetric_eigenvalues(linalg::to_dense(a));
  if (ev.empty()) return {0.0, 0.0};
  return {ev.front(), ev.back()};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// Full row rank through pivoted QR of the dense transpose; skipped with a
// warning above the dense threshold.
ValidationCheck row_rank_check(const std::string& name, const SparseMatrix& x,
                               std::size_t dense_threshold, std::vector<std::string>& warnings) {
  ValidationCheck c{name, false, ""};
  if (x.rows() > x.cols()) {
    c.detail = "more rows than columns";
    return c;
  }
  if (x.rows() == 0) {
    c.passed = true;
    return c;
  }
  if (x.rows() > dense_threshold) {
    c.passed = true;
    c.detail = "skipped above dense threshold";
    warnings.push_back(name + ": rank check skipped above the dense threshold");
    return c;
  }
  auto rr = linalg::numerical_row_rank(linalg::to_dense(x), 1e-10);
  c.passed = rr.rank == x.rows();
  c.detail = "rank " + std::to_string(rr.rank) + " of " + std::to_string(x.rows()) +
             ", last pivot ratio " + fmt(rr.smallest_ratio);
  return c;
}

}  // namespace

ValidationReport validate(const BlockSystem& s, std::size_t dense_threshold) {
  ValidationReport r;
  auto add = [&r](ValidationCheck c) {
    r.ok = r.ok && c.passed;
    r.checks.push_back(std::move(c));
  };

  add({"shapes", s.m() <= s.n() && s.l() > 0,
       "n=" + std::to_string(s.n()) + " m=" + std::to_string(s.m()) +
           " l=" + std::to_string(s.l())});

  bool a_sym = linalg::is_symmetric(s.A, 1e-12);
  add({"A_symmetric", a_sym, ""});
  {
    ValidationCheck c{"A_positive_definite", false, ""};
    if (s.n() <= dense_threshold) {
      auto [lo, hi] = extreme_eigenvalues(linalg::add(s.A, linalg::transpose(s.A), 0.5, 0.5));
      c.passed = lo > 0.0 && lo > 1e-14 * hi;
      c.detail = "lambda_min = " + fmt(lo) + ", lambda_max = " + fmt(hi);
    } else {
      try {
        ichol_droptol(s.A, 0.0);
        c.passed = true;
        c.detail = "sparse Cholesky succeeded";
      } catch (const Error& e) {
        c.detail = e.what();
      }
    }
    add(c);
  }

  add(row_rank_check("B_full_row_rank", s.B, dense_threshold, r.warnings));

  bool d_sym = linalg::is_symmetric(s.D, 1e-12);
  add({"D_symmetric", d_sym, ""});
  bool d_definite = false;
  {
    ValidationCheck c{"D_positive_semidefinite", false, ""};
    if (s.D.nnz() == 0 || linalg::max_abs(s.D) == 0.0) {
      c.passed = true;
      c.detail = "D = 0";
    } else if (s.l() <= dense_threshold) {
      auto [lo, hi] = extreme_eigenvalues(linalg::add(s.D, linalg::transpose(s.D), 0.5, 0.5));
      c.passed = lo >= -1e-12 * std::abs(hi);
      d_definite = lo > 1e-12 * std::abs(hi);
      c.detail = "lambda_min = " + fmt(lo) + ", lambda_max = " + fmt(hi);
    } else {
      try {
        ichol_droptol(s.D, 0.0);
        c.passed = true;
        d_definite = true;
        c.detail = "sparse Cholesky succeeded";
      } catch (const Error&) {
        c.passed = true;
        c.detail = "not definite; semidefiniteness not verified above the dense threshold";
        r.warnings.push_back("D semidefiniteness unverified at this size");
      }
    }
    add(c);
  }

  if (d_definite) {
    add({"C_full_row_rank_or_D_definite", true, "D is positive definite"});
  } else {
    ValidationCheck c = row_rank_check("C_full_row_rank_or_D_definite", s.C, dense_threshold,
                                       r.warnings);
    add(c);
  }
  return r;
}

}  // namespace saddle3
