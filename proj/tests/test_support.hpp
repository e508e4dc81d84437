#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "saddle3/block_system.hpp"
#include "saddle3/linalg/dense.hpp"
#include "saddle3/linalg/sparse.hpp"
#include "saddle3/preconditioners.hpp"

namespace testing {

using saddle3::linalg::DenseMatrix;
using saddle3::linalg::SparseMatrix;
using saddle3::linalg::Vector;

inline DenseMatrix random_dense(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  DenseMatrix m(r, c);
  for (double& v : m.values()) v = nd(rng);
  return m;
}

inline Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

// R R^T / n + shift I
inline DenseMatrix random_spd(std::size_t n, std::mt19937_64& rng, double shift = 1.0) {
  DenseMatrix r = random_dense(n, n, rng);
  DenseMatrix a = saddle3::linalg::multiply(r, saddle3::linalg::transpose(r));
  for (double& v : a.values()) v /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;
  return saddle3::linalg::symmetrized(a);
}

inline double max_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

inline double max_diff(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double rel_error(const Vector& x, const Vector& ref) {
  return saddle3::linalg::norm2(saddle3::linalg::subtract(x, ref)) /
         std::max(saddle3::linalg::norm2(ref), 1e-300);
}

// A = I_2, B = (1 0), C = (1), D = (1); right-hand side K * ones.
inline saddle3::BlockSystem tiny_system() {
  using saddle3::linalg::Triplet;
  SparseMatrix a = SparseMatrix::identity(2);
  SparseMatrix b = SparseMatrix::from_triplets(1, 2, {Triplet{0, 0, 1.0}});
  SparseMatrix c = SparseMatrix::identity(1);
  SparseMatrix d = SparseMatrix::identity(1);
  return saddle3::BlockSystem::with_unit_solution(a, b, c, d);
}

// Random approximation blocks that keep the hypothesis likely: M_A = A scaled
// and perturbed, S_hat and M_S_hat built exactly or with a shift.
inline saddle3::Recipe random_custom_recipe(const saddle3::BlockSystem& s, std::mt19937_64& rng) {
  using saddle3::RecipeKind;
  namespace linalg = saddle3::linalg;
  saddle3::Recipe r;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DenseMatrix a = linalg::to_dense(s.A);
  DenseMatrix pert = random_spd(s.n(), rng, 0.0);
  DenseMatrix m_a = linalg::add(linalg::scaled(a, 0.7 + 0.8 * u(rng)), pert, 1.0, 0.3 * u(rng));
  DenseMatrix binv = linalg::multiply(linalg::multiply(linalg::to_dense(s.B),
                                                       linalg::cholesky_inverse(linalg::dense_cholesky(m_a))),
                                      linalg::transpose(linalg::to_dense(s.B)));
  DenseMatrix s_hat = linalg::add(linalg::symmetrized(binv), DenseMatrix::identity(s.m()), 1.0, u(rng));
  DenseMatrix c = linalg::to_dense(s.C);
  DenseMatrix ms = linalg::add(linalg::to_dense(s.D),
                               linalg::multiply(linalg::multiply(c, linalg::cholesky_inverse(linalg::dense_cholesky(s_hat))),
                                                linalg::transpose(c)));
  ms = linalg::add(linalg::symmetrized(ms), DenseMatrix::identity(s.l()), 1.0, 0.5 * u(rng));
  r.kind = RecipeKind::Custom;
  r.custom_m_a = m_a;
  r.custom_s_hat = s_hat;
  r.custom_ms_hat = ms;
  return r;
}

// One of the shifted/diagonal Schur recipes, or random_custom_recipe.
inline saddle3::Recipe random_recipe(const saddle3::BlockSystem& s, std::mt19937_64& rng) {
  using saddle3::RecipeKind;
  saddle3::Recipe r;
  switch (rng() % 4) {
    case 0: r.kind = RecipeKind::Ex63; return r;
    case 1: r.kind = RecipeKind::Ex64; return r;
    case 2: r.kind = RecipeKind::Ex65; return r;
    default: return random_custom_recipe(s, rng);
  }
}

inline std::vector<std::complex<double>> sorted(std::vector<std::complex<double>> v) {
  std::sort(v.begin(), v.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return v;
}

}  // namespace testing
