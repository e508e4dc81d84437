#include "saddle3/linalg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "saddle3/errors.hpp"

namespace saddle3::linalg {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols)
    throw DimensionMismatch("dense matrix value count does not match shape");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  std::size_t nr = rows.size();
  std::size_t nc = nr ? rows.begin()->size() : 0;
  DenseMatrix m(nr, nc);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != nc) throw DimensionMismatch("ragged row list");
    std::size_t j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector DenseMatrix::column(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> v) {
  if (v.size() != rows_) throw DimensionMismatch("column length");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr,
                               std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionMismatch("block out of range");
  DenseMatrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    std::copy_n(data_.begin() + (r0 + i) * cols_ + c0, nc, b.data_.begin() + i * nc);
  return b;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b) {
  if (r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_) throw DimensionMismatch("block out of range");
  for (std::size_t i = 0; i < b.rows_; ++i)
    std::copy_n(b.data_.begin() + i * b.cols_, b.cols_, data_.begin() + (r0 + i) * cols_ + c0);
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("dense multiply: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Vector multiply(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("dense matvec");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("dense add");
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.values().size(); ++k)
    c.values()[k] = alpha * a.values()[k] + beta * b.values()[k];
  return c;
}

DenseMatrix scaled(const DenseMatrix& a, double s) {
  DenseMatrix c = a;
  for (double& v : c.values()) v *= s;
  return c;
}

DenseMatrix symmetrized(const DenseMatrix& a) {
  if (!a.square()) throw DimensionMismatch("symmetrize needs a square matrix");
  DenseMatrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

double max_abs(const DenseMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.values()); }

bool is_symmetric(const DenseMatrix& a, double rel_tol) {
  if (!a.square()) return false;
  double scale = std::max(max_abs(a), 1e-300);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) return false;
  return true;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) {
  // Scaled to avoid overflow on huge entries.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : x) {
    double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("vector subtract");
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  return r;
}

Vector concat(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  Vector v;
  v.reserve(a.size() + b.size() + c.size());
  v.insert(v.end(), a.begin(), a.end());
  v.insert(v.end(), b.begin(), b.end());
  v.insert(v.end(), c.begin(), c.end());
  return v;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

void require_finite(std::span<const double> x, const char* what) {
  if (!all_finite(x)) throw InvalidArgument(std::string(what) + " contains non-finite entries");
}

DenseMatrix dense_cholesky(const DenseMatrix& a) {
  if (!a.square()) throw DimensionMismatch("Cholesky needs a square matrix");
  const std::size_t n = a.rows();
  DenseMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto li = l.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      auto lj = l.row(j);
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      if (i == j) {
        if (!(s > 0.0)) throw NotSPD("matrix is not positive definite", i);
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  return l;
}

void forward_solve(const DenseMatrix& lower, std::span<double> x) {
  const std::size_t n = lower.rows();
  if (x.size() != n) throw DimensionMismatch("forward solve");
  for (std::size_t i = 0; i < n; ++i) {
    auto li = lower.row(i);
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
    x[i] = s / li[i];
  }
}

void backward_solve_transposed(const DenseMatrix& lower, std::span<double> x) {
  const std::size_t n = lower.rows();
  if (x.size() != n) throw DimensionMismatch("backward solve");
  for (std::size_t ii = n; ii-- > 0;) {
    x[ii] /= lower(ii, ii);
    auto li = lower.row(ii);
    double xi = x[ii];
    for (std::size_t k = 0; k < ii; ++k) x[k] -= li[k] * xi;
  }
}

DenseMatrix forward_solve(const DenseMatrix& lower, const DenseMatrix& x) {
  const std::size_t n = lower.rows();
  if (x.rows() != n) throw DimensionMismatch("forward solve");
  // Row-oriented substitution over all right-hand sides at once.
  DenseMatrix y = x;
  for (std::size_t i = 0; i < n; ++i) {
    auto yi = y.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      double lik = lower(i, k);
      if (lik == 0.0) continue;
      auto yk = y.row(k);
      for (std::size_t j = 0; j < y.cols(); ++j) yi[j] -= lik * yk[j];
    }
    double d = lower(i, i);
    for (double& v : yi) v /= d;
  }
  return y;
}

DenseMatrix cholesky_inverse(const DenseMatrix& lower) {
  const std::size_t n = lower.rows();
  DenseMatrix linv = forward_solve(lower, DenseMatrix::identity(n));
  // A^{-1} = L^{-T} L^{-1}
  DenseMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t k = i; k < n; ++k) s += linv(k, i) * linv(k, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  return inv;
}

RankResult numerical_row_rank(DenseMatrix x, double rel_tol) {
  const std::size_t m = x.rows(), n = x.cols();
  RankResult r;
  double first = 0.0;
  const std::size_t steps = std::min(m, n);
  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t best = k;
    double best_norm = -1.0;
    for (std::size_t i = k; i < m; ++i) {
      double nr = norm2(x.row(i).subspan(k));
      if (nr > best_norm) {
        best_norm = nr;
        best = i;
      }
    }
    if (k == 0) first = best_norm;
    if (best_norm <= rel_tol * first || best_norm == 0.0) break;
    r.rank = k + 1;
    r.smallest_ratio = best_norm / first;
    if (best != k) std::swap_ranges(x.row(k).begin(), x.row(k).end(), x.row(best).begin());
    // Householder reflector annihilating row k beyond column k.
    auto rk = x.row(k);
    double alpha = rk[k] > 0 ? -best_norm : best_norm;
    rk[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t j = k; j < n; ++j) vnorm2 += rk[j] * rk[j];
    if (vnorm2 > 0.0) {
      for (std::size_t i = k + 1; i < m; ++i) {
        auto ri = x.row(i);
        double s = 0.0;
        for (std::size_t j = k; j < n; ++j) s += ri[j] * rk[j];
        s = 2.0 * s / vnorm2;
        for (std::size_t j = k; j < n; ++j) ri[j] -= s * rk[j];
      }
    }
    rk[k] = alpha;
    for (std::size_t j = k + 1; j < n; ++j) rk[j] = 0.0;
  }
  return r;
}

LUFactor lu_factor(const DenseMatrix& a) {
  if (!a.square()) throw DimensionMismatch("LU needs a square matrix");
  const std::size_t n = a.rows();
  LUFactor f{a, std::vector<std::size_t>(n)};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  DenseMatrix& m = f.lu;
  double scale = std::max(max_abs(a), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    if (std::abs(m(p, k)) <= 1e-15 * scale) throw InvalidArgument("matrix is singular");
    if (p != k) {
      std::swap_ranges(m.row(k).begin(), m.row(k).end(), m.row(p).begin());
      std::swap(f.perm[k], f.perm[p]);
    }
    auto rk = m.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      auto ri = m.row(i);
      double factor = ri[k] / rk[k];
      ri[k] = factor;
      if (factor == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= factor * rk[j];
    }
  }
  return f;
}

Vector lu_solve(const LUFactor& f, std::span<const double> b) {
  const std::size_t n = f.lu.rows();
  if (b.size() != n) throw DimensionMismatch("LU solve");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 0; i < n; ++i) {
    auto ri = f.lu.row(i);
    for (std::size_t k = 0; k < i; ++k) x[i] -= ri[k] * x[k];
  }
  for (std::size_t i = n; i-- > 0;) {
    auto ri = f.lu.row(i);
    for (std::size_t k = i + 1; k < n; ++k) x[i] -= ri[k] * x[k];
    x[i] /= ri[i];
  }
  return x;
}

Vector solve_dense(const DenseMatrix& a, std::span<const double> b) {
  return lu_solve(lu_factor(a), b);
}

}  // namespace saddle3::linalg
