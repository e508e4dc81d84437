#include "saddle3/factorization.hpp"

#include <algorithm>
#include <cmath>

#include "saddle3/errors.hpp"

namespace saddle3 {

const char* to_string(FactorKind k) {
  switch (k) {
    case FactorKind::ExactDense: return "exact-dense";
    case FactorKind::ExactSparse: return "exact-sparse";
    case FactorKind::Incomplete: return "incomplete";
  }
  return "unknown";
}

CholFactor CholFactor::dense(DenseMatrix lower) {
  CholFactor f;
  f.kind_ = FactorKind::ExactDense;
  f.order_ = lower.rows();
  f.dense_lower_ = std::move(lower);
  return f;
}

CholFactor CholFactor::sparse(SparseMatrix lower, FactorKind kind, double droptol) {
  CholFactor f;
  f.kind_ = kind;
  f.order_ = lower.rows();
  f.droptol_ = droptol;
  f.sparse_lower_ = std::move(lower);
  return f;
}

std::size_t CholFactor::nnz() const {
  if (kind_ == FactorKind::ExactDense) return order_ * (order_ + 1) / 2;
  return sparse_lower_.nnz();
}

void CholFactor::solve_in_place(std::span<double> x) const {
  if (x.size() != order_) throw DimensionMismatch("factor solve: wrong vector length");
  if (kind_ == FactorKind::ExactDense) {
    linalg::forward_solve(dense_lower_, x);
    linalg::backward_solve_transposed(dense_lower_, x);
  } else {
    linalg::sparse_forward_solve(sparse_lower_, x);
    linalg::sparse_backward_solve_transposed(sparse_lower_, x);
  }
}

void CholFactor::lower_solve_in_place(std::span<double> x) const {
  if (x.size() != order_) throw DimensionMismatch("factor solve: wrong vector length");
  if (kind_ == FactorKind::ExactDense)
    linalg::forward_solve(dense_lower_, x);
  else
    linalg::sparse_forward_solve(sparse_lower_, x);
}

void CholFactor::lower_transpose_solve_in_place(std::span<double> x) const {
  if (x.size() != order_) throw DimensionMismatch("factor solve: wrong vector length");
  if (kind_ == FactorKind::ExactDense)
    linalg::backward_solve_transposed(dense_lower_, x);
  else
    linalg::sparse_backward_solve_transposed(sparse_lower_, x);
}

Vector CholFactor::solve(std::span<const double> b) const {
  Vector x(b.begin(), b.end());
  solve_in_place(x);
  return x;
}

DenseMatrix CholFactor::lower_dense() const {
  return kind_ == FactorKind::ExactDense ? dense_lower_ : linalg::to_dense(sparse_lower_);
}

DenseMatrix CholFactor::product_dense() const {
  DenseMatrix l = lower_dense();
  return linalg::multiply(l, linalg::transpose(l));
}

CholFactor ichol_droptol(const SparseMatrix& a, double droptol) {
  if (a.rows() != a.cols()) throw DimensionMismatch("ichol needs a square matrix");
  if (!(droptol >= 0.0)) throw InvalidArgument("droptol must be nonnegative");
  const std::size_t n = a.rows();
  constexpr std::size_t none = static_cast<std::size_t>(-1);

  // Column j of A equals row j by symmetry.
  Vector col_norm(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) col_norm[j] = linalg::norm2(a.row_values(j));

  // Columns of L, rows sorted ascending; the diagonal comes first.
  std::vector<std::vector<std::size_t>> lrows(n);
  std::vector<std::vector<double>> lvals(n);
  // next[k]: position in column k of the first entry not yet consumed.
  // head[i]: linked list of columns whose next entry lies in row i.
  std::vector<std::size_t> next(n, 0), head(n, none), link(n, none);

  Vector work(n, 0.0);
  std::vector<char> in_pattern(n, 0);
  std::vector<std::size_t> pattern;

  for (std::size_t j = 0; j < n; ++j) {
    pattern.clear();
    auto cols = a.row_cols(j);
    auto vals = a.row_values(j);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] < j) continue;
      work[cols[k]] = vals[k];
      if (!in_pattern[cols[k]]) {
        in_pattern[cols[k]] = 1;
        pattern.push_back(cols[k]);
      }
    }
    if (!in_pattern[j]) {
      in_pattern[j] = 1;
      pattern.push_back(j);
      work[j] = 0.0;
    }

    // Left-looking update from every column k < j with L(j,k) != 0.
    std::size_t k = head[j];
    while (k != none) {
      std::size_t next_k = link[k];
      std::size_t pos = next[k];
      double ljk = lvals[k][pos];
      for (std::size_t q = pos; q < lrows[k].size(); ++q) {
        std::size_t i = lrows[k][q];
        if (!in_pattern[i]) {
          in_pattern[i] = 1;
          pattern.push_back(i);
          work[i] = 0.0;
        }
        work[i] -= lvals[k][q] * ljk;
      }
      next[k] = pos + 1;
      if (next[k] < lrows[k].size()) {
        std::size_t r = lrows[k][next[k]];
        link[k] = head[r];
        head[r] = k;
      }
      k = next_k;
    }

    double pivot = work[j];
    if (!(pivot > 0.0) || !std::isfinite(pivot)) throw BreakdownNonpositivePivot(j, pivot);
    double ljj = std::sqrt(pivot);
    double threshold = droptol * col_norm[j];

    std::sort(pattern.begin(), pattern.end());
    lrows[j].push_back(j);
    lvals[j].push_back(ljj);
    for (std::size_t i : pattern) {
      if (i != j) {
        double v = work[i] / ljj;
        bool keep = droptol > 0.0 ? std::abs(v) >= threshold : true;
        if (keep) {
          lrows[j].push_back(i);
          lvals[j].push_back(v);
        }
      }
      work[i] = 0.0;
      in_pattern[i] = 0;
    }
    next[j] = 1;
    if (lrows[j].size() > 1) {
      std::size_t r = lrows[j][1];
      link[j] = head[r];
      head[r] = j;
    }
  }

  // Column storage of L is row storage of L^T; transpose into CSR of L.
  std::vector<std::size_t> ptr(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i : lrows[j]) ++ptr[i + 1];
  for (std::size_t i = 0; i < n; ++i) ptr[i + 1] += ptr[i];
  std::vector<std::size_t> idx(ptr.back()), fill(ptr.begin(), ptr.end() - 1);
  std::vector<double> val(ptr.back());
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t q = 0; q < lrows[j].size(); ++q) {
      std::size_t i = lrows[j][q];
      idx[fill[i]] = j;
      val[fill[i]++] = lvals[j][q];
    }
  SparseMatrix l(n, n, std::move(ptr), std::move(idx), std::move(val));
  return CholFactor::sparse(std::move(l), droptol > 0.0 ? FactorKind::Incomplete
                                                        : FactorKind::ExactSparse,
                            droptol);
}

CholFactor factor_spd(const SparseMatrix& a, const FactorStrategy& strategy) {
  if (a.rows() != a.cols()) throw DimensionMismatch("factor_spd needs a square matrix");
  if (a.rows() <= strategy.dense_threshold)
    return CholFactor::dense(linalg::dense_cholesky(linalg::to_dense(a)));
  return ichol_droptol(a, strategy.droptol.value_or(0.0));
}

CholFactor factor_spd(const DenseMatrix& a) { return CholFactor::dense(linalg::dense_cholesky(a)); }

Vector solve_chol(const CholFactor& f, std::span<const double> b) { return f.solve(b); }

}  // namespace saddle3
