#include "saddle3/linalg/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "saddle3/errors.hpp"

namespace saddle3::linalg {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size())
    throw InvalidArgument("inconsistent CSR arrays");
  for (std::size_t i = 0; i < rows_; ++i) {
    if (row_ptr_[i] > row_ptr_[i + 1]) throw InvalidArgument("CSR row pointers decrease");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] >= cols_) throw InvalidArgument("CSR column index out of range");
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
        throw InvalidArgument("CSR columns not strictly increasing");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
  for (const auto& t : entries)
    if (t.row >= rows || t.col >= cols) throw InvalidArgument("triplet index out of range");
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> ptr(rows + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  idx.reserve(entries.size());
  val.reserve(entries.size());
  std::size_t last_row = rows, last_col = cols;
  for (const auto& t : entries) {
    if (t.row == last_row && t.col == last_col) {
      val.back() += t.value;
      continue;
    }
    idx.push_back(t.col);
    val.push_back(t.value);
    ++ptr[t.row + 1];
    last_row = t.row;
    last_col = t.col;
  }
  for (std::size_t i = 0; i < rows; ++i) ptr[i + 1] += ptr[i];
  return SparseMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a, double drop) {
  std::vector<std::size_t> ptr(a.rows() + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double v = a(i, j);
      if (std::abs(v) > drop) {
        idx.push_back(j);
        val.push_back(v);
      }
    }
    ptr[i + 1] = idx.size();
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::zero(std::size_t rows, std::size_t cols) {
  return SparseMatrix(rows, cols, std::vector<std::size_t>(rows + 1, 0), {}, {});
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> ptr(n + 1), idx(n);
  for (std::size_t i = 0; i <= n; ++i) ptr[i] = i;
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return SparseMatrix(n, n, std::move(ptr), std::move(idx), std::vector<double>(d.begin(), d.end()));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) throw DimensionMismatch("spmv");
  const auto& ptr = a.row_ptr();
  const auto& idx = a.col_idx();
  const auto& val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[idx[k]];
    y[i] = s;
  }
}

Vector spmv(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.rows());
  spmv(a, x, y);
  return y;
}

void spmv_add(const SparseMatrix& a, double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) throw DimensionMismatch("spmv");
  const auto& ptr = a.row_ptr();
  const auto& idx = a.col_idx();
  const auto& val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[idx[k]];
    y[i] += alpha * s;
  }
}

void spmv_transposed_add(const SparseMatrix& a, double alpha, std::span<const double> x,
                         std::span<double> y) {
  if (x.size() != a.rows() || y.size() != a.cols()) throw DimensionMismatch("transposed spmv");
  const auto& ptr = a.row_ptr();
  const auto& idx = a.col_idx();
  const auto& val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double xi = alpha * x[i];
    if (xi == 0.0) continue;
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) y[idx[k]] += val[k] * xi;
  }
}

SparseMatrix transpose(const SparseMatrix& a) {
  std::vector<std::size_t> ptr(a.cols() + 1, 0);
  for (std::size_t j : a.col_idx()) ++ptr[j + 1];
  for (std::size_t j = 0; j < a.cols(); ++j) ptr[j + 1] += ptr[j];
  std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1);
  std::vector<std::size_t> idx(a.nnz());
  std::vector<double> val(a.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::size_t dst = next[cols[k]]++;
      idx[dst] = i;
      val[dst] = vals[k];
    }
  }
  return SparseMatrix(a.cols(), a.rows(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("sparse multiply: inner dimensions differ");
  // Gustavson's row-by-row product with a dense accumulator.
  std::vector<std::size_t> ptr(a.rows() + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  std::vector<double> acc(b.cols(), 0.0);
  std::vector<std::size_t> marker(b.cols(), static_cast<std::size_t>(-1));
  std::vector<std::size_t> pattern;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    pattern.clear();
    auto acols = a.row_cols(i);
    auto avals = a.row_values(i);
    for (std::size_t ka = 0; ka < acols.size(); ++ka) {
      std::size_t k = acols[ka];
      double aik = avals[ka];
      auto bcols = b.row_cols(k);
      auto bvals = b.row_values(k);
      for (std::size_t kb = 0; kb < bcols.size(); ++kb) {
        std::size_t j = bcols[kb];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = 0.0;
          pattern.push_back(j);
        }
        acc[j] += aik * bvals[kb];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (std::size_t j : pattern) {
      idx.push_back(j);
      val.push_back(acc[j]);
    }
    ptr[i + 1] = idx.size();
  }
  return SparseMatrix(a.rows(), b.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("sparse add");
  std::vector<std::size_t> ptr(a.rows() + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  idx.reserve(a.nnz() + b.nnz());
  val.reserve(a.nnz() + b.nnz());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ac = a.row_cols(i), bc = b.row_cols(i);
    auto av = a.row_values(i), bv = b.row_values(i);
    std::size_t p = 0, q = 0;
    while (p < ac.size() || q < bc.size()) {
      if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
        idx.push_back(ac[p]);
        val.push_back(alpha * av[p++]);
      } else if (p == ac.size() || bc[q] < ac[p]) {
        idx.push_back(bc[q]);
        val.push_back(beta * bv[q++]);
      } else {
        idx.push_back(ac[p]);
        val.push_back(alpha * av[p++] + beta * bv[q++]);
      }
    }
    ptr[i + 1] = idx.size();
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix scaled(const SparseMatrix& a, double s) {
  std::vector<double> val = a.values();
  for (double& v : val) v *= s;
  return SparseMatrix(a.rows(), a.cols(), a.row_ptr(), a.col_idx(), std::move(val));
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::size_t rows = 0, cols = 0, nnz = 0;
  if (__builtin_mul_overflow(a.rows(), b.rows(), &rows) ||
      __builtin_mul_overflow(a.cols(), b.cols(), &cols) ||
      __builtin_mul_overflow(a.nnz(), b.nnz(), &nnz))
    throw InvalidArgument("Kronecker product dimensions overflow");
  std::vector<std::size_t> ptr(rows + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  idx.reserve(nnz);
  val.reserve(nnz);
  for (std::size_t ia = 0; ia < a.rows(); ++ia) {
    auto ac = a.row_cols(ia);
    auto av = a.row_values(ia);
    for (std::size_t ib = 0; ib < b.rows(); ++ib) {
      auto bc = b.row_cols(ib);
      auto bv = b.row_values(ib);
      for (std::size_t p = 0; p < ac.size(); ++p)
        for (std::size_t q = 0; q < bc.size(); ++q) {
          idx.push_back(ac[p] * b.cols() + bc[q]);
          val.push_back(av[p] * bv[q]);
        }
      ptr[ia * b.rows() + ib + 1] = idx.size();
    }
  }
  return SparseMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix scale_rows(const SparseMatrix& a, std::span<const double> d) {
  if (d.size() != a.rows()) throw DimensionMismatch("row scaling");
  std::vector<double> val = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) val[k] *= d[i];
  return SparseMatrix(a.rows(), a.cols(), a.row_ptr(), a.col_idx(), std::move(val));
}

SparseMatrix prune_zeros(const SparseMatrix& a) {
  std::vector<std::size_t> ptr(a.rows() + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto c = a.row_cols(i);
    auto v = a.row_values(i);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (v[k] != 0.0) {
        idx.push_back(c[k]);
        val.push_back(v[k]);
      }
    ptr[i + 1] = idx.size();
  }
  return SparseMatrix(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val));
}

Vector extract_diagonal(const SparseMatrix& a) {
  std::size_t n = std::min(a.rows(), a.cols());
  Vector d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i] = a.at(i, i);
  return d;
}

SparseMatrix extract_tridiagonal(const SparseMatrix& a) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto c = a.row_cols(i);
    auto v = a.row_values(i);
    for (std::size_t k = 0; k < c.size(); ++k)
      if (c[k] + 1 >= i && c[k] <= i + 1) t.push_back({i, c[k], v[k]});
  }
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

SparseMatrix extract_tridiagonal(const DenseMatrix& a) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = (i == 0 ? 0 : i - 1); j <= i + 1 && j < a.cols(); ++j)
      t.push_back({i, j, a(i, j)});
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

DenseMatrix to_dense(const SparseMatrix& a) {
  DenseMatrix d(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto c = a.row_cols(i);
    auto v = a.row_values(i);
    for (std::size_t k = 0; k < c.size(); ++k) d(i, c[k]) = v[k];
  }
  return d;
}

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

bool is_symmetric(const SparseMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  SparseMatrix diff = add(a, transpose(a), 1.0, -1.0);
  return max_abs(diff) <= rel_tol * std::max(max_abs(a), 1e-300);
}

SparseMatrix assemble_blocks(const std::vector<std::vector<const SparseMatrix*>>& grid,
                             const std::vector<std::size_t>& row_sizes,
                             const std::vector<std::size_t>& col_sizes) {
  if (grid.size() != row_sizes.size()) throw DimensionMismatch("block grid rows");
  std::vector<std::size_t> row_off(row_sizes.size() + 1, 0), col_off(col_sizes.size() + 1, 0);
  for (std::size_t i = 0; i < row_sizes.size(); ++i) row_off[i + 1] = row_off[i] + row_sizes[i];
  for (std::size_t j = 0; j < col_sizes.size(); ++j) col_off[j + 1] = col_off[j] + col_sizes[j];
  std::vector<std::size_t> ptr(row_off.back() + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> val;
  for (std::size_t bi = 0; bi < grid.size(); ++bi) {
    if (grid[bi].size() != col_sizes.size()) throw DimensionMismatch("block grid columns");
    for (std::size_t bj = 0; bj < col_sizes.size(); ++bj) {
      const SparseMatrix* blk = grid[bi][bj];
      if (blk && (blk->rows() != row_sizes[bi] || blk->cols() != col_sizes[bj]))
        throw DimensionMismatch("block (" + std::to_string(bi) + "," + std::to_string(bj) +
                                ") has the wrong shape");
    }
    for (std::size_t i = 0; i < row_sizes[bi]; ++i) {
      for (std::size_t bj = 0; bj < col_sizes.size(); ++bj) {
        const SparseMatrix* blk = grid[bi][bj];
        if (!blk) continue;
        auto c = blk->row_cols(i);
        auto v = blk->row_values(i);
        for (std::size_t k = 0; k < c.size(); ++k) {
          idx.push_back(col_off[bj] + c[k]);
          val.push_back(v[k]);
        }
      }
      ptr[row_off[bi] + i + 1] = idx.size();
    }
  }
  return SparseMatrix(row_off.back(), col_off.back(), std::move(ptr), std::move(idx),
                      std::move(val));
}

void sparse_forward_solve(const SparseMatrix& lower, std::span<double> x) {
  const auto& ptr = lower.row_ptr();
  const auto& idx = lower.col_idx();
  const auto& val = lower.values();
  for (std::size_t i = 0; i < lower.rows(); ++i) {
    double s = x[i];
    std::size_t end = ptr[i + 1] - 1;
    for (std::size_t k = ptr[i]; k < end; ++k) s -= val[k] * x[idx[k]];
    x[i] = s / val[end];
  }
}

void sparse_backward_solve_transposed(const SparseMatrix& lower, std::span<double> x) {
  const auto& ptr = lower.row_ptr();
  const auto& idx = lower.col_idx();
  const auto& val = lower.values();
  for (std::size_t i = lower.rows(); i-- > 0;) {
    std::size_t end = ptr[i + 1] - 1;
    double xi = x[i] / val[end];
    x[i] = xi;
    for (std::size_t k = ptr[i]; k < end; ++k) x[idx[k]] -= val[k] * xi;
  }
}

}  // namespace saddle3::linalg
