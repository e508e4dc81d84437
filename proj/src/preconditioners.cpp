#include "saddle3/preconditioners.hpp"

#include <algorithm>

#include "saddle3/errors.hpp"

namespace saddle3 {

const char* to_string(PreconKind k) {
  switch (k) {
    case PreconKind::D: return "d";
    case PreconKind::UT: return "ut";
    case PreconKind::LT: return "lt";
    case PreconKind::F1: return "f1";
    case PreconKind::F2: return "f2";
    case PreconKind::F3: return "f3";
    case PreconKind::F4: return "f4";
    case PreconKind::F5: return "f5";
  }
  return "?";
}

PreconKind parse_kind(const std::string& tag) {
  for (PreconKind k : kAllKinds)
    if (tag == to_string(k)) return k;
  throw InvalidArgument("unknown preconditioner kind '" + tag + "'");
}

KindSelection selection(PreconKind k) {
  switch (k) {
    case PreconKind::D: return {false, false, false};
    case PreconKind::UT: return {false, true, false};
    case PreconKind::LT: return {true, false, false};
    case PreconKind::F1: return {true, true, false};
    case PreconKind::F2: return {false, false, true};
    case PreconKind::F3: return {false, true, true};
    case PreconKind::F4: return {true, false, true};
    case PreconKind::F5: return {true, true, true};
  }
  return {};
}

const char* to_string(RecipeKind r) {
  switch (r) {
    case RecipeKind::Ex61: return "ex61";
    case RecipeKind::Ex62: return "ex62";
    case RecipeKind::Ex63: return "ex63";
    case RecipeKind::Ex64: return "ex64";
    case RecipeKind::Ex65: return "ex65";
    case RecipeKind::Exact: return "exact";
    case RecipeKind::Custom: return "custom";
  }
  return "?";
}

RecipeKind parse_recipe(const std::string& name) {
  for (auto r : {RecipeKind::Ex61, RecipeKind::Ex62, RecipeKind::Ex63, RecipeKind::Ex64,
                 RecipeKind::Ex65, RecipeKind::Exact, RecipeKind::Custom})
    if (name == to_string(r)) return r;
  throw InvalidArgument("unknown recipe '" + name + "'");
}

namespace {

enum class Pattern { Full, Diagonal, Tridiagonal };

bool is_diagonal(const SparseMatrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j : a.row_cols(i))
      if (j != i) return false;
  return true;
}

// X Y^{-1} X^T restricted to `pattern`, one solve per row of X. The full
// product is only formed when it fits under the dense threshold.
SparseMatrix schur_product(const SparseMatrix& x, const CholFactor& y, Pattern pattern,
                           std::size_t dense_threshold, const char* what) {
  const std::size_t r = x.rows();
  if (pattern == Pattern::Full && r > dense_threshold)
    throw NotSupported(std::string(what) + " would be a dense " + std::to_string(r) + "x" +
                       std::to_string(r) + " matrix above the dense threshold");
  DenseMatrix full;
  if (pattern == Pattern::Full) full = DenseMatrix(r, r);
  std::vector<linalg::Triplet> band;
  Vector v(x.cols());
  auto row_dot = [&](std::size_t j) {
    double s = 0.0;
    auto c = x.row_cols(j);
    auto vals = x.row_values(j);
    for (std::size_t k = 0; k < c.size(); ++k) s += vals[k] * v[c[k]];
    return s;
  };
  for (std::size_t i = 0; i < r; ++i) {
    std::fill(v.begin(), v.end(), 0.0);
    auto c = x.row_cols(i);
    auto vals = x.row_values(i);
    for (std::size_t k = 0; k < c.size(); ++k) v[c[k]] = vals[k];
    y.solve_in_place(v);
    if (pattern == Pattern::Full) {
      for (std::size_t j = 0; j < r; ++j) full(j, i) = row_dot(j);
    } else {
      band.push_back({i, i, row_dot(i)});
      if (pattern == Pattern::Tridiagonal) {
        if (i > 0) band.push_back({i - 1, i, row_dot(i - 1)});
        if (i + 1 < r) band.push_back({i + 1, i, row_dot(i + 1)});
      }
    }
  }
  if (pattern == Pattern::Full) return SparseMatrix::from_dense(linalg::symmetrized(full));
  SparseMatrix s = SparseMatrix::from_triplets(r, r, std::move(band));
  return linalg::add(s, linalg::transpose(s), 0.5, 0.5);
}

// D + C S_hat^{-1} C^T (with_d) or C S_hat^{-1} C^T.
SparseMatrix ms_hat_matrix(const BlockSystem& sys, const SparseMatrix& s_hat_matrix,
                           const CholFactor& s_hat, bool with_d, std::size_t dense_threshold) {
  SparseMatrix product;
  if (is_diagonal(s_hat_matrix)) {
    Vector inv = linalg::extract_diagonal(s_hat_matrix);
    for (double& v : inv) v = 1.0 / v;
    SparseMatrix ct = linalg::transpose(sys.C);
    product = linalg::multiply(sys.C, linalg::scale_rows(ct, inv));
  } else {
    product = schur_product(sys.C, s_hat, Pattern::Full, dense_threshold, "C S_hat^{-1} C^T");
  }
  return with_d ? linalg::add(sys.D, product) : product;
}

CholFactor factor_exact(const SparseMatrix& a, std::size_t dense_threshold) {
  return factor_spd(a, FactorStrategy{dense_threshold, std::nullopt});
}

}  // namespace

ApproxBlocks build_blocks(const BlockSystem& sys, const Recipe& recipe) {
  const std::size_t thr = recipe.dense_threshold;
  ApproxBlocks blk{};
  auto ichol_a = [&] {
    return ichol_droptol(sys.A, recipe.ichol_droptol);
  };
  switch (recipe.kind) {
    case RecipeKind::Ex61: {
      blk.m_a = factor_exact(sys.A, thr);
      blk.s_hat_matrix = linalg::multiply(sys.B, linalg::transpose(sys.B));
      blk.s_hat = factor_exact(blk.s_hat_matrix, thr);
      blk.ms_hat_matrix = ms_hat_matrix(sys, blk.s_hat_matrix, blk.s_hat, false, thr);
      blk.notes = "M_A = A; S_hat = B B^T; M_S_hat = C S_hat^{-1} C^T";
      break;
    }
    case RecipeKind::Ex62: {
      blk.m_a = ichol_a();
      blk.s_hat_matrix = schur_product(sys.B, blk.m_a, Pattern::Diagonal, thr, "");
      blk.s_hat = factor_exact(blk.s_hat_matrix, thr);
      blk.ms_hat_matrix = ms_hat_matrix(sys, blk.s_hat_matrix, blk.s_hat, false, thr);
      blk.notes = "M_A = L L^T (ichol, droptol " + std::to_string(recipe.ichol_droptol) +
                  "); S_hat = diag(B M_A^{-1} B^T); M_S_hat = C S_hat^{-1} C^T";
      break;
    }
    case RecipeKind::Ex63:
    case RecipeKind::Ex64: {
      blk.m_a = factor_exact(sys.A, thr);
      SparseMatrix sa = schur_product(sys.B, blk.m_a, Pattern::Full, thr, "B M_A^{-1} B^T");
      if (recipe.kind == RecipeKind::Ex63) {
        blk.s_hat_matrix = linalg::add(sa, SparseMatrix::identity(sys.m()), 1.0, 0.1);
        blk.notes = "M_A = A; S_hat = B M_A^{-1} B^T + 0.1 I; M_S_hat = D + C S_hat^{-1} C^T";
      } else {
        Vector d = linalg::extract_diagonal(sa);
        blk.s_hat_matrix = linalg::add(sa, SparseMatrix::diagonal(d), 1.0, 0.01);
        blk.notes =
            "M_A = A; S_hat = B M_A^{-1} B^T + 0.01 diag(B M_A^{-1} B^T); "
            "M_S_hat = D + C S_hat^{-1} C^T";
      }
      blk.s_hat = factor_exact(blk.s_hat_matrix, thr);
      blk.ms_hat_matrix = ms_hat_matrix(sys, blk.s_hat_matrix, blk.s_hat, true, thr);
      break;
    }
    case RecipeKind::Ex65: {
      blk.m_a = ichol_a();
      blk.s_hat_matrix = schur_product(sys.B, blk.m_a, Pattern::Tridiagonal, thr, "");
      blk.s_hat = factor_exact(blk.s_hat_matrix, thr);
      blk.ms_hat_matrix = ms_hat_matrix(sys, blk.s_hat_matrix, blk.s_hat, true, thr);
      blk.notes = "M_A = L L^T (ichol, droptol " + std::to_string(recipe.ichol_droptol) +
                  "); S_hat = tridiag(B M_A^{-1} B^T); M_S_hat = D + C S_hat^{-1} C^T";
      break;
    }
    case RecipeKind::Exact: {
      if (std::max({sys.n(), sys.m(), sys.l()}) > thr)
        throw NotSupported("exact recipe needs dense Schur complements; system exceeds the dense threshold");
      blk.m_a = factor_exact(sys.A, thr);
      blk.s_hat_matrix = schur_product(sys.B, blk.m_a, Pattern::Full, thr, "S");
      blk.s_hat = factor_exact(blk.s_hat_matrix, thr);
      blk.ms_hat_matrix = ms_hat_matrix(sys, blk.s_hat_matrix, blk.s_hat, true, thr);
      blk.notes = "M_A = A; S_hat = S; M_S_hat = M_S";
      break;
    }
    case RecipeKind::Custom: {
      if (!recipe.custom_m_a || !recipe.custom_s_hat || !recipe.custom_ms_hat)
        throw InvalidArgument("custom recipe needs M_A, S_hat and M_S_hat");
      if (recipe.custom_m_a->rows() != sys.n() || recipe.custom_s_hat->rows() != sys.m() ||
          recipe.custom_ms_hat->rows() != sys.l())
        throw DimensionMismatch("custom blocks do not match the system");
      blk.m_a = factor_spd(*recipe.custom_m_a);
      blk.s_hat_matrix = SparseMatrix::from_dense(*recipe.custom_s_hat);
      blk.s_hat = factor_spd(*recipe.custom_s_hat);
      blk.ms_hat_matrix = SparseMatrix::from_dense(*recipe.custom_ms_hat);
      blk.ms_hat = factor_spd(*recipe.custom_ms_hat);
      blk.notes = "custom blocks";
      return blk;
    }
  }
  blk.ms_hat = factor_exact(blk.ms_hat_matrix, thr);
  return blk;
}

BlockPreconditioner::BlockPreconditioner(PreconKind kind, std::shared_ptr<const ApproxBlocks> blocks,
                                         const BlockSystem& sys)
    : kind_(kind),
      sel_(selection(kind)),
      blocks_(std::move(blocks)),
      B_(sys.B),
      Bt_(linalg::transpose(sys.B)),
      C_(sys.C),
      Ct_(linalg::transpose(sys.C)),
      n_(sys.n()),
      m_(sys.m()),
      l_(sys.l()) {
  if (!blocks_) throw InvalidArgument("preconditioner needs approximation blocks");
  if (blocks_->m_a.order() != n_ || blocks_->s_hat.order() != m_ || blocks_->ms_hat.order() != l_)
    throw DimensionMismatch("approximation blocks do not match the system");
}

void BlockPreconditioner::apply_inverse(std::span<const double> r, std::span<double> out) const {
  if (r.size() != order() || out.size() != order())
    throw DimensionMismatch("preconditioner: vector length does not match system order");
  const ApproxBlocks& b = *blocks_;
  auto r1 = r.subspan(0, n_), r2 = r.subspan(n_, m_), r3 = r.subspan(n_ + m_, l_);
  auto z1 = out.subspan(0, n_), z2 = out.subspan(n_, m_), z3 = out.subspan(n_ + m_, l_);

  // Forward substitution with the unit lower factor, fused with the diagonal
  // solves: s1 = M_A^{-1} r1 is exactly Y_A t1 when Y_A = M_A^{-1}.
  std::copy(r1.begin(), r1.end(), z1.begin());
  b.m_a.solve_in_place(z1);  // s1

  Vector t2(r2.begin(), r2.end());
  if (sel_.y_a) linalg::spmv_add(B_, -1.0, z1, t2);
  std::copy(t2.begin(), t2.end(), z2.begin());
  b.s_hat.solve_in_place(z2);  // S_hat^{-1} t2

  std::copy(r3.begin(), r3.end(), z3.begin());
  if (sel_.w_s) linalg::spmv_add(C_, 1.0, z2, z3);  // t3 = r3 + C S_hat^{-1} t2
  b.ms_hat.solve_in_place(z3);                      // z3 = s3
  for (double& v : z2) v = -v;                      // s2 = -S_hat^{-1} t2

  // Backward substitution with the unit upper factor.
  if (sel_.w_s) {
    Vector w(m_, 0.0);
    linalg::spmv_add(Ct_, 1.0, z3, w);
    b.s_hat.solve_in_place(w);
    linalg::axpy(1.0, w, z2);
  }
  if (sel_.z_a) {
    Vector w(n_, 0.0);
    linalg::spmv_add(Bt_, 1.0, z2, w);
    b.m_a.solve_in_place(w);
    linalg::axpy(-1.0, w, z1);
  }
}

Vector BlockPreconditioner::apply_inverse(std::span<const double> r) const {
  Vector out(order());
  apply_inverse(r, out);
  return out;
}

DenseMatrix BlockPreconditioner::materialize_dense() const {
  const ApproxBlocks& b = *blocks_;
  const std::size_t N = order();
  DenseMatrix Bd = linalg::to_dense(B_), Cd = linalg::to_dense(C_);
  DenseMatrix ma = b.m_a.product_dense();
  DenseMatrix ma_inv = linalg::cholesky_inverse(b.m_a.lower_dense());
  DenseMatrix s_hat = linalg::to_dense(b.s_hat_matrix);
  DenseMatrix s_inv = linalg::cholesky_inverse(b.s_hat.lower_dense());
  DenseMatrix ms = linalg::to_dense(b.ms_hat_matrix);

  DenseMatrix lower = DenseMatrix::identity(N), upper = DenseMatrix::identity(N), mid(N, N);
  if (sel_.y_a) lower.set_block(n_, 0, linalg::multiply(Bd, ma_inv));
  if (sel_.w_s) lower.set_block(n_ + m_, n_, linalg::scaled(linalg::multiply(Cd, s_inv), -1.0));
  mid.set_block(0, 0, ma);
  mid.set_block(n_, n_, linalg::scaled(s_hat, -1.0));
  mid.set_block(n_ + m_, n_ + m_, ms);
  if (sel_.z_a) upper.set_block(0, n_, linalg::multiply(ma_inv, linalg::transpose(Bd)));
  if (sel_.w_s)
    upper.set_block(n_, n_ + m_, linalg::scaled(linalg::multiply(s_inv, linalg::transpose(Cd)), -1.0));
  return linalg::multiply(linalg::multiply(lower, mid), upper);
}

}  // namespace saddle3
