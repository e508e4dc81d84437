#include <algorithm>
#include <cmath>
#include <limits>

#include "saddle3/errors.hpp"
#include "saddle3/linalg/eigen.hpp"
#include "saddle3/spectral.hpp"

namespace saddle3 {

namespace {

// diag(d) * m
DenseMatrix scale_rows(const Vector& d, const DenseMatrix& m) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) *= d[i];
  return out;
}

// m * diag(d)
DenseMatrix scale_cols(const DenseMatrix& m, const Vector& d) {
  DenseMatrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) *= d[j];
  return out;
}

DenseMatrix mul(const DenseMatrix& a, const DenseMatrix& b) { return linalg::multiply(a, b); }
DenseMatrix tr(const DenseMatrix& a) { return linalg::transpose(a); }

}  // namespace

DenseMatrix build_similar_matrix(const BlockSystem& sys, const ApproxBlocks& blocks,
                                 PreconKind kind, const KPOptions& opt) {
  const KindSelection sel = selection(kind);
  const std::size_t n = sys.n(), m = sys.m(), l = sys.l();

  DenseMatrix a = linalg::to_dense(sys.A);
  DenseMatrix ma_inv = linalg::cholesky_inverse(blocks.m_a.lower_dense());
  auto decompose = [&](const DenseMatrix& am) {
    DenseMatrix ah = linalg::matrix_sqrt_spd(am);
    return linalg::symmetric_eigen(linalg::symmetrized(mul(mul(ah, ma_inv), ah)));
  };
  linalg::SymmetricEigen eig = decompose(a);
  if (opt.perturbation > 0.0) {
    bool near_one = std::any_of(eig.values.begin(), eig.values.end(),
                                [&](double v) { return std::abs(v - 1.0) < opt.perturbation; });
    if (near_one) {
      a = linalg::scaled(a, 1.0 - opt.perturbation);
      eig = decompose(a);
    }
  }
  const Vector& lam = eig.values;
  const DenseMatrix& x = eig.vectors;
  DenseMatrix a_ih = linalg::matrix_inverse_sqrt_spd(a);

  Vector gam(n), sq(n), plus_minus(n), minus_plus(n);
  for (std::size_t i = 0; i < n; ++i) {
    double gy = sel.y_a ? lam[i] : 0.0, gz = sel.z_a ? lam[i] : 0.0;
    gam[i] = gy + gz - gy * gz;
    double dp = std::sqrt(std::max(1.0 - gam[i], 0.0));
    double dm = std::sqrt(std::max(gam[i] - 1.0, 0.0));
    sq[i] = std::sqrt(std::max(lam[i], 0.0));
    plus_minus[i] = (dp + dm) * sq[i];
    minus_plus[i] = (dp - dm) * sq[i];
  }

  DenseMatrix s_hat = linalg::to_dense(blocks.s_hat_matrix);
  DenseMatrix ms_hat = linalg::to_dense(blocks.ms_hat_matrix);
  DenseMatrix s_ih = linalg::matrix_inverse_sqrt_spd(s_hat);
  DenseMatrix ms_ih = linalg::matrix_inverse_sqrt_spd(ms_hat);

  DenseMatrix g = mul(mul(mul(s_ih, linalg::to_dense(sys.B)), a_ih), x);  // m x n
  DenseMatrix h = mul(mul(ms_ih, linalg::to_dense(sys.C)), s_ih);         // l x m
  DenseMatrix d_hat = linalg::symmetrized(mul(mul(ms_ih, linalg::to_dense(sys.D)), ms_ih));
  DenseMatrix g_w = sel.w_s ? g : DenseMatrix(m, n);
  DenseMatrix h_w = sel.w_s ? h : DenseMatrix(l, m);
  DenseMatrix g_gam = scale_cols(g, gam);                             // G Gamma
  DenseMatrix f_w = linalg::add(DenseMatrix::identity(m), mul(scale_cols(g_w, gam), tr(g_w)), 2.0, -1.0);
  DenseMatrix gw_t_hw_t = mul(tr(g_w), tr(h_w));                      // n x l
  DenseMatrix hw_gw = mul(h_w, g_w);                                  // l x n

  DenseMatrix kp(n + m + l, n + m + l);
  kp.set_block(0, 0, DenseMatrix::diagonal(lam));
  kp.set_block(0, n, scale_rows(plus_minus, tr(g)));
  kp.set_block(0, n + m, scale_rows(plus_minus, gw_t_hw_t));
  kp.set_block(n, 0, linalg::scaled(scale_cols(g, minus_plus), -1.0));
  kp.set_block(n, n, mul(g_gam, tr(g)));
  kp.set_block(n, n + m, linalg::add(mul(g_gam, gw_t_hw_t), tr(h), 1.0, -1.0));
  kp.set_block(n + m, 0, scale_cols(hw_gw, minus_plus));
  kp.set_block(n + m, n, linalg::add(h, mul(scale_cols(hw_gw, gam), tr(g)), 1.0, -1.0));
  kp.set_block(n + m, n + m, linalg::add(d_hat, mul(mul(h_w, f_w), tr(h_w))));
  return kp;
}

DenseMatrix preconditioned_matrix_dense(const BlockSystem& sys, const BlockPreconditioner& p) {
  DenseMatrix k = linalg::to_dense(sys.assemble());
  const std::size_t N = k.rows();
  DenseMatrix out(N, N);
  Vector col(N), res(N);
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t i = 0; i < N; ++i) col[i] = k(i, j);
    p.apply_inverse(col, res);
    for (std::size_t i = 0; i < N; ++i) out(i, j) = res[i];
  }
  return out;
}

void judge_containment(SpectrumCheck& c, double slack) {
  const std::size_t n = c.points.size();
  std::vector<std::complex<double>> ev(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev[i] = c.points[i].value;
    c.points[i].in_box = c.box.contains(ev[i], slack);
  }
  c.contained = c.cluster_resolved = 0;
  c.worst_excess = 0.0;

  // A defective eigenvalue comes back as a ring of copies scattered by
  // eps^(1/k); their mean is accurate to working precision. Points outside the
  // box are judged by the mean of their cluster.
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  auto find = [&](std::size_t i) {
    while (label[i] != i) i = label[i] = label[label[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (c.points[i].in_box) continue;
    for (std::size_t j = 0; j < n; ++j) {
      double r = kClusterRadius * std::max({1.0, std::abs(ev[i]), std::abs(ev[j])});
      if (j != i && std::abs(ev[i] - ev[j]) <= r) label[find(i)] = find(j);
    }
  }
  std::vector<std::complex<double>> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[find(i)] += ev[i];
    ++count[find(i)];
  }
  for (std::size_t i = 0; i < n; ++i) {
    SpectrumPoint& pt = c.points[i];
    std::size_t root = find(i);
    if (!pt.in_box && count[root] > 1 &&
        c.box.contains(sum[root] / static_cast<double>(count[root]), slack)) {
      pt.in_box = true;
      ++c.cluster_resolved;
    }
    if (pt.in_box)
      ++c.contained;
    else
      c.worst_excess = std::max(c.worst_excess, box_excess(c.box, pt.value));
  }
}

SpectrumCheck spectrum_and_check(const BlockSystem& sys, std::shared_ptr<const ApproxBlocks> blocks,
                                 PreconKind kind, const SpectralEstimates& est, double slack) {
  SpectrumCheck out;
  out.kind = kind;
  out.estimates = est;
  out.box = bounds_by_kind(kind, est);
  BlockPreconditioner p(kind, blocks, sys);
  auto ev = linalg::nonsymmetric_eigenvalues(preconditioned_matrix_dense(sys, p));
  std::sort(ev.begin(), ev.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  out.points.reserve(ev.size());
  for (auto z : ev) out.points.push_back({z, false});
  judge_containment(out, slack);
  return out;
}

SpectrumCheck spectrum_and_check(const BlockSystem& sys, std::shared_ptr<const ApproxBlocks> blocks,
                                 PreconKind kind, double slack) {
  SpectralEstimates est = estimate_constants(sys, *blocks);
  return spectrum_and_check(sys, std::move(blocks), kind, est, slack);
}

double multiset_distance(const std::vector<std::complex<double>>& a,
                         const std::vector<std::complex<double>>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("multisets differ in size");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  // Hungarian method (potentials, 1-based rows and columns).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto cost = [&](std::size_t i, std::size_t j) { return std::abs(a[i - 1] - b[j - 1]); };
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double worst = 0.0;
  for (std::size_t j = 1; j <= n; ++j) worst = std::max(worst, cost(p[j], j));
  return worst;
}

}  // namespace saddle3
