#include <algorithm>
#include <cmath>
#include <functional>

#include "saddle3/errors.hpp"
#include "saddle3/linalg/eigen.hpp"
#include "saddle3/spectral.hpp"

namespace saddle3 {

double g2(double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("g1/g2 need a finite s >= 0");
  return 1.0 + 0.5 * s + std::sqrt(0.25 * s * s + s);
}

// g1 g2 = 1 exactly, and 1/g2 avoids the cancellation in 1 + s/2 - sqrt(...).
double g1(double s) { return 1.0 / g2(s); }

double varrho(double s, double t) { return std::max((s - 1.0) * (s - 1.0), (1.0 - t) * (1.0 - t)); }

const char* to_string(EstimateMethod m) {
  return m == EstimateMethod::DenseExact ? "dense-exact" : "interval-envelope";
}

void SpectralEstimates::derive_from_mu_interval() {
  auto q = [](double x) { return x * (2.0 - x); };
  delta_lo = std::min(q(mu_lo), q(mu_hi));
  delta_hi = std::max({q(mu_lo), q(mu_hi), 1.0});
  // lambda (1 - lambda) peaks at 1/2; (1 - lambda)^2 lambda has a local max at 1/3.
  auto f1 = [](double x) { return x * (1.0 - x); };
  auto f2 = [](double x) { return (1.0 - x) * (1.0 - x) * x; };
  max_mu_one_minus_mu = std::max(f1(mu_lo), f1(mu_hi));
  if (mu_lo <= 0.5 && 0.5 <= mu_hi) max_mu_one_minus_mu = 0.25;
  max_one_minus_mu_sq_mu = std::max(f2(mu_lo), f2(mu_hi));
  if (mu_lo <= 1.0 / 3.0 && 1.0 / 3.0 <= mu_hi)
    max_one_minus_mu_sq_mu = std::max(max_one_minus_mu_sq_mu, 4.0 / 27.0);
}

void SpectralEstimates::derive_from_mu_spectrum(const std::vector<double>& mu) {
  if (mu.empty()) throw InvalidArgument("empty spectrum");
  mu_lo = *std::min_element(mu.begin(), mu.end());
  mu_hi = *std::max_element(mu.begin(), mu.end());
  auto q = [](double x) { return x * (2.0 - x); };
  delta_lo = std::min(q(mu_lo), q(mu_hi));
  delta_hi = std::max({q(mu_lo), q(mu_hi), 1.0});
  max_mu_one_minus_mu = -std::numeric_limits<double>::infinity();
  max_one_minus_mu_sq_mu = -std::numeric_limits<double>::infinity();
  for (double x : mu) {
    max_mu_one_minus_mu = std::max(max_mu_one_minus_mu, x * (1.0 - x));
    max_one_minus_mu_sq_mu = std::max(max_one_minus_mu_sq_mu, (1.0 - x) * (1.0 - x) * x);
  }
}

double h_under(double t, const SpectralEstimates& est) {
  if (!(t >= 0.0 && t <= 2.0)) throw HypothesisViolated("h(t) is defined for 0 <= t <= 2");
  return t <= 1.0 ? est.theta_lo : est.tau_lo + est.omega_lo;
}

double h_bar(double t, const SpectralEstimates& est) {
  if (!(t >= 0.0 && t <= 2.0)) throw HypothesisViolated("h(t) is defined for 0 <= t <= 2");
  return t <= 1.0 ? est.theta_hi : est.tau_hi + est.omega_hi;
}

namespace {

std::pair<double, double> range_of(const linalg::Vector& ev) {
  return {ev.front(), ev.back()};
}

// Clamp roundoff below zero for quantities known to be nonnegative.
double nonneg(double v, double scale) {
  if (v < 0.0 && v > -1e-10 * std::max(scale, 1.0)) return 0.0;
  return v;
}

using Op = std::function<void(std::span<const double>, std::span<double>)>;

// Extreme Ritz values of a symmetric operator from Lanczos with full
// reorthogonalization.
std::pair<double, double> lanczos_extremes(const Op& op, std::size_t n, std::size_t steps) {
  steps = std::min(steps, n);
  std::vector<Vector> q;
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
  double nv = linalg::norm2(v);
  for (double& x : v) x /= nv;
  q.push_back(v);
  std::vector<double> alpha, beta;
  Vector w(n);
  for (std::size_t k = 0; k < steps; ++k) {
    op(q[k], w);
    double a = linalg::dot(w, q[k]);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& qi : q) linalg::axpy(-linalg::dot(w, qi), qi, w);
    double b = linalg::norm2(w);
    if (k + 1 == steps || b <= 1e-12 * std::abs(a) || b == 0.0) break;
    beta.push_back(b);
    Vector next(w);
    for (double& x : next) x /= b;
    q.push_back(std::move(next));
  }
  const std::size_t k = alpha.size();
  DenseMatrix t(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  auto ev = linalg::symmetric_eigenvalues(t);
  return {ev.front(), ev.back()};
}

SpectralEstimates estimate_dense(const BlockSystem& sys, const ApproxBlocks& blocks) {
  SpectralEstimates est;
  est.method = EstimateMethod::DenseExact;
  DenseMatrix A = linalg::to_dense(sys.A);
  DenseMatrix la = linalg::dense_cholesky(A);
  auto mu = linalg::symmetric_pencil_eigenvalues(A, blocks.m_a.lower_dense());
  est.derive_from_mu_spectrum(mu);

  DenseMatrix x = linalg::forward_solve(la, linalg::to_dense(linalg::transpose(sys.B)));
  DenseMatrix S = linalg::symmetrized(linalg::multiply(linalg::transpose(x), x));
  DenseMatrix ls = blocks.s_hat.lower_dense();
  std::tie(est.nu_lo, est.nu_hi) = range_of(linalg::symmetric_pencil_eigenvalues(S, ls));

  DenseMatrix y = linalg::forward_solve(ls, linalg::to_dense(linalg::transpose(sys.C)));
  DenseMatrix csc = linalg::symmetrized(linalg::multiply(linalg::transpose(y), y));
  DenseMatrix lms = blocks.ms_hat.lower_dense();
  DenseMatrix D = linalg::to_dense(sys.D);
  std::tie(est.omega_lo, est.omega_hi) = range_of(linalg::symmetric_pencil_eigenvalues(csc, lms));
  if (sys.D.nnz() == 0 || linalg::max_abs(sys.D) == 0.0) {
    est.tau_lo = est.tau_hi = 0.0;
  } else {
    std::tie(est.tau_lo, est.tau_hi) = range_of(linalg::symmetric_pencil_eigenvalues(D, lms));
  }
  std::tie(est.theta_lo, est.theta_hi) =
      range_of(linalg::symmetric_pencil_eigenvalues(linalg::add(D, csc), lms));
  return est;
}

SpectralEstimates estimate_envelope(const BlockSystem& sys, const ApproxBlocks& blocks,
                                    std::size_t steps) {
  SpectralEstimates est;
  est.method = EstimateMethod::IntervalEnvelope;
  const std::size_t n = sys.n(), m = sys.m(), l = sys.l();
  SparseMatrix bt = linalg::transpose(sys.B), ct = linalg::transpose(sys.C);

  // Congruence with a factor: x -> L^{-1} T L^{-T} x.
  auto congruent = [](const CholFactor& f, Op target) -> Op {
    return [&f, target](std::span<const double> x, std::span<double> y) {
      Vector t(x.begin(), x.end());
      f.lower_transpose_solve_in_place(t);
      target(t, y);
      f.lower_solve_in_place(y);
    };
  };
  auto sparse_op = [](const SparseMatrix& a) -> Op {
    return [&a](std::span<const double> x, std::span<double> y) { linalg::spmv(a, x, y); };
  };

  std::tie(est.mu_lo, est.mu_hi) = lanczos_extremes(congruent(blocks.m_a, sparse_op(sys.A)), n, steps);
  est.derive_from_mu_interval();

  CholFactor a_exact = ichol_droptol(sys.A, 0.0);
  Op schur = [&](std::span<const double> x, std::span<double> y) {
    Vector t(n, 0.0);
    linalg::spmv_add(bt, 1.0, x, t);
    a_exact.solve_in_place(t);
    linalg::spmv(sys.B, t, y);
  };
  std::tie(est.nu_lo, est.nu_hi) = lanczos_extremes(congruent(blocks.s_hat, schur), m, steps);

  Op csc = [&](std::span<const double> x, std::span<double> y) {
    Vector t(m, 0.0);
    linalg::spmv_add(ct, 1.0, x, t);
    blocks.s_hat.solve_in_place(t);
    linalg::spmv(sys.C, t, y);
  };
  Op d_plus_csc = [&](std::span<const double> x, std::span<double> y) {
    csc(x, y);
    linalg::spmv_add(sys.D, 1.0, x, y);
  };
  std::tie(est.omega_lo, est.omega_hi) = lanczos_extremes(congruent(blocks.ms_hat, csc), l, steps);
  if (sys.D.nnz() == 0 || linalg::max_abs(sys.D) == 0.0)
    est.tau_lo = est.tau_hi = 0.0;
  else
    std::tie(est.tau_lo, est.tau_hi) =
        lanczos_extremes(congruent(blocks.ms_hat, sparse_op(sys.D)), l, steps);
  std::tie(est.theta_lo, est.theta_hi) =
      lanczos_extremes(congruent(blocks.ms_hat, d_plus_csc), l, steps);
  return est;
}

}  // namespace

SpectralEstimates estimate_constants(const BlockSystem& sys, const ApproxBlocks& blocks,
                                     const EstimateOptions& opt) {
  SpectralEstimates est = std::max({sys.n(), sys.m(), sys.l()}) <= opt.dense_threshold
                              ? estimate_dense(sys, blocks)
                              : estimate_envelope(sys, blocks, opt.lanczos_steps);
  double scale = std::max({est.omega_hi, est.tau_hi, est.theta_hi, 1.0});
  est.omega_lo = nonneg(est.omega_lo, scale);
  est.omega_hi = nonneg(est.omega_hi, scale);
  est.tau_lo = nonneg(est.tau_lo, scale);
  est.tau_hi = nonneg(est.tau_hi, scale);
  if (!(est.mu_lo > 0.0) || !(est.nu_lo > 0.0) || !(est.theta_lo > 0.0))
    throw NotSPD("approximation blocks give a nonpositive pencil eigenvalue", 0);
  return est;
}

CouplingConstants coupling_constants(const KindSelection& sel, const SpectralEstimates& est) {
  CouplingConstants c;
  if (sel.w_s) {
    c.ws_schur_lo = est.nu_lo;
    c.ws_schur_hi = est.nu_hi;
    c.ws_coupling_lo = est.omega_lo;
    c.ws_coupling_hi = est.omega_hi;
    c.ws_total_lo = est.theta_lo;
    c.ws_total_hi = est.theta_hi;
  } else {
    c.ws_total_lo = est.tau_lo;
    c.ws_total_hi = est.tau_hi;
  }
  int count = int(sel.y_a) + int(sel.z_a);
  if (count == 0) {
    c.residual_factor_max = est.mu_hi;
  } else if (count == 1) {
    c.gamma_lo = est.mu_lo;
    c.gamma_hi = est.mu_hi;
    c.residual_factor_max = est.max_mu_one_minus_mu;
  } else {
    c.gamma_lo = est.delta_lo;
    c.gamma_hi = est.delta_hi;
    c.residual_factor_max = est.max_one_minus_mu_sq_mu;
  }
  return c;
}

}  // namespace saddle3
