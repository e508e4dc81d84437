#include <algorithm>
#include <cmath>

#include "saddle3/errors.hpp"
#include "saddle3/linalg/eigen.hpp"
#include "saddle3/spectral.hpp"

namespace saddle3 {

bool EigenBox::contains(std::complex<double> z, double slack) const {
  return z.real() >= re_lo - slack && z.real() <= re_hi + slack &&
         std::abs(z.imag()) <= im_abs + slack;
}

double box_excess(const EigenBox& box, std::complex<double> z) {
  double dr = std::max({box.re_lo - z.real(), z.real() - box.re_hi, 0.0});
  double di = std::max(std::abs(z.imag()) - box.im_abs, 0.0);
  return std::hypot(dr, di);
}

void check_bound_hypothesis(const SpectralEstimates& est) {
  if (!(est.mu_hi > 0.0 && est.mu_hi <= 2.0))
    throw HypothesisViolated("need 0 < mu_hi <= 2, got " + std::to_string(est.mu_hi));
  if (!(est.nu_hi > 0.0 && est.nu_hi <= 2.0))
    throw HypothesisViolated("need 0 < nu_hi <= 2, got " + std::to_string(est.nu_hi));
  if (!(est.mu_hi * est.nu_hi < 2.0))
    throw HypothesisViolated("need mu_hi * nu_hi < 2, got " + std::to_string(est.mu_hi * est.nu_hi));
}

namespace {

EigenBox make_box(double lo, double hi, double rho_sq) {
  return EigenBox{lo, hi, std::sqrt(std::max(rho_sq, 0.0))};
}

// Clamp arguments of h that exceed 2 only through rounding.
double clamp_t(double t) { return (t > 2.0 && t < 2.0 + 1e-12) ? 2.0 : t; }

}  // namespace

EigenBox bounds_general(const KindSelection& sel, const SpectralEstimates& est) {
  check_bound_hypothesis(est);
  const CouplingConstants c = coupling_constants(sel, est);
  auto hw_lo = [&](double t) {
    t = clamp_t(t);
    if (!(t >= 0.0 && t <= 2.0)) throw HypothesisViolated("h_W argument outside [0, 2]");
    return t <= 1.0 ? c.ws_total_lo : est.tau_lo + c.ws_coupling_lo;
  };
  auto hw_hi = [&](double t) {
    t = clamp_t(t);
    if (!(t >= 0.0 && t <= 2.0)) throw HypothesisViolated("h_W argument outside [0, 2]");
    return t <= 1.0 ? c.ws_total_hi : est.tau_hi + c.ws_coupling_hi;
  };
  const double mu_lo = est.mu_lo, mu_hi = est.mu_hi, nu_lo = est.nu_lo, nu_hi = est.nu_hi;
  const double ph_lo = c.ws_schur_lo, ph_hi = c.ws_schur_hi;
  const double cp_lo = c.ws_coupling_lo, cp_hi = c.ws_coupling_hi;
  const double xi_1 = nu_hi - nu_hi / mu_hi;

  if (c.gamma_hi <= 1.0) {
    const double xi = cp_hi * ph_hi * (1.0 - c.gamma_lo) / mu_lo;
    const double a = g1(xi), b = g2(xi);
    double lo = std::min({mu_lo, hw_lo(ph_hi) + cp_lo * (1.0 - ph_hi), c.gamma_lo * nu_lo / a}) * a;
    double hi = std::max({mu_hi, hw_hi(ph_hi) + cp_hi * (1.0 - ph_lo), c.gamma_hi * nu_hi / b}) * b;
    double rho_sq = est.omega_hi - cp_hi + cp_hi * varrho(c.gamma_hi * ph_hi, c.gamma_lo * ph_lo) +
                    nu_hi * c.residual_factor_max;
    return make_box(lo, hi, rho_sq);
  }
  const double a1 = g1(xi_1), b1 = g2(xi_1);
  const double case2_rho = est.omega_hi - cp_hi +
                           cp_hi * ((mu_hi - 1.0) * mu_hi * ph_hi + varrho(mu_hi * ph_hi, mu_lo * ph_lo));
  if (c.gamma_lo >= 1.0) {
    double lo = std::min({mu_lo * a1, nu_lo * a1, hw_lo(mu_hi * ph_hi) + cp_lo * (1.0 - mu_hi * ph_hi)});
    double hi = std::max({mu_hi * b1, nu_hi * b1, hw_hi(mu_hi * ph_hi) + cp_hi * (1.0 - mu_lo * ph_lo)});
    return make_box(lo, hi, case2_rho);
  }
  const double xi = cp_hi * ph_hi * (1.0 - c.gamma_lo) / mu_lo;
  const double a = g1(xi), b = g2(xi);
  double lo = std::min({mu_lo, hw_lo(mu_hi * ph_hi) + cp_lo * (1.0 - mu_hi * ph_hi), a1 / a,
                        mu_lo * nu_lo * a1 / a}) *
              a;
  double hi = std::max({1.0, hw_hi(mu_hi * ph_hi) + cp_hi * (1.0 - ph_lo), mu_hi * b1 / b,
                        nu_hi * b1 / b}) *
              b;
  return make_box(lo, hi, case2_rho + nu_hi * est.max_mu_one_minus_mu);
}

EigenBox bounds_by_kind(PreconKind kind, const SpectralEstimates& e) {
  check_bound_hypothesis(e);
  const double xi_1 = e.nu_hi - e.nu_hi / e.mu_hi;
  const double xi_2 = e.omega_hi * e.nu_hi / e.mu_lo;
  auto hl = [&](double t) { return h_under(clamp_t(t), e); };
  auto hh = [&](double t) { return h_bar(clamp_t(t), e); };
  const bool below = e.mu_hi <= 1.0;
  const bool above = !below && e.mu_lo >= 1.0;

  switch (kind) {
    case PreconKind::D:
      return make_box(0.0, std::max(e.mu_hi, e.tau_hi), e.omega_hi + e.nu_hi * e.mu_hi);

    case PreconKind::UT:
    case PreconKind::LT: {
      const double rho_sq = e.omega_hi + e.nu_hi * e.max_mu_one_minus_mu;
      if (below)
        return make_box(std::min({e.mu_lo, e.tau_lo, e.mu_lo * e.nu_lo}),
                        std::max({e.mu_hi, e.tau_hi, e.mu_hi * e.nu_hi}), rho_sq);
      const double a1 = g1(xi_1), b1 = g2(xi_1);
      if (above)
        return make_box(std::min({e.mu_lo * a1, e.nu_lo * a1, e.tau_lo}),
                        std::max({e.mu_hi * b1, e.nu_hi * b1, e.tau_hi}), e.omega_hi);
      return make_box(std::min({e.mu_lo, e.tau_lo, a1, e.mu_lo * e.nu_lo * a1}),
                      std::max({e.tau_hi, e.mu_hi * b1, e.nu_hi * b1}), rho_sq);
    }

    case PreconKind::F1:
      return make_box(std::min({e.mu_lo, e.tau_lo, e.delta_lo * e.nu_lo}),
                      std::max({e.mu_hi, e.tau_hi, e.delta_hi * e.nu_hi}),
                      e.omega_hi + e.nu_hi * e.max_one_minus_mu_sq_mu);

    case PreconKind::F2:
      return make_box(0.0, std::max(e.mu_hi, hh(e.nu_hi) + e.omega_hi * (1.0 - e.nu_lo)) * g2(xi_2),
                      e.omega_hi + e.nu_hi * e.mu_hi);

    case PreconKind::F3:
    case PreconKind::F4: {
      const double mn_hi = e.mu_hi * e.nu_hi, mn_lo = e.mu_lo * e.nu_lo;
      if (below) {
        const double xi_3 = (1.0 - e.mu_lo) * xi_2;
        const double a = g1(xi_3), b = g2(xi_3);
        return make_box(
            std::min({e.mu_lo, hl(e.nu_hi) + e.omega_lo * (1.0 - e.nu_hi), mn_lo / a}) * a,
            std::max({e.mu_hi, hh(e.nu_hi) + e.omega_hi * (1.0 - e.nu_lo), mn_hi / b}) * b,
            e.omega_hi * varrho(mn_hi, mn_lo) + e.nu_hi * e.max_mu_one_minus_mu);
      }
      const double a1 = g1(xi_1), b1 = g2(xi_1);
      const double rho2 = e.omega_hi * (e.nu_hi * e.mu_hi * (e.mu_hi - 1.0) + varrho(mn_hi, mn_lo));
      if (above)
        return make_box(
            std::min({e.mu_lo * a1, e.nu_lo * a1, hl(mn_hi) + e.omega_lo * (1.0 - mn_hi)}),
            std::max({e.mu_hi * b1, e.nu_hi * b1, hh(mn_hi) + e.omega_hi * (1.0 - mn_lo)}), rho2);
      const double xi_3 = (1.0 - e.mu_lo) * xi_2;
      const double a = g1(xi_3), b = g2(xi_3);
      return make_box(
          std::min({e.mu_lo, hl(mn_hi) + e.omega_lo * (1.0 - mn_hi), a1 / a, mn_lo * a1 / a}) * a,
          std::max({1.0, hh(mn_hi) + e.omega_hi * (1.0 - e.nu_lo), e.mu_hi * b1 / b, e.nu_hi * b1 / b}) * b,
          rho2 + e.nu_hi * e.max_mu_one_minus_mu);
    }

    case PreconKind::F5: {
      const double xi_4 = (1.0 - e.delta_lo) * xi_2;
      const double a = g1(xi_4), b = g2(xi_4);
      return make_box(
          std::min({e.mu_lo, hl(e.nu_hi) + e.omega_lo * (1.0 - e.nu_hi), e.delta_lo * e.nu_lo / a}) * a,
          std::max({e.mu_hi, hh(e.nu_hi) + e.omega_hi * (1.0 - e.nu_lo), e.delta_hi * e.nu_hi / b}) * b,
          e.omega_hi * varrho(e.delta_hi * e.nu_hi, e.delta_lo * e.nu_lo) +
              e.nu_hi * e.max_one_minus_mu_sq_mu);
    }
  }
  throw InvalidArgument("unknown preconditioner kind");
}

EigenBox bounds_exact_blocks(PreconKind kind, double omega_hi, double tau_lo) {
  switch (kind) {
    case PreconKind::D:
      return make_box(0.0, 1.0, omega_hi + 1.0);
    case PreconKind::UT:
    case PreconKind::LT:
    case PreconKind::F1:
      return make_box(tau_lo, 1.0, omega_hi);
    case PreconKind::F2:
      return make_box(0.0, 1.0 + 0.5 * omega_hi + std::sqrt(0.25 * omega_hi * omega_hi + omega_hi),
                      omega_hi + 1.0);
    case PreconKind::F3:
    case PreconKind::F4:
    case PreconKind::F5:
      return make_box(1.0, 1.0, 0.0);
  }
  throw InvalidArgument("unknown preconditioner kind");
}

namespace {

void require_shape(const DenseMatrix& m, std::size_t r, std::size_t c, const char* name) {
  if (m.rows() != r || m.cols() != c)
    throw DimensionMismatch(std::string("Bendixson block ") + name + " has the wrong shape");
}

}  // namespace

DenseMatrix assemble_bendixson_matrix(const DenseMatrix& At, const DenseMatrix& Bt,
                                      const DenseMatrix& Ct, const DenseMatrix& Dt,
                                      const DenseMatrix& Et, const DenseMatrix& Ft) {
  const std::size_t a = At.rows(), b = Dt.rows(), c = Ft.rows();
  require_shape(At, a, a, "At");
  require_shape(Bt, b, a, "Bt");
  require_shape(Ct, c, b, "Ct");
  require_shape(Dt, b, b, "Dt");
  require_shape(Et, c, a, "Et");
  require_shape(Ft, c, c, "Ft");
  DenseMatrix k(a + b + c, a + b + c);
  k.set_block(0, 0, At);
  k.set_block(0, a, linalg::transpose(Bt));
  k.set_block(0, a + b, linalg::transpose(Et));
  k.set_block(a, 0, linalg::scaled(Bt, -1.0));
  k.set_block(a, a, Dt);
  k.set_block(a, a + b, linalg::transpose(Ct));
  k.set_block(a + b, 0, Et);
  k.set_block(a + b, a, linalg::scaled(Ct, -1.0));
  k.set_block(a + b, a + b, Ft);
  return k;
}

EigenBox generalized_bendixson_box(const DenseMatrix& At, const DenseMatrix& Bt,
                                   const DenseMatrix& Ct, const DenseMatrix& Dt,
                                   const DenseMatrix& Et, const DenseMatrix& Ft) {
  const std::size_t a = At.rows(), b = Dt.rows(), c = Ft.rows();
  require_shape(At, a, a, "At");
  require_shape(Bt, b, a, "Bt");
  require_shape(Ct, c, b, "Ct");
  require_shape(Dt, b, b, "Dt");
  require_shape(Et, c, a, "Et");
  require_shape(Ft, c, c, "Ft");
  if (!linalg::is_symmetric(At, 1e-12) || !linalg::is_symmetric(Dt, 1e-12) ||
      !linalg::is_symmetric(Ft, 1e-12))
    throw HypothesisViolated("At, Dt and Ft must be symmetric");
  DenseMatrix la;
  try {
    la = linalg::dense_cholesky(At);
  } catch (const NotSPD&) {
    throw HypothesisViolated("At must be positive definite");
  }
  auto ev_a = linalg::symmetric_eigenvalues(At);
  auto ev_d = b > 0 ? linalg::symmetric_eigenvalues(Dt) : Vector{};

  double s = 0.0;
  double sc_lo = 0.0, sc_hi = 0.0;
  if (c > 0) {
    DenseMatrix x = linalg::forward_solve(la, linalg::transpose(Et));  // L^{-1} Et^T
    DenseMatrix sc = linalg::symmetrized(linalg::add(Ft, linalg::multiply(linalg::transpose(x), x), 1.0, -1.0));
    auto ev_sc = linalg::symmetric_eigenvalues(sc);
    double scale = std::max(linalg::max_abs(Ft), 1.0);
    if (ev_sc.front() < -1e-12 * scale)
      throw HypothesisViolated("Ft - Et At^{-1} Et^T must be positive semidefinite");
    sc_lo = std::max(ev_sc.front(), 0.0);
    sc_hi = ev_sc.back();
    DenseMatrix ainv_et = linalg::multiply(linalg::cholesky_inverse(la), linalg::transpose(Et));
    s = std::max(linalg::symmetric_eigenvalues(
                     linalg::symmetrized(linalg::multiply(linalg::transpose(ainv_et), ainv_et)))
                     .back(),
                 0.0);
  }
  const double a1 = g1(s), b1 = g2(s);
  double lo = ev_a.front(), hi = ev_a.back();
  if (c > 0) {
    lo = std::min(lo, sc_lo);
    hi = std::max(hi, sc_hi);
  }
  if (b > 0) {
    lo = std::min(lo, ev_d.front() / a1);
    hi = std::max(hi, ev_d.back() / b1);
  }
  lo *= a1;
  hi *= b1;

  double im = 0.0;
  if (b > 0) {
    DenseMatrix t = linalg::add(linalg::multiply(Bt, linalg::transpose(Bt)),
                                linalg::multiply(linalg::transpose(Ct), Ct));
    im = std::sqrt(std::max(linalg::symmetric_eigenvalues(linalg::symmetrized(t)).back(), 0.0));
  }
  return EigenBox{lo, hi, im};
}

EigenBox classic_bendixson_box(const DenseMatrix& h) {
  if (h.rows() != h.cols()) throw DimensionMismatch("classic Bendixson box needs a square matrix");
  DenseMatrix sym = linalg::symmetrized(h);
  DenseMatrix skew = linalg::add(h, linalg::transpose(h), 0.5, -0.5);
  auto ev = linalg::symmetric_eigenvalues(sym);
  double im2 = linalg::symmetric_eigenvalues(
                   linalg::symmetrized(linalg::multiply(linalg::transpose(skew), skew)))
                   .back();
  return EigenBox{ev.front(), ev.back(), std::sqrt(std::max(im2, 0.0))};
}

}  // namespace saddle3
