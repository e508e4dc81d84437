#pragma once

#include <complex>
#include <string>
#include <vector>

#include "saddle3/block_system.hpp"
#include "saddle3/preconditioners.hpp"

namespace saddle3 {

// g1(s) = 1 + s/2 - sqrt(s^2/4 + s), g2(s) = 1 + s/2 + sqrt(s^2/4 + s).
double g1(double s);
double g2(double s);
// max{(s-1)^2, (1-t)^2}
double varrho(double s, double t);

enum class EstimateMethod { DenseExact, IntervalEnvelope };
const char* to_string(EstimateMethod m);

// Extreme eigenvalues of the symmetric-definite pencils built from the system
// and the approximation blocks:
//   mu    : M_A^{-1} A                         nu    : S_hat^{-1} S
//   omega : M_S_hat^{-1} C S_hat^{-1} C^T      tau   : M_S_hat^{-1} D
//   theta : M_S_hat^{-1} (D + C S_hat^{-1} C^T)
// delta_lo/hi derive from mu; the two extra maxima are over the spectrum of
// M_A^{-1} A of lambda (1 - lambda) and (1 - lambda)^2 lambda.
struct SpectralEstimates {
  double mu_lo = 1, mu_hi = 1;
  double nu_lo = 1, nu_hi = 1;
  double omega_lo = 0, omega_hi = 0;
  double tau_lo = 0, tau_hi = 0;
  double theta_lo = 1, theta_hi = 1;
  double delta_lo = 1, delta_hi = 1;
  double max_mu_one_minus_mu = 0;
  double max_one_minus_mu_sq_mu = 0;
  EstimateMethod method = EstimateMethod::DenseExact;

  // Fills delta and the two extra maxima from the mu interval alone (valid
  // upper bounds; exact when the spectrum is not known).
  void derive_from_mu_interval();
  // Same from a full mu spectrum.
  void derive_from_mu_spectrum(const std::vector<double>& mu);
};

struct EstimateOptions {
  std::size_t dense_threshold = 2048;
  std::size_t lanczos_steps = 120;
};

SpectralEstimates estimate_constants(const BlockSystem& sys, const ApproxBlocks& blocks,
                                     const EstimateOptions& opt = {});

double h_under(double t, const SpectralEstimates& est);
double h_bar(double t, const SpectralEstimates& est);

// Real parts in [re_lo, re_hi], |imaginary part| <= im_abs.
struct EigenBox {
  double re_lo = 0, re_hi = 0, im_abs = 0;
  bool contains(std::complex<double> z, double slack) const;
};

// Constants that depend on the coupling choice W_S (0 or S_hat^{-1}) and on
// Gamma = Lambda_Y + Lambda_Z - Lambda_Y Lambda_Z.
struct CouplingConstants {
  double ws_schur_lo = 0, ws_schur_hi = 0;        // spectrum of W_S S
  double ws_coupling_lo = 0, ws_coupling_hi = 0;  // of M_S_hat^{-1} C W_S C^T
  double ws_total_lo = 0, ws_total_hi = 0;        // of M_S_hat^{-1} (D + C W_S C^T)
  double gamma_lo = 0, gamma_hi = 0;
  // lambda_max((I - Y_A A)(I - Z_A A) M_A^{-1} A)
  double residual_factor_max = 0;
};
CouplingConstants coupling_constants(const KindSelection& sel, const SpectralEstimates& est);

// Throws HypothesisViolated unless 0 < mu_hi <= 2, 0 < nu_hi <= 2, mu_hi nu_hi < 2.
void check_bound_hypothesis(const SpectralEstimates& est);

// General three-case bound for any (Y_A, Z_A, W_S) selection.
EigenBox bounds_general(const KindSelection& sel, const SpectralEstimates& est);
// Closed-form bound for each of the eight kinds.
EigenBox bounds_by_kind(PreconKind kind, const SpectralEstimates& est);
// Bound for exact blocks, as a function of omega_hi and tau_lo only.
EigenBox bounds_exact_blocks(PreconKind kind, double omega_hi, double tau_lo);

// Box for the eigenvalues of
//   [[At, Bt^T, Et^T], [-Bt, Dt, Ct^T], [Et, -Ct, Ft]]
// with At SPD, Dt symmetric and Ft - Et At^{-1} Et^T positive semidefinite.
EigenBox generalized_bendixson_box(const DenseMatrix& At, const DenseMatrix& Bt,
                                   const DenseMatrix& Ct, const DenseMatrix& Dt,
                                   const DenseMatrix& Et, const DenseMatrix& Ft);
DenseMatrix assemble_bendixson_matrix(const DenseMatrix& At, const DenseMatrix& Bt,
                                      const DenseMatrix& Ct, const DenseMatrix& Dt,
                                      const DenseMatrix& Et, const DenseMatrix& Ft);

// Ranges from the symmetric and skew-symmetric parts of H.
EigenBox classic_bendixson_box(const DenseMatrix& h);

struct KPOptions {
  // When positive and M_A^{-1} A has an eigenvalue within this distance of 1,
  // A is replaced by (1 - perturbation) A before assembly.
  double perturbation = 0.0;
};

// Matrix with the same spectrum as M^{-1} K, assembled from the eigen-
// decomposition of A^{1/2} M_A^{-1} A^{1/2} and the scaled couplings.
DenseMatrix build_similar_matrix(const BlockSystem& sys, const ApproxBlocks& blocks,
                                 PreconKind kind, const KPOptions& opt = {});

DenseMatrix preconditioned_matrix_dense(const BlockSystem& sys, const BlockPreconditioner& p);

struct SpectrumPoint {
  std::complex<double> value;
  bool in_box = false;
};

struct SpectrumCheck {
  PreconKind kind = PreconKind::D;
  std::vector<SpectrumPoint> points;
  EigenBox box;
  SpectralEstimates estimates;
  std::size_t contained = 0;
  // Points outside the box whose cluster mean lies inside; counted as contained.
  std::size_t cluster_resolved = 0;
  double worst_excess = 0.0;  // largest distance outside the box, unresolved points
  bool all_contained() const { return contained == points.size(); }
};

// Sets in_box, contained, cluster_resolved and worst_excess from the point
// values and the box.
void judge_containment(SpectrumCheck& check, double slack = 1e-8);

// Dense spectrum of M^{-1} K with containment flags against the bound box.
SpectrumCheck spectrum_and_check(const BlockSystem& sys, std::shared_ptr<const ApproxBlocks> blocks,
                                 PreconKind kind, double slack = 1e-8);
SpectrumCheck spectrum_and_check(const BlockSystem& sys, std::shared_ptr<const ApproxBlocks> blocks,
                                 PreconKind kind, const SpectralEstimates& est,
                                 double slack = 1e-8);

// Distance of z outside the box (0 when inside).
// Relative radius for grouping computed copies of one defective eigenvalue.
inline constexpr double kClusterRadius = 1e-6;

double box_excess(const EigenBox& box, std::complex<double> z);

// Minimal-cost matching distance between two equal-size multisets of
// complex numbers: the largest |a_i - b_pi(i)| under the optimal assignment
// that minimizes the sum of distances.
double multiset_distance(const std::vector<std::complex<double>>& a,
                         const std::vector<std::complex<double>>& b);

}  // namespace saddle3
