#include <cmath>

#include "doctest.h"
#include "saddle3/errors.hpp"
#include "saddle3/linalg/eigen.hpp"
#include "saddle3/problems.hpp"
#include "saddle3/spectral.hpp"
#include "test_support.hpp"

using namespace saddle3;
using testing::max_diff;

namespace {

std::shared_ptr<const ApproxBlocks> blocks_for(const BlockSystem& s, RecipeKind kind) {
  Recipe r;
  r.kind = kind;
  return std::make_shared<const ApproxBlocks>(build_blocks(s, r));
}

bool same_box(const EigenBox& a, const EigenBox& b, double tol) {
  return std::abs(a.re_lo - b.re_lo) <= tol && std::abs(a.re_hi - b.re_hi) <= tol &&
         std::abs(a.im_abs - b.im_abs) <= tol;
}

SpectralEstimates random_estimates(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpectralEstimates e;
  double m1 = 0.05 + 1.95 * u(rng), m2 = 0.05 + 1.95 * u(rng);
  e.mu_lo = std::min(m1, m2);
  e.mu_hi = std::max(m1, m2);
  double nu_cap = std::min(2.0, 2.0 / e.mu_hi) * 0.999;
  double n1 = 0.02 + (nu_cap - 0.02) * u(rng), n2 = 0.02 + (nu_cap - 0.02) * u(rng);
  e.nu_lo = std::min(n1, n2);
  e.nu_hi = std::max(n1, n2);
  e.omega_lo = 0.5 * u(rng);
  e.omega_hi = e.omega_lo + u(rng);
  e.tau_lo = 0.3 * u(rng);
  e.tau_hi = e.tau_lo + 0.5 * u(rng);
  e.theta_lo = 0.1 + 0.5 * u(rng);
  e.theta_hi = e.theta_lo + u(rng);
  e.method = EstimateMethod::IntervalEnvelope;
  e.derive_from_mu_interval();
  return e;
}

DenseMatrix random_psd(std::size_t n, std::size_t rank, std::mt19937_64& rng) {
  DenseMatrix q = testing::random_dense(n, rank, rng);
  return linalg::symmetrized(linalg::multiply(q, linalg::transpose(q)));
}

}  // namespace

TEST_CASE("g1 and g2") {
  CHECK(g1(0.0) == 1.0);
  CHECK(g2(0.0) == 1.0);
  CHECK(g1(3.0) == doctest::Approx(0.2087).epsilon(1e-4));
  CHECK(g2(3.0) == doctest::Approx(4.7913).epsilon(1e-4));
  for (double s : {0.5, 1.0, 3.0, 10.0}) CHECK(std::abs(g1(s) * g2(s) - 1.0) <= 1e-12);
  CHECK_THROWS_AS(g1(-1.0), InvalidArgument);
  CHECK_THROWS_AS(g2(std::nan("")), InvalidArgument);
}

TEST_CASE("g1 and g2 are reciprocal and monotone on a grid") {
  double prev1 = 2.0, prev2 = 0.0, worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double s = 100.0 * i / 999.0;
    double a = g1(s), b = g2(s);
    worst = std::max(worst, std::abs(a * b - 1.0));
    CHECK(a > 0.0);
    CHECK(a <= 1.0);
    CHECK(b >= 1.0);
    CHECK(a < prev1);
    CHECK(b > prev2);
    prev1 = a;
    prev2 = b;
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("varrho and the h functions") {
  CHECK(varrho(1, 1) == 0.0);
  CHECK(varrho(0, 0) == 1.0);
  CHECK(varrho(1.5, 0.2) == doctest::Approx(0.64));
  SpectralEstimates e;
  e.theta_lo = 0.3;
  e.theta_hi = 0.9;
  e.tau_lo = 0.1;
  e.tau_hi = 0.2;
  e.omega_lo = 0.4;
  e.omega_hi = 0.7;
  CHECK(h_under(0.5, e) == 0.3);
  CHECK(h_under(1.0, e) == 0.3);
  CHECK(h_bar(1.0, e) == 0.9);
  CHECK(h_under(1.0 + 1e-9, e) == doctest::Approx(0.5));
  CHECK(h_bar(1.0 + 1e-9, e) == doctest::Approx(0.9));
  CHECK_THROWS_AS(h_bar(2.5, e), HypothesisViolated);
}

TEST_CASE("delta follows the mu interval") {
  SpectralEstimates e;
  e.mu_lo = 0.4;
  e.mu_hi = 1.5;
  e.derive_from_mu_interval();
  CHECK(e.delta_lo == doctest::Approx(std::min(0.4 * 1.6, 1.5 * 0.5)));
  CHECK(e.delta_hi == doctest::Approx(1.0));
  CHECK(e.max_mu_one_minus_mu == doctest::Approx(0.25));
  CHECK(e.max_one_minus_mu_sq_mu == doctest::Approx(0.375));  // endpoint 1.5 dominates
}

TEST_CASE("estimates for exact blocks") {
  BlockSystem s = testing::tiny_system();
  SpectralEstimates e = estimate_constants(s, *blocks_for(s, RecipeKind::Exact));
  CHECK(e.mu_lo == doctest::Approx(1.0));
  CHECK(e.mu_hi == doctest::Approx(1.0));
  CHECK(e.nu_lo == doctest::Approx(1.0));
  CHECK(e.nu_hi == doctest::Approx(1.0));
  CHECK(e.theta_lo == doctest::Approx(1.0));
  CHECK(e.theta_hi == doctest::Approx(1.0));
  CHECK(e.omega_hi == doctest::Approx(0.5));
  CHECK(e.tau_lo == doctest::Approx(0.5));

  BlockSystem st = gen_stokes_modified(3);
  SpectralEstimates z = estimate_constants(st, *blocks_for(st, RecipeKind::Ex61));
  CHECK(z.tau_lo == 0.0);
  CHECK(z.tau_hi == 0.0);
  CHECK(z.method == EstimateMethod::DenseExact);
}

TEST_CASE("dense and envelope estimates agree on the interval ends") {
  BlockSystem s = gen_stokes_modified(4);
  auto b = blocks_for(s, RecipeKind::Ex62);
  SpectralEstimates dense = estimate_constants(s, *b);
  EstimateOptions opt;
  opt.dense_threshold = 4;
  SpectralEstimates lan = estimate_constants(s, *b, opt);
  CHECK(lan.method == EstimateMethod::IntervalEnvelope);
  for (auto [x, y] : {std::pair{dense.mu_lo, lan.mu_lo}, {dense.mu_hi, lan.mu_hi},
                      {dense.nu_lo, lan.nu_lo}, {dense.nu_hi, lan.nu_hi},
                      {dense.omega_hi, lan.omega_hi}, {dense.theta_lo, lan.theta_lo},
                      {dense.theta_hi, lan.theta_hi}})
    CHECK(std::abs(x - y) <= 1e-8 * std::max(1.0, std::abs(x)));
}

TEST_CASE("exact blocks reproduce the closed-form boxes") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    BlockSystem s = gen_random_valid(10, 6, 3, seed);
    SpectralEstimates e = estimate_constants(s, *blocks_for(s, RecipeKind::Exact));
    // Estimated unit constants carry ulp noise that square roots amplify and
    // that can flip the h branch at t = 1, so substitute them exactly.
    e.mu_lo = e.mu_hi = e.nu_lo = e.nu_hi = e.theta_lo = e.theta_hi = 1.0;
    e.derive_from_mu_interval();
    for (PreconKind k : kAllKinds) {
      EigenBox got = bounds_by_kind(k, e);
      EigenBox want = bounds_exact_blocks(k, e.omega_hi, e.tau_lo);
      CHECK_MESSAGE(same_box(got, want, 1e-10), std::string(to_string(k)) << " seed " << seed);
    }
  }
  EigenBox d = bounds_exact_blocks(PreconKind::D, 1.0, 0.0);
  CHECK(d.re_lo == 0.0);
  CHECK(d.re_hi == 1.0);
  CHECK(d.im_abs == doctest::Approx(std::sqrt(2.0)));
  EigenBox f2 = bounds_exact_blocks(PreconKind::F2, 1.0, 0.0);
  CHECK(f2.re_hi == doctest::Approx(g2(1.0)));
}

TEST_CASE("general and by-kind bounds agree") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    SpectralEstimates e = random_estimates(rng);
    for (PreconKind k : kAllKinds)
      CHECK_MESSAGE(same_box(bounds_general(selection(k), e), bounds_by_kind(k, e), 1e-12),
                    std::string(to_string(k)) << " trial " << trial);
  }
}

TEST_CASE("bound calculators enforce the hypothesis") {
  SpectralEstimates e;
  e.mu_lo = 0.5;
  e.mu_hi = 1.5;
  e.nu_lo = 0.5;
  e.nu_hi = 1.5;
  e.derive_from_mu_interval();
  CHECK_THROWS_AS(bounds_by_kind(PreconKind::D, e), HypothesisViolated);
  CHECK_THROWS_AS(bounds_general(selection(PreconKind::F3), e), HypothesisViolated);
  e.nu_hi = 1.2;
  CHECK_NOTHROW(bounds_by_kind(PreconKind::D, e));
}

TEST_CASE("generalized Bendixson box: special cases") {
  std::mt19937_64 rng(41);
  DenseMatrix at = testing::random_spd(4, rng), dt = linalg::symmetrized(testing::random_dense(3, 3, rng));
  DenseMatrix et = testing::random_dense(2, 4, rng);
  DenseMatrix ft = linalg::add(linalg::multiply(linalg::multiply(et, linalg::cholesky_inverse(linalg::dense_cholesky(at))),
                                                linalg::transpose(et)),
                               DenseMatrix::identity(2));
  EigenBox sym = generalized_bendixson_box(at, DenseMatrix(3, 4), DenseMatrix(2, 3), dt, et, ft);
  CHECK(sym.im_abs == 0.0);

  DenseMatrix ft2 = testing::random_spd(2, rng);
  EigenBox noe = generalized_bendixson_box(at, testing::random_dense(3, 4, rng),
                                           testing::random_dense(2, 3, rng), dt, DenseMatrix(2, 4), ft2);
  double lo = std::min({linalg::symmetric_eigenvalues(at).front(), linalg::symmetric_eigenvalues(dt).front(),
                        linalg::symmetric_eigenvalues(ft2).front()});
  double hi = std::max({linalg::symmetric_eigenvalues(at).back(), linalg::symmetric_eigenvalues(dt).back(),
                        linalg::symmetric_eigenvalues(ft2).back()});
  CHECK(noe.re_lo == doctest::Approx(lo));
  CHECK(noe.re_hi == doctest::Approx(hi));

  DenseMatrix bad_f = linalg::scaled(DenseMatrix::identity(2), -1.0);
  CHECK_THROWS_AS(generalized_bendixson_box(at, DenseMatrix(3, 4), DenseMatrix(2, 3), dt,
                                            testing::random_dense(2, 4, rng), bad_f),
                  HypothesisViolated);
}

TEST_CASE("generalized Bendixson box contains the spectrum") {
  std::mt19937_64 rng(43);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t a = 1 + rng() % 5, b = 1 + rng() % 4, c = 1 + rng() % 3;
    DenseMatrix at = testing::random_spd(a, rng, 0.2);
    DenseMatrix bt = testing::random_dense(b, a, rng), ct = testing::random_dense(c, b, rng);
    DenseMatrix dt = linalg::symmetrized(testing::random_dense(b, b, rng));
    DenseMatrix et = testing::random_dense(c, a, rng);
    DenseMatrix schur = linalg::multiply(linalg::multiply(et, linalg::cholesky_inverse(linalg::dense_cholesky(at))),
                                         linalg::transpose(et));
    DenseMatrix ft = linalg::symmetrized(linalg::add(schur, random_psd(c, rng() % (c + 1), rng)));
    EigenBox box = generalized_bendixson_box(at, bt, ct, dt, et, ft);
    for (auto z : linalg::nonsymmetric_eigenvalues(assemble_bendixson_matrix(at, bt, ct, dt, et, ft)))
      worst = std::max(worst, box_excess(box, z));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("eigenvalues of L L^T lie between g1 and g2") {
  std::mt19937_64 rng(47);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t r = 1 + rng() % 10, c = 1 + rng() % 8;
    DenseMatrix bh = linalg::scaled(testing::random_dense(r, c, rng), 0.1 + rng() % 20 / 5.0);
    DenseMatrix l = DenseMatrix::identity(c + r);
    l.set_block(0, c, linalg::transpose(bh));
    double s = linalg::symmetric_eigenvalues(linalg::multiply(linalg::transpose(bh), bh)).back();
    for (double v : linalg::symmetric_eigenvalues(linalg::multiply(l, linalg::transpose(l)))) {
      worst = std::max(worst, g1(s) - v);
      worst = std::max(worst, v - g2(s));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("classic Bendixson box") {
  std::mt19937_64 rng(53);
  DenseMatrix sym = linalg::symmetrized(testing::random_dense(5, 5, rng));
  CHECK(classic_bendixson_box(sym).im_abs == 0.0);
  DenseMatrix g = testing::random_dense(5, 5, rng);
  DenseMatrix skew = linalg::add(g, linalg::transpose(g), 1.0, -1.0);
  EigenBox sb = classic_bendixson_box(skew);
  CHECK(std::abs(sb.re_lo) < 1e-14);
  CHECK(std::abs(sb.re_hi) < 1e-14);

  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 1 + rng() % 12;
    DenseMatrix h = testing::random_dense(n, n, rng);
    EigenBox box = classic_bendixson_box(h);
    for (auto z : linalg::nonsymmetric_eigenvalues(h)) worst = std::max(worst, box_excess(box, z));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("multiset distance") {
  using C = std::complex<double>;
  CHECK(multiset_distance({C(1, 0), C(2, 0)}, {C(2, 0), C(1, 0)}) == 0.0);
  CHECK(multiset_distance({C(0, 1), C(0, -1)}, {C(0, -1), C(0, 1.5)}) == doctest::Approx(0.5));
  // Greedy matching would pair 0 with 0.9 and leave 1.9 against 0.
  CHECK(multiset_distance({C(0, 0), C(1, 0)}, {C(0.9, 0), C(1.9, 0)}) == doctest::Approx(0.9));
  CHECK_THROWS_AS(multiset_distance({C(0, 0)}, {}), DimensionMismatch);
}

TEST_CASE("containment judges defective clusters by their mean") {
  using C = std::complex<double>;
  SpectrumCheck c;
  c.box = EigenBox{0.0, 1.0, 0.5};
  // A 2x2 Jordan block at 1 computed as 1 +- 2.5e-8, plus one genuine outlier.
  for (C z : {C(0.5, 0.1), C(1.0 - 2.5e-8, 0), C(1.0 + 2.5e-8, 0), C(1.2, 0)}) c.points.push_back({z, false});
  judge_containment(c, 1e-8);
  CHECK(c.contained == 3);
  CHECK(c.cluster_resolved == 1);
  CHECK(c.worst_excess == doctest::Approx(0.2));
  CHECK_FALSE(c.points[3].in_box);

  // Two outside points clustered together stay outside.
  SpectrumCheck d;
  d.box = EigenBox{0.0, 1.0, 0.0};
  for (C z : {C(1.1, 0), C(1.1 + 1e-9, 0)}) d.points.push_back({z, false});
  judge_containment(d, 1e-8);
  CHECK(d.contained == 0);
}

TEST_CASE("K_P has the spectrum of M^-1 K") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    // Generic approximations: with M_A = A exactly, kind f2 has a defective
    // eigenvalue 1 whose computed copies scatter by eps^(1/3) in both spectra.
    BlockSystem s = gen_random_valid(8, 5, 3, seed);
    std::mt19937_64 rng(seed);
    auto b = std::make_shared<const ApproxBlocks>(build_blocks(s, testing::random_custom_recipe(s, rng)));
    for (PreconKind k : kAllKinds) {
      BlockPreconditioner p(k, b, s);
      auto a = linalg::nonsymmetric_eigenvalues(preconditioned_matrix_dense(s, p));
      auto kp = linalg::nonsymmetric_eigenvalues(build_similar_matrix(s, *b, k));
      worst = std::max(worst, multiset_distance(a, kp));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("K_P for exact f5 is the identity spectrum") {
  BlockSystem s = gen_random_valid(8, 5, 3, 4);
  auto b = blocks_for(s, RecipeKind::Exact);
  for (auto z : linalg::nonsymmetric_eigenvalues(build_similar_matrix(s, *b, PreconKind::F5)))
    CHECK(std::abs(z - 1.0) < 1e-8);
  KPOptions opt;
  opt.perturbation = 1e-8;
  auto pert = linalg::nonsymmetric_eigenvalues(build_similar_matrix(s, *b, PreconKind::F5, opt));
  for (auto z : pert) CHECK(std::abs(z - 1.0) < 1e-6);
}

TEST_CASE("spectrum_and_check") {
  BlockSystem s = gen_stokes_modified(3);
  SpectrumCheck exact = spectrum_and_check(s, blocks_for(s, RecipeKind::Exact), PreconKind::F3);
  CHECK(exact.all_contained());
  for (const auto& pt : exact.points) CHECK(std::abs(pt.value - 1.0) < 1e-8);

  BlockSystem s4 = gen_stokes_modified(4);
  auto b4 = blocks_for(s4, RecipeKind::Ex61);
  for (PreconKind k : kAllKinds) {
    SpectrumCheck c = spectrum_and_check(s4, b4, k);
    CHECK_MESSAGE(c.all_contained(), std::string(to_string(k)) << " worst " << c.worst_excess);
    CHECK(c.points.size() == s4.order());
  }

  SpectralEstimates bad = estimate_constants(s4, *b4);
  bad.mu_hi = 1.5;
  bad.nu_hi = 1.5;
  CHECK_THROWS_AS(spectrum_and_check(s4, b4, PreconKind::D, bad), HypothesisViolated);
}
