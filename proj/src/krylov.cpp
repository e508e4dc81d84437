#include "saddle3/krylov.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "saddle3/errors.hpp"
#include "saddle3/preconditioners.hpp"

namespace saddle3 {

LinearOperator LinearOperator::from_matrix(linalg::SparseMatrix k) {
  if (k.rows() != k.cols()) throw DimensionMismatch("operator matrix must be square");
  auto owned = std::make_shared<const linalg::SparseMatrix>(std::move(k));
  return {owned->rows(),
          [owned](std::span<const double> x, std::span<double> y) { linalg::spmv(*owned, x, y); }};
}

LinearOperator LinearOperator::from_preconditioner(const BlockPreconditioner& p) {
  return {p.order(),
          [&p](std::span<const double> x, std::span<double> y) { p.apply_inverse(x, y); }};
}

const char* to_string(PreconditionSide s) { return s == PreconditionSide::Right ? "right" : "left"; }

PreconditionSide parse_side(const std::string& name) {
  if (name == "right") return PreconditionSide::Right;
  if (name == "left") return PreconditionSide::Left;
  throw InvalidArgument("unknown preconditioning side '" + name + "'");
}

namespace {

void apply_givens(double c, double s, double& a, double& b) {
  double t = c * a + s * b;
  b = -s * a + c * b;
  a = t;
}

}  // namespace

SolveResult gmres(const LinearOperator& k, const LinearOperator* m_inv, std::span<const double> b,
                  const SolveConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  const std::size_t n = k.size;
  if (b.size() != n) throw DimensionMismatch("right-hand side length does not match operator");
  if (m_inv && m_inv->size != n) throw DimensionMismatch("preconditioner size does not match operator");
  if (!(cfg.tol >= 0.0)) throw InvalidArgument("tolerance must be nonnegative");
  if (cfg.maxit < 1) throw InvalidArgument("maxit must be at least 1");
  linalg::require_finite(b, "right-hand side");

  SolveResult res{Vector(n, 0.0), {}};
  SolveReport& rep = res.report;
  const bool left = m_inv && cfg.side == PreconditionSide::Left;
  const double bnorm = linalg::norm2(b);
  auto finish = [&] {
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
  };
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.final_residual = rep.final_true_residual = 0.0;
    return finish();
  }

  const std::size_t cycle_len = cfg.restart ? std::max<std::size_t>(*cfg.restart, 1) : cfg.maxit;
  Vector work(n), z(n), r(n);

  auto precondition = [&](std::span<const double> v, std::span<double> out) {
    if (m_inv)
      m_inv->apply(v, out);
    else
      std::copy(v.begin(), v.end(), out.begin());
  };
  auto apply_op = [&](std::span<const double> v, std::span<double> out) {
    if (left) {
      k.apply(v, work);
      precondition(work, out);
    } else {
      precondition(v, z);
      k.apply(z, out);
    }
  };
  // Leaves in r the vector that seeds the next cycle (b - K x, or its
  // preconditioned image on the left side) and returns its norm.
  auto residual = [&](const Vector& x, double& true_norm) {
    k.apply(x, work);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - work[i];
    true_norm = linalg::norm2(r);
    if (!left) return true_norm;
    Vector pr(n);
    precondition(r, pr);
    r = std::move(pr);
    return linalg::norm2(r);
  };

  std::copy(b.begin(), b.end(), r.begin());
  if (left) {
    Vector pb(n);
    precondition(b, pb);
    r = std::move(pb);
  }
  const double ref_norm = linalg::norm2(r);
  if (ref_norm == 0.0) throw InvalidArgument("preconditioner maps the right-hand side to zero");
  double rnorm = ref_norm;
  while (rep.iterations < cfg.maxit) {
    std::vector<Vector> V;
    V.reserve(std::min(cycle_len, cfg.maxit - rep.iterations) + 1);
    V.emplace_back(r);
    for (double& v : V[0]) v /= rnorm;
    std::vector<Vector> H;  // columns of the Hessenberg matrix, rotated in place
    Vector cs, sn, g{rnorm};
    const Vector x0 = res.x;
    bool stop = false;

    for (std::size_t j = 0; j < cycle_len && rep.iterations < cfg.maxit; ++j) {
      Vector w(n);
      apply_op(V[j], w);
      Vector h(j + 2, 0.0);
      double wnorm0 = linalg::norm2(w);
      for (std::size_t i = 0; i <= j; ++i) {
        h[i] = linalg::dot(w, V[i]);
        linalg::axpy(-h[i], V[i], w);
      }
      double wnorm = linalg::norm2(w);
      // Second pass when the new direction is not orthogonal to the basis.
      if (wnorm > 0.0) {
        double loss = 0.0;
        for (std::size_t i = 0; i <= j; ++i)
          loss = std::max(loss, std::abs(linalg::dot(w, V[i])) / wnorm);
        if (loss > 1e-10) {
          ++rep.reorthogonalizations;
          for (std::size_t i = 0; i <= j; ++i) {
            double c = linalg::dot(w, V[i]);
            h[i] += c;
            linalg::axpy(-c, V[i], w);
          }
          wnorm = linalg::norm2(w);
        }
      }
      h[j + 1] = wnorm;
      bool happy = wnorm <= 1e-14 * std::max(wnorm0, 1e-300);
      if (!happy) {
        for (double& v : w) v /= wnorm;
        V.push_back(std::move(w));
      }

      for (std::size_t i = 0; i < j; ++i) apply_givens(cs[i], sn[i], h[i], h[i + 1]);
      double denom = std::hypot(h[j], h[j + 1]);
      double c = denom == 0.0 ? 1.0 : h[j] / denom;
      double s = denom == 0.0 ? 0.0 : h[j + 1] / denom;
      cs.push_back(c);
      sn.push_back(s);
      h[j] = denom;
      h[j + 1] = 0.0;
      g.push_back(-s * g[j]);
      g[j] *= c;
      H.push_back(std::move(h));
      ++rep.iterations;

      // x = x0 + V_j y_j (right side: x0 + M^{-1} V_j y_j) with H y = g.
      const std::size_t kdim = j + 1;
      Vector y(kdim);
      for (std::size_t ii = kdim; ii-- > 0;) {
        double s2 = g[ii];
        for (std::size_t q = ii + 1; q < kdim; ++q) s2 -= H[q][ii] * y[q];
        y[ii] = H[ii][ii] == 0.0 ? 0.0 : s2 / H[ii][ii];
      }
      Vector comb(n, 0.0);
      for (std::size_t q = 0; q < kdim; ++q) linalg::axpy(y[q], V[q], comb);
      Vector x = x0;
      if (left) {
        linalg::axpy(1.0, comb, x);
      } else {
        precondition(comb, z);
        linalg::axpy(1.0, z, x);
      }
      double true_norm = 0.0;
      double rel = residual(x, true_norm) / ref_norm;
      res.x = std::move(x);
      rep.final_residual = rel;
      rep.final_true_residual = true_norm / bnorm;
      if (cfg.record_history) rep.relative_residuals.push_back(rel);

      if (cfg.monitor_orthogonality) {
        for (std::size_t p = 0; p < V.size(); ++p)
          for (std::size_t q = 0; q <= p; ++q)
            rep.orthogonality_loss =
                std::max(rep.orthogonality_loss,
                         std::abs(linalg::dot(V[p], V[q]) - (p == q ? 1.0 : 0.0)));
      }
      if (rel <= cfg.tol) {
        rep.converged = true;
        stop = true;
        break;
      }
      if (happy) {
        rep.breakdown = true;
        stop = true;
        break;
      }
    }
    if (stop) break;
    rnorm = linalg::norm2(r);  // seed of the next cycle, left in r by residual()
  }
  rep.maxit_exceeded = !rep.converged && !rep.breakdown && rep.iterations >= cfg.maxit;
  return finish();
}

}  // namespace saddle3
