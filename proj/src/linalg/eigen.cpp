#include "saddle3/linalg/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "saddle3/errors.hpp"

namespace saddle3::linalg {

namespace {

constexpr std::size_t kJacobiMaxOrder = 48;

void sort_ascending(SymmetricEigen& e) {
  const std::size_t n = e.values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return e.values[a] < e.values[b]; });
  SymmetricEigen s{Vector(n), DenseMatrix(e.vectors.rows(), n)};
  for (std::size_t j = 0; j < n; ++j) {
    s.values[j] = e.values[order[j]];
    if (e.vectors.rows() == n)
      for (std::size_t i = 0; i < n; ++i) s.vectors(i, j) = e.vectors(i, order[j]);
  }
  e = std::move(s);
}

void require_square_symmetric(const DenseMatrix& a) {
  if (!a.square()) throw DimensionMismatch("eigenproblem needs a square matrix");
  if (!all_finite(a.values())) throw InvalidArgument("matrix has non-finite entries");
}

// Householder reduction to tridiagonal form followed by implicit QL, after the
// EISPACK tred2/tql2 pair. `v` holds the matrix on entry and the eigenvectors on
// exit when `vectors` is set.
void tred2_tql2(DenseMatrix& v, Vector& d, bool vectors) {
  const int n = static_cast<int>(v.rows());
  d.assign(n, 0.0);
  Vector e(n, 0.0);
  if (n == 0) return;
  for (int j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (int i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (int k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (int j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (int k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (int j = 0; j < i; ++j) e[j] = 0.0;
      for (int j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (int k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (int j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      double hh = f / (h + h);
      for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (int j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (int k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  if (vectors) {
    for (int i = 0; i < n - 1; ++i) {
      v(n - 1, i) = v(i, i);
      v(i, i) = 1.0;
      double h = d[i + 1];
      if (h != 0.0) {
        for (int k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
        for (int j = 0; j <= i; ++j) {
          double g = 0.0;
          for (int k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
          for (int k = 0; k <= i; ++k) v(k, j) -= g * d[k];
        }
      }
      for (int k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
    }
    for (int j = 0; j < n; ++j) {
      d[j] = v(n - 1, j);
      v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
  } else {
    // Diagonal of the tridiagonal matrix sits on the diagonal of the workspace.
    for (int j = 0; j < n; ++j) d[j] = v(j, j);
  }
  e[0] = 0.0;

  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  double f = 0.0, tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    int m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 200) throw NonConvergence("tridiagonal QL did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        double dl1 = d[l + 1];
        double h = g - d[l];
        for (int i = l + 2; i < n; ++i) d[i] -= h;
        f += h;
        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          if (vectors) {
            for (int k = 0; k < n; ++k) {
              h = v(k, i + 1);
              v(k, i + 1) = s * v(k, i) + c * h;
              v(k, i) = c * v(k, i) - s * h;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

SymmetricEigen jacobi_eigen(const DenseMatrix& a_in) {
  require_square_symmetric(a_in);
  const std::size_t n = a_in.rows();
  DenseMatrix a = symmetrized(a_in);
  DenseMatrix v = DenseMatrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double x = a(i, j) * a(i, j);
        total += x;
        if (i != j) off += x;
      }
    // Off-diagonal mass at rounding level: (4 eps)^2 of the total.
    if (off <= 7.9e-31 * total || off == 0.0) {
      SymmetricEigen e{Vector(n), std::move(v)};
      for (std::size_t i = 0; i < n; ++i) e.values[i] = a(i, i);
      sort_ascending(e);
      return e;
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        if (std::abs(apq) <= 1e-18 * (std::abs(a(p, p)) + std::abs(a(q, q)))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  throw NonConvergence("Jacobi eigenvalue iteration did not converge");
}

SymmetricEigen tridiagonal_ql_eigen(const DenseMatrix& a) {
  require_square_symmetric(a);
  SymmetricEigen e{Vector(), symmetrized(a)};
  tred2_tql2(e.vectors, e.values, true);
  sort_ascending(e);
  return e;
}

SymmetricEigen symmetric_eigen(const DenseMatrix& a) {
  return a.rows() <= kJacobiMaxOrder ? jacobi_eigen(a) : tridiagonal_ql_eigen(a);
}

Vector symmetric_eigenvalues(const DenseMatrix& a) {
  require_square_symmetric(a);
  if (a.rows() <= kJacobiMaxOrder) return jacobi_eigen(a).values;
  DenseMatrix work = symmetrized(a);
  Vector d;
  tred2_tql2(work, d, false);
  std::sort(d.begin(), d.end());
  return d;
}

Vector symmetric_pencil_eigenvalues(const DenseMatrix& a, const DenseMatrix& lower) {
  if (a.rows() != lower.rows()) throw DimensionMismatch("pencil orders differ");
  DenseMatrix x = forward_solve(lower, a);             // L^{-1} A
  DenseMatrix y = forward_solve(lower, transpose(x));  // L^{-1} A L^{-T}
  return symmetric_eigenvalues(symmetrized(y));
}

std::vector<std::complex<double>> nonsymmetric_eigenvalues(const DenseMatrix& a_in) {
  if (!a_in.square()) throw DimensionMismatch("eigenproblem needs a square matrix");
  if (!all_finite(a_in.values())) throw InvalidArgument("matrix has non-finite entries");
  const int n = static_cast<int>(a_in.rows());
  std::vector<std::complex<double>> w(n);
  if (n == 0) return w;
  DenseMatrix a = a_in;

  // Balance with powers of two so rounding does not depend on row/column scaling.
  {
    const double radix = 2.0, sqrdx = 4.0;
    bool done = false;
    while (!done) {
      done = true;
      for (int i = 0; i < n; ++i) {
        double r = 0.0, c = 0.0;
        for (int j = 0; j < n; ++j)
          if (j != i) {
            c += std::abs(a(j, i));
            r += std::abs(a(i, j));
          }
        if (c == 0.0 || r == 0.0) continue;
        double g = r / radix, f = 1.0, s = c + r;
        while (c < g) {
          f *= radix;
          c *= sqrdx;
        }
        g = r * radix;
        while (c > g) {
          f /= radix;
          c /= sqrdx;
        }
        if ((c + r) / f < 0.95 * s) {
          done = false;
          g = 1.0 / f;
          for (int j = 0; j < n; ++j) a(i, j) *= g;
          for (int j = 0; j < n; ++j) a(j, i) *= f;
        }
      }
    }
  }

  // Orthogonal reduction to upper Hessenberg form.
  {
    Vector ort(n, 0.0);
    for (int m = 1; m <= n - 2; ++m) {
      double scale = 0.0;
      for (int i = m; i < n; ++i) scale += std::abs(a(i, m - 1));
      if (scale == 0.0) continue;
      double h = 0.0;
      for (int i = n - 1; i >= m; --i) {
        ort[i] = a(i, m - 1) / scale;
        h += ort[i] * ort[i];
      }
      double g = std::sqrt(h);
      if (ort[m] > 0) g = -g;
      h -= ort[m] * g;
      ort[m] -= g;
      for (int j = m; j < n; ++j) {
        double f = 0.0;
        for (int i = n - 1; i >= m; --i) f += ort[i] * a(i, j);
        f /= h;
        for (int i = m; i < n; ++i) a(i, j) -= f * ort[i];
      }
      for (int i = 0; i < n; ++i) {
        double f = 0.0;
        for (int j = n - 1; j >= m; --j) f += ort[j] * a(i, j);
        f /= h;
        for (int j = m; j < n; ++j) a(i, j) -= f * ort[j];
      }
      a(m, m - 1) = scale * g;
      for (int i = m + 1; i < n; ++i) a(i, m - 1) = 0.0;
    }
  }

  // Francis double-shift QR on the Hessenberg matrix.
  const double eps = std::numeric_limits<double>::epsilon();
  auto sign = [](double x, double y) { return y >= 0.0 ? std::abs(x) : -std::abs(x); };
  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0, l = 0;
    do {
      for (l = nn; l > 0; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        w[nn--] = x + t;
      } else {
        double y = a(nn - 1, nn - 1);
        double ww = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + ww;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign(z, p);
            w[nn - 1] = w[nn] = x + z;
            if (z != 0.0) w[nn] = x - ww / z;
          } else {
            w[nn] = {x + p, -z};
            w[nn - 1] = std::conj(w[nn]);
          }
          nn -= 2;
        } else {
          if (its == 100) throw NonConvergence("QR iteration did not converge");
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift; alternate between the bottom and the top of
            // the active block and vary its size so clustered eigenvalues
            // cannot trap the iteration in a cycle.
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = (its / 10) % 2 ? std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2))
                                      : std::abs(a(l + 1, l)) + std::abs(a(l + 2, l + 1));
            s *= 1.0 + 0.1 * (its / 10);
            y = x = 0.75 * s;
            ww = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          double p = 0, q = 0, r = 0, z = 0;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            double s = y - z;
            p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                      std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = sign(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k + 1 != nn) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k + 1 != nn) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return w;
}

double inverse_iteration_residual(const DenseMatrix& a, std::complex<double> lambda,
                                  int iterations) {
  using cd = std::complex<double>;
  const std::size_t n = a.rows();
  double anorm = std::max(max_abs(a), 1.0);
  cd shift = lambda + cd(1e-10 * anorm, 1e-10 * anorm);
  std::vector<cd> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = a(i, j) - (i == j ? shift : cd(0.0));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m[i * n + k]) > std::abs(m[p * n + k])) p = i;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[p * n + j]);
      std::swap(perm[k], perm[p]);
    }
    if (std::abs(m[k * n + k]) < 1e-300) m[k * n + k] = 1e-300;
    for (std::size_t i = k + 1; i < n; ++i) {
      cd f = m[i * n + k] / m[k * n + k];
      m[i * n + k] = f;
      for (std::size_t j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
    }
  }
  std::vector<cd> v(n, cd(1.0, 0.5));
  auto normalize = [&](std::vector<cd>& x) {
    double s = 0.0;
    for (auto& c : x) s += std::norm(c);
    s = std::sqrt(s);
    for (auto& c : x) c /= s;
  };
  normalize(v);
  for (int it = 0; it < iterations; ++it) {
    std::vector<cd> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = v[perm[i]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) x[i] -= m[i * n + k] * x[k];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t k = i + 1; k < n; ++k) x[i] -= m[i * n + k] * x[k];
      x[i] /= m[i * n + i];
    }
    normalize(x);
    v = std::move(x);
  }
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cd s = -lambda * v[i];
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * v[j];
    res += std::norm(s);
  }
  return std::sqrt(res);
}

namespace {

DenseMatrix spectral_function(const DenseMatrix& a, bool inverse) {
  SymmetricEigen e = symmetric_eigen(a);
  const std::size_t n = a.rows();
  double top = e.values.empty() ? 0.0 : std::max(std::abs(e.values.front()), std::abs(e.values.back()));
  Vector f(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lam = e.values[i];
    if (lam < -1e-10 * std::max(top, 1.0)) throw NotSPD("matrix has a negative eigenvalue", i);
    lam = std::max(lam, 0.0);
    if (inverse) {
      if (lam <= 0.0) throw NotSPD("matrix is singular", i);
      f[i] = 1.0 / std::sqrt(lam);
    } else {
      f[i] = std::sqrt(lam);
    }
  }
  DenseMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    double fk = f[k];
    for (std::size_t i = 0; i < n; ++i) {
      double vik = e.vectors(i, k) * fk;
      if (vik == 0.0) continue;
      auto ri = r.row(i);
      for (std::size_t j = 0; j < n; ++j) ri[j] += vik * e.vectors(j, k);
    }
  }
  return symmetrized(r);
}

}  // namespace

DenseMatrix matrix_sqrt_spd(const DenseMatrix& a) { return spectral_function(a, false); }
DenseMatrix matrix_inverse_sqrt_spd(const DenseMatrix& a) { return spectral_function(a, true); }

}  // namespace saddle3::linalg
