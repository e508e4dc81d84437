#include "saddle3/problems.hpp"

#include <cmath>
#include <random>

#include "saddle3/errors.hpp"

namespace saddle3 {

using linalg::Triplet;

const char* to_string(ProblemFamily f) {
  switch (f) {
    case ProblemFamily::StokesModified: return "stokes-modified";
    case ProblemFamily::ImageRestoration: return "image-restoration";
    case ProblemFamily::PoissonControl: return "poisson-control";
    case ProblemFamily::FdStokes: return "fd-stokes-substitute";
    case ProblemFamily::Random: return "random";
  }
  return "unknown";
}

ProblemFamily parse_problem_family(const std::string& name) {
  for (auto f : {ProblemFamily::StokesModified, ProblemFamily::ImageRestoration,
                 ProblemFamily::PoissonControl, ProblemFamily::FdStokes, ProblemFamily::Random})
    if (name == to_string(f)) return f;
  throw InvalidArgument("unknown problem family '" + name + "'");
}

namespace stencils {

SparseMatrix second_difference(int p) {
  double h = 1.0 / (p + 1), s = 1.0 / (h * h);
  std::vector<Triplet> t;
  for (int i = 0; i < p; ++i) {
    if (i > 0) t.push_back({std::size_t(i), std::size_t(i - 1), -s});
    t.push_back({std::size_t(i), std::size_t(i), 2.0 * s});
    if (i + 1 < p) t.push_back({std::size_t(i), std::size_t(i + 1), -s});
  }
  return SparseMatrix::from_triplets(p, p, std::move(t));
}

SparseMatrix forward_difference(int p) {
  double h = 1.0 / (p + 1), s = 1.0 / h;
  std::vector<Triplet> t;
  for (int i = 0; i < p; ++i) {
    t.push_back({std::size_t(i), std::size_t(i), s});
    if (i + 1 < p) t.push_back({std::size_t(i), std::size_t(i + 1), -s});
  }
  return SparseMatrix::from_triplets(p, p, std::move(t));
}

SparseMatrix strided_diagonal(int p) {
  Vector d(p);
  for (int k = 0; k < p; ++k) d[k] = 1.0 + static_cast<double>(k) * p;
  return SparseMatrix::diagonal(d);
}

SparseMatrix restoration_difference(int p) {
  std::vector<Triplet> t;
  for (int i = 0; i < p; ++i) {
    t.push_back({std::size_t(i), std::size_t(i), 2.0});
    t.push_back({std::size_t(i), std::size_t(i + 1), -1.0});
  }
  return SparseMatrix::from_triplets(p, p + 1, std::move(t));
}

}  // namespace stencils

namespace {

void require_size(int p, int lo, const char* what) {
  if (p < lo) throw InvalidArgument(std::string(what) + " must be at least " + std::to_string(lo));
}

SparseMatrix block_diagonal(const std::vector<const SparseMatrix*>& blocks) {
  std::vector<std::vector<const SparseMatrix*>> grid(blocks.size(),
                                                     std::vector<const SparseMatrix*>(blocks.size()));
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    grid[i][i] = blocks[i];
    sizes.push_back(blocks[i]->rows());
  }
  return linalg::assemble_blocks(grid, sizes, sizes);
}

HatBlockSystem hat_with_unit_solution(SparseMatrix A, SparseMatrix B, SparseMatrix C,
                                      SparseMatrix D) {
  BlockSystem s =
      BlockSystem::with_unit_solution(std::move(A), std::move(B), std::move(C), std::move(D));
  return standard_to_hat(s);
}

}  // namespace

BlockSystem gen_stokes_modified(int p) {
  require_size(p, 2, "p");
  SparseMatrix I = SparseMatrix::identity(p);
  SparseMatrix T = stencils::second_difference(p);
  SparseMatrix F = stencils::forward_difference(p);
  SparseMatrix E = stencils::strided_diagonal(p);
  SparseMatrix lap = linalg::add(linalg::kron(I, T), linalg::kron(T, I));
  SparseMatrix A = block_diagonal({&lap, &lap});
  SparseMatrix b1 = linalg::kron(I, F), b2 = linalg::kron(F, I);
  std::size_t pp = static_cast<std::size_t>(p) * p;
  SparseMatrix B = linalg::assemble_blocks({{&b1, &b2}}, {pp}, {pp, pp});
  SparseMatrix C = linalg::kron(E, F);
  SparseMatrix D = SparseMatrix::zero(pp, pp);
  return BlockSystem::with_unit_solution(std::move(A), std::move(B), std::move(C), std::move(D));
}

BlockSystem gen_image_restoration(int p) {
  require_size(p, 2, "p");
  const std::size_t pt = static_cast<std::size_t>(p) * p;        // p tilde
  const std::size_t ph = static_cast<std::size_t>(p) * (p + 1);  // p hat

  // Gaussian blur weights; entries that underflow to zero are not stored.
  std::vector<Triplet> wt;
  for (std::size_t i = 1; i <= ph; ++i)
    for (std::size_t j = 1; j <= ph; ++j) {
      double a = static_cast<double>(i) / 3.0, b = static_cast<double>(j) / 3.0;
      double w = std::exp(-2.0 * (a * a + b * b));
      if (w != 0.0) wt.push_back({i - 1, j - 1, w});
    }
  SparseMatrix W = SparseMatrix::from_triplets(ph, ph, std::move(wt));
  SparseMatrix a11 = linalg::add(linalg::multiply(linalg::transpose(W), W),
                                 SparseMatrix::identity(ph), 2.0, 1.0);

  Vector d1(2 * pt), d2(2 * pt);
  for (std::size_t j = 1; j <= 2 * pt; ++j) {
    double jj = static_cast<double>(j);
    d1[j - 1] = j <= pt ? 1.0 : 1e-5 * (jj - pt) * (jj - pt);
    d2[j - 1] = 1e-5 * (jj + pt) * (jj + pt);
  }
  SparseMatrix D1 = SparseMatrix::diagonal(d1), D2 = SparseMatrix::diagonal(d2);
  SparseMatrix A = block_diagonal({&a11, &D1, &D2});

  SparseMatrix Ehat = stencils::restoration_difference(p);
  SparseMatrix Ip = SparseMatrix::identity(p);
  SparseMatrix e1 = linalg::kron(Ehat, Ip), e2 = linalg::kron(Ip, Ehat);
  SparseMatrix E = linalg::assemble_blocks({{&e1}, {&e2}}, {pt, pt}, {ph});
  SparseMatrix negI = linalg::scaled(SparseMatrix::identity(2 * pt), -1.0);
  SparseMatrix B = linalg::assemble_blocks({{&E, &negI, &negI}}, {2 * pt}, {ph, 2 * pt, 2 * pt});
  SparseMatrix C = linalg::transpose(E);
  SparseMatrix D = SparseMatrix::zero(ph, ph);
  return BlockSystem::with_unit_solution(std::move(A), std::move(B), std::move(C), std::move(D));
}

HatBlockSystem gen_poisson_control(int grid_pow, double beta) {
  if (grid_pow < 3 || grid_pow > 8) throw InvalidArgument("grid power must lie in 3..8");
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  const int cells = 1 << grid_pow;
  const double h = 1.0 / cells;
  const int inner = cells - 1;
  const std::size_t nn = static_cast<std::size_t>(inner) * inner;
  // Bilinear element matrices, local nodes counterclockwise from the lower left.
  const double mass[4][4] = {{4, 2, 1, 2}, {2, 4, 2, 1}, {1, 2, 4, 2}, {2, 1, 2, 4}};
  const double stiff[4][4] = {{4, -1, -2, -1}, {-1, 4, -1, -2}, {-2, -1, 4, -1}, {-1, -2, -1, 4}};
  auto interior_index = [&](int ix, int iy) -> long {
    if (ix <= 0 || iy <= 0 || ix >= cells || iy >= cells) return -1;
    return static_cast<long>(iy - 1) * inner + (ix - 1);
  };
  std::vector<Triplet> mt, kt;
  for (int ey = 0; ey < cells; ++ey)
    for (int ex = 0; ex < cells; ++ex) {
      long node[4] = {interior_index(ex, ey), interior_index(ex + 1, ey),
                      interior_index(ex + 1, ey + 1), interior_index(ex, ey + 1)};
      for (int a = 0; a < 4; ++a) {
        if (node[a] < 0) continue;
        for (int b = 0; b < 4; ++b) {
          if (node[b] < 0) continue;
          mt.push_back({std::size_t(node[a]), std::size_t(node[b]), mass[a][b] * h * h / 36.0});
          kt.push_back({std::size_t(node[a]), std::size_t(node[b]), stiff[a][b] / 6.0});
        }
      }
    }
  SparseMatrix M = SparseMatrix::from_triplets(nn, nn, std::move(mt));
  SparseMatrix K = SparseMatrix::from_triplets(nn, nn, std::move(kt));
  return hat_with_unit_solution(M, K, linalg::scaled(M, -1.0), linalg::scaled(M, beta));
}

HatBlockSystem gen_fd_stokes_substitute(int cells) {
  require_size(cells, 2, "cell count");
  const int N = cells;
  const double h = 1.0 / N;
  const double s = 1.0 / (h * h);
  // Unknowns: x-velocity on interior vertical faces, y-velocity on interior
  // horizontal faces, pressure in cell centres (last cell pinned).
  const std::size_t nu = static_cast<std::size_t>(N - 1) * N;
  auto ux = [&](int i, int j) { return static_cast<std::size_t>(j) * (N - 1) + (i - 1); };  // face x=i*h, row j
  auto uy = [&](int i, int j) { return nu + static_cast<std::size_t>(j - 1) * N + i; };    // face y=j*h, col i
  const std::size_t n = 2 * nu;
  std::vector<Triplet> at;
  // x-velocity: Dirichlet faces in x, ghost reflection at the walls in y.
  for (int j = 0; j < N; ++j)
    for (int i = 1; i < N; ++i) {
      std::size_t r = ux(i, j);
      double diag = 2.0 * s;
      if (i > 1) at.push_back({r, ux(i - 1, j), -s});
      if (i < N - 1) at.push_back({r, ux(i + 1, j), -s});
      diag += (j > 0 ? s : 2.0 * s) + (j < N - 1 ? s : 2.0 * s);
      if (j > 0) at.push_back({r, ux(i, j - 1), -s});
      if (j < N - 1) at.push_back({r, ux(i, j + 1), -s});
      at.push_back({r, r, diag});
    }
  for (int j = 1; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      std::size_t r = uy(i, j);
      double diag = 2.0 * s;
      if (j > 1) at.push_back({r, uy(i, j - 1), -s});
      if (j < N - 1) at.push_back({r, uy(i, j + 1), -s});
      diag += (i > 0 ? s : 2.0 * s) + (i < N - 1 ? s : 2.0 * s);
      if (i > 0) at.push_back({r, uy(i - 1, j), -s});
      if (i < N - 1) at.push_back({r, uy(i + 1, j), -s});
      at.push_back({r, r, diag});
    }
  SparseMatrix A = SparseMatrix::from_triplets(n, n, std::move(at));

  const std::size_t m = static_cast<std::size_t>(N) * N - 1;
  auto cell = [&](int i, int j) { return static_cast<std::size_t>(j) * N + i; };
  std::vector<Triplet> bt;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      std::size_t c = cell(i, j);
      if (c >= m) continue;
      if (i + 1 < N) bt.push_back({c, ux(i + 1, j), 1.0 / h});
      if (i > 0) bt.push_back({c, ux(i, j), -1.0 / h});
      if (j + 1 < N) bt.push_back({c, uy(i, j + 1), 1.0 / h});
      if (j > 0) bt.push_back({c, uy(i, j), -1.0 / h});
    }
  SparseMatrix B = SparseMatrix::from_triplets(m, n, std::move(bt));

  // Pressure-jump stabilization written as an auxiliary field on interior edges.
  std::vector<Triplet> ct;
  std::size_t edge = 0;
  auto add_edge = [&](std::size_t a, std::size_t b) {
    if (a < m) ct.push_back({edge, a, h});
    if (b < m) ct.push_back({edge, b, -h});
    ++edge;
  };
  for (int j = 0; j < N; ++j)
    for (int i = 0; i + 1 < N; ++i) add_edge(cell(i, j), cell(i + 1, j));
  for (int j = 0; j + 1 < N; ++j)
    for (int i = 0; i < N; ++i) add_edge(cell(i, j), cell(i, j + 1));
  SparseMatrix C = SparseMatrix::from_triplets(edge, m, std::move(ct));
  SparseMatrix D = SparseMatrix::identity(edge);
  return hat_with_unit_solution(std::move(A), std::move(B), std::move(C), std::move(D));
}

BlockSystem gen_random_valid(std::size_t n, std::size_t m, std::size_t l, std::uint64_t seed) {
  if (l == 0) throw NotSupported("empty third block (l = 0) is not supported");
  if (n == 0 || m == 0) throw InvalidArgument("block sizes must be positive");
  if (m > n) throw InvalidArgument("random system needs m <= n");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random_dense = [&](std::size_t r, std::size_t c) {
    DenseMatrix x(r, c);
    for (double& v : x.values()) v = normal(rng);
    return x;
  };
  DenseMatrix R = random_dense(n, n);
  DenseMatrix A = linalg::add(linalg::multiply(R, linalg::transpose(R)), DenseMatrix::identity(n),
                              1.0 / static_cast<double>(n), 1.0);
  DenseMatrix B = random_dense(m, n);
  // D may be rank deficient only when C (l x m) can have full row rank.
  std::size_t rank = std::uniform_int_distribution<std::size_t>(0, l)(rng);
  if (l > m) rank = l;
  DenseMatrix Q = random_dense(l, rank);
  DenseMatrix D = rank ? linalg::multiply(Q, linalg::transpose(Q)) : DenseMatrix(l, l);
  if (rank) D = linalg::add(linalg::symmetrized(D), DenseMatrix(l, l), 1.0 / rank, 0.0);
  DenseMatrix C = random_dense(l, m);
  return BlockSystem::with_unit_solution(SparseMatrix::from_dense(A), SparseMatrix::from_dense(B),
                                         SparseMatrix::from_dense(C), SparseMatrix::from_dense(D));
}

BlockSystem generate(const ProblemSpec& spec) {
  switch (spec.family) {
    case ProblemFamily::StokesModified: return gen_stokes_modified(spec.size);
    case ProblemFamily::ImageRestoration: return gen_image_restoration(spec.size);
    case ProblemFamily::PoissonControl:
      return hat_to_standard(gen_poisson_control(spec.size, spec.beta));
    case ProblemFamily::FdStokes: return hat_to_standard(gen_fd_stokes_substitute(spec.size));
    case ProblemFamily::Random: return gen_random_valid(spec.n, spec.m, spec.l, spec.seed);
  }
  throw InvalidArgument("unknown problem family");
}

}  // namespace saddle3
