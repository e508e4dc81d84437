#pragma once

#include <cstdint>
#include <string>

#include "saddle3/block_system.hpp"

namespace saddle3 {

enum class ProblemFamily { StokesModified, ImageRestoration, PoissonControl, FdStokes, Random };

const char* to_string(ProblemFamily f);
ProblemFamily parse_problem_family(const std::string& name);

struct ProblemSpec {
  ProblemFamily family = ProblemFamily::StokesModified;
  // p for the finite-difference families, grid power for poisson-control, N for fd-stokes.
  int size = 8;
  double beta = 1e-2;
  // Random family only.
  std::size_t n = 12, m = 5, l = 4;
  std::uint64_t seed = 1;
};

// Right-hand sides are K * ones so the exact solution is the all-ones vector.
BlockSystem gen_stokes_modified(int p);
BlockSystem gen_image_restoration(int p);
HatBlockSystem gen_poisson_control(int grid_pow, double beta = 1e-2);
HatBlockSystem gen_fd_stokes_substitute(int cells);
BlockSystem gen_random_valid(std::size_t n, std::size_t m, std::size_t l, std::uint64_t seed);

BlockSystem generate(const ProblemSpec& spec);

// Building blocks, exposed for tests.
namespace stencils {
SparseMatrix second_difference(int p);    // (1/h^2) tridiag(-1, 2, -1), h = 1/(p+1)
SparseMatrix forward_difference(int p);   // (1/h) tridiag(0, 1, -1)
SparseMatrix strided_diagonal(int p);     // diag(1, p+1, ..., p^2-p+1)
SparseMatrix restoration_difference(int p);  // p x (p+1): 2 on the diagonal, -1 above
}  // namespace stencils

}  // namespace saddle3
