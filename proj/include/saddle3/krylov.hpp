#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "saddle3/linalg/dense.hpp"
#include "saddle3/linalg/sparse.hpp"

namespace saddle3 {

class BlockPreconditioner;
using linalg::Vector;

// y = Op(x); x and y never alias.
struct LinearOperator {
  std::size_t size = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;

  // Keeps its own copy of the matrix.
  static LinearOperator from_matrix(linalg::SparseMatrix k);
  // References p, which must outlive the operator.
  static LinearOperator from_preconditioner(const BlockPreconditioner& p);
};

// Right: Arnoldi on K M^{-1}, stop on the true residual. Left: Arnoldi on
// M^{-1} K, stop on the preconditioned residual ||M^{-1}(b - K x)|| / ||M^{-1} b||
// (the protocol of MATLAB's gmres).
enum class PreconditionSide { Right, Left };
const char* to_string(PreconditionSide s);
PreconditionSide parse_side(const std::string& name);

struct SolveConfig {
  double tol = 1e-6;
  std::size_t maxit = 1000;
  // Unset: full GMRES.
  std::optional<std::size_t> restart;
  PreconditionSide side = PreconditionSide::Right;
  bool record_history = true;
  // Track max |V^T V - I| over the run (costly; for tests).
  bool monitor_orthogonality = false;
};

struct SolveReport {
  std::size_t iterations = 0;
  bool converged = false;
  bool maxit_exceeded = false;
  bool breakdown = false;
  // Stopping quantity after each iteration (true RES on the right side).
  std::vector<double> relative_residuals;
  double final_residual = 1.0;       // stopping quantity at exit
  double final_true_residual = 1.0;  // ||b - K x|| / ||b|| at exit
  double wall_time = 0.0;
  double orthogonality_loss = 0.0;
  std::size_t reorthogonalizations = 0;
};

struct SolveResult {
  Vector x;
  SolveReport report;
};

// Preconditioned GMRES from x0 = 0, full or restarted.
SolveResult gmres(const LinearOperator& k, const LinearOperator* m_inv, std::span<const double> b,
                  const SolveConfig& cfg = {});

}  // namespace saddle3
