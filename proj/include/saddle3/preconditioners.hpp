#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "saddle3/block_system.hpp"
#include "saddle3/factorization.hpp"

namespace saddle3 {

enum class PreconKind { D, UT, LT, F1, F2, F3, F4, F5 };

inline constexpr std::array<PreconKind, 8> kAllKinds = {
    PreconKind::D,  PreconKind::UT, PreconKind::LT, PreconKind::F1,
    PreconKind::F2, PreconKind::F3, PreconKind::F4, PreconKind::F5};

const char* to_string(PreconKind k);
PreconKind parse_kind(const std::string& tag);

// Which of the coupling operators Y_A, Z_A (both M_A^{-1} when set) and
// W_S (S_hat^{-1} when set) a kind uses.
struct KindSelection {
  bool y_a = false;
  bool z_a = false;
  bool w_s = false;
};
KindSelection selection(PreconKind k);

enum class RecipeKind { Ex61, Ex62, Ex63, Ex64, Ex65, Exact, Custom };
const char* to_string(RecipeKind r);
RecipeKind parse_recipe(const std::string& name);

struct Recipe {
  RecipeKind kind = RecipeKind::Ex61;
  std::size_t dense_threshold = 2048;
  double ichol_droptol = 1e-8;
  // Custom recipe: explicit SPD matrices for M_A, S_hat and M_S_hat.
  std::optional<DenseMatrix> custom_m_a, custom_s_hat, custom_ms_hat;
};

// Factored SPD approximations M_A ~ A, S_hat ~ S = B A^{-1} B^T and
// M_S_hat ~ M_S = D + C S^{-1} C^T. Inverses are applied exactly through the
// factors.
struct ApproxBlocks {
  CholFactor m_a;
  CholFactor s_hat;
  SparseMatrix s_hat_matrix;
  CholFactor ms_hat;
  SparseMatrix ms_hat_matrix;
  std::string notes;
};

ApproxBlocks build_blocks(const BlockSystem& sys, const Recipe& recipe);

// M = [[I,0,0],[B Y_A,I,0],[0,-C W_S,I]] diag(M_A, -S_hat, M_S_hat)
//     [[I,Z_A B^T,0],[0,I,-W_S C^T],[0,0,I]]
class BlockPreconditioner {
 public:
  BlockPreconditioner(PreconKind kind, std::shared_ptr<const ApproxBlocks> blocks,
                      const BlockSystem& sys);

  PreconKind kind() const { return kind_; }
  const ApproxBlocks& blocks() const { return *blocks_; }
  std::size_t order() const { return n_ + m_ + l_; }

  void apply_inverse(std::span<const double> r, std::span<double> out) const;
  Vector apply_inverse(std::span<const double> r) const;
  // Explicit M as the product of its three factors (desk scale only).
  DenseMatrix materialize_dense() const;

 private:
  PreconKind kind_;
  KindSelection sel_;
  std::shared_ptr<const ApproxBlocks> blocks_;
  SparseMatrix B_, Bt_, C_, Ct_;
  std::size_t n_, m_, l_;
};

}  // namespace saddle3
