#pragma once

#include <vector>

#include "cepp/common.hpp"

namespace cepp {

/// Square real matrix with nonnegative off-diagonal entries. Off-diagonal
/// negativity beyond -1e-12 is rejected at construction; tiny negative dust is
/// clamped to zero so the stored matrix is exactly Metzler.
class MetzlerMatrix {
 public:
  explicit MetzlerMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

 private:
  Matrix entries_;
};

enum class TriangularOrientation { Lower, Upper };

/// Permutation to block-triangular form with irreducible diagonal blocks.
/// blocks[k] lists original indices; permutation maps new index -> original
/// index, ordered so the permuted matrix is block *lower* triangular.
struct FrobeniusForm {
  std::vector<int> permutation;
  std::vector<std::vector<int>> blocks;
  std::vector<MetzlerMatrix> block_matrices;
  std::vector<double> block_abscissae;
  TriangularOrientation orientation = TriangularOrientation::Lower;

  double abscissa() const;
  int dominant_block() const;
  Matrix permuted(const Matrix& m) const;
};

/// Strongly-connected-component decomposition of the adjacency graph with
/// edge i->j iff M(j,i) != 0 (i != j), topologically ordered.
FrobeniusForm frobenius_normal_form(const MetzlerMatrix& m);

/// Largest real part of the spectrum; real for Metzler matrices. Computed per
/// irreducible block by power iteration on the shifted nonnegative block,
/// with a dense eigensolve fallback for dim <= 8.
double spectral_abscissa(const MetzlerMatrix& m);

enum class Side { Left, Right };

/// Blocks whose abscissae agree within this tolerance are reported as a
/// degenerate tie, never silently broken.
inline constexpr double kBlockTieTolerance = 1e-10;

struct PerronResult {
  Vector vector;      ///< nonnegative, entries sum to 1
  double abscissa;
  bool degenerate_tie = false;
  std::vector<Vector> tied_alternates;  ///< candidates from tied blocks
};

/// Perron vector of the dominant irreducible block, extended by zeros,
/// satisfying v^T M = lambda v^T (left) or M v = lambda v (right).
PerronResult perron_vectors(const MetzlerMatrix& m, Side side);

/// J = F - V with F >= 0 entrywise and V^{-1} >= 0 entrywise.
struct RegularSplitting {
  RegularSplitting(Matrix f, Matrix v);

  Matrix F;
  Matrix V;
  Matrix Vinv;
};

struct NgmData {
  Matrix K;             ///< F V^{-1}, entrywise nonnegative
  double rho;           ///< spectral radius
  Vector left_perron;   ///< sum 1
  Vector right_perron;  ///< sum 1
  int numerical_rank;
  bool rank_one;
};

/// Next-generation matrix of a regular splitting.
NgmData ngm(const Matrix& F, const Matrix& V);

/// Numerical rank by singular values, threshold 1e-10 * sigma_max.
int numerical_rank(const Matrix& m, double relative_threshold = 1e-10);

}  // namespace cepp
