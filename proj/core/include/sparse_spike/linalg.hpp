#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace sparse_spike {

using Index = Eigen::Index;

class Selector;
struct MaskedMatrix;

/// Dense symmetric matrix. Symmetry is checked on construction:
/// |M_ij - M_ji| <= 1e-12 (1 + |M_ij|).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Eigen::MatrixXd m);

  /// (m + m^T) / 2; m must be square.
  static SymMatrix symmetric_part(const Eigen::MatrixXd& m);

  Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& dense() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  struct Trusted {};
  SymMatrix(Eigen::MatrixXd m, Trusted) : m_(std::move(m)) {}
  friend struct MaskedMatrix;
  friend MaskedMatrix masked(const SymMatrix& m, const Selector& z, double diagonal_shift);

  Eigen::MatrixXd m_;
};

/// Boolean d-vector z marking active coordinates.
class Selector {
 public:
  Selector() = default;
  explicit Selector(std::vector<std::uint8_t> active);
  static Selector from_indices(Index dim, std::span<const Index> indices);

  Index dim() const { return static_cast<Index>(active_.size()); }
  Index count() const { return static_cast<Index>(indices_.size()); }
  bool operator[](Index i) const { return active_[static_cast<std::size_t>(i)] != 0; }
  const std::vector<std::uint8_t>& mask() const { return active_; }
  /// Active coordinates in increasing order.
  const std::vector<Index>& indices() const { return indices_; }

  friend bool operator==(const Selector& a, const Selector& b) { return a.active_ == b.active_; }

 private:
  std::vector<std::uint8_t> active_;
  std::vector<Index> indices_;
};

/// Y^T Y (no centering).
SymMatrix gram(const Eigen::MatrixXd& y);

struct EigenOptions {
  double tol = 1e-9;
  /// Matrix-vector products allowed; negative means 10 * dim + 1000.
  long max_iters = -1;
  /// Start vector; empty means the normalised all-ones vector.
  Eigen::VectorXd start;
};

struct EigenPair {
  Eigen::VectorXd vector;  // unit norm
  double value = 0.0;      // Rayleigh quotient of `vector`
  double residual = 0.0;   // ||M x - value x||
  long iterations = 0;     // matrix-vector products used
};

/// Algebraically largest eigenpair with ||M x - value x|| <= tol ||M||_F.
///
/// Lanczos with full reorthogonalisation from the normalised all-ones vector.
/// If the Krylov space becomes invariant before the dominant eigenspace is
/// reached, the basis is extended with deterministic pseudo-random vectors
/// until it spans R^dim or the Frobenius mass left outside the explored
/// subspaces cannot hold a larger eigenvalue. Among blocks the earliest
/// attaining the maximum wins, so e.g. the identity returns the start vector.
/// Throws ConvergenceError (carrying the residual) if the budget runs out.
EigenPair top_eigenvector(const SymMatrix& m, const EigenOptions& options = {});

/// Same contract on a raw dense matrix that the caller guarantees symmetric.
EigenPair top_eigenvector_dense(const Eigen::Ref<const Eigen::MatrixXd>& m,
                                const EigenOptions& options = {});

/// Principal submatrix on a selector's active set.
struct MaskedMatrix {
  SymMatrix block;
  std::vector<Index> index_map;  // block index -> original index

  /// Zero-pads a block vector back to the original dimension.
  Eigen::VectorXd pad(const Eigen::VectorXd& compact, Index dim) const;
};

/// Principal submatrix of (M + diagonal_shift * Id) on z's active set. An
/// eigenvector of the block, zero-padded, is an eigenvector of
/// (M + shift Id) o (z z^T) with the same eigenvalue. Empty selectors yield an
/// empty block.
MaskedMatrix masked(const SymMatrix& m, const Selector& z, double diagonal_shift = 0.0);

/// Keeps the `keep` largest-magnitude entries (ties to the lower index),
/// zeroes the rest. Values are not renormalised.
Eigen::VectorXd truncate_top(const Eigen::VectorXd& x, Index keep);

/// max over |S| = k of lambda_max(M[S,S]) by enumerating supports.
/// Guarded to dim <= 20 and C(dim, k) <= 1e5.
double ksparse_norm_oracle(const SymMatrix& m, Index k);

/// Binomial coefficient as a double (exact below 2^53).
double binomial(Index n, Index k);

}  // namespace sparse_spike
