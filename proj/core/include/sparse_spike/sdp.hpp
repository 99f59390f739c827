#pragma once

#include <Eigen/Dense>

#include "sparse_spike/linalg.hpp"

namespace sparse_spike {

/// A feasible point of {X >= 0, Tr X = 1, ||X||_1 <= k} with certificates.
/// trace, l1 and min_eig are recomputed from `matrix`, not taken from the
/// solver's bookkeeping.
struct PsdIterate {
  Eigen::MatrixXd matrix;
  double trace = 0.0;
  double l1 = 0.0;       // entrywise
  double min_eig = 0.0;
  double objective = 0.0;  // <X, M>
  double upper_bound = 0.0;  // certified bound on max <X, M> over the set
  double gap = 0.0;          // upper_bound - objective
  double penalty = 0.0;      // final exact-penalty weight rho
  long iterations = 0;       // conditional-gradient steps
  bool converged = false;    // gap <= tol ||M||_F
};

struct SdpOptions {
  long iters = 2000;
  /// Termination when gap <= tol * ||M||_F.
  double tol = 1e-3;
  int bisection_rounds = 12;
  /// Linear-oracle accuracy. The certified bound adds the oracle's residual,
  /// so a loose tolerance weakens the gap but never invalidates it.
  EigenOptions eigen = {1e-6, -1, {}};
  /// Computes min_eig of the returned matrix (a full eigendecomposition).
  /// When false, min_eig is left at 0.
  bool certify_psd = true;
};

/// Approximately maximizes <X, M> over the Basic-SDP set with l1 budget k.
///
/// Conditional gradient on the spectahedron applied to
///   <X, M> - rho * max(0, ||X||_1 - k),
/// whose linear oracle is the top eigenvector of M - rho sign(X). rho = 0 is
/// tried first (the plain top eigenvector, optimal whenever ||x||_1^2 <= k);
/// then rho is doubled until the iterate is feasible and bisected, at most
/// `bisection_rounds` rounds sharing the `iters` budget. Each iterate is made
/// exactly feasible by mixing with the best diagonal atom e_i e_i^T, which
/// keeps Tr X = 1 and X >= 0.
///
/// Upper bounds come from the Lagrangian dual
///   max <X, M> <= lambda_max(M - U) + rho k   for any ||U||_inf <= rho,
/// evaluated at every oracle call and along the diagonal-plus-soft-threshold
/// family U = rho I + clip(offdiag M, rho).
PsdIterate solve_basic_sdp(const SymMatrix& m, double k, const SdpOptions& options = {});

/// Top eigenvector of the solution matrix.
Eigen::VectorXd top_of_solution(const PsdIterate& x);

/// Fills trace, l1 and min_eig of `x` from its matrix.
void certify(PsdIterate& x);

}  // namespace sparse_spike
