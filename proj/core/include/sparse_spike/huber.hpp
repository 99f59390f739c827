#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "sparse_spike/enumerate.hpp"
#include "sparse_spike/linalg.hpp"
#include "sparse_spike/model.hpp"
#include "sparse_spike/result.hpp"

namespace sparse_spike {

struct HuberConfig {
  double lambda = 1.0;  // known signal strength
  double alpha = 0.5;   // Pr[|N_ij| <= 1] >= alpha
  double A = 1.5;       // flatness bound |v|_inf <= A / sqrt(k)
  double delta = 0.05;
  std::optional<double> h;  // default 3 lambda A^2 / k
  long iters = 400;
  double tol = 1e-4;
  int bisection_rounds = 12;
  int threads = 0;
  /// Accept the passing block with the largest Frobenius norm instead of the
  /// first passing pattern in enumeration order.
  bool accept_max = false;
  double budget = 1e7;
  Index max_order = 4;
  bool force = false;
  EigenOptions eigen;

  double resolved_h(Index k) const;
  /// lambda delta^2 alpha / (10 k).
  double resolved_r(Index k) const;
  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Entrywise saturation at +-h.
double clamp(double x, double h);
Eigen::MatrixXd clamp(const Eigen::MatrixXd& y, double h);

/// phi_h(x) = x^2 / 2 for |x| <= h, h |x| - h^2 / 2 otherwise.
double huber_phi(double x, double h);

struct HuberValue {
  double value = 0.0;
  Eigen::VectorXd gradient;  // clip(x, -h, h)
};
HuberValue huber_loss(const Eigen::VectorXd& x, double h);

/// Sum of phi_h over the entries of a matrix.
double huber_sum(const Eigen::MatrixXd& x, double h);

struct BlockSolution {
  Eigen::MatrixXd matrix;  // feasible point of {X >= 0, Tr X <= lambda, |X|_1 <= lambda k}
  double frobenius = 0.0;
  double trace = 0.0;
  double l1 = 0.0;
  double min_eig = 0.0;
  bool trace_feasible = false;
  bool l1_feasible = false;
  double objective = 0.0;     // F_h(Y_block - X)
  double stationarity = 0.0;  // last conditional-gradient gap
  long iterations = 0;
  bool converged = false;
  SignPattern pattern;
  std::vector<Index> index_map;
};

/// Minimises F_h(Y_block - X) over {X >= 0, Tr X <= lambda, |X|_1 <= lambda k}.
///
/// Conditional gradient on {X >= 0, Tr X <= lambda} whose linear oracle is
/// lambda u u^T for the top eigenvector u of sym(clip(Y_block - X)) minus the
/// l1 subgradient, or 0 when that eigenvalue is not positive. The l1 bound is
/// an exact penalty rho max(0, |X|_1 - lambda k) with rho doubled then bisected
/// across rounds; every iterate is made feasible by scaling towards 0, and the
/// best feasible objective is returned. Converged when the gap falls below
/// tol F_h(Y_block).
BlockSolution minimize_huber(const Eigen::MatrixXd& y_block, double lambda, double k, double h,
                             long iters, double tol, int bisection_rounds = 12,
                             const EigenOptions& eigen = {});

/// Clamp, select with r = lambda delta^2 alpha / (10 k) and scale 1, minimise
/// the Huber loss on each masked block and accept the first pattern whose
/// solution has Frobenius norm >= (1 - 10 delta) lambda. Falls back to the
/// largest-norm block with the flag "no-acceptance".
RecoveryResult recover_symmetric(const Instance& inst, Index k, Index t, const HuberConfig& cfg);

}  // namespace sparse_spike
