#include "sparse_spike/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sparse_spike {

namespace {

constexpr double kFeasibleSlack = 1e-3;

double l1_norm(const Eigen::MatrixXd& x) { return x.cwiseAbs().sum(); }

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

// diag(M) + soft-threshold of the off-diagonal part at level rho.
Eigen::MatrixXd soft_offdiagonal(const Eigen::MatrixXd& m, double rho) {
  Eigen::MatrixXd out = m.unaryExpr([rho](double x) {
    return x > rho ? x - rho : (x < -rho ? x + rho : 0.0);
  });
  out.diagonal() = m.diagonal();
  return out;
}

double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

class Solver {
 public:
  Solver(const SymMatrix& m, double k, const SdpOptions& options)
      : m_(m.dense()), k_(k), options_(options), fro_(m_.norm()) {
    m_.diagonal().maxCoeff(&diag_index_);
    target_ = options_.tol * std::max(fro_, std::numeric_limits<double>::min());
  }

  PsdIterate run() {
    const Index dim = m_.rows();
    const EigenPair top = eigen(m_, Eigen::VectorXd());
    upper_ = top.value + top.residual;
    Eigen::MatrixXd x = top.vector * top.vector.transpose();
    consider(x);
    if (dim == 1 || done()) return result();

    // Dual scan over the diagonal-plus-soft-threshold family; its minimiser
    // also seeds the penalty weight.
    Eigen::MatrixXd offdiag = m_;
    offdiag.diagonal().setZero();
    const double rho_max = offdiag.cwiseAbs().maxCoeff();
    double rho_seed = rho_max;
    if (rho_max > 0.0) {
      double best_bound = std::numeric_limits<double>::infinity();
      for (double f : {1.0, 0.25, 0.0625}) {
        const double rho = f * rho_max;
        const EigenPair p = eigen(soft_offdiagonal(m_, rho), Eigen::VectorXd());
        const double bound = p.value + p.residual + rho * (k_ - 1.0);
        upper_ = std::min(upper_, bound);
        if (bound < best_bound) {
          best_bound = bound;
          rho_seed = rho;
        }
        consider(p.vector * p.vector.transpose());
      }
    }
    if (done()) return result();

    Eigen::MatrixXd diag_atom = Eigen::MatrixXd::Zero(dim, dim);
    diag_atom(diag_index_, diag_index_) = 1.0;
    consider(diag_atom);

    x = best_;
    double rho = std::max(rho_seed, 1e-12 * std::max(fro_, 1.0));
    double rho_lo = 0.0;
    double rho_hi = std::numeric_limits<double>::infinity();
    Eigen::VectorXd atom = top.vector;
    const int rounds = std::max(1, options_.bisection_rounds);
    for (int round = 0; round < rounds && iterations_ < options_.iters && !done(); ++round) {
      const long round_budget =
          std::max<long>(1, (options_.iters - iterations_) / (rounds - round));
      penalty_ = rho;
      frank_wolfe(x, atom, rho, round_budget);
      const bool feasible = l1_norm(x) <= k_ * (1.0 + kFeasibleSlack);
      if (feasible) {
        rho_hi = rho;
      } else {
        rho_lo = rho;
      }
      rho = std::isinf(rho_hi) ? 2.0 * rho : 0.5 * (rho_lo + rho_hi);
    }
    return result();
  }

 private:
  EigenPair eigen(const Eigen::MatrixXd& g, const Eigen::VectorXd& start) const {
    EigenOptions eo = options_.eigen;
    eo.start = start;
    return top_eigenvector_dense(g, eo);
  }

  // Penalised conditional gradient at fixed rho, warm-started from x.
  void frank_wolfe(Eigen::MatrixXd& x, Eigen::VectorXd& atom, double rho, long budget) {
    const Index dim = m_.rows();
    Eigen::MatrixXd g(dim, dim);
    Eigen::MatrixXd direction(dim, dim);
    for (long it = 0; it < budget && !done(); ++it) {
      const double l1 = l1_norm(x);
      const bool penalized = l1 > k_;
      g = m_;
      if (penalized) g -= rho * x.unaryExpr(&sign_of);
      const EigenPair lmo = eigen(g, atom);
      atom = lmo.vector;
      if (penalized) upper_ = std::min(upper_, lmo.value + lmo.residual + rho * k_);
      ++iterations_;

      const double fw_gap = lmo.value - inner(g, x);
      if (fw_gap <= 0.1 * target_) break;

      direction.noalias() = atom * atom.transpose();
      direction -= x;
      const double lin0 = inner(m_, x);
      const double lin1 = atom.dot(m_ * atom) - lin0;
      auto value = [&](double gamma) {
        const double excess = (x + gamma * direction).cwiseAbs().sum() - k_;
        return lin0 + gamma * lin1 - rho * std::max(0.0, excess);
      };
      double gamma = 2.0 / (static_cast<double>(iterations_) + 2.0);
      double best_value = value(gamma);
      // Golden-section refinement; the objective is concave along the segment.
      constexpr double kPhi = 0.6180339887498949;
      double lo = 0.0;
      double hi = 1.0;
      double c = hi - kPhi * (hi - lo);
      double d = lo + kPhi * (hi - lo);
      double fc = value(c);
      double fd = value(d);
      for (int s = 0; s < 12; ++s) {
        if (fc >= fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - kPhi * (hi - lo);
          fc = value(c);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + kPhi * (hi - lo);
          fd = value(d);
        }
      }
      const double golden = fc >= fd ? c : d;
      if (const double v = value(golden); v > best_value) {
        best_value = v;
        gamma = golden;
      }
      x += gamma * direction;
      consider(x);
    }
  }

  // Records the feasible repair of x if it improves the best objective.
  void consider(const Eigen::MatrixXd& x) {
    const double l1 = l1_norm(x);
    const double raw = inner(m_, x);
    double theta = 1.0;
    if (l1 > k_) theta = k_ > 1.0 ? (k_ - 1.0) / (l1 - 1.0) : 0.0;
    const double objective = theta * raw + (1.0 - theta) * m_(diag_index_, diag_index_);
    if (has_best_ && objective <= best_objective_) return;
    best_ = theta * x;
    best_(diag_index_, diag_index_) += 1.0 - theta;
    best_objective_ = objective;
    has_best_ = true;
  }

  bool done() const { return has_best_ && upper_ - best_objective_ <= target_; }

  PsdIterate result() const {
    PsdIterate out;
    out.matrix = best_;
    if (options_.certify_psd) {
      certify(out);
    } else {
      out.trace = best_.trace();
      out.l1 = l1_norm(best_);
    }
    out.objective = inner(m_, best_);
    out.upper_bound = std::max(upper_, out.objective);
    out.gap = out.upper_bound - out.objective;
    out.penalty = penalty_;
    out.iterations = iterations_;
    out.converged = out.gap <= target_;
    return out;
  }

  Eigen::MatrixXd m_;
  double k_;
  SdpOptions options_;
  double fro_;
  double target_ = 0.0;
  Index diag_index_ = 0;

  double upper_ = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_;
  double best_objective_ = -std::numeric_limits<double>::infinity();
  bool has_best_ = false;
  double penalty_ = 0.0;
  long iterations_ = 0;
};

}  // namespace

void certify(PsdIterate& x) {
  x.trace = x.matrix.trace();
  x.l1 = l1_norm(x.matrix);
  if (x.matrix.size() == 0) {
    x.min_eig = 0.0;
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(x.matrix, Eigen::EigenvaluesOnly);
  x.min_eig = solver.eigenvalues()(0);
}

PsdIterate solve_basic_sdp(const SymMatrix& m, double k, const SdpOptions& options) {
  if (m.dim() < 1) throw std::invalid_argument("solve_basic_sdp: empty matrix");
  if (!(k >= 1.0)) throw std::invalid_argument("solve_basic_sdp: k must be >= 1");
  if (!m.dense().allFinite()) throw std::invalid_argument("solve_basic_sdp: matrix must be finite");
  if (options.iters < 0 || !(options.tol > 0)) {
    throw std::invalid_argument("solve_basic_sdp: iters must be >= 0 and tol > 0");
  }
  return Solver(m, k, options).run();
}

Eigen::VectorXd top_of_solution(const PsdIterate& x) {
  return top_eigenvector_dense(x.matrix).vector;
}

}  // namespace sparse_spike
