#include "sparse_spike/huber.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>

#include "sparse_spike/errors.hpp"
#include "sparse_spike/parallel.hpp"

namespace sparse_spike {

namespace {

double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// Minimiser of a convex function on [0, 1], compared against the given
// fallback step and the endpoint 1.
template <class F>
double line_search(F&& f, double fallback) {
  constexpr double kPhi = 0.6180339887498949;
  double lo = 0.0;
  double hi = 1.0;
  double c = hi - kPhi * (hi - lo);
  double d = lo + kPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int s = 0; s < 40; ++s) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kPhi * (hi - lo);
      fd = f(d);
    }
  }
  double best = fallback;
  double best_value = f(fallback);
  for (double g : {fc <= fd ? c : d, 1.0}) {
    if (const double v = f(g); v < best_value) {
      best = g;
      best_value = v;
    }
  }
  return best;
}

class HuberSolver {
 public:
  HuberSolver(const Eigen::MatrixXd& y, double lambda, double k, double h, long iters, double tol,
              int rounds, const EigenOptions& eigen)
      : y_(y), lambda_(lambda), budget_(lambda * k), h_(h), iters_(iters), rounds_(rounds),
        eigen_(eigen) {
    const double base = huber_sum(y_, h_);
    target_ = tol * std::max(base, std::numeric_limits<double>::min());
    best_ = Eigen::MatrixXd::Zero(y.rows(), y.cols());
    best_objective_ = base;
  }

  BlockSolution run() {
    const Index m = y_.rows();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd atom;
    double rho = 0.0;
    double rho_lo = 0.0;
    double rho_hi = std::numeric_limits<double>::infinity();
    const int rounds = std::max(1, rounds_);
    bool round_converged = false;
    for (int round = 0; round < rounds && iterations_ < iters_; ++round) {
      const long share = std::max<long>(1, (iters_ - iterations_) / (rounds - round));
      round_converged = frank_wolfe(x, atom, rho, share);
      const bool feasible = x.cwiseAbs().sum() <= budget_ * (1.0 + 1e-3);
      if (feasible && round_converged) break;
      if (feasible) {
        rho_hi = rho;
      } else {
        rho_lo = rho;
      }
      if (std::isinf(rho_hi)) {
        rho = rho == 0.0 ? h_ / 16.0 : 2.0 * rho;
      } else {
        rho = 0.5 * (rho_lo + rho_hi);
      }
    }

    BlockSolution out;
    out.matrix = best_;
    out.objective = best_objective_;
    out.frobenius = best_.norm();
    out.trace = best_.trace();
    out.l1 = best_.cwiseAbs().sum();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(best_, Eigen::EigenvaluesOnly);
    out.min_eig = es.eigenvalues()(0);
    out.trace_feasible = out.trace <= lambda_ * (1.0 + 1e-6);
    out.l1_feasible = out.l1 <= budget_ * (1.0 + 1e-3);
    out.stationarity = last_gap_;
    out.iterations = iterations_;
    out.converged = round_converged;
    return out;
  }

 private:
  double penalized(const Eigen::MatrixXd& x, double rho) const {
    const double f = huber_sum(y_ - x, h_);
    if (rho == 0.0) return f;
    return f + rho * std::max(0.0, x.cwiseAbs().sum() - budget_);
  }

  // Returns true once the gap meets the target.
  bool frank_wolfe(Eigen::MatrixXd& x, Eigen::VectorXd& atom, double rho, long budget) {
    const Index m = y_.rows();
    Eigen::MatrixXd g(m, m);
    Eigen::MatrixXd direction(m, m);
    for (long it = 0; it < budget; ++it) {
      g = clamp(y_ - x, h_);
      g = 0.5 * (g + g.transpose()).eval();
      if (rho > 0.0 && x.cwiseAbs().sum() > budget_) g -= rho * x.unaryExpr(&sign_of);
      EigenOptions eo = eigen_;
      eo.start = atom;
      const EigenPair top = top_eigenvector_dense(g, eo);
      atom = top.vector;
      ++iterations_;

      const double mu = std::max(top.value, 0.0);
      last_gap_ = lambda_ * mu - g.cwiseProduct(x).sum();
      if (last_gap_ <= target_) return true;

      direction = -x;
      if (top.value > 0.0) direction.noalias() += lambda_ * atom * atom.transpose();
      const double gamma = line_search(
          [&](double step) { return penalized(x + step * direction, rho); },
          2.0 / (static_cast<double>(iterations_) + 2.0));
      x += gamma * direction;
      consider(x);
    }
    return false;
  }

  void consider(const Eigen::MatrixXd& x) {
    const double l1 = x.cwiseAbs().sum();
    const double theta = l1 > budget_ ? budget_ / l1 : 1.0;
    const Eigen::MatrixXd feasible = theta * x;
    const double objective = huber_sum(y_ - feasible, h_);
    if (objective < best_objective_) {
      best_objective_ = objective;
      best_ = feasible;
    }
  }

  const Eigen::MatrixXd& y_;
  double lambda_;
  double budget_;
  double h_;
  long iters_;
  int rounds_;
  EigenOptions eigen_;
  double target_ = 0.0;

  Eigen::MatrixXd best_;
  double best_objective_ = 0.0;
  double last_gap_ = 0.0;
  long iterations_ = 0;
};

using BlockPtr = std::shared_ptr<const BlockSolution>;

}  // namespace

double HuberConfig::resolved_h(Index k) const {
  return h ? *h : 3.0 * lambda * A * A / static_cast<double>(k);
}

double HuberConfig::resolved_r(Index k) const {
  return lambda * delta * delta * alpha / (10.0 * static_cast<double>(k));
}

void HuberConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("huber: lambda must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("huber: alpha must lie in (0, 1]");
  if (!(A >= 1.0)) throw std::invalid_argument("huber: A must be >= 1");
  if (!(delta > 0.0 && delta < 0.1)) throw std::invalid_argument("huber: delta must lie in (0, 0.1)");
  if (h && !(*h > 0.0)) throw std::invalid_argument("huber: h must be > 0");
  if (iters < 1 || !(tol > 0.0)) throw std::invalid_argument("huber: iters >= 1 and tol > 0 required");
}

double clamp(double x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("clamp: h must be > 0");
  return x > h ? h : (x < -h ? -h : x);
}

Eigen::MatrixXd clamp(const Eigen::MatrixXd& y, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("clamp: h must be > 0");
  return y.cwiseMax(-h).cwiseMin(h);
}

double huber_phi(double x, double h) {
  const double a = std::abs(x);
  return a <= h ? 0.5 * x * x : h * a - 0.5 * h * h;
}

HuberValue huber_loss(const Eigen::VectorXd& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("huber_loss: h must be > 0");
  HuberValue out;
  out.gradient = x.cwiseMax(-h).cwiseMin(h);
  for (Index i = 0; i < x.size(); ++i) out.value += huber_phi(x(i), h);
  return out;
}

double huber_sum(const Eigen::MatrixXd& x, double h) {
  return x.unaryExpr([h](double v) { return huber_phi(v, h); }).sum();
}

BlockSolution minimize_huber(const Eigen::MatrixXd& y_block, double lambda, double k, double h,
                             long iters, double tol, int bisection_rounds,
                             const EigenOptions& eigen) {
  if (y_block.rows() < 1 || y_block.rows() != y_block.cols()) {
    throw std::invalid_argument("minimize_huber: block must be square and nonempty");
  }
  if (!(lambda > 0.0) || !(k > 0.0) || !(h > 0.0) || iters < 1 || !(tol > 0.0)) {
    throw std::invalid_argument("minimize_huber: parameters must be positive");
  }
  if (!y_block.allFinite()) throw std::invalid_argument("minimize_huber: block must be finite");
  return HuberSolver(y_block, lambda, k, h, iters, tol, bisection_rounds, eigen).run();
}

RecoveryResult recover_symmetric(const Instance& inst, Index k, Index t, const HuberConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (inst.model != ModelKind::kSymmetric) {
    throw std::invalid_argument("recover_symmetric: instance model must be symmetric");
  }
  const Index d = inst.dim();
  if (inst.data.rows() != d) throw std::invalid_argument("recover_symmetric: data must be square");
  if (!(t >= 1 && t <= k && k <= d)) throw std::invalid_argument("recover_symmetric: need 1 <= t <= k <= d");
  cfg.validate();
  if (!cfg.force) {
    RecoverConfig guard;
    guard.k = k;
    guard.t = t;
    guard.budget = cfg.budget;
    guard.max_order = cfg.max_order;
    check_budget(d, guard, 1);
  }

  const double h = cfg.resolved_h(k);
  const double r = cfg.resolved_r(k);
  const double threshold = (1.0 - 10.0 * cfg.delta) * cfg.lambda;
  const Eigen::MatrixXd clamped = clamp(inst.data, h);
  const PatternEnumerator patterns(d, t);
  const int threads = resolve_threads(cfg.threads);

  std::map<std::vector<std::uint8_t>, BlockPtr> cache;
  BlockPtr accepted;
  BlockPtr largest;
  std::uint64_t visited = 0;
  std::uint64_t candidates = 0;
  std::uint64_t not_converged = 0;

  constexpr std::uint64_t kChunk = 64;
  for (std::uint64_t begin = 0; begin < patterns.size() && !(accepted && !cfg.accept_max);
       begin += kChunk) {
    const std::uint64_t end = std::min(patterns.size(), begin + kChunk);
    std::vector<SignPattern> chunk_patterns;
    std::vector<Selector> selectors;
    patterns.for_range(begin, end, [&](std::uint64_t, const SignPattern& s) {
      chunk_patterns.push_back(s);
      selectors.push_back(threshold_selector(pattern_response(clamped, s), s, r, 1.0));
    });

    std::vector<const Selector*> fresh;
    {
      std::map<std::vector<std::uint8_t>, bool> seen;
      for (const Selector& z : selectors) {
        if (z.count() < 2 || cache.count(z.mask()) != 0 || seen.count(z.mask()) != 0) continue;
        seen[z.mask()] = true;
        fresh.push_back(&z);
      }
    }
    std::vector<BlockPtr> solved(fresh.size());
    parallel_chunks(fresh.size(), 1, threads, [&](std::uint64_t i, std::uint64_t, std::uint64_t) {
      const Selector& z = *fresh[static_cast<std::size_t>(i)];
      const std::vector<Index>& idx = z.indices();
      auto block = std::make_shared<BlockSolution>(
          minimize_huber(clamped(idx, idx), cfg.lambda, static_cast<double>(k), h, cfg.iters,
                         cfg.tol, cfg.bisection_rounds, cfg.eigen));
      block->index_map = idx;
      solved[static_cast<std::size_t>(i)] = std::move(block);
    });
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (!solved[i]->converged) ++not_converged;
      cache.emplace(fresh[i]->mask(), solved[i]);
    }

    for (std::size_t p = 0; p < chunk_patterns.size(); ++p) {
      ++visited;
      if (selectors[p].count() < 2) continue;
      ++candidates;
      const BlockPtr& block = cache.at(selectors[p].mask());
      auto tagged = [&](const BlockPtr& b) {
        auto copy = std::make_shared<BlockSolution>(*b);
        copy->pattern = chunk_patterns[p];
        return BlockPtr(std::move(copy));
      };
      if (!largest || block->frobenius > largest->frobenius) largest = tagged(block);
      if (block->frobenius >= threshold &&
          (!accepted || (cfg.accept_max && block->frobenius > accepted->frobenius))) {
        accepted = tagged(block);
        if (!cfg.accept_max) break;
      }
    }
  }

  RecoveryResult result;
  result.algorithm = "huber";
  result.patterns_enumerated = visited;
  result.candidates_evaluated = candidates;
  result.eigenproblems = cache.size();
  const BlockPtr chosen = accepted ? accepted : largest;
  if (!chosen) throw std::runtime_error("recover_symmetric: no selector had two or more active coordinates");
  if (!accepted) result.flags.push_back("no-acceptance");
  if (not_converged > 0) result.flags.push_back("huber-not-converged=" + std::to_string(not_converged));
  result.score = chosen->frobenius;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  if (chosen->frobenius > 0.0) {
    const Eigen::VectorXd top = top_eigenvector_dense(chosen->matrix, cfg.eigen).vector;
    for (std::size_t a = 0; a < chosen->index_map.size(); ++a) {
      x(chosen->index_map[a]) = top(static_cast<Index>(a));
    }
  } else {
    x(chosen->pattern.support.front()) = 1.0;
  }
  result.estimate = x;
  attach_correlation(result, inst);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace sparse_spike
