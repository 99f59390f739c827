#include "sparse_spike/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sparse_spike/errors.hpp"
#include "sparse_spike/random.hpp"

namespace sparse_spike {

SymMatrix::SymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("SymMatrix: matrix must be square");
  for (Index j = 0; j < m_.cols(); ++j) {
    for (Index i = j + 1; i < m_.rows(); ++i) {
      if (std::abs(m_(i, j) - m_(j, i)) > 1e-12 * (1.0 + std::abs(m_(i, j)))) {
        throw std::invalid_argument("SymMatrix: matrix is not symmetric at (" +
                                    std::to_string(i) + ", " + std::to_string(j) + ")");
      }
    }
  }
}

SymMatrix SymMatrix::symmetric_part(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: matrix must be square");
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  return SymMatrix(std::move(s), Trusted{});
}

Selector::Selector(std::vector<std::uint8_t> active) : active_(std::move(active)) {
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (active_[i] != 0) {
      active_[i] = 1;
      indices_.push_back(static_cast<Index>(i));
    }
  }
}

Selector Selector::from_indices(Index dim, std::span<const Index> indices) {
  std::vector<std::uint8_t> active(static_cast<std::size_t>(dim), 0);
  for (Index i : indices) {
    if (i < 0 || i >= dim) throw std::out_of_range("Selector: index out of range");
    active[static_cast<std::size_t>(i)] = 1;
  }
  return Selector(std::move(active));
}

SymMatrix gram(const Eigen::MatrixXd& y) {
  if (y.rows() < 1 || y.cols() < 1) throw std::invalid_argument("gram: empty matrix");
  Eigen::MatrixXd g(y.cols(), y.cols());
  g.setZero();
  g.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return SymMatrix::symmetric_part(g);
}

// ---------------------------------------------------------------------------
// Lanczos

namespace {

struct TridiagonalTop {
  double value = 0.0;
  Eigen::VectorXd vector;
};

// Number of eigenvalues of the symmetric tridiagonal (a, b) strictly below x.
Index sturm_count(const std::vector<double>& a, const std::vector<double>& b, double x,
                  double pivot_floor) {
  Index count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double off = i == 0 ? 0.0 : b[i - 1] * b[i - 1] / d;
    d = a[i] - x - off;
    if (std::abs(d) < pivot_floor) d = -pivot_floor;
    if (d < 0) ++count;
  }
  return count;
}

// Largest eigenpair of an unreduced symmetric tridiagonal matrix: Sturm
// bisection for the value, then inverse iteration on the positive definite
// (sigma I - T) with sigma an upper bracket of the spectrum.
// `floor_hint` is a known lower bound of the top eigenvalue (Ritz values grow
// monotonically as the Lanczos matrix is extended).
TridiagonalTop tridiagonal_top(const std::vector<double>& a, const std::vector<double>& b,
                               double floor_hint = -std::numeric_limits<double>::infinity()) {
  const auto n = static_cast<Index>(a.size());
  TridiagonalTop top;
  if (n == 1) {
    top.value = a[0];
    top.vector = Eigen::VectorXd::Ones(1);
    return top;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double scale = 0.0;
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double radius = (i > 0 ? std::abs(b[k - 1]) : 0.0) + (i + 1 < n ? std::abs(b[k]) : 0.0);
    lo = std::min(lo, a[k] - radius);
    hi = std::max(hi, a[k] + radius);
    scale = std::max(scale, std::abs(a[k]) + radius);
  }
  if (floor_hint > lo && floor_hint < hi) lo = floor_hint;
  const double floor = std::max(scale, 1e-300) * 1e-300;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(a, b, mid, floor) == n) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 2.0 * eps * std::max(std::abs(lo), std::abs(hi))) break;
  }
  top.value = 0.5 * (lo + hi);

  // sigma strictly above the spectrum keeps the factorisation definite.
  const double sigma = hi + 4.0 * eps * std::max(scale, 1e-300);
  std::vector<double> pivot(static_cast<std::size_t>(n));
  std::vector<double> mult(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double diag = sigma - a[k];
    if (i == 0) {
      pivot[k] = diag;
    } else {
      mult[k] = -b[k - 1] / pivot[k - 1];
      pivot[k] = diag + mult[k] * b[k - 1];
    }
    if (pivot[k] <= floor) pivot[k] = floor;
  }
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int pass = 0; pass < 3; ++pass) {
    for (Index i = 1; i < n; ++i) x(i) -= mult[static_cast<std::size_t>(i)] * x(i - 1);
    x(n - 1) /= pivot[static_cast<std::size_t>(n - 1)];
    for (Index i = n - 2; i >= 0; --i) {
      x(i) = (x(i) + b[static_cast<std::size_t>(i)] * x(i + 1)) / pivot[static_cast<std::size_t>(i)];
    }
    x /= x.norm();
  }
  top.vector = std::move(x);
  return top;
}

Eigen::VectorXd restart_vector(Index dim, int restart) {
  Rng rng(mix_seed(sub_seed(0x1A2C05ULL, "lanczos.restart"), {static_cast<std::uint64_t>(restart)}));
  Eigen::VectorXd v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = 2.0 * rng.uniform() - 1.0;
  return v;
}

}  // namespace

EigenPair top_eigenvector_dense(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                const EigenOptions& options) {
  const Index m = a.rows();
  if (m == 0 || a.cols() != m) throw std::invalid_argument("top_eigenvector: need a nonempty square matrix");
  if (!(options.tol > 0)) throw std::invalid_argument("top_eigenvector: tol must be positive");
  if (!a.allFinite()) throw std::invalid_argument("top_eigenvector: matrix must be finite");
  const long budget = options.max_iters < 0 ? 10L * m + 1000L : options.max_iters;

  EigenPair result;
  if (m == 1) {
    result.vector = Eigen::VectorXd::Ones(1);
    result.value = a(0, 0);
    return result;
  }
  const double fro = a.norm();
  Eigen::VectorXd start = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(static_cast<double>(m)));
  if (options.start.size() == m && options.start.norm() > 0.0) {
    start = options.start / options.start.norm();
  }
  if (fro == 0.0) {
    result.vector = start;
    return result;
  }
  const double target = options.tol * fro;
  const double breakdown = 1e-13 * fro;

  Eigen::MatrixXd basis(m, m);
  Eigen::VectorXd w(m);
  std::vector<double> alpha;
  std::vector<double> beta;
  long iterations = 0;
  Index used = 0;       // columns of basis filled
  Index block_start = 0;
  int restarts = 0;
  bool broke_down = false;
  // ||A||_F^2 minus the Frobenius mass of finished invariant blocks bounds
  // every eigenvalue not yet explored.
  double remaining_mass = fro * fro;

  // Best finished block (exact invariant subspace).
  bool have_best = false;
  EigenPair best;

  auto ritz_vector = [&](const TridiagonalTop& top) {
    Eigen::VectorXd x = basis.middleCols(block_start, static_cast<Index>(alpha.size())) * top.vector;
    return Eigen::VectorXd(x / x.norm());
  };
  auto finish = [&](Eigen::VectorXd x) {
    const Eigen::VectorXd ax = a * x;
    EigenPair pair;
    pair.value = x.dot(ax);
    pair.residual = (ax - pair.value * x).norm();
    pair.vector = std::move(x);
    pair.iterations = iterations;
    return pair;
  };

  double ritz_floor = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd q = start;
  basis.col(0) = q;
  used = 1;
  for (;;) {
    if (iterations >= budget) break;
    const Index j = used - 1;
    w.noalias() = a * basis.col(j);
    ++iterations;
    const double aj = basis.col(j).dot(w);
    alpha.push_back(aj);
    // Classical Gram-Schmidt with a second pass only when the first one
    // cancelled most of w.
    for (int pass = 0; pass < 2; ++pass) {
      const double before = w.norm();
      const Eigen::VectorXd h = basis.leftCols(used).transpose() * w;
      w.noalias() -= basis.leftCols(used) * h;
      if (w.norm() > 0.7071 * before) break;
    }
    const double bj = w.norm();

    const bool invariant = bj <= breakdown || used == m;
    const auto steps = static_cast<Index>(alpha.size());
    // The tridiagonal eigenproblem is only solved on a sparse schedule; a
    // converged pair is at most a few products late.
    if (!invariant && steps > 8 && steps % 4 != 0 && steps + 1 < m) {
      beta.push_back(bj);
      basis.col(used) = w / bj;
      ++used;
      continue;
    }
    const TridiagonalTop top = tridiagonal_top(alpha, beta, ritz_floor);
    ritz_floor = top.value;
    const double ritz_residual = bj * std::abs(top.vector(top.vector.size() - 1));

    if (invariant) {
      EigenPair pair = finish(ritz_vector(top));
      if (!have_best || pair.value > best.value + 1e-12 * fro) {
        best = std::move(pair);
        have_best = true;
      }
      if (used == m) break;
      double block_mass = 0.0;
      for (double x : alpha) block_mass += x * x;
      for (double x : beta) block_mass += 2.0 * x * x;
      remaining_mass -= block_mass;
      const double outside = std::sqrt(std::max(remaining_mass, 0.0)) +
                              4.0 * std::sqrt(std::numeric_limits<double>::epsilon()) * fro;
      if (outside <= best.value + 1e-12 * fro) break;
      // Extend the basis with a deterministic vector orthogonal to it.
      broke_down = true;
      Eigen::VectorXd next;
      for (;;) {
        next = restart_vector(m, restarts++);
        for (int pass = 0; pass < 2; ++pass) {
          next.noalias() -= basis.leftCols(used) * (basis.leftCols(used).transpose() * next);
        }
        if (next.norm() > 1e-8) break;
      }
      basis.col(used) = next / next.norm();
      block_start = used;
      ++used;
      alpha.clear();
      beta.clear();
      ritz_floor = -std::numeric_limits<double>::infinity();
      continue;
    }

    if (!broke_down && ritz_residual <= 0.5 * target) {
      EigenPair pair = finish(ritz_vector(top));
      if (pair.residual <= target) return pair;
    }
    beta.push_back(bj);
    basis.col(used) = w / bj;
    ++used;
  }

  if (have_best && (used == m || iterations < budget)) {
    best.iterations = iterations;
    if (best.residual <= target) return best;
    throw ConvergenceError("top_eigenvector: residual " + std::to_string(best.residual) +
                               " above tolerance " + std::to_string(target),
                           best.residual, iterations);
  }
  // Budget exhausted mid-block: report the current Ritz pair's residual.
  double residual = std::numeric_limits<double>::infinity();
  if (!alpha.empty()) residual = finish(ritz_vector(tridiagonal_top(alpha, beta))).residual;
  if (have_best) residual = std::min(residual, best.residual);
  throw ConvergenceError("top_eigenvector: no convergence after " + std::to_string(iterations) +
                             " matrix-vector products (residual " + std::to_string(residual) + ")",
                         residual, iterations);
}

EigenPair top_eigenvector(const SymMatrix& m, const EigenOptions& options) {
  return top_eigenvector_dense(m.dense(), options);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd MaskedMatrix::pad(const Eigen::VectorXd& compact, Index dim) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(dim);
  for (std::size_t a = 0; a < index_map.size(); ++a) full(index_map[a]) = compact(static_cast<Index>(a));
  return full;
}

MaskedMatrix masked(const SymMatrix& m, const Selector& z, double diagonal_shift) {
  if (z.dim() != m.dim()) throw std::invalid_argument("masked: selector dimension mismatch");
  MaskedMatrix out;
  out.index_map = z.indices();
  Eigen::MatrixXd block = m.dense()(out.index_map, out.index_map);
  if (diagonal_shift != 0.0) block.diagonal().array() += diagonal_shift;
  out.block = SymMatrix(std::move(block), SymMatrix::Trusted{});
  return out;
}

Eigen::VectorXd truncate_top(const Eigen::VectorXd& x, Index keep) {
  if (keep < 1) throw std::invalid_argument("truncate_top: keep must be >= 1");
  const Index d = x.size();
  if (keep >= d) return x;
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return std::abs(x(i)) > std::abs(x(j)); });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (Index r = 0; r < keep; ++r) {
    const Index i = order[static_cast<std::size_t>(r)];
    out(i) = x(i);
  }
  return out;
}

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (Index i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(result);
}

double ksparse_norm_oracle(const SymMatrix& m, Index k) {
  const Index n = m.dim();
  if (n > 20 || k < 1 || k > n || binomial(n, k) > 1e5) {
    throw std::invalid_argument("ksparse_norm_oracle: requires dim <= 20, 1 <= k <= dim and "
                                "C(dim, k) <= 1e5");
  }
  std::vector<Index> support(static_cast<std::size_t>(k));
  std::iota(support.begin(), support.end(), Index{0});
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    const Eigen::MatrixXd block = m.dense()(support, support);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block, Eigen::EigenvaluesOnly);
    best = std::max(best, solver.eigenvalues()(k - 1));
    // Next combination in lexicographic order.
    Index i = k - 1;
    while (i >= 0 && support[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++support[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      support[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return best;
}

}  // namespace sparse_spike
