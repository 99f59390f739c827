#include "sparse_spike/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sparse_spike/enumerate.hpp"
#include "sparse_spike/parallel.hpp"

namespace sparse_spike {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_enumerable(const Instance& inst, const char* who) {
  if (inst.model == ModelKind::kSymmetric) {
    throw std::invalid_argument(std::string(who) + ": symmetric instances are not supported");
  }
}

void require_wishart(const Instance& inst, const char* who) {
  if (!is_wishart_type(inst.model)) {
    throw std::invalid_argument(std::string(who) + ": requires a wishart-type instance");
  }
}

// (1/n) Y^T Y for wishart-type data, (Y + Y^T) / 2 otherwise.
SymMatrix form_matrix(const Instance& inst) {
  if (is_wishart_type(inst.model)) {
    Eigen::MatrixXd g = gram(inst.data).dense();
    g /= static_cast<double>(inst.samples());
    return SymMatrix(std::move(g));
  }
  return SymMatrix::symmetric_part(inst.data);
}

Eigen::VectorXd top_on_support(const SymMatrix& m, const std::vector<Index>& support,
                               const EigenOptions& eigen) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(m.dim()), 0);
  for (Index i : support) mask[static_cast<std::size_t>(i)] = 1;
  const MaskedMatrix block = masked(m, Selector(std::move(mask)));
  return block.pad(top_eigenvector(block.block, eigen).vector, m.dim());
}

void check_k(const Instance& inst, Index k, const char* who) {
  if (k < 1 || k > inst.dim()) throw std::invalid_argument(std::string(who) + ": need 1 <= k <= d");
}

}  // namespace

RecoveryResult vanilla_pca(const Instance& inst, const EigenOptions& eigen) {
  const auto start = Clock::now();
  require_enumerable(inst, "vanilla_pca");
  RecoveryResult out;
  out.algorithm = "pca";
  out.estimate = top_eigenvector(form_matrix(inst), eigen).vector;
  out.eigenproblems = 1;
  attach_correlation(out, inst);
  out.wall_time = seconds_since(start);
  return out;
}

RecoveryResult diagonal_thresholding(const Instance& inst, Index k, const EigenOptions& eigen) {
  const auto start = Clock::now();
  require_wishart(inst, "diagonal_thresholding");
  check_k(inst, k, "diagonal_thresholding");
  const SymMatrix g = gram(inst.data);
  const Eigen::VectorXd diag = g.dense().diagonal();
  std::vector<Index> order(static_cast<std::size_t>(diag.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return diag(a) > diag(b); });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());

  RecoveryResult out;
  out.algorithm = "diag";
  out.estimate = top_on_support(g, order, eigen);
  out.eigenproblems = 1;
  attach_correlation(out, inst);
  out.wall_time = seconds_since(start);
  return out;
}

double default_threshold_level(Index d, Index k, Index n, double c) {
  const double dk = static_cast<double>(d) / (static_cast<double>(k) * static_cast<double>(k));
  return c * std::sqrt(std::log(2.0 + dk) / static_cast<double>(n));
}

double soft_threshold(double x, double tau) {
  return x > tau ? x - tau : (x < -tau ? x + tau : 0.0);
}

RecoveryResult covariance_thresholding(const Instance& inst, Index k, double tau,
                                       const EigenOptions& eigen) {
  const auto start = Clock::now();
  require_wishart(inst, "covariance_thresholding");
  check_k(inst, k, "covariance_thresholding");
  if (!(tau >= 0.0)) throw std::invalid_argument("covariance_thresholding: tau must be >= 0");
  // The "- Id" centring only shifts the spectrum and is skipped, so tau = 0
  // reproduces vanilla_pca exactly.
  Eigen::MatrixXd m = form_matrix(inst).dense();
  const Index d = m.rows();
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      if (i != j) m(i, j) = soft_threshold(m(i, j), tau);
    }
  }
  const Eigen::VectorXd top = top_eigenvector(SymMatrix(std::move(m)), eigen).vector;
  const Eigen::VectorXd x = truncate_top(top, k);

  RecoveryResult out;
  out.algorithm = "covthresh";
  out.estimate = x / x.norm();
  out.eigenproblems = 1;
  attach_correlation(out, inst);
  out.wall_time = seconds_since(start);
  return out;
}

RecoveryResult limited_brute_force(const Instance& inst, Index k, Index t, int threads,
                                   const EigenOptions& eigen) {
  const auto start = Clock::now();
  require_enumerable(inst, "limited_brute_force");
  check_k(inst, k, "limited_brute_force");
  if (t < 1 || t > k) throw std::invalid_argument("limited_brute_force: need 1 <= t <= k");
  const SymMatrix gs = form_matrix(inst);
  const Eigen::MatrixXd& g = gs.dense();
  const Index d = g.rows();
  const PatternEnumerator patterns(d, t);

  struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::uint64_t rank = std::numeric_limits<std::uint64_t>::max();
  };
  constexpr std::uint64_t kChunk = 4096;
  std::vector<Best> chunks(static_cast<std::size_t>(chunk_count(patterns.size(), kChunk)));
  parallel_chunks(patterns.size(), kChunk, resolve_threads(threads),
                  [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
                    Best& best = chunks[static_cast<std::size_t>(c)];
                    patterns.for_range(begin, end, [&](std::uint64_t rank, const SignPattern& s) {
                      double q = 0.0;
                      for (std::size_t a = 0; a < s.support.size(); ++a) {
                        for (std::size_t b = 0; b < s.support.size(); ++b) {
                          q += s.signs[a] * s.signs[b] * g(s.support[a], s.support[b]);
                        }
                      }
                      if (q > best.value) {
                        best.value = q;
                        best.rank = rank;
                      }
                    });
                  });
  Best best;
  for (const Best& c : chunks) {
    if (c.value > best.value) best = c;
  }
  const SignPattern seed = patterns.at(best.rank);

  Eigen::VectorXd x = seed.dense(d);
  std::vector<std::uint8_t> in_support(static_cast<std::size_t>(d), 0);
  for (Index i : seed.support) in_support[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> support = seed.support;
  Eigen::VectorXd gx = g * x;
  while (static_cast<Index>(support.size()) < k) {
    Index pick = -1;
    double gain = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < d; ++j) {
      if (in_support[static_cast<std::size_t>(j)] != 0) continue;
      const double candidate = g(j, j) + 2.0 * std::abs(gx(j));
      if (candidate > gain) {
        gain = candidate;
        pick = j;
      }
    }
    const double sign = gx(pick) < 0.0 ? -1.0 : 1.0;
    x(pick) = sign;
    gx += sign * g.col(pick);
    in_support[static_cast<std::size_t>(pick)] = 1;
    support.push_back(pick);
  }
  std::sort(support.begin(), support.end());

  RecoveryResult out;
  out.algorithm = "lbf";
  out.estimate = top_on_support(gs, support, eigen);
  out.patterns_enumerated = patterns.size();
  out.candidates_evaluated = patterns.size();
  out.eigenproblems = 1;
  out.score = best.value;
  attach_correlation(out, inst);
  out.wall_time = seconds_since(start);
  return out;
}

}  // namespace sparse_spike
