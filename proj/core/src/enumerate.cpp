#include "sparse_spike/enumerate.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sparse_spike/errors.hpp"
#include "sparse_spike/parallel.hpp"

namespace sparse_spike {

namespace {

__extension__ typedef unsigned __int128 u128;

// Exact C(n, k), or max() if it does not fit.
std::uint64_t binomial_u64(Index n, Index k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  u128 r = 1;
  for (Index i = 0; i < k; ++i) {
    r = r * static_cast<u128>(n - i) / static_cast<u128>(i + 1);
    if (r > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(r);
}

std::string describe(const SignPattern& s) {
  std::ostringstream out;
  out << '{';
  for (std::size_t j = 0; j < s.support.size(); ++j) {
    if (j != 0) out << ',';
    out << (s.signs[j] > 0 ? '+' : '-') << s.support[j];
  }
  out << '}';
  return out.str();
}

void check_recover_config(const Instance& inst, const RecoverConfig& c) {
  if (inst.model == ModelKind::kSymmetric) {
    throw std::invalid_argument("recover: symmetric instances are handled by recover_symmetric");
  }
  const Index d = inst.dim();
  if (!(c.t >= 1 && c.t <= c.k && c.k <= d)) {
    throw std::invalid_argument("recover: need 1 <= t <= k <= d");
  }
  if (!(c.delta > 0.0 && c.delta <= 0.1)) {
    throw std::invalid_argument("recover: delta must lie in (0, 0.1]");
  }
}

struct SolveStats {
  std::uint64_t candidates = 0;
  std::uint64_t eigenproblems = 0;
  std::uint64_t sdp_not_converged = 0;

  void add(const SolveStats& o) {
    candidates += o.candidates;
    eigenproblems += o.eigenproblems;
    sdp_not_converged += o.sdp_not_converged;
  }
};

// Candidates of one pattern across the r grid.
class PatternSolver {
 public:
  PatternSolver(const RecoveryProblem& problem, const RecoverConfig& config,
                const std::vector<double>& grid, const Eigen::VectorXd& warm, bool prune)
      : problem_(problem), config_(config), grid_(grid), warm_(warm), prune_(prune) {}

  // emit(candidate index, candidate, duplicate of the previous emission)
  template <class Emit>
  void run(std::uint64_t rank, const SignPattern& s, SolveStats& stats, Emit&& emit) const {
    const Index d = problem_.eigen_source.dim();
    const Eigen::VectorXd response = pattern_response(problem_.response, s);
    const std::size_t first = prune_ ? grid_.size() - 1 : 0;
    Selector previous;
    Candidate current;
    bool have_previous = false;
    for (std::size_t ri = first; ri < grid_.size(); ++ri) {
      Selector z = threshold_selector(response, s, grid_[ri], problem_.scale);
      if (z.count() < 2) continue;
      const std::uint64_t index = rank * grid_.size() + ri;
      ++stats.candidates;
      if (have_previous && z == previous) {
        current.origin.r = grid_[ri];
        emit(index, current, true);
        continue;
      }
      current.origin = {rank, s, grid_[ri], config_.mode};
      try {
        solve(z, d, current, stats);
      } catch (const ConvergenceError& e) {
        std::ostringstream msg;
        msg << e.what() << " [pattern " << rank << ' ' << describe(s) << ", r=" << grid_[ri]
            << ']';
        throw ConvergenceError(msg.str(), e.residual(), e.iterations());
      }
      emit(index, current, false);
      previous = std::move(z);
      have_previous = true;
    }
  }

 private:
  void solve(const Selector& z, Index d, Candidate& out, SolveStats& stats) const {
    const MaskedMatrix block = masked(problem_.eigen_source, z);
    ++stats.eigenproblems;
    if (config_.mode == Mode::kClassical) {
      EigenOptions options = config_.eigen;
      if (warm_.size() == d) {
        Eigen::VectorXd start(static_cast<Index>(block.index_map.size()));
        for (std::size_t a = 0; a < block.index_map.size(); ++a) {
          start(static_cast<Index>(a)) = warm_(block.index_map[a]);
        }
        if (start.norm() > 1e-8) options.start = std::move(start);
      }
      const EigenPair top = top_eigenvector(block.block, options);
      out.vector = block.pad(top.vector, d);
      out.eigenvalue = top.value;
    } else {
      SdpOptions options = config_.sdp;
      options.certify_psd = false;  // the candidate only needs the top eigenvector
      const PsdIterate x = solve_basic_sdp(block.block, static_cast<double>(config_.k), options);
      if (!x.converged) ++stats.sdp_not_converged;
      const Eigen::VectorXd top = top_of_solution(x);
      out.vector = block.pad(top, d);
      out.eigenvalue = top.dot(x.matrix * top);
    }
  }

  const RecoveryProblem& problem_;
  const RecoverConfig& config_;
  const std::vector<double>& grid_;
  const Eigen::VectorXd& warm_;
  bool prune_;
};

std::vector<double> grid_for(const RecoveryProblem& problem, const RecoverConfig& config) {
  if (!config.r_values) return r_grid(problem.grid_size);
  const std::vector<double>& g = *config.r_values;
  if (g.empty()) throw std::invalid_argument("recover: r_values must be nonempty");
  for (double r : g) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("recover: r must be > 0");
  }
  return g;
}

}  // namespace

Eigen::VectorXd SignPattern::dense(Index dim) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (std::size_t j = 0; j < support.size(); ++j) out(support[j]) = signs[j];
  return out;
}

void SignPattern::validate(Index dim) const {
  if (support.empty() || support.size() != signs.size()) {
    throw std::invalid_argument("SignPattern: support and signs must be nonempty and aligned");
  }
  for (std::size_t j = 0; j < support.size(); ++j) {
    if (support[j] < 0 || support[j] >= dim) throw std::invalid_argument("SignPattern: index out of range");
    if (j > 0 && support[j] <= support[j - 1]) {
      throw std::invalid_argument("SignPattern: support must be strictly increasing");
    }
    if (signs[j] != 1 && signs[j] != -1) throw std::invalid_argument("SignPattern: signs must be +-1");
  }
  if (signs[0] != 1) throw std::invalid_argument("SignPattern: canonical form has signs[0] = +1");
}

PatternEnumerator::PatternEnumerator(Index dim, Index order) : dim_(dim), order_(order) {
  if (order < 1 || order > dim) throw std::invalid_argument("PatternEnumerator: need 1 <= t <= d");
  if (order > 63) throw std::invalid_argument("PatternEnumerator: t too large");
  sign_codes_ = std::uint64_t{1} << (order - 1);
  const std::uint64_t supports = binomial_u64(dim, order);
  if (supports > (std::uint64_t{1} << 62) / sign_codes_) {
    throw std::invalid_argument("PatternEnumerator: pattern count overflows 64 bits");
  }
  size_ = supports * sign_codes_;
}

SignPattern PatternEnumerator::at(std::uint64_t rank) const {
  if (rank >= size_) throw std::out_of_range("PatternEnumerator: rank out of range");
  std::uint64_t support_rank = rank / sign_codes_;
  const std::uint64_t code = rank % sign_codes_;
  SignPattern p;
  p.support.resize(static_cast<std::size_t>(order_));
  p.signs.resize(static_cast<std::size_t>(order_));
  Index x = 0;
  for (Index i = 0; i < order_; ++i) {
    for (;; ++x) {
      const std::uint64_t with_x = binomial_u64(dim_ - 1 - x, order_ - 1 - i);
      if (support_rank < with_x) break;
      support_rank -= with_x;
    }
    p.support[static_cast<std::size_t>(i)] = x++;
  }
  p.signs[0] = 1;
  for (Index j = 1; j < order_; ++j) {
    const bool negative = ((code >> (order_ - 1 - j)) & 1U) != 0;
    p.signs[static_cast<std::size_t>(j)] = negative ? -1 : 1;
  }
  return p;
}

void PatternEnumerator::advance(SignPattern& p) const {
  auto& signs = p.signs;
  for (std::size_t j = signs.size() - 1; j >= 1; --j) {
    if (signs[j] == 1) {
      signs[j] = -1;
      return;
    }
    signs[j] = 1;
  }
  auto& s = p.support;
  const std::size_t t = s.size();
  std::size_t i = t - 1;
  while (s[i] == dim_ - static_cast<Index>(t) + static_cast<Index>(i)) --i;
  ++s[i];
  for (std::size_t j = i + 1; j < t; ++j) s[j] = s[j - 1] + 1;
}

std::vector<SignPattern> enumerate_patterns(Index dim, Index order) {
  const PatternEnumerator e(dim, order);
  if (e.size() > 50'000'000) throw std::invalid_argument("enumerate_patterns: too many patterns");
  std::vector<SignPattern> out;
  out.reserve(static_cast<std::size_t>(e.size()));
  e.for_range(0, e.size(), [&](std::uint64_t, const SignPattern& p) { out.push_back(p); });
  return out;
}

Eigen::VectorXd pattern_response(const Eigen::MatrixXd& g, const SignPattern& s) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(g.rows());
  for (std::size_t j = 0; j < s.support.size(); ++j) {
    if (s.signs[j] > 0) {
      out += g.col(s.support[j]);
    } else {
      out -= g.col(s.support[j]);
    }
  }
  return out;
}

Selector threshold_selector(const Eigen::VectorXd& response, const SignPattern& s, double r,
                            double scale) {
  if (!(r > 0.0) || !(scale > 0.0)) throw std::invalid_argument("selector: r and scale must be > 0");
  const double threshold = r * static_cast<double>(s.order()) * scale;
  std::vector<std::uint8_t> active(static_cast<std::size_t>(response.size()), 0);
  for (Index i = 0; i < response.size(); ++i) {
    active[static_cast<std::size_t>(i)] = std::abs(response(i)) >= threshold ? 1 : 0;
  }
  for (Index i : s.support) active[static_cast<std::size_t>(i)] = 1;
  return Selector(std::move(active));
}

Selector selector(const Eigen::MatrixXd& g, const SignPattern& s, double r, double scale) {
  s.validate(g.cols());
  return threshold_selector(pattern_response(g, s), s, r, scale);
}

Selector selector(const SymMatrix& g, const SignPattern& s, double r, double scale) {
  return selector(g.dense(), s, r, scale);
}

std::vector<double> r_grid(Index n_or_d) {
  if (n_or_d < 1) throw std::invalid_argument("r_grid: need n_or_d >= 1");
  const double floor = 1.0 / static_cast<double>(n_or_d);
  std::vector<double> out{1.0};
  while (out.back() > floor) out.push_back(out.back() / 2.0);
  return out;
}

std::string_view to_string(Mode mode) {
  return mode == Mode::kClassical ? "classical" : "robust";
}

Mode parse_mode(std::string_view name) {
  if (name == "classical") return Mode::kClassical;
  if (name == "robust") return Mode::kRobust;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

RecoveryProblem RecoveryProblem::from_instance(const Instance& inst) {
  RecoveryProblem p;
  const Eigen::MatrixXd& y = inst.data;
  if (is_wishart_type(inst.model)) {
    const Index n = y.rows();
    SymMatrix g = gram(y);
    p.response = g.dense();
    p.scale = static_cast<double>(n);
    Eigen::MatrixXd centered = g.dense();
    centered.diagonal().array() -= static_cast<double>(n);
    p.eigen_source = SymMatrix(std::move(centered));
    p.quadratic = g.dense();
    p.grid_size = n;
  } else if (inst.model == ModelKind::kWigner) {
    if (y.rows() != y.cols()) throw std::invalid_argument("recover: wigner data must be square");
    p.response = y;
    p.scale = 1.0;
    p.eigen_source = SymMatrix::symmetric_part(y);
    p.quadratic = p.eigen_source.dense();
    p.grid_size = y.cols();
  } else {
    throw std::invalid_argument("recover: model not supported by subset enumeration");
  }
  return p;
}

double estimated_eigenproblems(Index dim, Index order, std::size_t grid) {
  return binomial(dim, order) * std::ldexp(1.0, static_cast<int>(order - 1)) *
         static_cast<double>(grid);
}

void check_budget(Index dim, const RecoverConfig& config, std::size_t grid) {
  if (config.force) return;
  if (config.t > config.max_order) {
    throw ConfigError("t = " + std::to_string(config.t) + " exceeds the order guard " +
                      std::to_string(config.max_order) + "; pass --force to run anyway");
  }
  const double estimate = estimated_eigenproblems(dim, config.t, grid);
  if (estimate > config.budget) {
    std::ostringstream msg;
    msg << "estimated " << estimate << " eigenproblems exceeds the budget " << config.budget
        << "; pass --force to run anyway";
    throw ConfigError(msg.str());
  }
}

std::vector<Candidate> build_candidates(const Instance& inst, const RecoverConfig& config) {
  check_recover_config(inst, config);
  const RecoveryProblem problem = RecoveryProblem::from_instance(inst);
  const std::vector<double> grid = grid_for(problem, config);
  check_budget(inst.dim(), config, grid.size());
  const PatternEnumerator patterns(inst.dim(), config.t);
  const Eigen::VectorXd no_warm;
  const PatternSolver solver(problem, config, grid, no_warm, false);
  std::vector<Candidate> out;
  SolveStats stats;
  patterns.for_range(0, patterns.size(), [&](std::uint64_t rank, const SignPattern& s) {
    solver.run(rank, s, stats,
               [&](std::uint64_t, const Candidate& c, bool) { out.push_back(c); });
  });
  return out;
}

Index decode_keep(Index dim, Index k, double delta) {
  const double keep = std::ceil(100.0 * static_cast<double>(k) / (delta * delta));
  return keep >= static_cast<double>(dim) ? dim : static_cast<Index>(keep);
}

double decode_score(const Eigen::VectorXd& candidate, const Eigen::MatrixXd& m, Index keep) {
  const Eigen::VectorXd x = keep >= candidate.size() ? candidate : truncate_top(candidate, keep);
  std::vector<Index> nz;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) nz.push_back(i);
  }
  const Eigen::VectorXd xs = x(nz);
  return xs.dot(m(nz, nz) * xs);
}

Eigen::VectorXd list_decode(const std::vector<Candidate>& list, const Eigen::MatrixXd& m,
                            Index k, double delta) {
  if (list.empty()) throw std::invalid_argument("list_decode: empty candidate list");
  if (!(delta > 0.0 && delta <= 0.1)) throw std::invalid_argument("list_decode: delta must lie in (0, 0.1]");
  const Index d = m.rows();
  const Index keep = decode_keep(d, k, delta);
  double best = -std::numeric_limits<double>::infinity();
  const Candidate* winner = nullptr;
  for (const Candidate& c : list) {
    const double score = decode_score(c.vector, m, keep);
    if (score > best) {
      best = score;
      winner = &c;
    }
  }
  if (winner == nullptr) throw std::runtime_error("list_decode: no candidate has a finite score");
  Eigen::VectorXd x = keep >= d ? winner->vector : truncate_top(winner->vector, keep);
  return x / x.norm();
}

RecoveryResult recover(const Instance& inst, const RecoverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  check_recover_config(inst, config);
  const RecoveryProblem problem = RecoveryProblem::from_instance(inst);
  const std::vector<double> grid = grid_for(problem, config);
  const Index d = inst.dim();
  check_budget(d, config, grid.size());
  const PatternEnumerator patterns(d, config.t);
  const Index keep = decode_keep(d, config.k, config.delta);

  const bool prune = config.prune_dominated && config.mode == Mode::kClassical && keep >= d;
  Eigen::VectorXd warm;
  SolveStats warm_stats;
  if (config.mode == Mode::kClassical) {
    warm = top_eigenvector(problem.eigen_source, config.eigen).vector;
    warm_stats.eigenproblems = 1;
  }
  const PatternSolver solver(problem, config, grid, warm, prune);

  struct ChunkBest {
    double score = -std::numeric_limits<double>::infinity();
    std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
    Eigen::VectorXd x;
    SolveStats stats;
  };
  constexpr std::uint64_t kChunk = 16;
  std::vector<ChunkBest> chunks(static_cast<std::size_t>(chunk_count(patterns.size(), kChunk)));
  parallel_chunks(patterns.size(), kChunk, resolve_threads(config.threads),
                  [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
                    ChunkBest& best = chunks[static_cast<std::size_t>(c)];
                    patterns.for_range(begin, end, [&](std::uint64_t rank, const SignPattern& s) {
                      solver.run(rank, s, best.stats,
                                 [&](std::uint64_t index, const Candidate& cand, bool duplicate) {
                                   if (duplicate) return;
                                   const double score = decode_score(cand.vector, problem.quadratic, keep);
                                   if (score > best.score) {
                                     best.score = score;
                                     best.index = index;
                                     best.x = cand.vector;
                                   }
                                 });
                    });
                  });

  RecoveryResult result;
  result.algorithm = config.mode == Mode::kClassical ? "enumerate" : "enumerate-robust";
  SolveStats total = warm_stats;
  const ChunkBest* winner = nullptr;
  for (const ChunkBest& c : chunks) {
    total.add(c.stats);
    if (c.index != std::numeric_limits<std::uint64_t>::max() &&
        (winner == nullptr || c.score > winner->score)) {
      winner = &c;
    }
  }
  if (winner == nullptr) {
    throw std::runtime_error("recover: no selector had two or more active coordinates");
  }
  Eigen::VectorXd x = keep >= d ? winner->x : truncate_top(winner->x, keep);
  result.estimate = x / x.norm();
  result.score = winner->score;
  result.patterns_enumerated = patterns.size();
  result.candidates_evaluated = total.candidates;
  result.eigenproblems = total.eigenproblems;
  if (total.sdp_not_converged > 0) {
    result.flags.push_back("sdp-not-converged=" + std::to_string(total.sdp_not_converged));
  }
  attach_correlation(result, inst);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace sparse_spike
