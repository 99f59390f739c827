#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "sparse_spike/linalg.hpp"
#include "sparse_spike/model.hpp"
#include "sparse_spike/result.hpp"
#include "sparse_spike/sdp.hpp"

namespace sparse_spike {

/// t-sparse sign vector in canonical form (signs[0] = +1).
struct SignPattern {
  std::vector<Index> support;  // strictly increasing
  std::vector<int> signs;      // +-1

  Index order() const { return static_cast<Index>(support.size()); }
  Eigen::VectorXd dense(Index dim) const;
  /// Throws std::invalid_argument unless the pattern is canonical and in [0, dim).
  void validate(Index dim) const;

  friend bool operator==(const SignPattern&, const SignPattern&) = default;
};

/// Canonical patterns of S_t up to global sign, in a fixed order: supports
/// lexicographic, and for each support the signs of positions 1..t-1 count in
/// binary with position 1 as the most significant bit (0 -> +1, 1 -> -1).
class PatternEnumerator {
 public:
  PatternEnumerator(Index dim, Index order);

  Index dim() const { return dim_; }
  Index order() const { return order_; }
  /// C(d, t) 2^(t-1).
  std::uint64_t size() const { return size_; }

  SignPattern at(std::uint64_t rank) const;

  /// Calls f(rank, pattern) for every rank in [begin, end) in order.
  /// Throws std::out_of_range if end > size().
  template <class F>
  void for_range(std::uint64_t begin, std::uint64_t end, F&& f) const {
    if (end > size_) throw std::out_of_range("PatternEnumerator: range past the last pattern");
    if (begin >= end) return;
    SignPattern p = at(begin);
    for (std::uint64_t rank = begin;;) {
      f(rank, static_cast<const SignPattern&>(p));
      if (++rank == end) break;
      advance(p);
    }
  }

 private:
  void advance(SignPattern& p) const;

  Index dim_;
  Index order_;
  std::uint64_t sign_codes_;
  std::uint64_t size_;
};

/// All canonical patterns; for small instances and tests.
std::vector<SignPattern> enumerate_patterns(Index dim, Index order);

/// G s for the dense +-1 vector of s, summed over the support in increasing
/// order. For Wigner data G is the raw (non-symmetric) Y, so entry i is <Y_i, s>.
Eigen::VectorXd pattern_response(const Eigen::MatrixXd& g, const SignPattern& s);

/// active[i] = (i in supp(s)) or |response_i| >= r t scale.
Selector threshold_selector(const Eigen::VectorXd& response, const SignPattern& s, double r,
                            double scale);

Selector selector(const Eigen::MatrixXd& g, const SignPattern& s, double r, double scale);
Selector selector(const SymMatrix& g, const SignPattern& s, double r, double scale);

/// 1, 1/2, 1/4, ... down to the first value <= 1 / n_or_d.
std::vector<double> r_grid(Index n_or_d);

enum class Mode { kClassical, kRobust };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

struct CandidateOrigin {
  std::uint64_t pattern_rank = 0;
  SignPattern pattern;
  double r = 0.0;
  Mode mode = Mode::kClassical;
};

struct Candidate {
  Eigen::VectorXd vector;  // unit, supported on the selector's active set
  CandidateOrigin origin;
  double eigenvalue = 0.0;  // of the masked block (classical) or of X (robust)
};

struct RecoverConfig {
  Index k = 1;
  Index t = 1;
  double delta = 0.1;
  Mode mode = Mode::kClassical;
  int threads = 0;  // resolved through resolve_threads
  EigenOptions eigen;
  SdpOptions sdp;
  /// Replaces r_grid(n or d) when set.
  std::optional<std::vector<double>> r_values;
  /// Refuse runs above this many eigenproblems, or with t > max_order,
  /// unless `force` is set.
  double budget = 1e7;
  Index max_order = 4;
  bool force = false;
  /// Classical mode without truncation (k' = d): evaluate only the smallest r
  /// of each pattern. Its active set contains those of every larger r, so by
  /// eigenvalue interlacing it has the largest score; output is unchanged up
  /// to exact score ties.
  bool prune_dominated = true;
};

/// The matrices one recovery run works with.
struct RecoveryProblem {
  Eigen::MatrixXd response;  // G: Y^T Y (wishart-type) or Y (wigner)
  double scale = 1.0;        // n or 1
  SymMatrix eigen_source;    // Y^T Y - n Id, or (Y + Y^T) / 2
  Eigen::MatrixXd quadratic; // list-decoding form: Y^T Y, or (Y + Y^T) / 2
  Index grid_size = 0;       // n for wishart-type, d for wigner

  static RecoveryProblem from_instance(const Instance& inst);
};

/// Eigenproblems a run would solve: C(d, t) 2^(t-1) |grid|.
double estimated_eigenproblems(Index dim, Index order, std::size_t grid);

/// Throws ConfigError if the run exceeds the budget guard and force is off.
void check_budget(Index dim, const RecoverConfig& config, std::size_t grid);

/// One candidate per (pattern, r) with an active set of at least two
/// coordinates. Identical active sets at adjacent r reuse the previous
/// solve. Candidates are ordered by (pattern rank, r index).
std::vector<Candidate> build_candidates(const Instance& inst, const RecoverConfig& config);

/// k' = min(d, ceil(100 k / delta^2)).
Index decode_keep(Index dim, Index k, double delta);

/// Truncates every candidate to its top-k' entries and returns the
/// normalised truncation with the largest x^T M x (first one on ties).
Eigen::VectorXd list_decode(const std::vector<Candidate>& list, const Eigen::MatrixXd& m,
                            Index k, double delta);

/// Score used by list_decode for one candidate.
double decode_score(const Eigen::VectorXd& candidate, const Eigen::MatrixXd& m, Index keep);

/// Enumeration, candidate construction and list decoding with streaming
/// selection: no candidate list is materialised.
RecoveryResult recover(const Instance& inst, const RecoverConfig& config);

}  // namespace sparse_spike
