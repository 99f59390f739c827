#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparse_spike/model.hpp"

namespace sparse_spike {

/// Output of every recovery algorithm.
struct RecoveryResult {
  std::string algorithm;
  Eigen::VectorXd estimate;             // unit d-vector
  std::optional<double> correlation;    // |<estimate, v>| when the truth is known
  std::uint64_t patterns_enumerated = 0;
  std::uint64_t candidates_evaluated = 0;
  std::uint64_t eigenproblems = 0;      // eigen or convex solves actually run
  double wall_time = 0.0;               // seconds
  /// Quadratic form that selected the estimate (list decoding score or
  /// Frobenius norm of the accepted block), when meaningful.
  std::optional<double> score;
  /// Non-fatal conditions, e.g. "sdp-not-converged=12" or "no-acceptance".
  std::vector<std::string> flags;
};

/// |<a, b>| / (|a| |b|), clamped to [0, 1]; 0 if either vector is zero.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Fills result.correlation from the instance's planted spike.
void attach_correlation(RecoveryResult& result, const Instance& inst);

}  // namespace sparse_spike
