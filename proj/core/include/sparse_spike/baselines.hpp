#pragma once

#include <Eigen/Dense>

#include "sparse_spike/linalg.hpp"
#include "sparse_spike/model.hpp"
#include "sparse_spike/result.hpp"

namespace sparse_spike {

/// Top eigenvector of (1/n) Y^T Y (wishart-type) or of (Y + Y^T) / 2.
RecoveryResult vanilla_pca(const Instance& inst, const EigenOptions& eigen = {});

/// k largest diagonal entries of Y^T Y (ties to the lower index), top
/// eigenvector of that principal submatrix.
RecoveryResult diagonal_thresholding(const Instance& inst, Index k, const EigenOptions& eigen = {});

/// c sqrt(ln(2 + d / k^2) / n).
double default_threshold_level(Index d, Index k, Index n, double c = 4.0);

/// Soft threshold: sign(x) max(|x| - tau, 0).
double soft_threshold(double x, double tau);

/// Reconstructed from the usual formulation: soft-threshold the off-diagonal
/// entries of (1/n) Y^T Y - Id at tau, take the top eigenvector, keep its k
/// largest entries and normalise. At tau = 0 the estimate is bit-identical to
/// vanilla_pca followed by truncation.
RecoveryResult covariance_thresholding(const Instance& inst, Index k, double tau,
                                       const EigenOptions& eigen = {});

/// s* = argmax over canonical S_t of s^T G s (G = (1/n) Y^T Y or the symmetric
/// part of Y), grown greedily to k coordinates; top eigenvector of the grown
/// principal submatrix. The growth rule is a stand-in: add the coordinate j
/// with the largest gain G_jj + 2 |(G x)_j|, signed by (G x)_j, lower index on
/// ties.
RecoveryResult limited_brute_force(const Instance& inst, Index k, Index t, int threads = 0,
                                   const EigenOptions& eigen = {});

}  // namespace sparse_spike
