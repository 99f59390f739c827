#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_spike/random.hpp"

namespace sparse_spike {

using Index = Eigen::Index;

enum class ModelKind { kWishart, kWigner, kPlantedVector, kSymmetric };

std::string_view to_string(ModelKind model);
ModelKind parse_model_kind(std::string_view name);

/// Wishart-type models observe an n x d sample matrix and are analysed
/// through the Gram matrix Y^T Y.
inline bool is_wishart_type(ModelKind model) {
  return model == ModelKind::kWishart || model == ModelKind::kPlantedVector;
}

/// The planted k-sparse unit direction.
struct SparseSpike {
  Eigen::VectorXd values;
  std::vector<Index> support;  // sorted
  bool flat = false;           // every nonzero is +-1/sqrt(k)

  Index dim() const { return values.size(); }
  Index sparsity() const { return static_cast<Index>(support.size()); }

  /// Throws std::invalid_argument if any SparseSpike invariant fails.
  void validate() const;

  /// Builds a spike from a dense vector, deriving the support.
  static SparseSpike from_values(Eigen::VectorXd values, bool flat);
};

enum class NoiseFamily { kGaussian, kCauchy, kScaledRademacher, kCustomSymmetric };

std::string_view to_string(NoiseFamily family);
NoiseFamily parse_noise_family(std::string_view name);

/// Entry distribution for the heavy-tailed symmetric model.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::kGaussian;
  double scale = 1.0;
  /// Sampler for kCustomSymmetric; unused otherwise.
  std::function<double(Rng&)> custom;

  double sample(Rng& rng) const;

  /// Pr[|N| <= 1] in closed form; NaN for custom samplers.
  double prob_within_unit() const;

  static NoiseSpec gaussian(double scale = 1.0) { return {NoiseFamily::kGaussian, scale, {}}; }
  static NoiseSpec cauchy(double scale = 1.0) { return {NoiseFamily::kCauchy, scale, {}}; }
  static NoiseSpec rademacher(double scale = 1.0) {
    return {NoiseFamily::kScaledRademacher, scale, {}};
  }
  static NoiseSpec custom_symmetric(std::function<double(Rng&)> sampler) {
    return {NoiseFamily::kCustomSymmetric, 1.0, std::move(sampler)};
  }
};

/// Empirical symmetry screen used to reject custom noise: sign balance and
/// the mean of tanh(x) over a fixed-seed sample must both sit within 5 sigma
/// of zero.
bool looks_symmetric(const NoiseSpec& noise, int samples = 20000);

enum class AdversaryKind { kProjection, kSignalErasing, kColumnSpike };

std::string_view to_string(AdversaryKind kind);
AdversaryKind parse_adversary_kind(std::string_view name);

struct Perturbation {
  AdversaryKind kind = AdversaryKind::kProjection;
  double strength = 0.0;
  Seed seed = 0;
};

struct Instance {
  ModelKind model = ModelKind::kWishart;
  Eigen::MatrixXd data;  // n x d (wishart-type) or d x d
  SparseSpike spike;
  /// beta for wishart-type models, lambda for wigner/symmetric.
  double signal = 0.0;
  std::optional<Perturbation> perturbation;
  std::optional<NoiseSpec> noise;  // symmetric model only
  Seed seed = 0;

  Index dim() const { return data.cols(); }
  Index samples() const { return data.rows(); }

  void validate() const;
};

// ---------------------------------------------------------------------------
// Component regeneration. Each generator below is assembled from these, and
// tests call them directly to reconstruct the signal/noise decomposition.
// All matrices are drawn in row-major order: entry (i, j) is the
// (i * cols + j)-th variate of its component stream.

struct WishartComponents {
  Eigen::VectorXd u;      // n
  Eigen::MatrixXd noise;  // n x d
};
WishartComponents wishart_components(Index n, Index d, Seed seed);

Eigen::MatrixXd wigner_noise(Index d, Seed seed);

Eigen::MatrixXd symmetric_noise(Index d, const NoiseSpec& noise, Seed seed);

struct PlantedVectorComponents {
  Eigen::MatrixXd gaussian_rows;  // n x d, rows g_1 .. g_n
  Eigen::MatrixXd rotation;       // n x n orthogonal R
  double u_norm = 0.0;            // ||u||, u = ||u|| * R e_n

  Eigen::VectorXd u() const;
  /// ||g_n||^2 / ||u||^2.
  double beta() const;
  /// W = R G: Y = sqrt(beta) u v^T + (Id - u u^T / ||u||^2) W.
  Eigen::MatrixXd equivalent_noise() const;
};
PlantedVectorComponents planted_vector_components(Index n, Index d, Seed seed);

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// triangular factor's diagonal made positive.
Eigen::MatrixXd haar_orthogonal(Index n, Rng& rng);

// ---------------------------------------------------------------------------
// Generators

SparseSpike gen_sparse_spike(Index d, Index k, bool flat, Seed seed);

/// Y = sqrt(beta) u v^T + W.
Instance gen_wishart(Index n, const SparseSpike& spike, double beta, Seed seed);

/// Y = lambda v v^T + W with W ~ N(0,1)^{d x d} (not symmetrized).
Instance gen_wigner(const SparseSpike& spike, double lambda, Seed seed);

/// Y = R B, B = [g_1^T; ...; g_{n-1}^T; ||g_n|| v^T]. Requires d > n >= 2.
Instance gen_planted_vector(Index n, const SparseSpike& spike, Seed seed);

/// Y = lambda v v^T + N with iid entries from `noise`.
Instance gen_symmetric(const SparseSpike& spike, double lambda, const NoiseSpec& noise,
                       Seed seed);

/// The perturbation matrix E that make_adversary would add.
Eigen::MatrixXd adversary_matrix(const Instance& inst, AdversaryKind kind, double strength,
                                 Seed seed);

/// Returns inst with data Y + E.
///   wishart: projection   E = -(u u^T / ||u||^2) W, rescaled to ||E||_{1->2} = strength
///            erasing      E = -c sqrt(beta) u v^T,   c chosen for ||E||_{1->2} = strength
///            column-spike E = strength x e_j^T,      x random unit, j random column
///   wigner:  erasing      E = -c lambda v v^T,       ||E||_{1->2} = strength
///            column-spike entrywise bias -strength sign(v_i) sign(v_j) on supp x supp,
///                         so ||E||_inf = strength
///            projection   rejected (no sample factor u)
Instance make_adversary(const Instance& inst, AdversaryKind kind, double strength, Seed seed);

/// Maximum Euclidean column norm.
double norm_1_to_2(const Eigen::MatrixXd& m);

}  // namespace sparse_spike
