#include "sparse_spike/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sparse_spike {

namespace {

Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

Eigen::VectorXd gaussian_vector(Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

std::string_view to_string(ModelKind model) {
  switch (model) {
    case ModelKind::kWishart: return "wishart";
    case ModelKind::kWigner: return "wigner";
    case ModelKind::kPlantedVector: return "planted-vector";
    case ModelKind::kSymmetric: return "symmetric";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "wishart") return ModelKind::kWishart;
  if (name == "wigner") return ModelKind::kWigner;
  if (name == "planted-vector") return ModelKind::kPlantedVector;
  if (name == "symmetric") return ModelKind::kSymmetric;
  throw std::invalid_argument("unknown model '" + std::string(name) + "'");
}

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::kGaussian: return "gaussian";
    case NoiseFamily::kCauchy: return "cauchy";
    case NoiseFamily::kScaledRademacher: return "scaled-rademacher";
    case NoiseFamily::kCustomSymmetric: return "custom-symmetric";
  }
  return "unknown";
}

NoiseFamily parse_noise_family(std::string_view name) {
  if (name == "gaussian") return NoiseFamily::kGaussian;
  if (name == "cauchy") return NoiseFamily::kCauchy;
  if (name == "scaled-rademacher") return NoiseFamily::kScaledRademacher;
  if (name == "custom-symmetric") return NoiseFamily::kCustomSymmetric;
  throw std::invalid_argument("unknown noise family '" + std::string(name) + "'");
}

std::string_view to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::kProjection: return "projection";
    case AdversaryKind::kSignalErasing: return "signal-erasing";
    case AdversaryKind::kColumnSpike: return "column-spike";
  }
  return "unknown";
}

AdversaryKind parse_adversary_kind(std::string_view name) {
  if (name == "projection") return AdversaryKind::kProjection;
  if (name == "signal-erasing") return AdversaryKind::kSignalErasing;
  if (name == "column-spike") return AdversaryKind::kColumnSpike;
  throw std::invalid_argument("unknown adversary kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

void SparseSpike::validate() const {
  const Index k = sparsity();
  require(k >= 1 && k <= dim(), "SparseSpike: support size must be in [1, d]");
  require(std::is_sorted(support.begin(), support.end()) &&
              std::adjacent_find(support.begin(), support.end()) == support.end(),
          "SparseSpike: support must be strictly increasing");
  Index nonzeros = 0;
  for (Index i = 0; i < dim(); ++i) {
    if (values(i) != 0.0) ++nonzeros;
  }
  require(nonzeros == k, "SparseSpike: nonzero count differs from support size");
  for (Index i : support) {
    require(i >= 0 && i < dim() && values(i) != 0.0, "SparseSpike: support entry is zero");
  }
  require(std::abs(values.norm() - 1.0) <= 1e-12, "SparseSpike: norm is not 1");
  if (flat) {
    const double magnitude = 1.0 / std::sqrt(static_cast<double>(k));
    for (Index i : support) {
      require(std::abs(std::abs(values(i)) - magnitude) <= 1e-12,
              "SparseSpike: flat spike entry is not +-1/sqrt(k)");
    }
  }
}

SparseSpike SparseSpike::from_values(Eigen::VectorXd values, bool flat) {
  SparseSpike spike;
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) != 0.0) spike.support.push_back(i);
  }
  spike.values = std::move(values);
  spike.flat = flat;
  spike.validate();
  return spike;
}

double NoiseSpec::sample(Rng& rng) const {
  switch (family) {
    case NoiseFamily::kGaussian: return scale * rng.normal();
    case NoiseFamily::kCauchy:
      return scale * std::tan(std::numbers::pi * (rng.uniform_open() - 0.5));
    case NoiseFamily::kScaledRademacher: return scale * rng.sign();
    case NoiseFamily::kCustomSymmetric:
      if (!custom) throw std::invalid_argument("custom-symmetric noise has no sampler");
      return custom(rng);
  }
  return 0.0;
}

double NoiseSpec::prob_within_unit() const {
  switch (family) {
    case NoiseFamily::kGaussian: return std::erf(1.0 / (scale * std::numbers::sqrt2));
    case NoiseFamily::kCauchy: return 2.0 / std::numbers::pi * std::atan(1.0 / scale);
    case NoiseFamily::kScaledRademacher: return scale <= 1.0 ? 1.0 : 0.0;
    case NoiseFamily::kCustomSymmetric: return std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool looks_symmetric(const NoiseSpec& noise, int samples) {
  Rng rng(sub_seed(0x5EED5EEDULL, "noise.symmetry-check"));
  long positive = 0;
  long negative = 0;
  double tanh_sum = 0.0;
  double tanh_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = noise.sample(rng);
    if (!std::isfinite(x)) return false;
    if (x > 0) ++positive;
    if (x < 0) ++negative;
    const double t = std::tanh(x);
    tanh_sum += t;
    tanh_sq += t * t;
  }
  const double nonzero = static_cast<double>(positive + negative);
  if (nonzero > 0 && std::abs(positive - negative) > 5.0 * std::sqrt(nonzero)) return false;
  const double mean = tanh_sum / samples;
  const double sd = std::sqrt(std::max(tanh_sq / samples - mean * mean, 0.0) / samples);
  return std::abs(mean) <= 5.0 * sd + 1e-12;
}

void Instance::validate() const {
  spike.validate();
  require(std::isfinite(signal) && signal >= 0.0, "Instance: signal must be finite and >= 0");
  require(data.cols() == spike.dim(), "Instance: data columns differ from spike dimension");
  if (!is_wishart_type(model)) {
    require(data.rows() == data.cols(), "Instance: wigner/symmetric data must be square");
  }
  require(data.allFinite(), "Instance: data must be finite");
}

// ---------------------------------------------------------------------------

WishartComponents wishart_components(Index n, Index d, Seed seed) {
  Rng u_rng(sub_seed(seed, "wishart.u"));
  Rng w_rng(sub_seed(seed, "wishart.W"));
  return {gaussian_vector(n, u_rng), gaussian_matrix(n, d, w_rng)};
}

Eigen::MatrixXd wigner_noise(Index d, Seed seed) {
  Rng rng(sub_seed(seed, "wigner.W"));
  return gaussian_matrix(d, d, rng);
}

Eigen::MatrixXd symmetric_noise(Index d, const NoiseSpec& noise, Seed seed) {
  Rng rng(sub_seed(seed, "symmetric.N"));
  Eigen::MatrixXd m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = noise.sample(rng);
  }
  return m;
}

Eigen::MatrixXd haar_orthogonal(Index n, Rng& rng) {
  const Eigen::MatrixXd g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  for (Index j = 0; j < n; ++j) {
    if (packed(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

Eigen::VectorXd PlantedVectorComponents::u() const {
  return u_norm * rotation.col(rotation.cols() - 1);
}

double PlantedVectorComponents::beta() const {
  const double g = gaussian_rows.row(gaussian_rows.rows() - 1).squaredNorm();
  return g / (u_norm * u_norm);
}

Eigen::MatrixXd PlantedVectorComponents::equivalent_noise() const {
  return rotation * gaussian_rows;
}

PlantedVectorComponents planted_vector_components(Index n, Index d, Seed seed) {
  PlantedVectorComponents c;
  Rng g_rng(sub_seed(seed, "planted.g"));
  Rng r_rng(sub_seed(seed, "planted.rotation"));
  Rng u_rng(sub_seed(seed, "planted.u_norm"));
  c.gaussian_rows = gaussian_matrix(n, d, g_rng);
  c.rotation = haar_orthogonal(n, r_rng);
  c.u_norm = gaussian_vector(n, u_rng).norm();
  return c;
}

// ---------------------------------------------------------------------------

SparseSpike gen_sparse_spike(Index d, Index k, bool flat, Seed seed) {
  if (k < 1 || k > d) throw std::invalid_argument("gen_sparse_spike: need 1 <= k <= d");

  // Partial Fisher-Yates over [0, d).
  Rng support_rng(sub_seed(seed, "spike.support"));
  std::vector<Index> pool(static_cast<std::size_t>(d));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(support_rng.below(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> support(pool.begin(), pool.begin() + k);
  std::sort(support.begin(), support.end());

  Rng value_rng(sub_seed(seed, "spike.values"));
  Eigen::VectorXd values = Eigen::VectorXd::Zero(d);
  if (flat) {
    const double magnitude = 1.0 / std::sqrt(static_cast<double>(k));
    for (Index i : support) values(i) = magnitude * value_rng.sign();
  } else {
    for (Index i : support) {
      double x = 0.0;
      while (x == 0.0) x = value_rng.normal();
      values(i) = x;
    }
    values /= values.norm();
  }

  SparseSpike spike;
  spike.values = std::move(values);
  spike.support = std::move(support);
  spike.flat = flat;
  spike.validate();
  return spike;
}

Instance gen_wishart(Index n, const SparseSpike& spike, double beta, Seed seed) {
  require(n >= 1, "gen_wishart: n must be >= 1");
  require(beta >= 0.0, "gen_wishart: beta must be >= 0");
  auto [u, w] = wishart_components(n, spike.dim(), seed);
  Instance inst;
  inst.model = ModelKind::kWishart;
  inst.data = std::move(w);
  if (beta > 0.0) inst.data.noalias() += std::sqrt(beta) * u * spike.values.transpose();
  inst.spike = spike;
  inst.signal = beta;
  inst.seed = seed;
  return inst;
}

Instance gen_wigner(const SparseSpike& spike, double lambda, Seed seed) {
  require(lambda >= 0.0, "gen_wigner: lambda must be >= 0");
  Instance inst;
  inst.model = ModelKind::kWigner;
  inst.data = wigner_noise(spike.dim(), seed);
  if (lambda > 0.0) inst.data.noalias() += lambda * spike.values * spike.values.transpose();
  inst.spike = spike;
  inst.signal = lambda;
  inst.seed = seed;
  return inst;
}

Instance gen_planted_vector(Index n, const SparseSpike& spike, Seed seed) {
  const Index d = spike.dim();
  if (!(n >= 2 && d > n)) throw std::invalid_argument("gen_planted_vector: need d > n >= 2");
  PlantedVectorComponents c = planted_vector_components(n, d, seed);
  Eigen::MatrixXd b = c.gaussian_rows;
  b.row(n - 1) = c.gaussian_rows.row(n - 1).norm() * spike.values.transpose();
  Instance inst;
  inst.model = ModelKind::kPlantedVector;
  inst.data = c.rotation * b;
  inst.spike = spike;
  inst.signal = c.beta();
  inst.seed = seed;
  return inst;
}

Instance gen_symmetric(const SparseSpike& spike, double lambda, const NoiseSpec& noise,
                       Seed seed) {
  require(lambda >= 0.0, "gen_symmetric: lambda must be >= 0");
  require(noise.scale > 0.0, "gen_symmetric: noise scale must be > 0");
  if (noise.family == NoiseFamily::kCustomSymmetric && !looks_symmetric(noise)) {
    throw std::invalid_argument("gen_symmetric: custom noise is not symmetric about zero");
  }
  Instance inst;
  inst.model = ModelKind::kSymmetric;
  inst.data = symmetric_noise(spike.dim(), noise, seed);
  if (lambda > 0.0) inst.data.noalias() += lambda * spike.values * spike.values.transpose();
  inst.spike = spike;
  inst.signal = lambda;
  inst.noise = noise;
  inst.seed = seed;
  return inst;
}

double norm_1_to_2(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.colwise().norm().maxCoeff();
}

Eigen::MatrixXd adversary_matrix(const Instance& inst, AdversaryKind kind, double strength,
                                 Seed seed) {
  require(std::isfinite(strength) && strength >= 0.0, "make_adversary: strength must be >= 0");
  if (inst.model == ModelKind::kPlantedVector || inst.model == ModelKind::kSymmetric) {
    throw std::invalid_argument("make_adversary: only wishart and wigner instances accept "
                                "perturbations");
  }
  if (inst.perturbation) throw std::invalid_argument("make_adversary: instance already perturbed");

  const Index rows = inst.data.rows();
  const Index d = inst.dim();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(rows, d);
  if (strength == 0.0) return e;

  const SparseSpike& spike = inst.spike;
  const double v_inf = spike.values.cwiseAbs().maxCoeff();

  if (inst.model == ModelKind::kWishart) {
    switch (kind) {
      case AdversaryKind::kProjection: {
        auto [u, w] = wishart_components(rows, d, inst.seed);
        e.noalias() = -(u / u.squaredNorm()) * (u.transpose() * w);
        const double norm = norm_1_to_2(e);
        require(norm > 0.0, "make_adversary: projection of the noise vanished");
        e *= strength / norm;
        break;
      }
      case AdversaryKind::kSignalErasing: {
        require(inst.signal > 0.0, "make_adversary: signal-erasing needs beta > 0");
        const Eigen::VectorXd u = wishart_components(rows, d, inst.seed).u;
        const double c = strength / (std::sqrt(inst.signal) * u.norm() * v_inf);
        e.noalias() = -c * std::sqrt(inst.signal) * u * spike.values.transpose();
        break;
      }
      case AdversaryKind::kColumnSpike: {
        Rng rng(sub_seed(seed, "adversary.column-spike"));
        Eigen::VectorXd x = gaussian_vector(rows, rng);
        x /= x.norm();
        const auto column = static_cast<Index>(rng.below(static_cast<std::uint64_t>(d)));
        e.col(column) = strength * x;
        break;
      }
    }
    return e;
  }

  // Wigner.
  switch (kind) {
    case AdversaryKind::kProjection:
      throw std::invalid_argument("make_adversary: projection kind needs a wishart instance");
    case AdversaryKind::kSignalErasing: {
      require(inst.signal > 0.0, "make_adversary: signal-erasing needs lambda > 0");
      const double c = strength / (inst.signal * v_inf);
      e.noalias() = -c * inst.signal * spike.values * spike.values.transpose();
      break;
    }
    case AdversaryKind::kColumnSpike: {
      for (Index i : spike.support) {
        for (Index j : spike.support) {
          const double sign = (spike.values(i) > 0) == (spike.values(j) > 0) ? 1.0 : -1.0;
          e(i, j) = -strength * sign;
        }
      }
      break;
    }
  }
  return e;
}

Instance make_adversary(const Instance& inst, AdversaryKind kind, double strength, Seed seed) {
  Eigen::MatrixXd e = adversary_matrix(inst, kind, strength, seed);
  Instance out = inst;
  if (strength != 0.0) out.data += e;
  out.perturbation = Perturbation{kind, strength, seed};
  return out;
}

}  // namespace sparse_spike
