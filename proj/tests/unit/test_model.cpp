#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <filesystem>

#include "sparse_spike/instance_io.hpp"
#include "sparse_spike/model.hpp"
#include "sparse_spike/random.hpp"

using namespace sparse_spike;

namespace {

SparseSpike unit_spike(Index d, Index at) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(at) = 1.0;
  return SparseSpike::from_values(v, false);
}

}  // namespace

TEST(Random, StreamsAreReproducibleAndIndependentPerComponent) {
  Rng a(sub_seed(7, "x"));
  Rng b(sub_seed(7, "x"));
  Rng c(sub_seed(7, "y"));
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
  }
  EXPECT_NE(mix_seed(1, {2, 3}), mix_seed(1, {3, 2}));
}

TEST(Random, VariatesHaveSaneMoments) {
  Rng rng(11);
  double s = 0, s2 = 0, u = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
    u += rng.uniform();
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(u / n, 0.5, 0.01);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7U);
}

TEST(SparseSpikeGen, FlatEntriesAreHalfAtK4) {
  const SparseSpike s = gen_sparse_spike(4, 4, true, 3);
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(std::abs(s.values(i)), 0.5);
  EXPECT_NEAR(s.values.norm(), 1.0, 1e-15);
}

TEST(SparseSpikeGen, OneDimensionalIsPlusMinusOne) {
  for (bool flat : {true, false}) {
    const SparseSpike s = gen_sparse_spike(1, 1, flat, 9);
    EXPECT_DOUBLE_EQ(std::abs(s.values(0)), 1.0);
  }
}

TEST(SparseSpikeGen, GaussianSpikeInvariants) {
  const SparseSpike s = gen_sparse_spike(100, 10, false, 7);
  EXPECT_NEAR(s.values.norm(), 1.0, 1e-12);
  EXPECT_EQ((s.values.array() != 0.0).count(), 10);
  EXPECT_EQ(s.sparsity(), 10);
  EXPECT_TRUE(std::is_sorted(s.support.begin(), s.support.end()));
  EXPECT_THROW(gen_sparse_spike(5, 6, true, 1), std::invalid_argument);
  EXPECT_THROW(gen_sparse_spike(5, 0, true, 1), std::invalid_argument);
}

TEST(Wishart, ZeroSignalIsPureNoise) {
  const SparseSpike s = gen_sparse_spike(6, 2, true, 1);
  const Instance inst = gen_wishart(5, s, 0.0, 42);
  EXPECT_EQ(inst.data, wishart_components(5, 6, 42).noise);
}

TEST(Wishart, SignalTermReconstructsColumnExactly) {
  const Instance inst = gen_wishart(2, unit_spike(2, 0), 4.0, 5);
  const auto [u, w] = wishart_components(2, 2, 5);
  const Eigen::MatrixXd diff = inst.data - w;
  EXPECT_NEAR((diff.col(0) - 2.0 * u).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_EQ(diff.col(1), Eigen::VectorXd::Zero(2));
}

TEST(Wigner, SignalTermIsLambdaAtE1) {
  const Instance zero = gen_wigner(unit_spike(4, 0), 0.0, 8);
  EXPECT_EQ(zero.data, wigner_noise(4, 8));
  const Instance inst = gen_wigner(unit_spike(4, 0), 3.0, 8);
  const Eigen::MatrixXd diff = inst.data - wigner_noise(4, 8);
  EXPECT_NEAR(diff(0, 0), 3.0, 1e-14);
  Eigen::MatrixXd rest = diff;
  rest(0, 0) = 0.0;
  EXPECT_EQ(rest, Eigen::MatrixXd::Zero(4, 4));
}

TEST(Reconstructibility, NoiseRegeneratesForEveryModel) {
  const SparseSpike s = gen_sparse_spike(12, 3, false, 2);
  const Instance w = gen_wishart(9, s, 1.7, 77);
  const Eigen::VectorXd u = wishart_components(9, 12, 77).u;
  EXPECT_LE((w.data - wishart_components(9, 12, 77).noise - std::sqrt(1.7) * u * s.values.transpose())
                .cwiseAbs().maxCoeff(), 1e-10);
  const Instance g = gen_wigner(s, 2.5, 78);
  EXPECT_LE((g.data - wigner_noise(12, 78) - 2.5 * s.values * s.values.transpose()).cwiseAbs().maxCoeff(),
            1e-10);
  const Instance h = gen_symmetric(s, 4.0, NoiseSpec::cauchy(), 79);
  EXPECT_LE((h.data - symmetric_noise(12, NoiseSpec::cauchy(), 79) - 4.0 * s.values * s.values.transpose())
                .cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PlantedVector, ReductionIdentityHolds) {
  const SparseSpike s = gen_sparse_spike(20, 4, true, 3);
  const Instance inst = gen_planted_vector(8, s, 31);
  const PlantedVectorComponents c = planted_vector_components(8, 20, 31);
  const Eigen::VectorXd u = c.u();
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(8, 8) - u * u.transpose() / u.squaredNorm();
  const Eigen::MatrixXd rest =
      inst.data - std::sqrt(c.beta()) * u * s.values.transpose() - proj * c.equivalent_noise();
  EXPECT_LE(rest.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_DOUBLE_EQ(inst.signal, c.beta());
  // R is orthogonal.
  EXPECT_LE((c.rotation.transpose() * c.rotation - Eigen::MatrixXd::Identity(8, 8)).norm(), 1e-12);
  EXPECT_THROW(gen_planted_vector(20, s, 1), std::invalid_argument);
}

TEST(PlantedVector, RealizedBetaConcentratesNearDOverN) {
  const SparseSpike s = gen_sparse_spike(256, 8, true, 1);
  double sum = 0.0;
  for (Seed seed = 0; seed < 50; ++seed) sum += gen_planted_vector(64, s, seed).signal;
  EXPECT_NEAR(sum / 50.0, 256.0 / 64.0, 0.2 * 256.0 / 64.0);
}

TEST(Symmetric, CauchyNoiseIsCentredAndHalfWithinUnit) {
  const SparseSpike s = gen_sparse_spike(200, 4, true, 2);
  const Instance inst = gen_symmetric(s, 0.0, NoiseSpec::cauchy(1.0), 12);
  std::vector<double> entries(inst.data.data(), inst.data.data() + inst.data.size());
  std::nth_element(entries.begin(), entries.begin() + entries.size() / 2, entries.end());
  EXPECT_NEAR(entries[entries.size() / 2], 0.0, 0.05);
  const double within = (inst.data.array().abs() <= 1.0).cast<double>().mean();
  const double sigma = std::sqrt(0.25 / static_cast<double>(inst.data.size()));
  EXPECT_GE(within, 0.5 - 3 * sigma);
  EXPECT_NEAR(NoiseSpec::cauchy(1.0).prob_within_unit(), 0.5, 1e-15);
}

TEST(Symmetric, RademacherEntriesArePlusMinusOne) {
  const SparseSpike s = gen_sparse_spike(30, 5, true, 2);
  const Instance inst = gen_symmetric(s, 2.0, NoiseSpec::rademacher(1.0), 4);
  const Eigen::MatrixXd noise = inst.data - 2.0 * s.values * s.values.transpose();
  EXPECT_LE((noise.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(Symmetric, AsymmetricCustomNoiseIsRejected) {
  const SparseSpike s = gen_sparse_spike(10, 2, true, 2);
  const NoiseSpec skewed = NoiseSpec::custom_symmetric([](Rng& r) { return r.uniform(); });
  EXPECT_THROW(gen_symmetric(s, 1.0, skewed, 1), std::invalid_argument);
  const NoiseSpec fine = NoiseSpec::custom_symmetric([](Rng& r) { return r.uniform() - 0.5; });
  EXPECT_NO_THROW(gen_symmetric(s, 1.0, fine, 1));
}

TEST(Adversary, ZeroStrengthIsBitExact) {
  const SparseSpike s = gen_sparse_spike(10, 3, true, 2);
  const Instance inst = gen_wishart(6, s, 2.0, 3);
  EXPECT_EQ(make_adversary(inst, AdversaryKind::kProjection, 0.0, 1).data, inst.data);
}

TEST(Adversary, StrengthMatchesRequestedNorm) {
  const SparseSpike s = gen_sparse_spike(16, 4, false, 2);
  const Instance wish = gen_wishart(10, s, 2.0, 3);
  for (AdversaryKind kind :
       {AdversaryKind::kProjection, AdversaryKind::kSignalErasing, AdversaryKind::kColumnSpike}) {
    const Instance out = make_adversary(wish, kind, 1.25, 9);
    EXPECT_NEAR(norm_1_to_2(out.data - wish.data), 1.25, 1e-9) << to_string(kind);
  }
  const Instance wig = gen_wigner(s, 3.0, 4);
  EXPECT_NEAR(norm_1_to_2(make_adversary(wig, AdversaryKind::kSignalErasing, 0.7, 1).data - wig.data),
              0.7, 1e-9);
  EXPECT_NEAR((make_adversary(wig, AdversaryKind::kColumnSpike, 0.7, 1).data - wig.data)
                  .cwiseAbs().maxCoeff(), 0.7, 1e-12);
  EXPECT_THROW(make_adversary(wig, AdversaryKind::kProjection, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(make_adversary(gen_planted_vector(4, s, 1), AdversaryKind::kColumnSpike, 1.0, 1),
               std::invalid_argument);
}

TEST(Adversary, ErasingAtSignalScaleMakesSpikedColumnsLookLikeNoise) {
  const SparseSpike s = gen_sparse_spike(32, 4, true, 5);
  const double beta = 3.0;
  const Instance inst = gen_wishart(2048, s, beta, 6);
  const Eigen::VectorXd u = wishart_components(2048, 32, 6).u;
  const double scale = std::sqrt(beta) * u.norm() * s.values.cwiseAbs().maxCoeff();
  const Instance out = make_adversary(inst, AdversaryKind::kSignalErasing, scale, 1);
  double spiked = 0, plain = 0;
  Index ns = 0, np = 0;
  for (Index j = 0; j < 32; ++j) {
    const bool on = s.values(j) != 0.0;
    (on ? spiked : plain) += out.data.col(j).norm();
    ++(on ? ns : np);
  }
  EXPECT_NEAR((spiked / ns) / (plain / np), 1.0, 0.05);
}

TEST(Determinism, IdenticalParametersGiveIdenticalBytes) {
  const auto dir = std::filesystem::temp_directory_path() / "sparse_spike_model_test";
  std::filesystem::create_directories(dir);
  const SparseSpike s = gen_sparse_spike(16, 3, true, 1);
  save_instance(gen_wishart(8, s, 1.5, 4), dir / "a.ssi");
  save_instance(gen_wishart(8, s, 1.5, 4), dir / "b.ssi");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "a.ssi"), slurp(dir / "b.ssi"));
}

TEST(InstanceIo, RoundTripsBothLayouts) {
  const auto dir = std::filesystem::temp_directory_path() / "sparse_spike_io_test";
  std::filesystem::create_directories(dir);
  const SparseSpike s = gen_sparse_spike(9, 3, false, 1);
  const Instance inst = make_adversary(gen_wishart(5, s, 1.5, 4), AdversaryKind::kColumnSpike, 0.5, 2);
  for (const char* name : {"r.ssi", "r.json"}) {
    save_instance(inst, dir / name);
    const Instance back = load_instance(dir / name);
    EXPECT_EQ(back.data, inst.data);
    EXPECT_EQ(back.spike.values, inst.spike.values);
    EXPECT_EQ(back.spike.support, inst.spike.support);
    EXPECT_EQ(back.model, inst.model);
    EXPECT_EQ(back.signal, inst.signal);
    EXPECT_EQ(back.seed, inst.seed);
    ASSERT_TRUE(back.perturbation.has_value());
    EXPECT_EQ(back.perturbation->strength, 0.5);
  }
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(3, 4);
  save_matrix(m, dir / "m.json");
  EXPECT_EQ(load_matrix(dir / "m.json"), m);
}

TEST(InstanceIo, RejectsCorruptContainers) {
  const auto dir = std::filesystem::temp_directory_path() / "sparse_spike_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "bad.ssi", std::ios::binary);
    out << "NOTMAGIC1234567890";
  }
  EXPECT_ANY_THROW(load_instance(dir / "bad.ssi"));
  EXPECT_ANY_THROW(load_instance(dir / "missing.ssi"));
}
