#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace sparse_spike {

using Seed = std::uint64_t;

/// SplitMix64 finalizer. Bijective on 64-bit words.
std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a 64-bit hash of a component name.
std::uint64_t hash_name(std::string_view name);

/// Sub-seed for a named component: splitmix64(base ^ fnv1a(name)).
/// Every generator draws each component (spike support, noise matrix, ...)
/// from its own sub-seed so components can be regenerated in isolation.
Seed sub_seed(Seed base, std::string_view component);

/// Order-sensitive mix of a base seed with a tuple of indices.
Seed mix_seed(Seed base, std::initializer_list<std::uint64_t> parts);

/// Deterministic random stream on top of std::mt19937_64.
///
/// The engine is fully specified by the standard; the variate transforms below
/// are implemented here (not via <random> distributions, whose algorithms are
/// implementation-defined) so that draws are identical across toolchains.
///   uniform():  top 53 bits of one engine word, scaled to [0, 1)
///   normal():   Box-Muller on (0,1] x [0,1), both outputs used in order
///   below(b):   rejection sampling on the top bits, unbiased
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double normal();
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  /// +1 or -1 with equal probability.
  int sign() { return (engine_() >> 63) != 0U ? 1 : -1; }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparse_spike
