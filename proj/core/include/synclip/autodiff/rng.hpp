#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "synclip/autodiff/tensor.hpp"

namespace synclip::autodiff {

/// Philox4x32-10 block function (Salmon et al. constants), exposed for
/// known-answer testing.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Seed of the `index`-th substream of `seed`. Injective in `index`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Counter-based generator: the 64-bit seed is the Philox key and a 128-bit
/// block counter advances once per four 32-bit outputs. The stream depends
/// only on the seed, never on the platform.
///
/// Normals use Box-Muller on two 53-bit uniforms u1 in (0, 1], u2 in [0, 1):
/// r = sqrt(-2 ln u1), z0 = r cos(2 pi u2), z1 = r sin(2 pi u2); z1 is
/// returned by the following call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n), unbiased (rejection sampling). n > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p);
  double normal();

  /// Independent generator for substream `index`.
  Rng derive(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

 private:
  void refill();

  std::uint64_t seed_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  std::size_t next_ = 4;
  std::optional<double> spare_normal_;
};

Tensor standard_normal(Rng& rng, Shape shape);

}  // namespace synclip::autodiff
