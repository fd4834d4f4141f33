#ifndef PTOMO_RNG_HPP
#define PTOMO_RNG_HPP

#include <cstdint>
#include <random>

namespace ptomo {

/// Seeded 64-bit generator with platform-independent derived draws.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Distribution adaptors from <random> are implementation-defined,
/// so uniform reals, bounded integers and normals are derived here from raw
/// engine words. Replaying the same seed yields the same draws everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Generator for an independent substream (e.g. one trial), keyed by
  /// `seed ^ index` and scrambled before seeding the engine.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Fair coin.
  bool coin() { return (engine_() >> 63) != 0; }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal deviate (Marsaglia polar method).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// SplitMix64 finalizer; used to decorrelate nearby seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace ptomo

#endif  // PTOMO_RNG_HPP
