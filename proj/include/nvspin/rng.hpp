#pragma once

#include <cstdint>

namespace nvspin {

// Counter-free splittable RNG used for all stochastic sampling.  Every
// (seed, purpose, point, member) tuple owns an independent substream, so
// results do not depend on evaluation order or thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  // Derive a substream key by mixing the parts through SplitMix64.
  static Rng substream(std::uint64_t seed, std::uint64_t purpose,
                       std::uint64_t point = 0, std::uint64_t member = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Standard normal via Box-Muller (second draw cached).
  double normal();

  // Exact Poisson sampling: sequential inversion for small means, the
  // PTRS transformed-rejection sampler (Hormann 1993) otherwise.
  long long poisson(double mean);

 private:
  long long poisson_inversion(double mean);
  long long poisson_ptrs(double mean);

  std::uint64_t state_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace nvspin
