#include "nvspin/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "nvspin/types.hpp"

namespace nvspin {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::substream(std::uint64_t seed, std::uint64_t purpose,
                   std::uint64_t point, std::uint64_t member) {
  std::uint64_t s = mix64(seed);
  s = mix64(s ^ (0x100000001b3ull * purpose));
  s = mix64(s ^ (0x100000001b3ull * point));
  s = mix64(s ^ (0x100000001b3ull * member));
  return Rng(s);
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  cached_normal_ = r * std::sin(kTwoPi * u2);
  have_cached_normal_ = true;
  return r * std::cos(kTwoPi * u2);
}

long long Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson: mean must be finite and >= 0");
  }
  if (mean == 0.0) return 0;
  return mean < 10.0 ? poisson_inversion(mean) : poisson_ptrs(mean);
}

long long Rng::poisson_inversion(double mean) {
  const double enlam = std::exp(-mean);
  long long k = 0;
  double prod = uniform();
  while (prod > enlam) {
    prod *= uniform();
    ++k;
  }
  return k;
}

// Transformed rejection with squeeze (PTRS); exact for mean >= 10.
long long Rng::poisson_ptrs(double mean) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v) + std::log(invalpha) -
                       std::log(a / (us * us) + b);
    const double rhs = kf * loglam - mean - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return static_cast<long long>(kf);
  }
}

}  // namespace nvspin
