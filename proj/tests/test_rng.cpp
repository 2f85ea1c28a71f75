#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nvspin/rng.hpp"

using namespace nvspin;

TEST_CASE("substreams are deterministic and independent") {
  Rng a = Rng::substream(42, 1, 3, 0);
  Rng b = Rng::substream(42, 1, 3, 0);
  Rng c = Rng::substream(42, 1, 4, 0);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_diff = any_diff || (va != c.next_u64());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform and normal moments") {
  Rng rng = Rng::substream(9, 5);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    su += u;
    const double g = rng.normal();
    sn += g;
    sn2 += g * g;
  }
  CHECK(std::abs(su / n - 0.5) < 0.005);
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(std::abs(sn2 / n - 1.0) < 0.02);
}

TEST_CASE("poisson moments across the sampler regimes") {
  // Small means use inversion, larger ones the transformed-rejection
  // sampler; both must hit the Poisson mean and variance.
  for (double mean : {0.5, 3.0, 9.9, 12.0, 250.0, 30000.0}) {
    Rng rng = Rng::substream(11, 6, static_cast<std::uint64_t>(mean * 10));
    const int n = mean > 1000.0 ? 20000 : 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(mean));
      CHECK(k >= 0);
      s += k;
      s2 += k * k;
    }
    const double m = s / n;
    const double var = s2 / n - m * m;
    const double sem = std::sqrt(mean / n);
    CHECK(std::abs(m - mean) < 5.0 * sem);
    CHECK(var / mean > 0.93);
    CHECK(var / mean < 1.07);
  }
}

TEST_CASE("poisson edge cases") {
  Rng rng = Rng::substream(1, 1);
  CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS_AS(rng.poisson(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(rng.poisson(std::nan("")), std::invalid_argument);
}
