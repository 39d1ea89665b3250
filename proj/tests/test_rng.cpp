#include <doctest.h>

#include <cmath>
#include <vector>

#include "wavemc/rng.hpp"

using namespace wavemc;

TEST_SUITE("rng") {

TEST_CASE("identical (seed, stream) gives identical sequences") {
  RngStream a(42, 0), b(42, 0);
  for (int i = 0; i < 256; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 0), d(42, 0);
  for (int i = 0; i < 256; ++i) CHECK(c.gaussian() == d.gaussian());
}

TEST_CASE("distinct streams and purposes decorrelate") {
  RngStream a(42, 0), b(42, 1);
  RngStream c(42, 0, RngStream::Purpose::gaussians);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    if (va == b.next_u64()) ++equal_ab;
    if (va == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
}

TEST_CASE("gaussian moments against the CLT band") {
  // mean has sd 1/sqrt(N); variance estimate has sd ~ sqrt(2/N).
  RngStream g(2024, 0);
  const int n = 1000000;
  double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = g.gaussian();
    sum += v;
    sum2 += v * v;
    sum3 += v * v * v;
    sum4 += v * v * v * v;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.01);
  CHECK(std::abs(sum3 / n) < 0.02);        // E[Z^3] = 0
  CHECK(std::abs(sum4 / n - 3.0) < 0.06);  // E[Z^4] = 3
}

TEST_CASE("uniform01 stays inside the open interval") {
  RngStream g(7, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = g.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("mix64 avalanche sanity") {
  CHECK(mix64(0) != mix64(1));
  CHECK(mix64(0x123456789abcdefULL) != 0x123456789abcdefULL);
}

}  // TEST_SUITE
