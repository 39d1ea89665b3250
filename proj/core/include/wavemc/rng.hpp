#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace wavemc {

// splitmix64 finalizer; used to key streams and to derive per-cell seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based stream built on Philox4x32-10 (Salmon et al., SC'11).
// One stream per Monte Carlo sample index. The variate sequence is a pure
// function of (seed, stream_index, purpose): no shared state, so batch
// results are identical for any worker count or schedule. Distinct
// purposes give statistically independent streams for the same
// (seed, stream_index), e.g. exit paths vs. the per-sample normal factor.
class RngStream {
 public:
  enum class Purpose : std::uint64_t {
    paths = 0,      // SDE increments and bridge-crossing uniforms
    gaussians = 1,  // the independent standard normal Z of the estimator
    probes = 2,     // construction-time validation probes
  };

  RngStream(std::uint64_t seed, std::uint64_t stream_index,
            Purpose purpose = Purpose::paths) noexcept {
    const std::uint64_t key = mix64(seed ^ mix64(static_cast<std::uint64_t>(purpose)));
    key_ = {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    counter_ = {0u, 0u, static_cast<std::uint32_t>(stream_index),
                static_cast<std::uint32_t>(stream_index >> 32)};
    pos_ = 4;  // buffer empty
  }

  std::uint64_t next_u64() noexcept {
    const std::uint32_t lo = next_u32();
    const std::uint32_t hi = next_u32();
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
  }

  // Uniform in the open interval (0,1), 53-bit resolution. Never returns
  // an exact 0 or 1, so log() in the normal transform is always finite.
  double uniform01() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via the Marsaglia polar transform; the second variate
  // of each pair is cached, so draws come in a fixed per-stream order. The
  // rejection loop consumes a variable number of uniforms, which is fine:
  // each sample owns its stream.
  double gaussian() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  void gaussian_vector(std::span<double> out) noexcept {
    for (double& v : out) v = gaussian();
  }

 private:
  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) refill();
    return buffer_[pos_++];
  }

  static void mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                        std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void refill() noexcept {
    std::array<std::uint32_t, 4> c = counter_;
    std::array<std::uint32_t, 2> k = key_;
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mul_hi_lo(0xD2511F53u, c[0], hi0, lo0);
      mul_hi_lo(0xCD9E8D57u, c[2], hi1, lo1);
      c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    buffer_ = c;
    pos_ = 0;
    if (++counter_[0] == 0) ++counter_[1];  // 64-bit block counter
  }

  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> buffer_{};
  int pos_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wavemc
