#pragma once

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <stdexcept>

namespace haarbridge {

// SplitMix64 finalizer, used to derive well-separated stream ids from tags.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based generator (Philox 4x32, 10 rounds).  A stream is identified
// by (seed, stream_id) and every draw is a pure function of that pair plus a
// block counter, so replicas can be assigned disjoint streams and produce
// identical output no matter how work is scheduled across threads.
class RngStream {
public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : stream_(stream_id), seed_(seed) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // Independent stream derived from this one; tags must be distinct.
  RngStream substream(std::uint64_t tag) const {
    return RngStream(seed_, mix64(stream_ ^ mix64(tag)));
  }

  std::uint64_t next_u64() {
    if (pos_ >= 2) refill();
    std::uint64_t lo = buf_[2 * pos_];
    std::uint64_t hi = buf_[2 * pos_ + 1];
    ++pos_;
    return lo | (hi << 32);
  }

  // Uniform on [0,1), 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1], safe to pass to log().
  double uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs are cached so draws stay aligned
  // with the underlying counter sequence deterministically.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential() { return -std::log(uniform_open()); }

  // Gamma(shape = twice_shape/2, scale 1) for half-integer shapes.  Built
  // from exponentials plus, for odd twice_shape, half a squared normal;
  // this covers every Dirichlet order the ensembles need exactly.
  double gamma_half_integer(int twice_shape) {
    if (twice_shape <= 0) throw std::invalid_argument("gamma shape must be positive");
    double g = 0.0;
    for (int j = 0; j + 1 < twice_shape; j += 2) g += exponential();
    if (twice_shape & 1) {
      double z = gaussian();
      g += 0.5 * z * z;
    }
    return g;
  }

  // Uniform on {0, ..., k-1} without modulo bias.
  std::uint64_t bounded(std::uint64_t k) {
    if (k == 0) throw std::invalid_argument("bounded(0)");
    std::uint64_t threshold = (0 - k) % k;  // 2^64 mod k
    for (;;) {
      std::uint64_t x = next_u64();
      if (x >= threshold) return x % k;
    }
  }

private:
  void refill() {
    std::uint32_t c0 = static_cast<std::uint32_t>(block_);
    std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
    std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
    std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ull * c0;
      std::uint64_t p1 = 0xCD9E8D57ull * c2;
      std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      std::uint32_t n1 = static_cast<std::uint32_t>(p1);
      std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      std::uint32_t n3 = static_cast<std::uint32_t>(p0);
      c0 = n0; c1 = n1; c2 = n2; c3 = n3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
    ++block_;
    pos_ = 0;
  }

  std::uint32_t key_[2];
  std::uint64_t stream_;
  std::uint64_t seed_;
  std::uint64_t block_ = 0;
  std::uint32_t buf_[4] = {0, 0, 0, 0};
  int pos_ = 2;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stream id for replica `r` of the experiment tagged `salt`.  Distinct salts
// land in well-separated regions of the 64-bit stream space.
inline std::uint64_t replica_stream(std::uint64_t salt, std::uint64_t r) {
  return mix64(salt) + r;
}

inline void fill_gaussian(RngStream& rng, double* out, std::size_t m) {
  for (std::size_t i = 0; i < m; ++i) out[i] = rng.gaussian();
}

}  // namespace haarbridge
