#pragma once

#include <cmath>
#include <cstdint>

namespace qj::math {

// Counter-based random stream. A draw is a pure function of
// (seed, stream_id, counter), so replay is exact on any platform and
// independent of scheduling; distinct stream_ids give independent sequences.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(uint64_t seed, uint64_t stream_id)
      : seed_(seed), stream_id_(stream_id), counter_(0) {
    base_ = mix(seed ^ mix(stream_id * 0xD2B74407B1CE6E93ull));
  }

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }
  uint64_t counter() const { return counter_; }
  void set_counter(uint64_t c) { counter_ = c; }

  uint64_t next_u64() { return mix(base_ + 0x9E3779B97F4A7C15ull * ++counter_); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

  // standard normal via Box-Muller; consumes exactly two counter steps
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  // splitmix64 finalizer
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  uint64_t seed_;
  uint64_t stream_id_;
  uint64_t counter_;
  uint64_t base_;
};

}  // namespace qj::math
