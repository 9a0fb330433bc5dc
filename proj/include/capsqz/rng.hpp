#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace capsqz {

// SplitMix64 step; also used to expand a user seed into independent streams.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stable sub-seed for a named stream (init, shuffle, dropout, ...) so that a
// single --seed drives every source of randomness without coupling them.
inline uint64_t derive_seed(uint64_t seed, uint64_t stream) {
  uint64_t s = seed ^ (0xd1b54a32d192ed03ull * (stream + 1));
  return splitmix64(s);
}

// xoshiro256** with hand-rolled distributions. std:: distributions are not
// specified bit-for-bit across library implementations; training determinism
// and checkpoint hashing need reproducible draws.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) { reseed(seed); }

  void reseed(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
    has_spare_normal_ = false;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller; the paired variate is cached.
  double normal(double mean = 0.0, double sigma = 1.0) {
    if (has_spare_normal_) {
      has_spare_normal_ = false;
      return mean + sigma * spare_normal_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_normal_ = r * std::sin(theta);
    has_spare_normal_ = true;
    return mean + sigma * r * std::cos(theta);
  }

  // Uniform index in [0, n). Lemire-style rejection-free multiply.
  size_t index(size_t n) {
    return static_cast<size_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4] = {};
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace capsqz
