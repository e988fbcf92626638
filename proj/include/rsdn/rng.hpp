#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rsdn {

// All randomness in a run flows from one seeded Rng (or Rngs forked from it).
// Draws are hand-rolled on top of mt19937_64 so the byte stream does not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n), n > 0
  int64_t uniform_int(int64_t n) {
    return static_cast<int64_t>(gen_() % static_cast<uint64_t>(n));
  }

  bool coin() { return (gen_() & 1u) != 0; }

  template <typename V>
  void shuffle(std::vector<V>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<int64_t>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream for a sub-component (splitmix64 of seed^tag).
  static uint64_t mix(uint64_t seed, uint64_t tag) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  Rng fork(uint64_t tag) { return Rng(mix(gen_(), tag)); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rsdn
