#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cdt {

// splitmix64. Chosen over <random> engines because the standard
// distributions are implementation-defined; every stream here must be
// bit-reproducible across compilers and platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_unit() {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Uniform index in [0, n) via rejection sampling, exact for any n.
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return static_cast<std::size_t>(v % bound);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = uniform_index(i + 1);
      if (i != j) std::swap(v[i], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream from a base seed and a salt.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  SplitMix64 g(base ^ (0x632be59bd9b4e019ull * (salt + 1)));
  return g.next();
}

}  // namespace cdt
