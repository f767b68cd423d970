#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

// Portable draws on top of mt19937_64. The standard distributions are
// implementation-defined, so seeded results would differ across toolchains.
namespace debater::random {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return Engine(splitmix64(seed ^ splitmix64(stream + 1)));
}

// Uniform in [0, n), rejection sampled.
inline std::uint64_t index(Engine& rng, std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = Engine::max() - (Engine::max() % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Uniform in [0, 1).
inline double unit(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class T>
void shuffle(std::vector<T>& values, Engine& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[index(rng, i)]);
  }
}

}  // namespace debater::random
