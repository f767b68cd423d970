#pragma once

// Hand-rolled input generators for property tests.

#include <string>
#include <vector>

#include "debater/random.hpp"

namespace gen {

using debater::random::Engine;

inline Engine engine(std::uint64_t seed) { return debater::random::make_engine(seed, 0x7e57); }

inline std::size_t uniform(Engine& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(debater::random::index(rng, hi - lo + 1));
}

inline bool coin(Engine& rng, double p = 0.5) { return debater::random::unit(rng) < p; }

template <class T>
const T& pick(Engine& rng, const std::vector<T>& values) {
  return values[debater::random::index(rng, values.size())];
}

// Printable ASCII mixed with a few multi-byte characters and whitespace runs.
inline std::string messy_text(Engine& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {
      "a", "b", "Z", "7", " ", " ", "  ", "\t", ".", ",", "!", "?", "'", "-", "\"", "(", ")",
      "é", "ß", "Ω", "中", "文", "ü", "😀", "\xE2\x80\x94", "n't", "'s", "Dr.", "U.S.", "3.5", "1,000"};
  std::string out;
  const std::size_t n = uniform(rng, 0, max_len);
  for (std::size_t i = 0; i < n; ++i) out += pick(rng, pieces);
  return out;
}

inline std::vector<int> labeling(Engine& rng, std::size_t n, int k) {
  std::vector<int> out(n);
  for (auto& l : out) l = static_cast<int>(debater::random::index(rng, static_cast<std::uint64_t>(k)));
  return out;
}

}  // namespace gen
