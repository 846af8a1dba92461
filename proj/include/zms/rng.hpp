#pragma once
// Deterministic randomness utilities.
//
// Every stochastic component in the library draws from an Engine seeded
// through derive_seed(master, {path...}).  Components that fan out over
// trials derive one child seed per trial index, which makes results
// independent of execution order and of the number of worker threads.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <vector>

namespace zms::rng {

// One step of the splitmix64 sequence; advances `state`.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hash-chains a master seed with a path of indices into a child seed.
// derive_seed(s, {a, b}) != derive_seed(s, {b, a}) for a != b.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = master ^ 0x6a09e667f3bcc909ULL;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t p : path) {
    state ^= p + 0x9e3779b97f4a7c15ULL + (state << 6) + (state >> 2);
    out = splitmix64(state);
  }
  return out;
}

// Thin wrapper over mt19937_64 with unbiased bounded sampling and the
// floating-point draws used throughout.  std::*_distribution types are
// avoided on purpose: their output is not pinned by the standard, and we
// need bit-identical streams everywhere.
class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform integer in [0, bound) by rejection; bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Engine::below: bound must be positive");
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Unit-mean exponential variate.
  double exponential() { return -std::log1p(-uniform01()); }

  std::vector<std::uint8_t> bytes(std::size_t n) {
    std::vector<std::uint8_t> out(n);
    std::size_t i = 0;
    while (i < n) {
      std::uint64_t v = gen_();
      for (int b = 0; b < 8 && i < n; ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(v >> (8 * b));
      }
    }
    return out;
  }

 private:
  std::mt19937_64 gen_;
};

// Vose alias table: O(n) build, O(1) sampling from a fixed discrete
// distribution.  Weights need not be normalized.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights);

  std::size_t sample(Engine& eng) const {
    const std::size_t i = static_cast<std::size_t>(eng.below(prob_.size()));
    return eng.uniform01() < prob_[i] ? i : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

}  // namespace zms::rng
