#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace pgraphon {

/// SplitMix64 finalizer. Used as the mixing function of the keyed generator.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, i, j). Sampling code keys vertex positions and edge labels by
/// index so that directed and symmetric modes share the same vertex positions,
/// and so that results do not depend on evaluation order or thread count.
class KeyedRng {
public:
  enum Stream : std::uint64_t { kVertex = 1, kEdge = 2, kTrial = 3, kRestart = 4, kCloud = 5 };

  explicit constexpr KeyedRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t i, std::uint64_t j = 0) const noexcept {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ (stream * 0xd6e8feb86659fd93ULL));
    h = splitmix64(h ^ i);
    h = splitmix64(h ^ (j + 0x632be59bd9b4e019ULL));
    return h;
  }

  constexpr double uniform(std::uint64_t stream, std::uint64_t i, std::uint64_t j = 0) const noexcept {
    return to_unit_interval(bits(stream, i, j));
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }

private:
  std::uint64_t seed_;
};

/// Derives an independent child seed; used to give restarts and trials disjoint streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
  return KeyedRng(seed).bits(KeyedRng::kTrial, a, b);
}

/// Sequential generator for searches. Wraps mt19937_64 (bit-exact across
/// standard libraries) with its own real/integer conversions, since the
/// std distributions are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return to_unit_interval(engine_()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    if (n <= 1) return 0;
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

} // namespace pgraphon
