#pragma once

// Seeded random instances for property checks. Part sizes and class masses
// are multiples of 1/denominator so that every instance has a small common grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/rng.hpp"

namespace pgraphon::gen {

/// Finite metric space on m points: discrete metric, integer points on a
/// line, or random points in the plane (chosen at random).
inline SpacePtr space(Rng& rng, std::size_t m) {
  if (m == 2 && rng.below(3) == 0) return DecorationSpace::two_point();
  std::vector<std::string> names(m);
  for (std::size_t i = 0; i < m; ++i) names[i] = "z" + std::to_string(i);
  std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
  switch (rng.below(3)) {
  case 0:
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) d[i][j] = i == j ? 0.0 : 1.0;
    break;
  case 1: {
    std::vector<double> x(m);
    double pos = 0.0;
    for (std::size_t i = 0; i < m; ++i) x[i] = pos += 0.25 * static_cast<double>(1 + rng.below(4));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) d[i][j] = std::abs(x[i] - x[j]);
    break;
  }
  default: {
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = rng.uniform(0.0, 2.0) + static_cast<double>(i) * 1e-3;
      y[i] = rng.uniform(0.0, 2.0);
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) d[i][j] = std::hypot(x[i] - x[j], y[i] - y[j]);
  }
  }
  return std::make_shared<const DecorationSpace>(std::move(names), std::move(d));
}

/// Nonnegative weights; about a third of the points carry no mass.
inline std::vector<double> nonnegative_weights(Rng& rng, std::size_t m, double max_mass) {
  std::vector<double> w(m);
  for (auto& v : w) v = rng.below(3) == 0 ? 0.0 : rng.uniform(0.0, max_mass);
  return w;
}

inline std::vector<double> probability_weights(Rng& rng, std::size_t m) {
  std::vector<double> w(m);
  double s = 0.0;
  for (auto& v : w) s += v = rng.below(4) == 0 ? 0.0 : rng.uniform(0.0, 1.0);
  if (s == 0.0) {
    w[rng.below(m)] = 1.0;
    return w;
  }
  for (auto& v : w) v /= s;
  return w;
}

inline SignedMeasure nonnegative_measure(Rng& rng, const SpacePtr& s, double max_mass = 1.0) {
  return SignedMeasure(s, nonnegative_weights(rng, s->size(), max_mass));
}

inline SignedMeasure probability_measure(Rng& rng, const SpacePtr& s) { return SignedMeasure(s, probability_weights(rng, s->size())); }

/// m positive multiples of 1/denominator summing to 1 (m <= denominator).
inline std::vector<double> grid_sizes(Rng& rng, std::size_t m, std::size_t denominator) {
  std::vector<std::size_t> c(m, 1);
  for (std::size_t r = m; r < denominator; ++r) ++c[rng.below(m)];
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = static_cast<double>(c[i]) / static_cast<double>(denominator);
  return s;
}

/// Like grid_sizes, but zero entries are allowed.
inline std::vector<double> grid_distribution(Rng& rng, std::size_t k, std::size_t denominator) {
  std::vector<std::size_t> c(k, 0);
  for (std::size_t r = 0; r < denominator; ++r) ++c[rng.below(k)];
  std::vector<double> s(k);
  for (std::size_t i = 0; i < k; ++i) s[i] = static_cast<double>(c[i]) / static_cast<double>(denominator);
  return s;
}

enum class EntryKind { kProbability, kNonnegative, kSigned };

inline StepKernel kernel(Rng& rng, const SpacePtr& s, const std::vector<double>& sizes, EntryKind kind = EntryKind::kProbability) {
  const std::size_t m = sizes.size(), w = s->size();
  std::vector<double> d;
  d.reserve(m * m * w);
  for (std::size_t e = 0; e < m * m; ++e) {
    std::vector<double> x;
    switch (kind) {
    case EntryKind::kProbability: x = probability_weights(rng, w); break;
    case EntryKind::kNonnegative: x = nonnegative_weights(rng, w, 1.0); break;
    case EntryKind::kSigned:
      x.resize(w);
      for (auto& v : x) v = rng.uniform(-1.0, 1.0);
      break;
    }
    d.insert(d.end(), x.begin(), x.end());
  }
  return StepKernel(s, sizes, std::move(d));
}

inline StepKernel kernel(Rng& rng, const SpacePtr& s, std::size_t parts, std::size_t denominator, EntryKind kind = EntryKind::kProbability) {
  return kernel(rng, s, grid_sizes(rng, parts, denominator), kind);
}

/// Real step kernel with entries in [lo, hi].
inline RealStepKernel real_kernel(Rng& rng, const std::vector<double>& sizes, double lo = 0.0, double hi = 1.0) {
  const std::size_t m = sizes.size();
  std::vector<double> d(m * m);
  for (auto& v : d) v = rng.uniform(lo, hi);
  return RealStepKernel(nullptr, sizes, std::move(d));
}

/// Decorated graph with [0,1]-valued decorations on random edges.
inline CbGraph graph(Rng& rng, const SpacePtr& s, std::size_t k, const std::vector<double>& alpha) {
  CbGraph g(s, k, alpha);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (rng.below(4) == 0) continue;
      std::vector<double> f(s->size());
      for (auto& v : f) v = rng.uniform();
      g.set_edge(i, j, std::move(f));
    }
  return g;
}

/// Separating [0,1]-valued family: f_0 = 1, the point indicators in random
/// order, then `extra` random functions.
inline TestFamily family(Rng& rng, const SpacePtr& s, std::size_t extra = 0) {
  const std::size_t m = s->size();
  std::vector<std::vector<double>> fs;
  fs.emplace_back(m, 1.0);
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t z : order) {
    std::vector<double> f(m, 0.0);
    f[z] = 1.0;
    fs.push_back(std::move(f));
  }
  for (std::size_t e = 0; e < extra; ++e) {
    std::vector<double> f(m);
    for (auto& v : f) v = rng.uniform();
    fs.push_back(std::move(f));
  }
  return TestFamily(s, std::move(fs));
}

inline Permutation permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  rng.shuffle(v);
  return Permutation(std::move(v));
}

/// Fractional partition: each part's mass is split at random over k classes.
inline OverlapMatrix overlap(Rng& rng, const std::vector<double>& sizes, std::size_t k) {
  std::vector<double> v(sizes.size() * k);
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    auto w = probability_weights(rng, k);
    for (std::size_t i = 0; i < k; ++i) v[p * k + i] = sizes[p] * w[i];
  }
  return OverlapMatrix(sizes.size(), k, std::move(v));
}

/// Class labels for n grid cells.
inline std::vector<std::size_t> assignment(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> l(n);
  for (auto& v : l) v = rng.below(k);
  return l;
}

} // namespace pgraphon::gen
