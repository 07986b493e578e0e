#pragma once

// Finite decoration spaces, finite signed measures on them, and the two
// metrizations of weak convergence used throughout the library: the
// Levy-Prokhorov distance and the norm induced by a test-function family.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgraphon/error.hpp"

namespace pgraphon {

inline constexpr double kMeasureTol = 1e-12;

/// Finite metric space (Z, d_Z). Immutable; shared by reference between all
/// measures, kernels and families built on it.
class DecorationSpace {
public:
  DecorationSpace(std::vector<std::string> points, std::vector<std::vector<double>> dist)
      : points_(std::move(points)) {
    const std::size_t m = points_.size();
    if (m == 0) throw DomainError("decoration space needs at least one point");
    if (dist.size() != m) throw DomainError("distance matrix has " + std::to_string(dist.size()) + " rows, expected " + std::to_string(m));
    dist_.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      if (dist[i].size() != m) throw DomainError("distance matrix row " + std::to_string(i) + " has wrong length");
      for (std::size_t j = 0; j < m; ++j) dist_[i * m + j] = dist[i][j];
    }
    validate();
    build_levels();
  }

  /// The two-point space {0, 1} with d(0,1) = 1.
  static std::shared_ptr<const DecorationSpace> two_point() {
    static const auto space = std::make_shared<const DecorationSpace>(
        std::vector<std::string>{"0", "1"}, std::vector<std::vector<double>>{{0.0, 1.0}, {1.0, 0.0}});
    return space;
  }

  /// m labelled points with the discrete metric.
  static std::shared_ptr<const DecorationSpace> discrete(std::size_t m) {
    std::vector<std::string> labels(m);
    std::vector<std::vector<double>> d(m, std::vector<double>(m, 1.0));
    for (std::size_t i = 0; i < m; ++i) {
      labels[i] = std::to_string(i);
      d[i][i] = 0.0;
    }
    return std::make_shared<const DecorationSpace>(std::move(labels), std::move(d));
  }

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<std::string>& points() const noexcept { return points_; }
  double dist(std::size_t i, std::size_t j) const noexcept { return dist_[i * size() + j]; }

  /// Sorted distinct values of d_Z, starting with 0.
  const std::vector<double>& levels() const noexcept { return levels_; }

  /// Bitmask of points within closed distance levels()[k] of point z (m <= 64).
  std::uint64_t ball(std::size_t k, std::size_t z) const noexcept { return balls_[k * size() + z]; }

  bool same_as(const DecorationSpace& other) const noexcept {
    return this == &other || (points_.size() == other.points_.size() && dist_ == other.dist_);
  }

private:
  void validate() const {
    const std::size_t m = size();
    for (std::size_t i = 0; i < m; ++i) {
      if (dist(i, i) != 0.0) throw DomainError("distance matrix must vanish on the diagonal");
      for (std::size_t j = 0; j < m; ++j) {
        const double d = dist(i, j);
        if (!std::isfinite(d)) throw DomainError("distance matrix entries must be finite");
        if (i != j && !(d > 0.0)) throw DomainError("distinct points must be at positive distance");
        if (std::abs(d - dist(j, i)) > kMeasureTol) throw DomainError("distance matrix must be symmetric");
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k)
          if (dist(i, k) > dist(i, j) + dist(j, k) + kMeasureTol)
            throw DomainError("distance matrix violates the triangle inequality at (" + std::to_string(i) + "," +
                              std::to_string(j) + "," + std::to_string(k) + ")");
  }

  void build_levels() {
    const std::size_t m = size();
    levels_.assign(dist_.begin(), dist_.end());
    levels_.push_back(0.0);
    std::sort(levels_.begin(), levels_.end());
    levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
    if (m > 64) return; // ball masks only serve the subset scans, which stop far below 64 points
    balls_.assign(levels_.size() * m, 0);
    for (std::size_t k = 0; k < levels_.size(); ++k)
      for (std::size_t z = 0; z < m; ++z)
        for (std::size_t w = 0; w < m; ++w)
          if (dist(z, w) <= levels_[k]) balls_[k * m + z] |= std::uint64_t{1} << w;
  }

  std::vector<std::string> points_;
  std::vector<double> dist_;
  std::vector<double> levels_;
  std::vector<std::uint64_t> balls_;
};

using SpacePtr = std::shared_ptr<const DecorationSpace>;

inline void require_same_space(const DecorationSpace& a, const DecorationSpace& b, const char* what) {
  if (!a.same_as(b)) throw MismatchError(std::string(what) + ": operands live on different decoration spaces");
}

/// Finite signed measure on a DecorationSpace, stored densely as point masses.
class SignedMeasure {
public:
  SignedMeasure(SpacePtr space, std::vector<double> weights) : space_(std::move(space)), weights_(std::move(weights)) {
    if (!space_) throw DomainError("signed measure needs a decoration space");
    if (weights_.size() != space_->size())
      throw MismatchError("signed measure has " + std::to_string(weights_.size()) + " weights on a " +
                          std::to_string(space_->size()) + "-point space");
    for (double w : weights_)
      if (!std::isfinite(w)) throw DomainError("signed measure weights must be finite");
  }

  static SignedMeasure zero(SpacePtr space) {
    const std::size_t m = space->size();
    return SignedMeasure(std::move(space), std::vector<double>(m, 0.0));
  }

  static SignedMeasure dirac(SpacePtr space, std::size_t z, double mass = 1.0) {
    std::vector<double> w(space->size(), 0.0);
    w.at(z) = mass;
    return SignedMeasure(std::move(space), std::move(w));
  }

  const SpacePtr& space() const noexcept { return space_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](std::size_t z) const noexcept { return weights_[z]; }
  std::size_t size() const noexcept { return weights_.size(); }

  double total_mass() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
  }

  /// ||mu||_TV = mu+(Z) + mu-(Z).
  double total_variation() const noexcept {
    double s = 0.0;
    for (double w : weights_) s += std::abs(w);
    return s;
  }

  bool is_nonnegative() const noexcept {
    return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w >= 0.0; });
  }

  bool is_probability(double tol = kMeasureTol) const noexcept {
    return is_nonnegative() && std::abs(total_mass() - 1.0) <= tol;
  }

  /// |mu| = mu+ + mu-.
  SignedMeasure variation() const {
    std::vector<double> w(weights_);
    for (double& x : w) x = std::abs(x);
    return SignedMeasure(space_, std::move(w));
  }

  SignedMeasure scaled(double c) const {
    std::vector<double> w(weights_);
    for (double& x : w) x *= c;
    return SignedMeasure(space_, std::move(w));
  }

  friend SignedMeasure operator+(const SignedMeasure& a, const SignedMeasure& b) {
    require_same_space(*a.space_, *b.space_, "measure sum");
    std::vector<double> w(a.weights_);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += b.weights_[i];
    return SignedMeasure(a.space_, std::move(w));
  }

  friend SignedMeasure operator-(const SignedMeasure& a, const SignedMeasure& b) { return a + b.scaled(-1.0); }

  bool approx_equal(const SignedMeasure& other, double tol = kMeasureTol) const {
    if (!space_->same_as(*other.space_)) return false;
    for (std::size_t i = 0; i < weights_.size(); ++i)
      if (std::abs(weights_[i] - other.weights_[i]) > tol) return false;
    return true;
  }

private:
  SpacePtr space_;
  std::vector<double> weights_;
};

/// Convergence determining family f_0 = 1, f_1, ..., f_K of [0,1]-valued
/// functions on Z. For finite Z the separating property is exactly full column
/// rank of the (K+1) x m value matrix.
class TestFamily {
public:
  TestFamily(SpacePtr space, std::vector<std::vector<double>> functions)
      : space_(std::move(space)), functions_(std::move(functions)) {
    if (!space_) throw DomainError("test family needs a decoration space");
    const std::size_t m = space_->size();
    if (functions_.empty()) throw DomainError("test family must contain f_0 = 1");
    for (std::size_t k = 0; k < functions_.size(); ++k) {
      if (functions_[k].size() != m) throw MismatchError("test function " + std::to_string(k) + " has wrong length");
      for (double v : functions_[k])
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("test function " + std::to_string(k) + " leaves [0,1]");
    }
    for (double v : functions_[0])
      if (v != 1.0) throw DomainError("f_0 must be identically 1");
    if (rank() != m) throw DomainError("test family is not separating: value matrix has rank below the space size");
  }

  /// {1} together with the indicators of all singletons.
  static TestFamily canonical(SpacePtr space) {
    const std::size_t m = space->size();
    std::vector<std::vector<double>> fs;
    fs.emplace_back(m, 1.0);
    for (std::size_t z = 0; z < m; ++z) {
      std::vector<double> f(m, 0.0);
      f[z] = 1.0;
      fs.push_back(std::move(f));
    }
    return TestFamily(std::move(space), std::move(fs));
  }

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return functions_.size(); }
  std::span<const double> operator[](std::size_t k) const noexcept { return functions_[k]; }
  const std::vector<std::vector<double>>& functions() const noexcept { return functions_; }

  /// 2^{-k}
  static double weight(std::size_t k) noexcept { return std::ldexp(1.0, -static_cast<int>(k)); }

private:
  std::size_t rank() const {
    std::vector<std::vector<double>> a = functions_;
    const std::size_t rows = a.size(), cols = space_->size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
      std::size_t piv = r;
      for (std::size_t i = r; i < rows; ++i)
        if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
      if (std::abs(a[piv][c]) < 1e-10) continue;
      std::swap(a[r], a[piv]);
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == r) continue;
        const double f = a[i][c] / a[r][c];
        for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
      }
      ++r;
    }
    return r;
  }

  SpacePtr space_;
  std::vector<std::vector<double>> functions_;
};

// ---------------------------------------------------------------------------
// Operations

inline double integrate(std::span<const double> weights, std::span<const double> f) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += f[i] * weights[i];
  return s;
}

/// mu[f] = sum_z f(z) mu({z}).
inline double integrate(const SignedMeasure& mu, std::span<const double> f) {
  if (f.size() != mu.size()) throw MismatchError("integrate: function and measure live on different spaces");
  return integrate(mu.weights(), f);
}

/// Hahn-Jordan decomposition (mu+, mu-).
inline std::pair<SignedMeasure, SignedMeasure> hahn_jordan(const SignedMeasure& mu) {
  std::vector<double> pos(mu.size()), neg(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    pos[i] = std::max(mu[i], 0.0);
    neg[i] = std::max(-mu[i], 0.0);
  }
  return {SignedMeasure(mu.space(), std::move(pos)), SignedMeasure(mu.space(), std::move(neg))};
}

inline double tv_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double tv_distance(const SignedMeasure& mu, const SignedMeasure& nu) {
  require_same_space(*mu.space(), *nu.space(), "tv_distance");
  return tv_distance(mu.weights(), nu.weights());
}

/// ||mu||_F = sum_k 2^{-k} |mu(f_k)|.
inline double f_norm(std::span<const double> weights, const TestFamily& fam) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < fam.size(); ++k) s += TestFamily::weight(k) * std::abs(integrate(weights, fam[k]));
  return s;
}

inline double f_norm(const SignedMeasure& mu, const TestFamily& fam) {
  require_same_space(*mu.space(), *fam.space(), "f_norm");
  return f_norm(mu.weights(), fam);
}

/// Result of a Levy-Prokhorov evaluation. When exact, lower == upper == value.
struct LpResult {
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool exact = true;
};

inline constexpr std::size_t kLpExactMaxPoints = 20;

namespace detail {

// For eps in the half-open level interval (d_k, d_{k+1}] the strict enlargement
// {z : d(z,U) < eps} equals the closed enlargement at radius d_k, so feasibility
// inside that interval reduces to eps >= g_k with
//   g_k = max_U max(mu(U) - nu(U^{(k)}), nu(U) - mu(U^{(k)})).
// The infimum is then min_k max(d_k, g_k); g_k is nonincreasing in k, which
// makes candidates from intervals where g_k overshoots harmless.
inline double lp_subset_scan(const DecorationSpace& space, std::span<const double> mu, std::span<const double> nu) {
  const std::size_t m = space.size();
  const std::size_t full = std::size_t{1} << m;
  thread_local std::vector<double> mu_sub, nu_sub;
  thread_local std::vector<std::uint32_t> ext;
  mu_sub.assign(full, 0.0);
  nu_sub.assign(full, 0.0);
  ext.assign(full, 0);
  for (std::size_t u = 1; u < full; ++u) {
    const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(u));
    const std::size_t rest = u & (u - 1);
    mu_sub[u] = mu_sub[rest] + mu[low];
    nu_sub[u] = nu_sub[rest] + nu[low];
  }
  const auto& levels = space.levels();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    double g = 0.0;
    for (std::size_t u = 1; u < full; ++u) {
      const std::size_t low = static_cast<std::size_t>(__builtin_ctzll(u));
      ext[u] = ext[u & (u - 1)] | static_cast<std::uint32_t>(space.ball(k, low));
      g = std::max(g, std::max(mu_sub[u] - nu_sub[ext[u]], nu_sub[u] - mu_sub[ext[u]]));
    }
    best = std::min(best, std::max(levels[k], g));
    if (g <= levels[k]) break;
  }
  return best;
}

// Same reduction restricted to a small family of subsets: singletons, their
// complements, Z, and greedily grown sets. Any restriction lowers every g_k,
// so the result is a valid lower bound.
inline double lp_greedy_lower(const DecorationSpace& space, std::span<const double> mu, std::span<const double> nu) {
  const std::size_t m = space.size();
  std::vector<std::vector<char>> family;
  for (std::size_t z = 0; z < m; ++z) {
    std::vector<char> s(m, 0), c(m, 1);
    s[z] = 1;
    c[z] = 0;
    family.push_back(std::move(s));
    family.push_back(std::move(c));
  }
  family.emplace_back(m, 1);
  for (int dir = 0; dir < 2; ++dir) {
    const auto& a = dir == 0 ? mu : nu;
    const auto& b = dir == 0 ? nu : mu;
    std::vector<char> s(m, 0);
    double gap = 0.0;
    for (std::size_t step = 0; step < m; ++step) {
      std::size_t pick = m;
      double pick_gap = gap;
      for (std::size_t z = 0; z < m; ++z)
        if (!s[z] && a[z] - b[z] > 0.0 && gap + a[z] - b[z] > pick_gap) {
          pick = z;
          pick_gap = gap + a[z] - b[z];
        }
      if (pick == m) break;
      s[pick] = 1;
      gap = pick_gap;
      family.push_back(s);
    }
  }
  const auto& levels = space.levels();
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> ext(m);
  for (std::size_t k = 0; k < levels.size(); ++k) {
    double g = 0.0;
    for (const auto& s : family) {
      double ms = 0.0, ns = 0.0, me = 0.0, ne = 0.0;
      for (std::size_t z = 0; z < m; ++z) {
        ext[z] = 0;
        for (std::size_t w = 0; w < m && !ext[z]; ++w)
          if (s[w] && space.dist(z, w) <= levels[k]) ext[z] = 1;
        if (s[z]) {
          ms += mu[z];
          ns += nu[z];
        }
        if (ext[z]) {
          me += mu[z];
          ne += nu[z];
        }
      }
      g = std::max(g, std::max(ms - ne, ns - me));
    }
    best = std::min(best, std::max(levels[k], g));
    if (g <= levels[k]) break;
  }
  return best;
}

} // namespace detail

/// Levy-Prokhorov distance between nonnegative measures given as raw weights.
/// Exact (subset scan) for at most 20 points; otherwise returns enclosing bounds
/// with exact = false and value = upper bound.
inline LpResult lp_distance(const DecorationSpace& space, std::span<const double> mu, std::span<const double> nu) {
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] < 0.0 || nu[i] < 0.0) throw DomainError("lp_distance is defined on nonnegative measures only");
  if (space.size() <= kLpExactMaxPoints) {
    const double v = detail::lp_subset_scan(space, mu, nu);
    return {v, v, v, true};
  }
  double mass_mu = 0.0, mass_nu = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mass_mu += mu[i];
    mass_nu += nu[i];
  }
  const double upper = std::min(tv_distance(mu, nu), std::max(mass_mu, mass_nu));
  const double lower = std::min(upper, detail::lp_greedy_lower(space, mu, nu));
  return {upper, lower, upper, false};
}

inline LpResult lp_distance(const SignedMeasure& mu, const SignedMeasure& nu) {
  require_same_space(*mu.space(), *nu.space(), "lp_distance");
  return lp_distance(*mu.space(), mu.weights(), nu.weights());
}

} // namespace pgraphon
