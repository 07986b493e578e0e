#pragma once

// Step kernels on [0,1]^2. The unit interval is split into consecutive parts
// S_1, ..., S_m of Lebesgue mass part_sizes[p]; a kernel is constant on every
// rectangle S_p x S_q. Three value types share one storage layout:
//   StepKernel      -- signed measures on Z        (width |Z|)
//   CbStepKernel    -- real functions on Z         (width |Z|)
//   RealStepKernel  -- real numbers                (width 1)

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgraphon/error.hpp"
#include "pgraphon/measure.hpp"

namespace pgraphon {

inline constexpr double kPartSumTol = 1e-12;
inline constexpr double kRationalTol = 1e-9;
inline constexpr std::size_t kDefaultDenominatorCap = 120;

struct MeasureValued {};
struct FunctionValued {};
struct RealValued {};

enum class KernelKind { kSigned, kNonnegative, kSubprobability, kProbability };

inline const char* to_string(KernelKind k) noexcept {
  switch (k) {
  case KernelKind::kSigned: return "signed";
  case KernelKind::kNonnegative: return "nonnegative";
  case KernelKind::kSubprobability: return "subprobability";
  case KernelKind::kProbability: return "probability";
  }
  return "signed";
}

template <class Tag>
class GridKernel {
public:
  static constexpr bool kHasSpace = !std::is_same_v<Tag, RealValued>;

  GridKernel() = default;

  /// data holds m*m*width values, entry (p,q) at offset (p*m+q)*width.
  GridKernel(SpacePtr space, std::vector<double> part_sizes, std::vector<double> data)
      : space_(std::move(space)), sizes_(std::move(part_sizes)), data_(std::move(data)) {
    if constexpr (kHasSpace) {
      if (!space_) throw DomainError("kernel needs a decoration space");
      width_ = space_->size();
    } else {
      width_ = 1;
    }
    const std::size_t m = sizes_.size();
    if (m == 0) throw DomainError("kernel needs at least one part");
    double total = 0.0;
    for (double s : sizes_) {
      if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("part sizes must be positive");
      total += s;
    }
    if (std::abs(total - 1.0) > kPartSumTol * static_cast<double>(m) && std::abs(total - 1.0) > kPartSumTol)
      throw DomainError("part sizes must sum to 1 (got " + std::to_string(total) + ")");
    if (data_.size() != m * m * width_)
      throw MismatchError("kernel data has " + std::to_string(data_.size()) + " values, expected " +
                          std::to_string(m * m * width_));
    for (double v : data_)
      if (!std::isfinite(v)) throw DomainError("kernel entries must be finite");
  }

  std::size_t parts() const noexcept { return sizes_.size(); }
  std::size_t width() const noexcept { return width_; }
  const std::vector<double>& part_sizes() const noexcept { return sizes_; }
  double part_size(std::size_t p) const noexcept { return sizes_[p]; }
  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<double>& data() const noexcept { return data_; }

  std::span<const double> entry(std::size_t p, std::size_t q) const noexcept {
    return {data_.data() + (p * parts() + q) * width_, width_};
  }

  double value(std::size_t p, std::size_t q) const noexcept
    requires std::is_same_v<Tag, RealValued>
  {
    return data_[p * parts() + q];
  }

  SignedMeasure measure(std::size_t p, std::size_t q) const
    requires std::is_same_v<Tag, MeasureValued>
  {
    auto e = entry(p, q);
    return SignedMeasure(space_, std::vector<double>(e.begin(), e.end()));
  }

  /// sup ||W(x,y)||_TV for measure kernels, sup ||W(x,y)||_inf for function kernels, sup |w| for real kernels.
  double sup_norm() const noexcept {
    double best = 0.0;
    for (std::size_t p = 0; p < parts(); ++p)
      for (std::size_t q = 0; q < parts(); ++q) {
        auto e = entry(p, q);
        double v = 0.0;
        for (double x : e) {
          if constexpr (std::is_same_v<Tag, MeasureValued>)
            v += std::abs(x);
          else
            v = std::max(v, std::abs(x));
        }
        best = std::max(best, v);
      }
    return best;
  }

  KernelKind kind() const noexcept
    requires std::is_same_v<Tag, MeasureValued>
  {
    bool nonneg = true, sub = true, prob = true;
    for (std::size_t p = 0; p < parts(); ++p)
      for (std::size_t q = 0; q < parts(); ++q) {
        double mass = 0.0;
        for (double x : entry(p, q)) {
          if (x < 0.0) nonneg = false;
          mass += x;
        }
        if (mass > 1.0 + kMeasureTol) sub = false;
        if (std::abs(mass - 1.0) > kMeasureTol) prob = false;
      }
    if (!nonneg) return KernelKind::kSigned;
    if (prob) return KernelKind::kProbability;
    if (sub) return KernelKind::kSubprobability;
    return KernelKind::kNonnegative;
  }

  bool is_nonnegative() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return x >= 0.0; });
  }

  GridKernel scaled(double c) const {
    std::vector<double> d(data_);
    for (double& x : d) x *= c;
    return GridKernel(space_, sizes_, std::move(d));
  }

private:
  SpacePtr space_;
  std::vector<double> sizes_;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

using StepKernel = GridKernel<MeasureValued>;
using CbStepKernel = GridKernel<FunctionValued>;
using RealStepKernel = GridKernel<RealValued>;

inline RealStepKernel make_real_kernel(std::vector<double> part_sizes, std::vector<std::vector<double>> values) {
  std::vector<double> d;
  for (const auto& row : values) {
    if (row.size() != part_sizes.size()) throw MismatchError("real kernel row length does not match part count");
    d.insert(d.end(), row.begin(), row.end());
  }
  if (values.size() != part_sizes.size()) throw MismatchError("real kernel row count does not match part count");
  return RealStepKernel(nullptr, std::move(part_sizes), std::move(d));
}

/// Kernel equal to the same measure/function on every rectangle.
template <class Tag>
GridKernel<Tag> constant_kernel(SpacePtr space, std::span<const double> value, std::vector<double> part_sizes = {1.0}) {
  const std::size_t m = part_sizes.size();
  std::vector<double> d;
  d.reserve(m * m * value.size());
  for (std::size_t i = 0; i < m * m; ++i) d.insert(d.end(), value.begin(), value.end());
  return GridKernel<Tag>(std::move(space), std::move(part_sizes), std::move(d));
}

template <class Tag>
void require_same_space(const GridKernel<Tag>& a, const GridKernel<Tag>& b, const char* what) {
  if constexpr (GridKernel<Tag>::kHasSpace) require_same_space(*a.space(), *b.space(), what);
}

inline bool same_partition(const std::vector<double>& a, const std::vector<double>& b, double tol = kPartSumTol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

template <class Tag>
GridKernel<Tag> operator+(const GridKernel<Tag>& a, const GridKernel<Tag>& b) {
  require_same_space(a, b, "kernel sum");
  if (!same_partition(a.part_sizes(), b.part_sizes())) throw MismatchError("kernel sum: part structures differ");
  std::vector<double> d(a.data());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += b.data()[i];
  return GridKernel<Tag>(a.space(), a.part_sizes(), std::move(d));
}

template <class Tag>
GridKernel<Tag> operator-(const GridKernel<Tag>& a, const GridKernel<Tag>& b) {
  return a + b.scaled(-1.0);
}

// ---------------------------------------------------------------------------
// Refinement

/// Replaces every part by the listed children. parent[c] is the original part
/// of new part c, sizes[c] its mass.
template <class Tag>
GridKernel<Tag> refine(const GridKernel<Tag>& w, const std::vector<std::size_t>& parent, std::vector<double> sizes) {
  const std::size_t n = parent.size(), width = w.width();
  std::vector<double> d;
  d.reserve(n * n * width);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      auto e = w.entry(parent[a], parent[b]);
      d.insert(d.end(), e.begin(), e.end());
    }
  return GridKernel<Tag>(w.space(), std::move(sizes), std::move(d));
}

/// Common refinement of two consecutive-interval partitions of [0,1].
struct PartitionOverlay {
  std::vector<double> sizes;
  std::vector<std::size_t> from_a, from_b;
};

inline PartitionOverlay overlay_partitions(const std::vector<double>& a, const std::vector<double>& b) {
  PartitionOverlay out;
  std::size_t i = 0, j = 0;
  double end_a = a[0], end_b = b[0], pos = 0.0;
  const double eps = 1e-12;
  while (i < a.size() && j < b.size()) {
    const double next = std::min(end_a, end_b);
    if (next - pos > eps || (i + 1 == a.size() && j + 1 == b.size())) {
      out.sizes.push_back(next - pos);
      out.from_a.push_back(i);
      out.from_b.push_back(j);
      pos = next;
    }
    const bool adv_a = end_a - next <= eps, adv_b = end_b - next <= eps;
    if (adv_a) {
      ++i;
      if (i < a.size()) end_a += a[i];
    }
    if (adv_b) {
      ++j;
      if (j < b.size()) end_b += b[j];
    }
    if (!adv_a && !adv_b) break;
  }
  // Renormalise the rounding residue so the refined kernel still sums to one.
  double total = std::accumulate(out.sizes.begin(), out.sizes.end(), 0.0);
  for (double& s : out.sizes) s /= total;
  return out;
}

/// Re-expresses both kernels on the common refinement of their partitions.
template <class TagA, class TagB>
std::pair<GridKernel<TagA>, GridKernel<TagB>> align(const GridKernel<TagA>& u, const GridKernel<TagB>& w) {
  if (same_partition(u.part_sizes(), w.part_sizes())) return {u, w};
  auto ov = overlay_partitions(u.part_sizes(), w.part_sizes());
  return {refine(u, ov.from_a, ov.sizes), refine(w, ov.from_b, ov.sizes)};
}

/// Smallest denominator q <= cap with |x - r/q| <= 1e-9, or 0 if none.
inline std::size_t rational_denominator(double x, std::size_t cap) {
  for (std::size_t q = 1; q <= cap; ++q)
    if (std::abs(x * static_cast<double>(q) - std::round(x * static_cast<double>(q))) <= kRationalTol * static_cast<double>(q))
      return q;
  return 0;
}

/// Minimal n such that every size is a multiple of 1/n; throws if some size is
/// not rational with denominator <= cap or the lcm exceeds cap.
inline std::size_t minimal_grid(const std::vector<std::vector<double>>& size_lists, std::size_t cap = kDefaultDenominatorCap) {
  std::size_t n = 1;
  for (const auto& sizes : size_lists)
    for (double s : sizes) {
      const std::size_t q = rational_denominator(s, cap);
      if (q == 0)
        throw RefinementError("part size " + std::to_string(s) + " is not rational with denominator <= " + std::to_string(cap));
      n = std::lcm(n, q);
      if (n > cap)
        throw RefinementError("no common uniform refinement within denominator cap " + std::to_string(cap) +
                              " (needs at least " + std::to_string(n) + ")");
    }
  return n;
}

/// Cell counts per part on the uniform n-grid.
inline std::vector<std::size_t> grid_counts(const std::vector<double>& sizes, std::size_t n) {
  std::vector<std::size_t> c(sizes.size());
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    const double x = sizes[p] * static_cast<double>(n);
    if (std::abs(x - std::round(x)) > kRationalTol * static_cast<double>(n)) return {};
    c[p] = static_cast<std::size_t>(std::llround(x));
  }
  return c;
}

/// Part index of every cell of the uniform n-refinement.
inline std::vector<std::size_t> cell_parts(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < counts.size(); ++p) out.insert(out.end(), counts[p], p);
  return out;
}

/// Refines W to n parts of size 1/n. Entries are replicated, so the result is
/// weakly isomorphic to W.
template <class Tag>
GridKernel<Tag> uniform_refine(const GridKernel<Tag>& w, std::size_t n) {
  if (n == 0) throw RefinementError("uniform_refine: n must be positive");
  auto counts = grid_counts(w.part_sizes(), n);
  if (counts.empty()) {
    std::size_t minimal = 0;
    try {
      minimal = minimal_grid({w.part_sizes()}, 1000000);
    } catch (const RefinementError&) {
    }
    throw RefinementError("uniform_refine: part sizes are not multiples of 1/" + std::to_string(n) +
                          (minimal ? "; minimal compatible n is " + std::to_string(minimal) : std::string("; part sizes are not rational")));
  }
  return refine(w, cell_parts(counts), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// Relabelling

/// Permutation of the cells of a uniform refinement. W^pi(a,b) = W(pi(a), pi(b)).
class Permutation {
public:
  Permutation() = default;
  explicit Permutation(std::vector<std::size_t> image) : image_(std::move(image)) {
    std::vector<char> seen(image_.size(), 0);
    for (std::size_t v : image_) {
      if (v >= image_.size() || seen[v]) throw DomainError("permutation image is not a bijection of [n]");
      seen[v] = 1;
    }
  }
  static Permutation identity(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return Permutation(std::move(v));
  }
  std::size_t size() const noexcept { return image_.size(); }
  std::size_t operator()(std::size_t a) const noexcept { return image_[a]; }
  const std::vector<std::size_t>& image() const noexcept { return image_; }
  Permutation inverse() const {
    std::vector<std::size_t> inv(image_.size());
    for (std::size_t a = 0; a < image_.size(); ++a) inv[image_[a]] = a;
    return Permutation(std::move(inv));
  }
  /// (this o other)(a) = this(other(a))
  Permutation compose(const Permutation& other) const {
    std::vector<std::size_t> v(image_.size());
    for (std::size_t a = 0; a < v.size(); ++a) v[a] = image_[other(a)];
    return Permutation(std::move(v));
  }
  bool operator==(const Permutation&) const = default;

private:
  std::vector<std::size_t> image_;
};

template <class Tag>
GridKernel<Tag> relabel(const GridKernel<Tag>& w, const Permutation& pi) {
  const std::size_t n = w.parts();
  if (pi.size() != n) throw MismatchError("relabel: permutation size does not match part count");
  for (std::size_t p = 1; p < n; ++p)
    if (std::abs(w.part_size(p) - w.part_size(0)) > kPartSumTol)
      throw MismatchError("relabel: kernel must have equal parts (uniform_refine first)");
  std::vector<double> d;
  d.reserve(w.data().size());
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      auto e = w.entry(pi(a), pi(b));
      d.insert(d.end(), e.begin(), e.end());
    }
  return GridKernel<Tag>(w.space(), w.part_sizes(), std::move(d));
}

/// Nonnegative m x m' matrix with row sums rows and column sums cols. Also
/// serves as the overlap matrix rho of a partition against a kernel's parts.
class Coupling {
public:
  Coupling(std::size_t rows, std::size_t cols, std::vector<double> values) : rows_(rows), cols_(cols), v_(std::move(values)) {
    if (v_.size() != rows * cols) throw MismatchError("coupling has wrong number of entries");
    for (double x : v_)
      if (!(x >= -kRationalTol) || !std::isfinite(x)) throw DomainError("coupling entries must be nonnegative");
    for (double& x : v_) x = std::max(x, 0.0);
  }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return v_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) noexcept { return v_[r * cols_ + c]; }
  const std::vector<double>& values() const noexcept { return v_; }
  std::vector<double> row_sums() const {
    std::vector<double> s(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) s[r] += (*this)(r, c);
    return s;
  }
  std::vector<double> col_sums() const {
    std::vector<double> s(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) s[c] += (*this)(r, c);
    return s;
  }
  bool has_marginals(const std::vector<double>& row, const std::vector<double>& col, double tol = 1e-9) const {
    auto rs = row_sums(), cs = col_sums();
    if (rs.size() != row.size() || cs.size() != col.size()) return false;
    for (std::size_t i = 0; i < rs.size(); ++i)
      if (std::abs(rs[i] - row[i]) > tol) return false;
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (std::abs(cs[i] - col[i]) > tol) return false;
    return true;
  }

private:
  std::size_t rows_, cols_;
  std::vector<double> v_;
};

using OverlapMatrix = Coupling;

// ---------------------------------------------------------------------------
// Decorated graphs

/// C_b(Z)-decorated graph on k vertices. beta(i,j) is either a function on Z
/// (edge present) or absent (the zero marker).
class CbGraph {
public:
  CbGraph(SpacePtr space, std::size_t k, std::vector<double> alpha = {})
      : space_(std::move(space)), k_(k), beta_(k * k), alpha_(std::move(alpha)) {
    if (!space_) throw DomainError("decorated graph needs a decoration space");
    if (k_ == 0) throw DomainError("decorated graph needs at least one vertex");
    if (alpha_.empty()) alpha_.assign(k_, 1.0 / static_cast<double>(k_));
    if (alpha_.size() != k_) throw MismatchError("vertex weights must have length k");
    double s = 0.0;
    for (double a : alpha_) {
      if (!(a >= 0.0)) throw DomainError("vertex weights must be nonnegative");
      s += a;
    }
    if (std::abs(s - 1.0) > 1e-9) throw DomainError("vertex weights must sum to 1");
  }

  void set_edge(std::size_t i, std::size_t j, std::vector<double> f) {
    if (i >= k_ || j >= k_) throw DomainError("edge endpoint out of range");
    if (f.size() != space_->size()) throw MismatchError("edge decoration has wrong length");
    if (std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; })) {
      beta_[i * k_ + j].reset();
      return;
    }
    beta_[i * k_ + j] = std::move(f);
  }

  std::size_t k() const noexcept { return k_; }
  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  bool has_edge(std::size_t i, std::size_t j) const noexcept { return beta_[i * k_ + j].has_value(); }
  const std::optional<std::vector<double>>& beta(std::size_t i, std::size_t j) const noexcept { return beta_[i * k_ + j]; }

private:
  SpacePtr space_;
  std::size_t k_;
  std::vector<std::optional<std::vector<double>>> beta_;
  std::vector<double> alpha_;
};

// ---------------------------------------------------------------------------
// Operations

/// Two-point probability kernel W = w delta_1 + (1 - w) delta_0.
inline StepKernel from_real_graphon(const RealStepKernel& w) {
  std::vector<double> d;
  d.reserve(w.data().size() * 2);
  for (double v : w.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("from_real_graphon: values must lie in [0,1]");
    d.push_back(1.0 - v);
    d.push_back(v);
  }
  return StepKernel(DecorationSpace::two_point(), w.part_sizes(), std::move(d));
}

/// W[f](x,y) = W(x,y; f).
inline RealStepKernel apply_function(const StepKernel& w, std::span<const double> f) {
  if (f.size() != w.width()) throw MismatchError("apply_function: function and kernel live on different spaces");
  const std::size_t m = w.parts();
  std::vector<double> d(m * m);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) d[p * m + q] = integrate(w.entry(p, q), f);
  return RealStepKernel(nullptr, w.part_sizes(), std::move(d));
}

/// W(S x T; .) where S, T take fraction s[p], t[q] of each part.
inline SignedMeasure block_integral(const StepKernel& w, std::span<const double> s, std::span<const double> t) {
  const std::size_t m = w.parts();
  if (s.size() != m || t.size() != m) throw MismatchError("block_integral: fraction vectors must have one entry per part");
  std::vector<double> acc(w.width(), 0.0);
  for (std::size_t p = 0; p < m; ++p) {
    if (!(s[p] >= 0.0 && s[p] <= 1.0) || !(t[p] >= 0.0 && t[p] <= 1.0)) throw DomainError("block_integral: fractions must lie in [0,1]");
  }
  for (std::size_t p = 0; p < m; ++p) {
    if (s[p] == 0.0) continue;
    for (std::size_t q = 0; q < m; ++q) {
      if (t[q] == 0.0) continue;
      const double c = s[p] * t[q] * w.part_size(p) * w.part_size(q);
      auto e = w.entry(p, q);
      for (std::size_t z = 0; z < acc.size(); ++z) acc[z] += c * e[z];
    }
  }
  return SignedMeasure(w.space(), std::move(acc));
}

/// M_W = |W|([0,1]^2; .).
inline SignedMeasure aggregate_measure(const StepKernel& w) {
  const std::size_t m = w.parts();
  std::vector<double> acc(w.width(), 0.0);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const double c = w.part_size(p) * w.part_size(q);
      auto e = w.entry(p, q);
      for (std::size_t z = 0; z < acc.size(); ++z) acc[z] += c * std::abs(e[z]);
    }
  return SignedMeasure(w.space(), std::move(acc));
}

/// U(W)(x,y) = integral of W(x,y;.) against U(x,y;dz), on a common part structure.
inline RealStepKernel pair(const StepKernel& u, const CbStepKernel& w) {
  require_same_space(*u.space(), *w.space(), "pair");
  if (!same_partition(u.part_sizes(), w.part_sizes())) throw MismatchError("pair: part structures differ (refine first)");
  const std::size_t m = u.parts();
  std::vector<double> d(m * m);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) d[p * m + q] = integrate(u.entry(p, q), w.entry(p, q));
  return RealStepKernel(nullptr, u.part_sizes(), std::move(d));
}

/// W_G: intervals of lengths alpha (k equal intervals for the default weights),
/// entry (i,j) = beta_ij or the zero function.
inline CbStepKernel cb_graph_to_kernel(const CbGraph& g) {
  const std::size_t k = g.k(), width = g.space()->size();
  for (double a : g.alpha())
    if (!(a > 0.0)) throw DomainError("cb_graph_to_kernel: vertex weights must be positive");
  std::vector<double> d;
  d.reserve(k * k * width);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (const auto& f = g.beta(i, j))
        d.insert(d.end(), f->begin(), f->end());
      else
        d.insert(d.end(), width, 0.0);
    }
  return CbStepKernel(g.space(), g.alpha(), std::move(d));
}

/// Integral over [0,1]^2 of a real step kernel.
inline double total_integral(const RealStepKernel& w) {
  double s = 0.0;
  for (std::size_t p = 0; p < w.parts(); ++p)
    for (std::size_t q = 0; q < w.parts(); ++q) s += w.part_size(p) * w.part_size(q) * w.value(p, q);
  return s;
}

} // namespace pgraphon
