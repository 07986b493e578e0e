#pragma once

// Quotients W/P of step kernels, the d_1 and d_box metrics on vertex-weighted
// measure-decorated graphs, finite quotient clouds and Hausdorff distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pgraphon/error.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/metrics.hpp"
#include "pgraphon/rng.hpp"
#include "pgraphon/search.hpp"

namespace pgraphon {

inline constexpr double kDegenerateMass = 1e-15;
inline constexpr double kCloudDedupTol = 1e-9;

/// Vertex weights alpha and edge decorations beta on [k]. Stored through the
/// blocks alpha_i alpha_j beta_ij = W(S_i x S_j; .), which is what both
/// metrics consume; beta_ij is the zero measure when alpha_i alpha_j = 0.
class Quotient {
public:
  Quotient(SpacePtr space, std::vector<double> alpha, std::vector<double> blocks)
      : space_(std::move(space)), alpha_(std::move(alpha)), blocks_(std::move(blocks)) {
    if (!space_) throw DomainError("quotient needs a decoration space");
    const std::size_t k = alpha_.size(), m = space_->size();
    if (k == 0) throw DomainError("quotient needs at least one class");
    if (blocks_.size() != k * k * m) throw MismatchError("quotient blocks have the wrong size");
    double s = 0.0;
    for (double a : alpha_) {
      if (a < -1e-12) throw DomainError("quotient weights must be nonnegative");
      s += a;
    }
    if (std::abs(s - 1.0) > 1e-9) throw DomainError("quotient weights must sum to 1");
  }

  std::size_t k() const noexcept { return alpha_.size(); }
  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  std::span<const double> block(std::size_t i, std::size_t j) const noexcept {
    const std::size_t m = space_->size();
    return {blocks_.data() + (i * k() + j) * m, m};
  }
  const std::vector<double>& blocks() const noexcept { return blocks_; }
  bool degenerate(std::size_t i) const noexcept { return alpha_[i] <= kDegenerateMass; }

  SignedMeasure beta(std::size_t i, std::size_t j) const {
    const double mass = alpha_[i] * alpha_[j];
    std::vector<double> w(space_->size(), 0.0);
    if (!degenerate(i) && !degenerate(j)) {
      auto b = block(i, j);
      for (std::size_t z = 0; z < w.size(); ++z) w[z] = b[z] / mass;
    }
    return SignedMeasure(space_, std::move(w));
  }

private:
  SpacePtr space_;
  std::vector<double> alpha_;
  std::vector<double> blocks_;
};

/// W/P for a fractional partition: rho(p, i) = lambda(part p intersected with S_i).
inline Quotient quotient(const StepKernel& w, const OverlapMatrix& rho) {
  const std::size_t m = w.parts(), k = rho.cols(), width = w.width();
  if (rho.rows() != m) throw MismatchError("quotient: overlap matrix needs one row per kernel part");
  auto rs = rho.row_sums();
  for (std::size_t p = 0; p < m; ++p)
    if (std::abs(rs[p] - w.part_size(p)) > 1e-9) throw DomainError("quotient: overlap rows must sum to the part sizes");
  std::vector<double> alpha = rho.col_sums();
  std::vector<double> blocks(k * k * width, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double* dst = blocks.data() + (i * k + j) * width;
      for (std::size_t p = 0; p < m; ++p) {
        if (rho(p, i) == 0.0) continue;
        for (std::size_t q = 0; q < m; ++q) {
          const double c = rho(p, i) * rho(q, j);
          if (c == 0.0) continue;
          auto e = w.entry(p, q);
          for (std::size_t z = 0; z < width; ++z) dst[z] += c * e[z];
        }
      }
    }
  return Quotient(w.space(), std::move(alpha), std::move(blocks));
}

/// Overlap matrix of a class assignment of the n cells of W's uniform refinement.
inline OverlapMatrix assignment_overlap(const std::vector<double>& part_sizes, std::size_t k, const std::vector<std::size_t>& labels) {
  const std::size_t n = labels.size();
  auto counts = grid_counts(part_sizes, n);
  if (counts.empty()) throw RefinementError("assignment length " + std::to_string(n) + " is not a grid carrying the part sizes");
  std::vector<double> rho(part_sizes.size() * k, 0.0);
  std::size_t cell = 0;
  for (std::size_t p = 0; p < counts.size(); ++p)
    for (std::size_t c = 0; c < counts[p]; ++c, ++cell) {
      if (labels[cell] >= k) throw DomainError("assignment label out of range");
      rho[p * k + labels[cell]] += 1.0 / static_cast<double>(n);
    }
  return OverlapMatrix(part_sizes.size(), k, std::move(rho));
}

inline Quotient quotient(const StepKernel& w, std::size_t k, const std::vector<std::size_t>& labels) {
  return quotient(w, assignment_overlap(w.part_sizes(), k, labels));
}

namespace detail {

inline void check_pair(const Quotient& a, const Quotient& b, const char* what) {
  if (a.k() != b.k()) throw MismatchError(std::string(what) + ": quotients have different numbers of classes");
  require_same_space(*a.space(), *b.space(), what);
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double lp_blocks(const DecorationSpace& space, std::span<const double> a, std::span<const double> b) {
  thread_local std::vector<double> x, y;
  x.assign(a.begin(), a.end());
  y.assign(b.begin(), b.end());
  for (double& v : x) v = std::max(0.0, v);
  for (double& v : y) v = std::max(0.0, v);
  return lp_distance(space, x, y).value;
}

} // namespace detail

/// d_1 = ||alpha - alpha'||_1 + sum_{i,j} d_LP(alpha_i alpha_j beta_ij, alpha'_i alpha'_j beta'_ij).
inline double d1_quotient(const Quotient& a, const Quotient& b) {
  detail::check_pair(a, b, "d1_quotient");
  double s = detail::l1(a.alpha(), b.alpha());
  for (std::size_t i = 0; i < a.k(); ++i)
    for (std::size_t j = 0; j < a.k(); ++j) s += detail::lp_blocks(*a.space(), a.block(i, j), b.block(i, j));
  return s;
}

/// d_box = ||alpha - alpha'||_1 + sup_{S,T subset [k]} d_LP(sum_{S x T} blocks, sum_{S x T} blocks').
inline double dsquare_quotient(const Quotient& a, const Quotient& b, const Budget& budget = {}) {
  detail::check_pair(a, b, "dsquare_quotient");
  const std::size_t k = a.k(), m = a.space()->size();
  RectProblem pr;
  pr.parts = k;
  pr.width = 2 * m;
  pr.features.resize(k * k * 2 * m);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double* dst = pr.features.data() + (i * k + j) * 2 * m;
      auto x = a.block(i, j), y = b.block(i, j);
      std::copy(x.begin(), x.end(), dst);
      std::copy(y.begin(), y.end(), dst + m);
    }
  detail::LpEval eval(*a.space());
  const RectResult r = sup_rectangles(pr, eval, budget, budget.seed);
  return detail::l1(a.alpha(), b.alpha()) + std::max(0.0, r.value);
}

/// Both quotient metrics are exact when the space has at most 20 points and,
/// for d_box, when k fits the subset-pair enumeration.
inline bool quotient_metrics_exact(const Quotient& q, const Budget& budget = {}) {
  return q.space()->size() <= kLpExactMaxPoints && q.k() <= budget.exact_rect_parts;
}

enum class QuotientMetric { kD1, kDsquare };

inline double quotient_distance(const Quotient& a, const Quotient& b, QuotientMetric metric, const Budget& budget = {}) {
  return metric == QuotientMetric::kD1 ? d1_quotient(a, b) : dsquare_quotient(a, b, budget);
}

// ---------------------------------------------------------------------------
// Clouds

enum class CloudMode { kEnumerate, kSample };

struct CloudOptions {
  CloudMode mode = CloudMode::kEnumerate;
  std::size_t n = 0;          // grid; 0 picks the minimal grid of the kernel
  std::size_t count = 256;    // sample mode
  std::uint64_t seed = 1;     // sample mode
  std::vector<double> alpha;  // optional filter / sampling target
  std::uint64_t max_assignments = 1000000;
};

/// Finite stand-in for Q_k(W) (or Q_alpha(W) when alpha is set).
struct QuotientCloud {
  std::size_t k = 0;
  std::vector<Quotient> members;
  std::vector<std::vector<std::size_t>> labels; // class of every grid cell, per member
  std::string mode;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::uint64_t assignments = 0; // candidate partitions examined before deduplication
};

namespace detail {

inline bool alpha_matches(const std::vector<double>& a, const std::vector<double>& b) { return l1(a, b) <= 1e-9; }

// Adds q unless an existing member is within d_1 <= kCloudDedupTol. A d_LP
// below the smallest positive distance bounds every pointwise mass gap, so a
// large pointwise gap rules out a duplicate without computing d_1.
inline void add_member(QuotientCloud& cloud, Quotient q, std::vector<std::size_t> labels) {
  for (const auto& other : cloud.members) {
    if (!alpha_matches(other.alpha(), q.alpha())) continue;
    double gap = 0.0;
    for (std::size_t i = 0; i < q.blocks().size(); ++i) gap = std::max(gap, std::abs(q.blocks()[i] - other.blocks()[i]));
    if (gap > kCloudDedupTol) continue;
    if (d1_quotient(other, q) <= kCloudDedupTol) return;
  }
  cloud.members.push_back(std::move(q));
  cloud.labels.push_back(std::move(labels));
}

inline std::uint64_t power_capped(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && r > cap / base) return cap + 1;
    r *= base;
  }
  return r;
}

} // namespace detail

inline std::size_t cloud_grid(const StepKernel& w, const CloudOptions& opt) {
  if (opt.n) {
    if (grid_counts(w.part_sizes(), opt.n).empty())
      throw RefinementError("cloud grid n=" + std::to_string(opt.n) + " does not carry the kernel's part sizes");
    return opt.n;
  }
  return minimal_grid({w.part_sizes()});
}

/// Enumerate mode: every class assignment of the n grid cells, visited as
/// per-part class counts (cells of one part are interchangeable), subject to
/// k^n <= max_assignments. Sample mode: `count` seeded uniform assignments (with
/// class sizes alpha*n when alpha is given) plus every assignment that keeps
/// each kernel part inside one class. Members are deduplicated.
inline QuotientCloud quotient_cloud(const StepKernel& w, std::size_t k, const CloudOptions& opt = {}) {
  if (k == 0) throw DomainError("quotient_cloud: k must be positive");
  if (!opt.alpha.empty() && opt.alpha.size() != k) throw MismatchError("quotient_cloud: alpha must have k entries");
  const std::size_t n = cloud_grid(w, opt);
  const auto counts = grid_counts(w.part_sizes(), n);
  QuotientCloud cloud;
  cloud.k = k;
  cloud.n = n;
  cloud.seed = opt.seed;
  const std::size_t m = w.parts();
  auto build = [&](const std::vector<std::size_t>& labels) {
    Quotient q = quotient(w, k, labels);
    if (!opt.alpha.empty() && !detail::alpha_matches(q.alpha(), opt.alpha)) return;
    detail::add_member(cloud, std::move(q), labels);
  };
  if (opt.mode == CloudMode::kEnumerate) {
    cloud.mode = "enumerate";
    const std::uint64_t total = detail::power_capped(k, n, opt.max_assignments);
    if (total > opt.max_assignments)
      throw BudgetError("quotient_cloud: k^n = " + std::to_string(k) + "^" + std::to_string(n) + " exceeds " +
                        std::to_string(opt.max_assignments) + " assignments; use sample mode");
    cloud.assignments = total;
    // Per part, a composition of counts[p] into k classes.
    std::vector<std::vector<std::size_t>> comp(m, std::vector<std::size_t>(k, 0));
    std::vector<std::size_t> labels(n);
    auto emit = [&] {
      std::size_t cell = 0;
      for (std::size_t p = 0; p < m; ++p)
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t c = 0; c < comp[p][i]; ++c) labels[cell++] = i;
      build(labels);
    };
    auto rec = [&](auto&& self, std::size_t p, std::size_t i, std::size_t rem) -> void {
      if (p == m) {
        emit();
        return;
      }
      if (i + 1 == k) {
        comp[p][i] = rem;
        self(self, p + 1, 0, p + 1 < m ? counts[p + 1] : 0);
        return;
      }
      for (std::size_t v = 0; v <= rem; ++v) {
        comp[p][i] = v;
        self(self, p, i + 1, rem - v);
      }
    };
    rec(rec, 0, 0, counts[0]);
    return cloud;
  }
  cloud.mode = "sample";
  Rng rng(opt.seed);
  std::vector<std::size_t> target;
  if (!opt.alpha.empty()) {
    target = grid_counts(opt.alpha, n);
    if (target.empty()) throw RefinementError("quotient_cloud: alpha is not carried by the grid");
  }
  std::vector<std::size_t> labels(n);
  for (std::size_t s = 0; s < opt.count; ++s) {
    if (target.empty()) {
      for (auto& l : labels) l = rng.below(k);
    } else {
      std::size_t cell = 0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t c = 0; c < target[i]; ++c) labels[cell++] = i;
      rng.shuffle(labels);
    }
    ++cloud.assignments;
    build(labels);
  }
  if (detail::power_capped(k, m, 100000) <= 100000) {
    std::vector<std::size_t> part_class(m, 0);
    for (;;) {
      std::size_t cell = 0;
      for (std::size_t p = 0; p < m; ++p)
        for (std::size_t c = 0; c < counts[p]; ++c) labels[cell++] = part_class[p];
      ++cloud.assignments;
      build(labels);
      std::size_t p = 0;
      while (p < m && ++part_class[p] == k) part_class[p++] = 0;
      if (p == m) break;
    }
  }
  return cloud;
}

/// Two-sided Hausdorff distance between finite clouds.
inline double hausdorff(const QuotientCloud& a, const QuotientCloud& b, QuotientMetric metric, const Budget& budget = {}) {
  if (a.members.empty() || b.members.empty()) throw DomainError("hausdorff: clouds must be nonempty");
  if (a.k != b.k) throw MismatchError("hausdorff: clouds have different k");
  const std::size_t na = a.members.size(), nb = b.members.size();
  std::vector<double> d(na * nb);
  parallel_for(na, budget.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < nb; ++j) d[i * nb + j] = quotient_distance(a.members[i], b.members[j], metric, budget);
  });
  double ab = 0.0, ba = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb; ++j) best = std::min(best, d[i * nb + j]);
    ab = std::max(ab, best);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < na; ++i) best = std::min(best, d[i * nb + j]);
    ba = std::max(ba, best);
  }
  return std::max(ab, ba);
}

/// Overlap for class masses a_target obtained from rho by moving mass only out
/// of shrinking classes and only into growing ones, part by part, so every new
/// class contains or is contained in the old one.
inline OverlapMatrix rebalance_partition(const OverlapMatrix& rho, const std::vector<double>& a_target) {
  const std::size_t m = rho.rows(), k = rho.cols();
  if (a_target.size() != k) throw MismatchError("rebalance_partition: target has the wrong length");
  double total = 0.0;
  for (double a : a_target) {
    if (a < 0.0) throw DomainError("rebalance_partition: target must be nonnegative");
    total += a;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("rebalance_partition: target must sum to 1");
  const std::vector<double> a = rho.col_sums();
  std::vector<double> out(rho.values());
  std::vector<double> pool(m, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (a_target[i] >= a[i] || a[i] <= 0.0) continue;
    const double keep = a_target[i] / a[i];
    for (std::size_t p = 0; p < m; ++p) {
      const double release = rho(p, i) * (1.0 - keep);
      out[p * k + i] -= release;
      pool[p] += release;
    }
  }
  std::size_t p = 0;
  for (std::size_t j = 0; j < k; ++j) {
    double need = a_target[j] - a[j];
    while (need > 1e-15 && p < m) {
      const double take = std::min(need, pool[p]);
      out[p * k + j] += take;
      pool[p] -= take;
      need -= take;
      if (pool[p] <= 1e-15) ++p;
    }
  }
  return OverlapMatrix(m, k, std::move(out));
}

/// Cloud resolution slack: moving one grid cell between classes changes alpha
/// by 2/n in l1, hence d_1 by at most (1 + 2 s) 2/n and d_box by k^2 times that.
inline double grid_slack(std::size_t k, double sup_tv, std::size_t n) {
  return static_cast<double>(k * k) * (1.0 + 2.0 * sup_tv) * 2.0 / static_cast<double>(n);
}

struct MatchedClouds {
  QuotientCloud u, w;
  DeltaResult delta;
  double slack = 0.0;
};

/// Clouds of U and of W overlaid by a delta_box,LP certificate, generated
/// from the same cell assignments on the certificate's grid.
inline MatchedClouds matched_clouds(const StepKernel& u, const StepKernel& w, std::size_t k, const CloudOptions& opt, const DeltaResult& delta) {
  MatchedClouds out;
  out.delta = delta;
  const std::size_t n = out.delta.n;
  const StepKernel ur = uniform_refine(u, n);
  const StepKernel wr = relabel(uniform_refine(w, n), out.delta.certificate);
  out.u.k = out.w.k = k;
  out.u.n = out.w.n = n;
  out.u.seed = out.w.seed = opt.seed;
  std::vector<std::size_t> labels(n, 0);
  auto add = [&](const std::vector<std::size_t>& l) {
    out.u.members.push_back(quotient(ur, k, l));
    out.w.members.push_back(quotient(wr, k, l));
    out.u.labels.push_back(l);
    out.w.labels.push_back(l);
  };
  const std::uint64_t total = detail::power_capped(k, n, opt.max_assignments);
  if (opt.mode == CloudMode::kEnumerate && total <= opt.max_assignments) {
    out.u.mode = out.w.mode = "enumerate";
    for (;;) {
      add(labels);
      std::size_t i = 0;
      while (i < n && ++labels[i] == k) labels[i++] = 0;
      if (i == n) break;
    }
  } else {
    out.u.mode = out.w.mode = "sample";
    Rng rng(opt.seed);
    for (std::size_t s = 0; s < opt.count; ++s) {
      for (auto& l : labels) l = rng.below(k);
      add(labels);
    }
    // Contiguous blocks of cells: the partitions that resolve the kernels' own structure.
    for (std::size_t cut = 1; cut < n && k >= 2; ++cut) {
      for (std::size_t c = 0; c < n; ++c) labels[c] = c < cut ? 0 : 1;
      add(labels);
    }
  }
  out.u.assignments = out.w.assignments = out.u.members.size();
  out.slack = grid_slack(k, std::max(u.sup_norm(), w.sup_norm()), n);
  return out;
}

inline MatchedClouds matched_clouds(const StepKernel& u, const StepKernel& w, std::size_t k, const CloudOptions& opt, const Budget& budget = {},
                                    const Permutation* hint = nullptr) {
  return matched_clouds(u, w, k, opt, delta_cut(u, w, MetricChoice::lp(), budget, hint));
}

} // namespace pgraphon
