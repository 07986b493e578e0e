#pragma once

// Decorated random graphs G(n, U), empirical kernels and the convergence
// experiment that tracks distances, overlays and quotient clouds along n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pgraphon/error.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/metrics.hpp"
#include "pgraphon/overlay.hpp"
#include "pgraphon/quotients.hpp"
#include "pgraphon/rng.hpp"
#include "pgraphon/search.hpp"

namespace pgraphon {

inline constexpr double kSimplexTol = 1e-9;

/// U = sum_i f_i w_i with real step weights w_i >= 0, sum_i w_i <= 1. The
/// missing mass belongs to the zero function, which gets label size().
class DecomposedKernel {
public:
  DecomposedKernel(SpacePtr space, std::vector<std::vector<double>> functions, std::vector<RealStepKernel> weights)
      : space_(std::move(space)), f_(std::move(functions)), w_(std::move(weights)) {
    if (!space_) throw DomainError("decomposed kernel needs a decoration space");
    if (f_.empty() || f_.size() != w_.size()) throw MismatchError("decomposed kernel needs one weight kernel per function");
    for (const auto& f : f_)
      if (f.size() != space_->size()) throw MismatchError("decomposition function has the wrong length");
    for (const auto& w : w_)
      if (!same_partition(w.part_sizes(), w_[0].part_sizes())) throw MismatchError("decomposition weights must share their parts");
    const std::size_t m = w_[0].parts();
    for (std::size_t p = 0; p < m; ++p)
      for (std::size_t q = 0; q < m; ++q) {
        double s = 0.0;
        for (const auto& w : w_) {
          const double v = w.value(p, q);
          if (v < -kSimplexTol || v > 1.0 + kSimplexTol) throw DomainError("decomposition weights must lie in [0,1]");
          s += v;
        }
        if (s > 1.0 + kSimplexTol) throw DomainError("decomposition weights must sum to at most 1");
      }
  }

  std::size_t size() const noexcept { return f_.size(); }
  const SpacePtr& space() const noexcept { return space_; }
  const std::vector<std::vector<double>>& functions() const noexcept { return f_; }
  const std::vector<RealStepKernel>& weights() const noexcept { return w_; }
  const std::vector<double>& part_sizes() const noexcept { return w_[0].part_sizes(); }

  CbStepKernel to_cb_kernel() const {
    const std::size_t m = w_[0].parts(), width = space_->size();
    std::vector<double> d(m * m * width, 0.0);
    for (std::size_t i = 0; i < f_.size(); ++i)
      for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q)
          for (std::size_t z = 0; z < width; ++z) d[(p * m + q) * width + z] += w_[i].value(p, q) * f_[i][z];
    return CbStepKernel(space_, part_sizes(), std::move(d));
  }

private:
  SpacePtr space_;
  std::vector<std::vector<double>> f_;
  std::vector<RealStepKernel> w_;
};

/// f_z = 1_{z}, w_z = U[1_{z}].
inline DecomposedKernel dirac_decomposition(const StepKernel& u) {
  const std::size_t m = u.width();
  std::vector<std::vector<double>> f(m, std::vector<double>(m, 0.0));
  for (std::size_t z = 0; z < m; ++z) f[z][z] = 1.0;
  return DecomposedKernel(u.space(), std::move(f), dirac_components(u));
}

enum class LabelKind { kPoint, kFunction };

/// Labels index points of the space (kPoint) or decomposition functions, with
/// label == label_count - 1 the zero function (kFunction).
struct DecoratedSample {
  std::size_t n = 0;
  std::vector<double> x;
  std::vector<std::size_t> labels; // row-major n x n, diagonal included
  std::size_t label_count = 0;
  LabelKind kind = LabelKind::kPoint;
  SpacePtr space;
  std::uint64_t seed = 0;
  bool symmetric = false;

  std::size_t label(std::size_t j, std::size_t k) const noexcept { return labels[j * n + k]; }
};

namespace detail {

inline std::size_t part_of(const std::vector<double>& sizes, double x) {
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < sizes.size(); ++p) {
    acc += sizes[p];
    if (x < acc) return p;
  }
  return sizes.size() - 1;
}

// probs(p, q, i) for i < count; a draw past the cumulative total yields `fallback`.
// Positions come from the vertex stream unless `fixed_x` is given.
template <class Prob>
DecoratedSample sample_labels(std::size_t n, std::uint64_t seed, bool symmetric, const std::vector<double>& sizes, std::size_t count,
                              Prob&& probs, std::size_t fallback, const std::vector<double>* fixed_x = nullptr) {
  if (n == 0) throw DomainError("sample_graph: n must be positive");
  const KeyedRng rng(seed);
  DecoratedSample s;
  s.n = n;
  s.seed = seed;
  s.symmetric = symmetric;
  s.x.resize(n);
  std::vector<std::size_t> part(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.x[j] = fixed_x ? (*fixed_x)[j] : rng.uniform(KeyedRng::kVertex, j);
    if (!(s.x[j] >= 0.0 && s.x[j] <= 1.0)) throw DomainError("sample_graph: positions must lie in [0,1]");
    part[j] = part_of(sizes, s.x[j]);
  }
  s.labels.assign(n * n, 0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      if (symmetric && j < k) continue;
      const double u = rng.uniform(KeyedRng::kEdge, j, k);
      double acc = 0.0;
      std::size_t label = fallback;
      for (std::size_t i = 0; i < count; ++i) {
        acc += probs(part[j], part[k], i);
        if (u < acc) {
          label = i;
          break;
        }
      }
      s.labels[j * n + k] = label;
      if (symmetric) s.labels[k * n + j] = label;
    }
  return s;
}

inline DecoratedSample sample_point_labels(const StepKernel& u, std::size_t n, std::uint64_t seed, bool symmetric,
                                           const std::vector<double>* fixed_x) {
  const std::size_t m = u.width();
  std::vector<std::size_t> last(u.parts() * u.parts(), 0);
  for (std::size_t p = 0; p < u.parts(); ++p)
    for (std::size_t q = 0; q < u.parts(); ++q) {
      auto e = u.entry(p, q);
      double s = 0.0;
      for (std::size_t z = 0; z < m; ++z) {
        if (e[z] < -kSimplexTol) throw DomainError("sample_graph: kernel entries must be nonnegative");
        s += e[z];
        if (e[z] > 0.0) last[p * u.parts() + q] = z;
      }
      if (std::abs(s - 1.0) > kSimplexTol) throw DomainError("sample_graph: kernel entries must be probability measures");
    }
  // Rounding can leave a draw past the total; it goes to the last charged point.
  DecoratedSample s = sample_labels(
      n, seed, symmetric, u.part_sizes(), m + 1,
      [&](std::size_t p, std::size_t q, std::size_t i) { return i < m ? u.entry(p, q)[i] : 2.0; }, 0, fixed_x);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (s.labels[j * n + k] == m) {
        const std::size_t p = part_of(u.part_sizes(), s.x[j]), q = part_of(u.part_sizes(), s.x[k]);
        s.labels[j * n + k] = last[p * u.parts() + q];
      }
  s.label_count = m;
  s.kind = LabelKind::kPoint;
  s.space = u.space();
  return s;
}

inline DecoratedSample sample_function_labels(const DecomposedKernel& u, std::size_t n, std::uint64_t seed, bool symmetric,
                                              const std::vector<double>* fixed_x) {
  const std::size_t N = u.size();
  DecoratedSample s = sample_labels(
      n, seed, symmetric, u.part_sizes(), N, [&](std::size_t p, std::size_t q, std::size_t i) { return u.weights()[i].value(p, q); }, N,
      fixed_x);
  s.label_count = N + 1;
  s.kind = LabelKind::kFunction;
  s.space = u.space();
  return s;
}

} // namespace detail

/// G(n, U) for a probability step kernel on a finite space: labels are points.
/// Symmetric mode draws the pair {j, k} once, from the stream of (max, min).
inline DecoratedSample sample_graph(const StepKernel& u, std::size_t n, std::uint64_t seed, bool symmetric = false) {
  return detail::sample_point_labels(u, n, seed, symmetric, nullptr);
}

/// G(x, U): the same edge draws at given positions.
inline DecoratedSample sample_graph_at(const StepKernel& u, const std::vector<double>& x, std::uint64_t seed, bool symmetric = false) {
  return detail::sample_point_labels(u, x.size(), seed, symmetric, &x);
}

/// G(n, U) for U = sum_i f_i w_i: edge (j, k) carries f_i with probability
/// w_i(x_j, x_k) and the zero function with the remaining mass.
inline DecoratedSample sample_graph(const DecomposedKernel& u, std::size_t n, std::uint64_t seed, bool symmetric = false) {
  return detail::sample_function_labels(u, n, seed, symmetric, nullptr);
}

inline DecoratedSample sample_graph_at(const DecomposedKernel& u, const std::vector<double>& x, std::uint64_t seed, bool symmetric = false) {
  return detail::sample_function_labels(u, x.size(), seed, symmetric, &x);
}

/// Probability step kernel with n equal parts and Dirac entries at the labels.
inline StepKernel empirical_kernel(const DecoratedSample& s) {
  if (s.kind != LabelKind::kPoint) throw DomainError("empirical_kernel needs point labels; use empirical_cb_kernel");
  const std::size_t m = s.space->size();
  std::vector<double> d(s.n * s.n * m, 0.0);
  for (std::size_t e = 0; e < s.n * s.n; ++e) d[e * m + s.labels[e]] = 1.0;
  return StepKernel(s.space, std::vector<double>(s.n, 1.0 / static_cast<double>(s.n)), std::move(d));
}

/// Indicator kernels w_{H_i} of the label classes, one per label.
inline std::vector<RealStepKernel> empirical_components(const DecoratedSample& s) {
  std::vector<RealStepKernel> out;
  const std::vector<double> sizes(s.n, 1.0 / static_cast<double>(s.n));
  for (std::size_t i = 0; i < s.label_count; ++i) {
    std::vector<double> d(s.n * s.n, 0.0);
    for (std::size_t e = 0; e < s.n * s.n; ++e) d[e] = s.labels[e] == i ? 1.0 : 0.0;
    out.emplace_back(nullptr, sizes, std::move(d));
  }
  return out;
}

/// w_G = sum_i f_i w_{H_i} for a sample of a decomposed kernel.
inline CbStepKernel empirical_cb_kernel(const DecoratedSample& s, const DecomposedKernel& u) {
  if (s.kind != LabelKind::kFunction || s.label_count != u.size() + 1) throw MismatchError("empirical_cb_kernel: sample does not match decomposition");
  const std::size_t m = u.space()->size();
  std::vector<double> d(s.n * s.n * m, 0.0);
  for (std::size_t e = 0; e < s.n * s.n; ++e)
    if (s.labels[e] < u.size())
      for (std::size_t z = 0; z < m; ++z) d[e * m + z] = u.functions()[s.labels[e]][z];
  return CbStepKernel(u.space(), std::vector<double>(s.n, 1.0 / static_cast<double>(s.n)), std::move(d));
}

/// Maps the cell of every vertex to the U-cell of the same rank by position,
/// on a grid with `grid / n` cells per vertex.
inline Permutation position_hint(const std::vector<double>& x, std::size_t grid) {
  const std::size_t n = x.size();
  if (grid % n) throw RefinementError("position_hint: grid must be a multiple of the vertex count");
  const std::size_t per = grid / n;
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<std::size_t> image(grid);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t t = 0; t < per; ++t) image[order[r] * per + t] = r * per + t;
  return Permutation(std::move(image));
}

// ---------------------------------------------------------------------------
// Convergence experiment

struct ConvergenceConfig {
  std::vector<std::size_t> schedule{4, 8, 16, 32};
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  bool symmetric = false;
  Budget budget;
  std::vector<std::string> metrics{"delta_lp", "delta_n", "overlay_gap", "f_overlay_gap", "quotient_haus"};
  std::optional<CbGraph> graph;        // for overlay, overlay_gap
  std::optional<TestFamily> family;    // for f_overlay, f_overlay_gap; canonical if unset
  std::size_t quotient_k = 2;
  std::size_t cloud_count = 16;
};

struct ConvergenceRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::string metric;
  double value = 0.0;
  bool exact = true;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  std::map<std::string, double> limits; // values at U the gaps are measured against
  std::map<std::string, bool> limits_exact;
};

inline const std::vector<std::string>& known_convergence_metrics() {
  static const std::vector<std::string> names{"delta_lp", "delta_n", "overlay", "overlay_gap", "f_overlay", "f_overlay_gap", "quotient_haus"};
  return names;
}

/// Median over trials of one metric at one n.
inline double median_of(const ConvergenceReport& r, const std::string& metric, std::size_t n) {
  std::vector<double> v;
  for (const auto& row : r.rows)
    if (row.metric == metric && row.n == n) v.push_back(row.value);
  if (v.empty()) throw DomainError("median_of: no rows for metric " + metric + " at n=" + std::to_string(n));
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline ConvergenceReport convergence_run(const StepKernel& u, const ConvergenceConfig& cfg) {
  for (std::size_t i = 1; i < cfg.schedule.size(); ++i)
    if (cfg.schedule[i] <= cfg.schedule[i - 1]) throw DomainError("convergence_run: n_schedule must be strictly ascending");
  if (cfg.trials == 0) throw DomainError("convergence_run: trials must be positive");
  auto wants = [&](const char* name) { return std::find(cfg.metrics.begin(), cfg.metrics.end(), name) != cfg.metrics.end(); };
  for (const auto& name : cfg.metrics)
    if (std::find(known_convergence_metrics().begin(), known_convergence_metrics().end(), name) == known_convergence_metrics().end())
      throw DomainError("convergence_run: unknown metric " + name);
  if ((wants("overlay") || wants("overlay_gap")) && !cfg.graph) throw DomainError("convergence_run: overlay metrics need a decorated graph");
  const TestFamily fam = cfg.family ? *cfg.family : TestFamily::canonical(u.space());
  Budget inner = cfg.budget;
  inner.threads = 1;

  ConvergenceReport report;
  if (wants("overlay_gap")) {
    const GraphOverlayResult lim = overlay_graph(u, *cfg.graph, inner);
    report.limits["overlay"] = lim.value;
    report.limits_exact["overlay"] = lim.exact;
  }
  if (wants("f_overlay_gap")) {
    const OverlayResult lim = f_overlay(u, u, fam, inner);
    report.limits["f_overlay"] = lim.value;
    report.limits_exact["f_overlay"] = lim.exact;
  }
  const auto u_components = dirac_components(u);

  const std::size_t cells = cfg.schedule.size() * cfg.trials;
  std::vector<std::vector<ConvergenceRow>> slots(cells);
  parallel_for(cells, cfg.budget.threads, [&](std::size_t idx) {
    const std::size_t n = cfg.schedule[idx / cfg.trials], trial = idx % cfg.trials;
    const std::uint64_t seed = derive_seed(cfg.seed, n, trial);
    Budget b = inner;
    b.seed = derive_seed(seed, 0x5eed);
    const DecoratedSample s = sample_graph(u, n, seed, cfg.symmetric);
    const StepKernel un = empirical_kernel(s);
    auto& out = slots[idx];
    auto emit = [&](const char* metric, double v, bool exact) { out.push_back({n, trial, metric, v, exact}); };

    std::optional<DeltaResult> delta;
    std::optional<Permutation> hint;
    auto get_hint = [&]() -> const Permutation* {
      if (!hint) {
        const std::size_t grid = minimal_grid({un.part_sizes(), u.part_sizes()});
        if (grid % n == 0) hint = position_hint(s.x, grid);
      }
      return hint ? &*hint : nullptr;
    };
    if (wants("delta_lp") || wants("quotient_haus")) {
      delta = delta_cut(un, u, MetricChoice::lp(), b, get_hint());
      if (wants("delta_lp")) emit("delta_lp", delta->value, delta->exact);
    }
    if (wants("delta_n")) {
      const DeltaResult d = delta_cut_decomposed(empirical_components(s), u_components, b, get_hint());
      emit("delta_n", d.value, d.exact);
    }
    if (wants("overlay") || wants("overlay_gap")) {
      const GraphOverlayResult o = overlay_graph(un, *cfg.graph, b);
      if (wants("overlay")) emit("overlay", o.value, o.exact);
      if (wants("overlay_gap")) emit("overlay_gap", std::abs(o.value - report.limits["overlay"]), o.exact && report.limits_exact["overlay"]);
    }
    if (wants("f_overlay") || wants("f_overlay_gap")) {
      const OverlayResult o = f_overlay(un, u, fam, b);
      if (wants("f_overlay")) emit("f_overlay", o.value, o.exact);
      if (wants("f_overlay_gap"))
        emit("f_overlay_gap", std::abs(o.value - report.limits["f_overlay"]), o.exact && report.limits_exact["f_overlay"]);
    }
    if (wants("quotient_haus")) {
      CloudOptions opt;
      opt.mode = CloudMode::kSample;
      opt.count = cfg.cloud_count;
      opt.seed = derive_seed(seed, KeyedRng::kCloud);
      opt.max_assignments = 4096;
      const MatchedClouds mc = matched_clouds(un, u, cfg.quotient_k, opt, *delta);
      const double h = hausdorff(mc.u, mc.w, QuotientMetric::kDsquare, b);
      emit("quotient_haus", h, false);
    }
  });
  for (auto& v : slots)
    for (auto& row : v) report.rows.push_back(std::move(row));
  return report;
}

} // namespace pgraphon
