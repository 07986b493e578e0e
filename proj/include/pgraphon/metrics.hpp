#pragma once

// Cut norms, labelled cut distances and their unlabelled (relabelling
// minimized) versions between step kernels.
//
// Suprema over measurable S, T are taken over unions of parts: the real and F
// objectives are convex and the LP objective is quasi-convex in the fraction
// of each part included, so an optimum sits at a vertex of the fraction cube.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pgraphon/error.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/search.hpp"

namespace pgraphon {

struct CutResult {
  double value = 0.0;
  bool exact = true;
  std::vector<char> S, T; // maximizing unions of (aligned) parts
};

enum class CutMetric { kLp, kF };

/// Which d_box to use: Levy-Prokhorov, or the F-norm of a test family.
struct MetricChoice {
  CutMetric kind = CutMetric::kLp;
  const TestFamily* family = nullptr;

  static MetricChoice lp() { return {CutMetric::kLp, nullptr}; }
  static MetricChoice f(const TestFamily& fam) { return {CutMetric::kF, &fam}; }
};

struct DeltaResult {
  double value = 0.0;
  bool exact = true;
  Permutation certificate; // compare U-cell a with W-cell certificate(a)
  std::size_t n = 0;        // common uniform refinement
};

namespace detail {

/// d_LP between the two halves of acc; rounding noise below zero is clipped.
struct LpEval {
  explicit LpEval(const DecorationSpace& s) : space(&s), m(s.size()), a(m), b(m) {}
  double operator()(std::span<const double> acc) {
    for (std::size_t i = 0; i < m; ++i) {
      a[i] = std::max(0.0, acc[i]);
      b[i] = std::max(0.0, acc[m + i]);
    }
    if (m <= kLpExactMaxPoints) return lp_subset_scan(*space, a, b);
    exact = false;
    return lp_distance(*space, a, b).value;
  }
  const DecorationSpace* space;
  std::size_t m;
  std::vector<double> a, b;
  bool exact = true;
};

/// sum_k 2^{-k} |acc_k|
struct FEval {
  explicit FEval(std::size_t k) : weights(k) {
    for (std::size_t i = 0; i < k; ++i) weights[i] = TestFamily::weight(i);
  }
  double operator()(std::span<const double> acc) const {
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * std::abs(acc[i]);
    return s;
  }
  std::vector<double> weights;
  bool exact = true;
};

inline std::vector<double> family_values(std::span<const double> mu, const TestFamily& fam) {
  std::vector<double> v(fam.size());
  for (std::size_t k = 0; k < fam.size(); ++k) v[k] = integrate(mu, fam[k]);
  return v;
}

inline void require_nonnegative(const StepKernel& w, const char* what) {
  if (!w.is_nonnegative()) throw DomainError(std::string(what) + ": the Levy-Prokhorov cut distance needs nonnegative kernels");
}

inline std::size_t feature_width(const MetricChoice& metric, const DecorationSpace& space) {
  return metric.kind == CutMetric::kLp ? 2 * space.size() : metric.family->size();
}

// Features of the rectangle where U takes value u and W takes value w.
inline void rect_feature(const MetricChoice& metric, std::span<const double> u, std::span<const double> w, double scale, double* out) {
  if (metric.kind == CutMetric::kLp) {
    const std::size_t m = u.size();
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = scale * u[i];
      out[m + i] = scale * w[i];
    }
  } else {
    const TestFamily& fam = *metric.family;
    for (std::size_t k = 0; k < fam.size(); ++k) out[k] = scale * (integrate(u, fam[k]) - integrate(w, fam[k]));
  }
}

template <class Fn>
auto with_eval(const MetricChoice& metric, const DecorationSpace& space, Fn&& fn) {
  if (metric.kind == CutMetric::kLp) {
    LpEval eval(space);
    return fn(eval);
  }
  FEval eval(metric.family->size());
  return fn(eval);
}

inline void check_metric(const MetricChoice& metric, const StepKernel& u, const StepKernel& w, const char* what) {
  require_same_space(*u.space(), *w.space(), what);
  if (metric.kind == CutMetric::kLp) {
    require_nonnegative(u, what);
    require_nonnegative(w, what);
  } else {
    if (!metric.family) throw DomainError(std::string(what) + ": F metric needs a test family");
    require_same_space(*u.space(), *metric.family->space(), what);
  }
}

// ||A||_box for the m x m matrix of block integrals a(s,t) (already weighted
// by part sizes). Exact by enumerating S in Gray-code order with the optimal T
// per S; heuristic alternation beyond `exact_parts`.
inline CutResult cut_norm_matrix(std::size_t m, const std::vector<double>& a, std::size_t exact_parts, std::size_t restarts,
                                 std::uint64_t seed) {
  auto best_t = [&](const std::vector<double>& col, double& value, std::vector<char>& T) {
    double pos = 0.0, neg = 0.0;
    for (std::size_t t = 0; t < m; ++t) (col[t] > 0.0 ? pos : neg) += col[t];
    const bool use_pos = pos >= -neg;
    value = use_pos ? pos : -neg;
    T.assign(m, 0);
    for (std::size_t t = 0; t < m; ++t) T[t] = static_cast<char>(use_pos ? col[t] > 0.0 : col[t] < 0.0);
  };
  CutResult out;
  out.S.assign(m, 0);
  out.T.assign(m, 0);
  if (m == 0) return out;
  if (m <= exact_parts) {
    std::vector<double> col(m, 0.0);
    std::uint64_t gray = 0, best_mask = 0;
    double best = 0.0;
    const std::uint64_t full = std::uint64_t{1} << m;
    for (std::uint64_t i = 1; i < full; ++i) {
      const std::size_t bit = lowest_bit(i);
      gray ^= std::uint64_t{1} << bit;
      if ((i & 1023U) == 0) {
        std::fill(col.begin(), col.end(), 0.0);
        for (std::size_t s = 0; s < m; ++s)
          if ((gray >> s) & 1U)
            for (std::size_t t = 0; t < m; ++t) col[t] += a[s * m + t];
      } else {
        const double sign = ((gray >> bit) & 1U) ? 1.0 : -1.0;
        for (std::size_t t = 0; t < m; ++t) col[t] += sign * a[bit * m + t];
      }
      double pos = 0.0, neg = 0.0;
      for (std::size_t t = 0; t < m; ++t) (col[t] > 0.0 ? pos : neg) += col[t];
      const double v = std::max(pos, -neg);
      if (v > best) {
        best = v;
        best_mask = gray;
      }
    }
    out.S = mask_to_set(best_mask, m);
    std::vector<double> c(m, 0.0);
    for (std::size_t s = 0; s < m; ++s)
      if (out.S[s])
        for (std::size_t t = 0; t < m; ++t) c[t] += a[s * m + t];
    double v;
    best_t(c, v, out.T);
    out.value = best;
    return out;
  }
  // Alternating optimization: best T for S, then best S for T.
  out.exact = false;
  out.value = -1.0;
  Rng rng(seed);
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    std::vector<char> S(m), T;
    for (std::size_t s = 0; s < m; ++s) S[s] = r == 0 ? 1 : static_cast<char>(rng.below(2));
    double value = -1.0;
    for (int it = 0; it < 100; ++it) {
      std::vector<double> col(m, 0.0), row(m, 0.0);
      for (std::size_t s = 0; s < m; ++s)
        if (S[s])
          for (std::size_t t = 0; t < m; ++t) col[t] += a[s * m + t];
      double vt;
      best_t(col, vt, T);
      for (std::size_t s = 0; s < m; ++s)
        for (std::size_t t = 0; t < m; ++t)
          if (T[t]) row[s] += a[s * m + t];
      double vs;
      std::vector<char> S2;
      best_t(row, vs, S2);
      if (vs <= value + 1e-15) break;
      value = vs;
      S = std::move(S2);
    }
    if (value > out.value) {
      out.value = value;
      out.S = S;
      out.T = T;
      // T is the maximizer for the previous S; recompute it for the final S.
      std::vector<double> col(m, 0.0);
      for (std::size_t s = 0; s < m; ++s)
        if (S[s])
          for (std::size_t t = 0; t < m; ++t) col[t] += a[s * m + t];
      double vt;
      best_t(col, vt, out.T);
      out.value = std::max(value, vt);
    }
  }
  return out;
}

inline std::vector<double> block_matrix(const RealStepKernel& w) {
  const std::size_t m = w.parts();
  std::vector<double> a(m * m);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = 0; t < m; ++t) a[s * m + t] = w.part_size(s) * w.part_size(t) * w.value(s, t);
  return a;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Labelled distances

/// ||w||_box = sup_{S,T} |int_{S x T} w|.
inline CutResult cut_norm_real(const RealStepKernel& w, const Budget& budget = {}) {
  return detail::cut_norm_matrix(w.parts(), detail::block_matrix(w), budget.exact_cut_parts, budget.local_restarts, budget.seed);
}

/// Labelled d_box between two kernels, re-expressed on their common refinement.
inline CutResult cut_dist(const StepKernel& u0, const StepKernel& w0, const MetricChoice& metric, const Budget& budget = {}) {
  detail::check_metric(metric, u0, w0, "cut distance");
  auto [u, w] = align(u0, w0);
  const std::size_t m = u.parts();
  RectProblem pr;
  pr.parts = m;
  pr.width = detail::feature_width(metric, *u.space());
  pr.features.resize(m * m * pr.width);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q)
      detail::rect_feature(metric, u.entry(p, q), w.entry(p, q), u.part_size(p) * u.part_size(q),
                           pr.features.data() + (p * m + q) * pr.width);
  return detail::with_eval(metric, *u.space(), [&](auto& eval) {
    RectResult r = sup_rectangles(pr, eval, budget, budget.seed);
    return CutResult{std::max(0.0, r.value), r.exact && eval.exact, std::move(r.S), std::move(r.T)};
  });
}

inline CutResult cut_dist_lp(const StepKernel& u, const StepKernel& w, const Budget& budget = {}) {
  return cut_dist(u, w, MetricChoice::lp(), budget);
}

inline CutResult cut_dist_f(const StepKernel& u, const StepKernel& w, const TestFamily& fam, const Budget& budget = {}) {
  return cut_dist(u, w, MetricChoice::f(fam), budget);
}

/// ||W||_{box,F} = d_{box,F}(W, 0).
inline CutResult cut_norm_f(const StepKernel& w, const TestFamily& fam, const Budget& budget = {}) {
  StepKernel zero(w.space(), w.part_sizes(), std::vector<double>(w.data().size(), 0.0));
  return cut_dist_f(w, zero, fam, budget);
}

// ---------------------------------------------------------------------------
// Unlabelled distances

namespace detail {

struct Grid {
  std::size_t n = 0;
  std::vector<std::size_t> u_count, w_count;
};

template <class A, class B>
Grid common_grid(const GridKernel<A>& u, const GridKernel<B>& w, std::size_t cap) {
  Grid g;
  g.n = minimal_grid({u.part_sizes(), w.part_sizes()}, cap);
  g.u_count = grid_counts(u.part_sizes(), g.n);
  g.w_count = grid_counts(w.part_sizes(), g.n);
  return g;
}

// Scalar signature of every part: sum_q lambda_q <c, entry(p, q)> with a fixed
// increasing weight vector c. Used to seed heuristic searches by sorting.
template <class Tag>
std::vector<double> part_signature(const GridKernel<Tag>& w) {
  const std::size_t m = w.parts(), width = w.width();
  std::vector<double> sig(m, 0.0);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      auto e = w.entry(p, q);
      for (std::size_t z = 0; z < width; ++z)
        sig[p] += w.part_size(q) * static_cast<double>(z + 1) / static_cast<double>(width) * e[z];
    }
  return sig;
}

// Table obtained by matching cells in signature order.
template <class A, class B>
std::vector<std::size_t> signature_table(const GridKernel<A>& u, const GridKernel<B>& w, const Grid& g) {
  auto su = part_signature(u), sw = part_signature(w);
  std::vector<std::size_t> ucell = cell_parts(g.u_count), wcell = cell_parts(g.w_count);
  std::vector<std::size_t> uo(g.n), wo(g.n);
  std::iota(uo.begin(), uo.end(), std::size_t{0});
  std::iota(wo.begin(), wo.end(), std::size_t{0});
  std::stable_sort(uo.begin(), uo.end(), [&](std::size_t a, std::size_t b) { return su[ucell[a]] < su[ucell[b]]; });
  std::stable_sort(wo.begin(), wo.end(), [&](std::size_t a, std::size_t b) { return sw[wcell[a]] < sw[wcell[b]]; });
  std::vector<std::size_t> image(g.n);
  for (std::size_t i = 0; i < g.n; ++i) image[uo[i]] = wo[i];
  return image_to_table(g.u_count, g.w_count, image);
}

inline AssignmentProblem assignment_problem(const StepKernel& u, const StepKernel& w, const Grid& g, const MetricChoice& metric) {
  AssignmentProblem prob;
  prob.u_count = g.u_count;
  prob.w_count = g.w_count;
  prob.width = feature_width(metric, *u.space());
  const std::size_t P = u.parts(), R = w.parts();
  const double size = static_cast<double>(P) * P * R * R * prob.width;
  if (size > 5e7) throw BudgetError("assignment feature table too large; coarsen the kernels");
  prob.features.resize(P * P * R * R * prob.width);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = 0; q < P; ++q)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t s = 0; s < R; ++s)
          rect_feature(metric, u.entry(p, q), w.entry(r, s), 1.0,
                       prob.features.data() + ((p * P + q) * R * R + r * R + s) * prob.width);
  return prob;
}

} // namespace detail

/// delta_box(U, W) = min over bijections of the common uniform refinement of
/// d_box(U, W^pi). Exact branch and bound up to budget.exact_cells cells,
/// annealing over contingency tables otherwise. `hint` seeds the first restart.
inline DeltaResult delta_cut(const StepKernel& u, const StepKernel& w, const MetricChoice& metric, const Budget& budget = {},
                             const Permutation* hint = nullptr, std::size_t denominator_cap = kDefaultDenominatorCap) {
  detail::check_metric(metric, u, w, "delta_cut");
  const detail::Grid g = detail::common_grid(u, w, denominator_cap);
  const AssignmentProblem prob = detail::assignment_problem(u, w, g, metric);
  DeltaResult out;
  out.n = g.n;
  TableResult t;
  bool evals_exact = true;
  if (g.n <= budget.exact_cells) {
    detail::with_eval(metric, *u.space(), [&](auto& eval) {
      CellSearch<std::remove_reference_t<decltype(eval)>> search(prob, eval);
      t = search.run();
      evals_exact = eval.exact;
      return 0;
    });
  } else {
    std::vector<std::size_t> init = hint ? image_to_table(g.u_count, g.w_count, hint->image()) : detail::signature_table(u, w, g);
    if (metric.kind == CutMetric::kLp)
      t = anneal_tables(prob, [&] { return detail::LpEval(*u.space()); }, budget, budget.seed, &init);
    else
      t = anneal_tables(prob, [&] { return detail::FEval(metric.family->size()); }, budget, budget.seed, &init);
  }
  out.value = std::max(0.0, t.value);
  out.exact = t.exact && evals_exact;
  out.certificate = Permutation(table_to_image(g.u_count, g.w_count, t.table));
  return out;
}

inline DeltaResult delta_cut_lp(const StepKernel& u, const StepKernel& w, const Budget& budget = {}) {
  return delta_cut(u, w, MetricChoice::lp(), budget);
}

inline DeltaResult delta_cut_f(const StepKernel& u, const StepKernel& w, const TestFamily& fam, const Budget& budget = {}) {
  return delta_cut(u, w, MetricChoice::f(fam), budget);
}

/// Squared F-weighted L2 norm sum_k 2^{-k} ||W[f_k]||_2^2.
inline double norm_2f_squared(const StepKernel& w, const TestFamily& fam) {
  require_same_space(*w.space(), *fam.space(), "norm_2f");
  double s = 0.0;
  for (std::size_t p = 0; p < w.parts(); ++p)
    for (std::size_t q = 0; q < w.parts(); ++q) {
      const double area = w.part_size(p) * w.part_size(q);
      for (std::size_t k = 0; k < fam.size(); ++k) {
        const double v = integrate(w.entry(p, q), fam[k]);
        s += TestFamily::weight(k) * area * v * v;
      }
    }
  return s;
}

/// delta_{2,F}(U, W) = min_pi (sum_k 2^{-k} ||U[f_k] - W^pi[f_k]||_2^2)^{1/2}.
inline DeltaResult delta_2f(const StepKernel& u, const StepKernel& w, const TestFamily& fam, const Budget& budget = {},
                            std::size_t denominator_cap = kDefaultDenominatorCap) {
  require_same_space(*u.space(), *w.space(), "delta_2f");
  require_same_space(*u.space(), *fam.space(), "delta_2f");
  const detail::Grid g = detail::common_grid(u, w, denominator_cap);
  const std::size_t P = u.parts(), R = w.parts(), E = P * R;
  const double inv = 1.0 / (static_cast<double>(g.n) * static_cast<double>(g.n));
  std::vector<std::vector<double>> fu(P * P), fw(R * R);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = 0; q < P; ++q) fu[p * P + q] = detail::family_values(u.entry(p, q), fam);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t s = 0; s < R; ++s) fw[r * R + s] = detail::family_values(w.entry(r, s), fam);
  QuadraticProblem qp;
  qp.rows = g.u_count;
  qp.cols = g.w_count;
  qp.maximize = false;
  qp.M.assign(E * E, 0.0);
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t q = 0; q < P; ++q)
        for (std::size_t s = 0; s < R; ++s) {
          double c = 0.0;
          const auto& a = fu[p * P + q];
          const auto& b = fw[r * R + s];
          for (std::size_t k = 0; k < fam.size(); ++k) c += TestFamily::weight(k) * (a[k] - b[k]) * (a[k] - b[k]);
          qp.M[(p * R + r) * E + q * R + s] = c * inv;
        }
  auto init = detail::signature_table(u, w, g);
  TableResult t = quadratic_tables(qp, budget, budget.seed, &init);
  DeltaResult out;
  out.n = g.n;
  out.value = std::sqrt(std::max(0.0, t.value));
  out.exact = t.exact;
  out.certificate = Permutation(table_to_image(g.u_count, g.w_count, t.table));
  return out;
}

inline constexpr double kDecomposedExhaustiveWork = 2e9;

/// delta_{box,N} = min_pi sum_i ||u_i - v_i^pi||_box for decomposed kernels
/// sum_i f_i u_i and sum_i f_i v_i. All u_i share one part structure, all v_i
/// another.
inline DeltaResult delta_cut_decomposed(const std::vector<RealStepKernel>& u, const std::vector<RealStepKernel>& v,
                                        const Budget& budget = {}, const Permutation* hint = nullptr,
                                        std::size_t denominator_cap = kDefaultDenominatorCap) {
  if (u.empty() || u.size() != v.size()) throw MismatchError("delta_cut_decomposed: component lists must be nonempty and of equal length");
  for (std::size_t i = 1; i < u.size(); ++i)
    if (!same_partition(u[i].part_sizes(), u[0].part_sizes()) || !same_partition(v[i].part_sizes(), v[0].part_sizes()))
      throw MismatchError("delta_cut_decomposed: components of one kernel must share their parts");
  const detail::Grid g = detail::common_grid(u[0], v[0], denominator_cap);
  const std::size_t P = u[0].parts(), R = v[0].parts();
  const double inv = 1.0 / (static_cast<double>(g.n) * static_cast<double>(g.n));
  Budget inner = budget;
  auto objective = [&](const std::vector<std::size_t>& N, bool final) -> std::pair<double, bool> {
    std::vector<std::size_t> bp, br;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t r = 0; r < R; ++r)
        if (N[p * R + r]) {
          bp.push_back(p);
          br.push_back(r);
        }
    const std::size_t m = bp.size();
    const std::size_t exact_parts = final ? budget.exact_cut_parts : std::min<std::size_t>(budget.exact_cut_parts, 14);
    double total = 0.0;
    bool exact = true;
    std::vector<double> a(m * m);
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t x = 0; x < m; ++x)
        for (std::size_t y = 0; y < m; ++y)
          a[x * m + y] = static_cast<double>(N[bp[x] * R + br[x]]) * static_cast<double>(N[bp[y] * R + br[y]]) * inv *
                         (u[i].value(bp[x], bp[y]) - v[i].value(br[x], br[y]));
      CutResult c = detail::cut_norm_matrix(m, a, exact_parts, final ? 2 * budget.local_restarts : 2, derive_seed(inner.seed, i, 7));
      total += c.value;
      exact = exact && c.exact;
    }
    return {total, exact};
  };
  // Exhaustive tables pay a full exact cut norm each; fall back to annealing
  // when tables * 2^blocks is out of reach.
  Budget search = budget;
  const std::size_t max_blocks = std::min(P * R, g.n);
  const double per_table = max_blocks <= budget.exact_cut_parts ? std::ldexp(static_cast<double>(max_blocks), static_cast<int>(max_blocks)) : 1e4;
  const double tables = static_cast<double>(count_tables(g.u_count, g.w_count, budget.exact_tables));
  if (tables * per_table * static_cast<double>(u.size()) > kDecomposedExhaustiveWork) search.exact_tables = 0;
  std::vector<std::size_t> init = hint ? image_to_table(g.u_count, g.w_count, hint->image()) : detail::signature_table(u[0], v[0], g);
  TableResult t = minimize_tables(g.u_count, g.w_count, objective, search, budget.seed, &init);
  DeltaResult out;
  out.n = g.n;
  out.value = t.value;
  out.exact = t.exact;
  out.certificate = Permutation(table_to_image(g.u_count, g.w_count, t.table));
  return out;
}

/// Components U[1_{z}] of a measure kernel on a finite space; with f_z the
/// point indicators, U = sum_z f_z U[1_{z}] is its Dirac decomposition.
inline std::vector<RealStepKernel> dirac_components(const StepKernel& w) {
  std::vector<RealStepKernel> out;
  const std::size_t m = w.width();
  for (std::size_t z = 0; z < m; ++z) {
    std::vector<double> f(m, 0.0);
    f[z] = 1.0;
    out.push_back(apply_function(w, f));
  }
  return out;
}

} // namespace pgraphon
