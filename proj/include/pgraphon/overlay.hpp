#pragma once

// Overlay functionals. For step inputs every objective is a quadratic form in
// the overlap of the partition (or relabelling) with the parts of the kernel,
// so the searches run over transportation polytopes and their integer points.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pgraphon/error.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/metrics.hpp"
#include "pgraphon/search.hpp"

namespace pgraphon {

struct OverlayResult {
  double value = 0.0;
  bool exact = true;
  Permutation certificate; // U-cell a is overlaid with W-cell certificate(a)
  std::size_t n = 0;
};

struct GraphOverlayResult {
  double value = 0.0;
  bool exact = true;
  OverlapMatrix rho{1, 1, {1.0}};
  std::size_t n = 0; // grid of the oracle tier, 0 when the ascent tier was used
  std::vector<std::string> warnings;
};

struct TruncatedOverlay {
  double value = 0.0;
  double error_bound = 0.0;
  bool exact = true;
};

/// Q(rho) = sum_{i,j} sum_{p,q} rho_{p,i} rho_{q,j} W(p,q; beta_ij).
inline double overlay_objective(const StepKernel& w, const CbGraph& g, const OverlapMatrix& rho) {
  const std::size_t m = w.parts(), k = g.k();
  double v = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const auto& beta = g.beta(i, j);
      if (!beta) continue;
      for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q) v += rho(p, i) * rho(q, j) * integrate(w.entry(p, q), *beta);
    }
  return v;
}

namespace detail {

// M[(p*k + i) * E + (q*k + j)] = W(p,q; beta_ij) * scale
inline std::vector<double> graph_overlay_matrix(const StepKernel& w, const CbGraph& g, double scale) {
  const std::size_t m = w.parts(), k = g.k(), E = m * k;
  std::vector<double> M(E * E, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const auto& beta = g.beta(i, j);
      if (!beta) continue;
      for (std::size_t p = 0; p < m; ++p)
        for (std::size_t q = 0; q < m; ++q) M[(p * k + i) * E + q * k + j] = scale * integrate(w.entry(p, q), *beta);
    }
  return M;
}

} // namespace detail

/// C(W, G^beta) = sup over partitions with class masses alpha(G).
/// Oracle tier: all partitions of the uniform n-grid (n = budget.grid, or the
/// minimal grid carrying both the part sizes and alpha), enumerated as count
/// tables; exact over that class. Ascent tier otherwise: multistart exchange
/// ascent on the transportation polytope, flagged inexact.
inline GraphOverlayResult overlay_graph(const StepKernel& w, const CbGraph& g, const Budget& budget = {}) {
  require_same_space(*w.space(), *g.space(), "overlay_graph");
  const std::size_t m = w.parts(), k = g.k();
  GraphOverlayResult out;
  std::size_t n = 0;
  std::vector<std::size_t> rows, cols;
  try {
    n = budget.grid ? budget.grid : minimal_grid({w.part_sizes(), g.alpha()});
    rows = grid_counts(w.part_sizes(), n);
    cols = grid_counts(g.alpha(), n);
    if (rows.empty() || cols.empty()) {
      out.warnings.push_back("grid n=" + std::to_string(n) + " does not carry the part sizes and alpha; using the ascent tier");
      n = 0;
    }
  } catch (const RefinementError& e) {
    out.warnings.push_back(std::string("no rational grid for the oracle tier (") + e.what() + "); using the ascent tier");
    n = 0;
  }
  if (n && count_tables(rows, cols, budget.exact_tables) <= budget.exact_tables) {
    QuadraticProblem qp;
    qp.rows = rows;
    qp.cols = cols;
    qp.maximize = true;
    qp.M = detail::graph_overlay_matrix(w, g, 1.0 / (static_cast<double>(n) * static_cast<double>(n)));
    TableResult t = quadratic_tables(qp, budget, budget.seed);
    std::vector<double> rho(m * k);
    for (std::size_t e = 0; e < m * k; ++e) rho[e] = static_cast<double>(t.table[e]) / static_cast<double>(n);
    out.value = t.value;
    out.exact = true;
    out.rho = OverlapMatrix(m, k, std::move(rho));
    out.n = n;
    return out;
  }
  const std::vector<double> M = detail::graph_overlay_matrix(w, g, 1.0);
  std::vector<std::vector<double>> seeds;
  if (n) {
    // Integer-point annealing on the grid supplies one more start.
    QuadraticProblem qp;
    qp.rows = rows;
    qp.cols = cols;
    qp.maximize = true;
    qp.M = detail::graph_overlay_matrix(w, g, 1.0 / (static_cast<double>(n) * static_cast<double>(n)));
    if (m * k <= 4096) {
      TableResult t = quadratic_tables(qp, budget, budget.seed);
      std::vector<double> rho(m * k);
      for (std::size_t e = 0; e < m * k; ++e) rho[e] = static_cast<double>(t.table[e]) / static_cast<double>(n);
      seeds.push_back(std::move(rho));
    }
  }
  TransportResult t = ascend_transport(w.part_sizes(), g.alpha(), M, budget, budget.seed, seeds);
  out.value = t.value;
  out.exact = false;
  out.rho = OverlapMatrix(m, k, std::move(t.rho));
  out.n = 0;
  return out;
}

namespace detail {

template <class Coef>
OverlayResult relabel_maximum(const StepKernel& u, std::size_t R, const std::vector<double>& w_sizes, Coef&& coef, const Budget& budget,
                              std::size_t cap) {
  const std::size_t n = minimal_grid({u.part_sizes(), w_sizes}, cap);
  const std::size_t P = u.parts(), E = P * R;
  QuadraticProblem qp;
  qp.rows = grid_counts(u.part_sizes(), n);
  qp.cols = grid_counts(w_sizes, n);
  qp.maximize = true;
  if (E > 4096) throw BudgetError("overlay search supports at most 4096 part pairs");
  qp.M.assign(E * E, 0.0);
  const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t q = 0; q < P; ++q)
        for (std::size_t s = 0; s < R; ++s) qp.M[(p * R + r) * E + q * R + s] = inv * coef(p, q, r, s);
  TableResult t = quadratic_tables(qp, budget, budget.seed);
  OverlayResult out;
  out.value = t.value;
  out.exact = t.exact;
  out.n = n;
  out.certificate = Permutation(table_to_image(qp.rows, qp.cols, t.table));
  return out;
}

} // namespace detail

/// C(U, W) = sup_pi integral of U(x,y)(W(pi x, pi y)) over bijections of the
/// common uniform refinement. Exact when the count tables fit the budget.
inline OverlayResult overlay_kernel(const StepKernel& u, const CbStepKernel& w, const Budget& budget = {},
                                    std::size_t denominator_cap = kDefaultDenominatorCap) {
  require_same_space(*u.space(), *w.space(), "overlay_kernel");
  return detail::relabel_maximum(
      u, w.parts(), w.part_sizes(), [&](std::size_t p, std::size_t q, std::size_t r, std::size_t s) { return integrate(u.entry(p, q), w.entry(r, s)); },
      budget, denominator_cap);
}

namespace detail {

inline OverlayResult f_overlay_upto(const StepKernel& u, const StepKernel& w, const TestFamily& fam, std::size_t last, const Budget& budget,
                                    std::size_t cap) {
  require_same_space(*u.space(), *w.space(), "f_overlay");
  require_same_space(*u.space(), *fam.space(), "f_overlay");
  const std::size_t P = u.parts(), R = w.parts(), K = std::min(last + 1, fam.size());
  std::vector<std::vector<double>> fu(P * P), fw(R * R);
  for (std::size_t i = 0; i < P * P; ++i) fu[i] = family_values(u.entry(i / P, i % P), fam);
  for (std::size_t i = 0; i < R * R; ++i) fw[i] = family_values(w.entry(i / R, i % R), fam);
  return relabel_maximum(
      u, R, w.part_sizes(),
      [&](std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
        double c = 0.0;
        for (std::size_t k = 0; k < K; ++k) c += TestFamily::weight(k) * fu[p * P + q][k] * fw[r * R + s][k];
        return c;
      },
      budget, cap);
}

} // namespace detail

/// C_F(U, W) = sup_pi sum_k 2^{-k} <U[f_k], W^pi[f_k]>.
inline OverlayResult f_overlay(const StepKernel& u, const StepKernel& w, const TestFamily& fam, const Budget& budget = {},
                               std::size_t denominator_cap = kDefaultDenominatorCap) {
  return detail::f_overlay_upto(u, w, fam, fam.size() - 1, budget, denominator_cap);
}

/// Sum truncated after f_N (f_0 included) with the enclosure
/// |C_F - value| <= q / N, q = sup||U||_TV sup||W||_TV.
inline TruncatedOverlay f_overlay_truncated(const StepKernel& u, const StepKernel& w, const TestFamily& fam, std::size_t N,
                                            const Budget& budget = {}, std::size_t denominator_cap = kDefaultDenominatorCap) {
  if (N == 0) throw DomainError("f_overlay_truncated: N must be at least 1");
  OverlayResult r = detail::f_overlay_upto(u, w, fam, N, budget, denominator_cap);
  const double q = u.sup_norm() * w.sup_norm();
  return {r.value, q / static_cast<double>(N), r.exact};
}

/// The C_b kernel sum_k 2^{-k} f_k W[f_k]; C(U, .) of it equals C_F(U, W).
inline CbStepKernel f_weighted_kernel(const StepKernel& w, const TestFamily& fam) {
  require_same_space(*w.space(), *fam.space(), "f_weighted_kernel");
  const std::size_t m = w.parts(), width = w.width();
  std::vector<double> d(m * m * width, 0.0);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q)
      for (std::size_t k = 0; k < fam.size(); ++k) {
        const double c = TestFamily::weight(k) * integrate(w.entry(p, q), fam[k]);
        for (std::size_t z = 0; z < width; ++z) d[(p * m + q) * width + z] += c * fam[k][z];
      }
  return CbStepKernel(w.space(), w.part_sizes(), std::move(d));
}

} // namespace pgraphon
