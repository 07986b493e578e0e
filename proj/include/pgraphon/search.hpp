#pragma once

// Combinatorial search engines shared by the metric and overlay modules.
//
//   sup_rectangles      max over subset pairs (S, T) of an objective of the
//                       aggregated block features sum_{s in S, t in T} f(s, t)
//   CellSearch          exact min over assignments of U-cells to W-parts of a
//                       rectangle supremum (branch and bound)
//   anneal_tables       heuristic version of the same over contingency tables
//   quadratic_tables    optimum of N^T M N over contingency tables N
//   ascend_transport    local maxima of rho^T M rho over a transportation polytope

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include "pgraphon/error.hpp"
#include "pgraphon/rng.hpp"

namespace pgraphon {

/// Effort limits and seeds for every search. Exact tiers are used whenever the
/// instance fits the corresponding limit; everything else is flagged inexact.
struct Budget {
  std::size_t exact_cells = 8;       // permutation branch and bound
  std::size_t exact_rect_parts = 12; // subset-pair enumeration
  std::size_t exact_cut_parts = 24;  // real cut norm, one-sided enumeration
  std::uint64_t exact_tables = 100000;
  std::size_t restarts = 4;
  std::size_t steps = 2000;
  std::size_t local_restarts = 6;
  std::size_t ascent_starts = 12;
  std::size_t grid = 0; // overlay_graph oracle resolution; 0 picks the minimal grid
  std::size_t threads = 1;
  std::uint64_t seed = 0x5eedULL;
};

/// Runs fn(0..count-1) on up to `threads` workers. Callers write results into
/// per-index slots, so the outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline std::size_t lowest_bit(std::uint64_t x) noexcept { return static_cast<std::size_t>(__builtin_ctzll(x)); }

// ---------------------------------------------------------------------------
// Rectangle suprema

/// features[(s * parts + t) * width + i]: i-th aggregated feature of block (s, t).
struct RectProblem {
  std::size_t parts = 0;
  std::size_t width = 0;
  std::vector<double> features;

  const double* at(std::size_t s, std::size_t t) const noexcept { return features.data() + (s * parts + t) * width; }
};

struct RectResult {
  double value = 0.0;
  std::vector<char> S, T;
  bool exact = true;
};

namespace detail {

inline std::vector<char> mask_to_set(std::uint64_t mask, std::size_t m) {
  std::vector<char> out(m, 0);
  for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<char>((mask >> i) & 1U);
  return out;
}

template <class Eval>
RectResult rect_exact(const RectProblem& pr, Eval& eval) {
  const std::size_t m = pr.parts, w = pr.width;
  const std::uint64_t full = std::uint64_t{1} << m;
  std::vector<double> row(m * w), acc(full * w, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  std::uint64_t best_s = 0, best_t = 0;
  for (std::uint64_t s_mask = 1; s_mask < full; ++s_mask) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t s = 0; s < m; ++s) {
      if (!((s_mask >> s) & 1U)) continue;
      for (std::size_t t = 0; t < m; ++t) {
        const double* f = pr.at(s, t);
        for (std::size_t i = 0; i < w; ++i) row[t * w + i] += f[i];
      }
    }
    for (std::uint64_t t_mask = 1; t_mask < full; ++t_mask) {
      const std::size_t low = lowest_bit(t_mask);
      const double* prev = acc.data() + (t_mask & (t_mask - 1)) * w;
      double* cur = acc.data() + t_mask * w;
      for (std::size_t i = 0; i < w; ++i) cur[i] = prev[i] + row[low * w + i];
      const double v = eval(std::span<const double>(cur, w));
      if (v > best) {
        best = v;
        best_s = s_mask;
        best_t = t_mask;
      }
    }
  }
  if (m == 0) best = 0.0;
  return {best, mask_to_set(best_s, m), mask_to_set(best_t, m), true};
}

// Best-improvement single-flip ascent from (S, T).
template <class Eval>
double rect_local(const RectProblem& pr, Eval& eval, std::vector<char>& S, std::vector<char>& T) {
  const std::size_t m = pr.parts, w = pr.width;
  std::vector<double> row(m * w, 0.0), col(m * w, 0.0), acc(w, 0.0), cand(w);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = 0; t < m; ++t) {
      const double* f = pr.at(s, t);
      for (std::size_t i = 0; i < w; ++i) {
        if (S[s]) row[t * w + i] += f[i];
        if (T[t]) col[s * w + i] += f[i];
        if (S[s] && T[t]) acc[i] += f[i];
      }
    }
  std::size_t s_size = static_cast<std::size_t>(std::count(S.begin(), S.end(), 1));
  std::size_t t_size = static_cast<std::size_t>(std::count(T.begin(), T.end(), 1));
  double cur = eval(std::span<const double>(acc));
  for (std::size_t sweep = 0; sweep < 64 * (m + 1); ++sweep) {
    double best = cur;
    std::size_t pick = 2 * m;
    for (std::size_t k = 0; k < 2 * m; ++k) {
      const bool is_s = k < m;
      const std::size_t idx = is_s ? k : k - m;
      const bool in = is_s ? S[idx] : T[idx];
      if (in && (is_s ? s_size : t_size) == 1) continue;
      const double* delta = is_s ? &col[idx * w] : &row[idx * w];
      for (std::size_t i = 0; i < w; ++i) cand[i] = in ? acc[i] - delta[i] : acc[i] + delta[i];
      const double v = eval(std::span<const double>(cand));
      if (v > best + 1e-15) {
        best = v;
        pick = k;
      }
    }
    if (pick == 2 * m) break;
    const bool is_s = pick < m;
    const std::size_t idx = is_s ? pick : pick - m;
    const double sign = (is_s ? S[idx] : T[idx]) ? -1.0 : 1.0;
    if (is_s) {
      for (std::size_t i = 0; i < w; ++i) acc[i] += sign * col[idx * w + i];
      for (std::size_t t = 0; t < m; ++t)
        for (std::size_t i = 0; i < w; ++i) row[t * w + i] += sign * pr.at(idx, t)[i];
      S[idx] = static_cast<char>(!S[idx]);
      s_size = sign > 0 ? s_size + 1 : s_size - 1;
    } else {
      for (std::size_t i = 0; i < w; ++i) acc[i] += sign * row[idx * w + i];
      for (std::size_t s = 0; s < m; ++s)
        for (std::size_t i = 0; i < w; ++i) col[s * w + i] += sign * pr.at(s, idx)[i];
      T[idx] = static_cast<char>(!T[idx]);
      t_size = sign > 0 ? t_size + 1 : t_size - 1;
    }
    cur = best;
  }
  return cur;
}

} // namespace detail

/// Supremum over nonempty S, T of eval(sum_{s in S, t in T} features(s, t)).
/// Exact enumeration when parts <= budget.exact_rect_parts; otherwise
/// single-flip local search from `warm` (if given), from S = T = all, and from
/// `restarts` random starts, flagged inexact.
template <class Eval>
RectResult sup_rectangles(const RectProblem& pr, Eval& eval, const Budget& budget, std::uint64_t seed,
                          const RectResult* warm = nullptr, std::size_t restarts = 0) {
  const std::size_t m = pr.parts;
  if (m <= budget.exact_rect_parts) return detail::rect_exact(pr, eval);
  if (restarts == 0) restarts = budget.local_restarts;
  Rng rng(seed);
  RectResult best{-std::numeric_limits<double>::infinity(), {}, {}, false};
  auto consider = [&](std::vector<char> S, std::vector<char> T) {
    const double v = detail::rect_local(pr, eval, S, T);
    if (v > best.value) best = {v, std::move(S), std::move(T), false};
  };
  if (warm && warm->S.size() == m && warm->T.size() == m &&
      std::count(warm->S.begin(), warm->S.end(), 1) > 0 && std::count(warm->T.begin(), warm->T.end(), 1) > 0)
    consider(warm->S, warm->T);
  consider(std::vector<char>(m, 1), std::vector<char>(m, 1));
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<char> S(m), T(m);
    for (std::size_t i = 0; i < m; ++i) {
      S[i] = static_cast<char>(rng.below(2));
      T[i] = static_cast<char>(rng.below(2));
    }
    S[rng.below(m)] = 1;
    T[rng.below(m)] = 1;
    consider(std::move(S), std::move(T));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Assignment problems
//
// U has n cells grouped into parts (u_part, nondecreasing); W has parts with
// w_count[r] cells. A bijection of cells matters only through which W-part each
// U-cell lands in, and cells of one U-part are interchangeable, so the search
// runs over contingency tables N[p][r].

/// feature(p, q, r, s, out) writes the per-unit-area features of a rectangle
/// where U has parts (p, q) and W has parts (r, s).
struct AssignmentProblem {
  std::vector<std::size_t> u_count;
  std::vector<std::size_t> w_count;
  std::size_t width = 0;
  std::vector<double> features; // ((p*P+q)*R*R + r*R+s)*width

  std::size_t cells() const noexcept { return std::accumulate(u_count.begin(), u_count.end(), std::size_t{0}); }
  std::size_t P() const noexcept { return u_count.size(); }
  std::size_t R() const noexcept { return w_count.size(); }
  const double* at(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const noexcept {
    return features.data() + ((p * P() + q) * R() * R() + r * R() + s) * width;
  }
};

struct TableResult {
  double value = 0.0;
  std::vector<std::size_t> table; // P x R counts
  bool exact = true;
};

/// Bijection of cells realizing a contingency table: U-cell a is sent to a
/// W-cell of the W-part the table allots to it.
inline std::vector<std::size_t> table_to_image(const std::vector<std::size_t>& u_count, const std::vector<std::size_t>& w_count,
                                               const std::vector<std::size_t>& table) {
  const std::size_t P = u_count.size(), R = w_count.size();
  std::vector<std::size_t> next(R, 0);
  for (std::size_t r = 1; r < R; ++r) next[r] = next[r - 1] + w_count[r - 1];
  std::vector<std::size_t> image;
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < table[p * R + r]; ++c) image.push_back(next[r]++);
  return image;
}

/// Contingency table of a bijection (inverse of table_to_image up to symmetry).
inline std::vector<std::size_t> image_to_table(const std::vector<std::size_t>& u_count, const std::vector<std::size_t>& w_count,
                                               const std::vector<std::size_t>& image) {
  const std::size_t P = u_count.size(), R = w_count.size();
  std::vector<std::size_t> w_part;
  for (std::size_t r = 0; r < R; ++r) w_part.insert(w_part.end(), w_count[r], r);
  std::vector<std::size_t> table(P * R, 0);
  std::size_t a = 0;
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t c = 0; c < u_count[p]; ++c, ++a) ++table[p * R + w_part[image[a]]];
  return table;
}

/// Exact minimum over assignments of the rectangle supremum, by depth-first
/// branch and bound over U-cells. The bound of a partial assignment is the
/// supremum restricted to rectangles inside the assigned cells, which can
/// only grow as cells are added. Children are tried in increasing bound order.
template <class Eval>
class CellSearch {
public:
  CellSearch(const AssignmentProblem& prob, Eval& eval) : prob_(prob), eval_(eval) {
    n_ = prob.cells();
    if (n_ > 16) throw BudgetError("exact assignment search is limited to 16 cells");
    w_ = prob.width;
    full_ = std::size_t{1} << n_;
    for (std::size_t p = 0; p < prob.P(); ++p) u_part_.insert(u_part_.end(), prob.u_count[p], p);
    scale_ = 1.0 / (static_cast<double>(n_) * static_cast<double>(n_));
    rowagg_.assign(n_ * full_ * w_, 0.0);
    agg_.assign(full_ * full_ * w_, 0.0);
    assign_.assign(n_, 0);
    cap_ = prob.w_count;
    e_.resize(w_);
  }

  TableResult run() {
    best_ = std::numeric_limits<double>::infinity();
    if (n_ == 0) return {0.0, {}, true};
    dfs(0, 0.0);
    TableResult out;
    out.value = best_;
    out.exact = true;
    out.table.assign(prob_.P() * prob_.R(), 0);
    for (std::size_t a = 0; a < n_; ++a) ++out.table[u_part_[a] * prob_.R() + best_assign_[a]];
    return out;
  }

private:
  void feature(std::size_t s, std::size_t t) {
    const double* f = prob_.at(u_part_[s], u_part_[t], assign_[s], assign_[t]);
    for (std::size_t i = 0; i < w_; ++i) e_[i] = scale_ * f[i];
  }
  double* rowagg(std::size_t s, std::size_t T) { return rowagg_.data() + (s * full_ + T) * w_; }
  double* agg(std::size_t S, std::size_t T) { return agg_.data() + (S * full_ + T) * w_; }

  // Installs assign_[c] and returns the supremum over the rectangles that
  // touch cell c.
  double extend(std::size_t c) {
    const std::size_t bc = std::size_t{1} << c, below = bc, upto = bc << 1;
    for (std::size_t s = 0; s < c; ++s) {
      feature(s, c);
      for (std::size_t T0 = 0; T0 < below; ++T0) {
        const double* src = rowagg(s, T0);
        double* dst = rowagg(s, T0 | bc);
        for (std::size_t i = 0; i < w_; ++i) dst[i] = src[i] + e_[i];
      }
    }
    std::fill_n(rowagg(c, 0), w_, 0.0);
    for (std::size_t T = 1; T < upto; ++T) {
      feature(c, lowest_bit(T));
      const double* src = rowagg(c, T & (T - 1));
      double* dst = rowagg(c, T);
      for (std::size_t i = 0; i < w_; ++i) dst[i] = src[i] + e_[i];
    }
    double bound = 0.0;
    for (std::size_t T0 = 0; T0 < below; ++T0) {
      const std::size_t T = T0 | bc;
      std::fill_n(agg(0, T), w_, 0.0);
      for (std::size_t S = 1; S < below; ++S) {
        const double* a = agg(S & (S - 1), T);
        const double* r = rowagg(lowest_bit(S), T);
        double* dst = agg(S, T);
        for (std::size_t i = 0; i < w_; ++i) dst[i] = a[i] + r[i];
        bound = std::max(bound, eval_(std::span<const double>(dst, w_)));
      }
    }
    for (std::size_t S0 = 0; S0 < below; ++S0) {
      const std::size_t S = S0 | bc;
      for (std::size_t T = 0; T < upto; ++T) {
        const double* a = agg(S0, T);
        const double* r = rowagg(c, T);
        double* dst = agg(S, T);
        for (std::size_t i = 0; i < w_; ++i) dst[i] = a[i] + r[i];
        if (T != 0) bound = std::max(bound, eval_(std::span<const double>(dst, w_)));
      }
    }
    return bound;
  }

  void dfs(std::size_t c, double parent) {
    if (c == n_) {
      if (parent < best_) {
        best_ = parent;
        best_assign_ = assign_;
      }
      return;
    }
    const std::size_t lo = (c > 0 && u_part_[c] == u_part_[c - 1]) ? assign_[c - 1] : 0;
    std::vector<std::pair<double, std::size_t>> children;
    for (std::size_t r = lo; r < prob_.R(); ++r) {
      if (cap_[r] == 0) continue;
      assign_[c] = r;
      children.emplace_back(std::max(parent, extend(c)), r);
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t installed = children.empty() ? prob_.R() : assign_[c];
    for (const auto& [bound, r] : children) {
      if (bound >= best_) break;
      assign_[c] = r;
      if (installed != r) {
        extend(c);
        installed = r;
      }
      --cap_[r];
      dfs(c + 1, bound);
      ++cap_[r];
    }
  }

  const AssignmentProblem& prob_;
  Eval& eval_;
  std::size_t n_ = 0, w_ = 0, full_ = 0;
  double scale_ = 1.0;
  std::vector<std::size_t> u_part_, assign_, best_assign_, cap_;
  std::vector<double> rowagg_, agg_, e_;
  double best_ = 0.0;
};

namespace detail {

inline std::vector<std::size_t> random_table(const std::vector<std::size_t>& u_count, const std::vector<std::size_t>& w_count, Rng& rng) {
  std::vector<std::size_t> image(std::accumulate(u_count.begin(), u_count.end(), std::size_t{0}));
  std::iota(image.begin(), image.end(), std::size_t{0});
  rng.shuffle(image);
  return image_to_table(u_count, w_count, image);
}

// Picks a random 2x2 exchange (+1 at (p,s),(q,r); -1 at (p,r),(q,s)) with
// N[p][r] > 0 and N[q][s] > 0. Returns false if none was found.
inline bool random_exchange(const std::vector<std::size_t>& N, std::size_t P, std::size_t R, Rng& rng, std::size_t& p,
                            std::size_t& q, std::size_t& r, std::size_t& s) {
  if (P < 2 || R < 2) return false;
  for (int tries = 0; tries < 64; ++tries) {
    p = rng.below(P);
    q = rng.below(P - 1);
    if (q >= p) ++q;
    r = rng.below(R);
    s = rng.below(R - 1);
    if (s >= r) ++s;
    if (N[p * R + r] > 0 && N[q * R + s] > 0) return true;
  }
  return false;
}

} // namespace detail

/// Rectangle supremum for a fixed table, evaluated on the blocks (p, r) with
/// N[p][r] > 0. Warm starts are carried over as sets of (p, r) pairs.
struct BlockRect {
  RectResult rect;
  std::vector<char> S_pairs, T_pairs; // P*R flags
};

template <class Eval>
BlockRect table_rect(const AssignmentProblem& prob, const std::vector<std::size_t>& N, Eval& eval, const Budget& budget,
                     std::uint64_t seed, const BlockRect* warm, std::size_t restarts) {
  const std::size_t P = prob.P(), R = prob.R(), w = prob.width;
  const double n = static_cast<double>(prob.cells());
  std::vector<std::size_t> bp, br;
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t r = 0; r < R; ++r)
      if (N[p * R + r] > 0) {
        bp.push_back(p);
        br.push_back(r);
      }
  RectProblem rp;
  rp.parts = bp.size();
  rp.width = w;
  rp.features.resize(rp.parts * rp.parts * w);
  for (std::size_t i = 0; i < rp.parts; ++i)
    for (std::size_t j = 0; j < rp.parts; ++j) {
      const double c = static_cast<double>(N[bp[i] * R + br[i]]) * static_cast<double>(N[bp[j] * R + br[j]]) / (n * n);
      const double* f = prob.at(bp[i], bp[j], br[i], br[j]);
      double* dst = rp.features.data() + (i * rp.parts + j) * w;
      for (std::size_t k = 0; k < w; ++k) dst[k] = c * f[k];
    }
  RectResult warm_rect;
  if (warm) {
    warm_rect.S.resize(rp.parts);
    warm_rect.T.resize(rp.parts);
    for (std::size_t i = 0; i < rp.parts; ++i) {
      warm_rect.S[i] = warm->S_pairs[bp[i] * R + br[i]];
      warm_rect.T[i] = warm->T_pairs[bp[i] * R + br[i]];
    }
  }
  BlockRect out;
  out.rect = sup_rectangles(rp, eval, budget, seed, warm ? &warm_rect : nullptr, restarts);
  out.S_pairs.assign(P * R, 0);
  out.T_pairs.assign(P * R, 0);
  for (std::size_t i = 0; i < rp.parts; ++i) {
    out.S_pairs[bp[i] * R + br[i]] = out.rect.S[i];
    out.T_pairs[bp[i] * R + br[i]] = out.rect.T[i];
  }
  return out;
}

/// Simulated annealing over contingency tables minimizing the rectangle
/// supremum. Restart 0 starts from `initial` when provided. Proposal: random
/// 2x2 exchange; geometric cooling; Metropolis acceptance. The winner is
/// re-evaluated with a larger local-search effort.
inline constexpr std::size_t kAnnealExactRectParts = 6;

template <class EvalFactory>
TableResult anneal_tables(const AssignmentProblem& prob, EvalFactory&& make_eval, const Budget& budget, std::uint64_t seed,
                          const std::vector<std::size_t>* initial = nullptr) {
  const std::size_t P = prob.P(), R = prob.R();
  const std::size_t restarts = std::max<std::size_t>(1, budget.restarts);
  // Proposals use local rectangle search beyond a few blocks; the winner gets the full budget.
  Budget inner = budget;
  inner.exact_rect_parts = std::min(budget.exact_rect_parts, kAnnealExactRectParts);
  std::vector<TableResult> results(restarts);
  parallel_for(restarts, budget.threads, [&](std::size_t k) {
    auto eval = make_eval();
    Rng rng(derive_seed(seed, k, 1));
    std::vector<std::size_t> N = (k == 0 && initial) ? *initial : detail::random_table(prob.u_count, prob.w_count, rng);
    BlockRect cur = table_rect(prob, N, eval, inner, rng.next(), nullptr, 2);
    std::vector<std::size_t> best_N = N;
    double best = cur.rect.value;
    double temp = std::max(1e-4, 0.05 * cur.rect.value);
    const double end_temp = temp * 1e-3;
    const double cooling = budget.steps > 1 ? std::pow(end_temp / temp, 1.0 / static_cast<double>(budget.steps - 1)) : 1.0;
    for (std::size_t step = 0; step < budget.steps && best > 0.0; ++step, temp *= cooling) {
      std::size_t p, q, r, s;
      if (!detail::random_exchange(N, P, R, rng, p, q, r, s)) break;
      std::vector<std::size_t> cand = N;
      --cand[p * R + r];
      --cand[q * R + s];
      ++cand[p * R + s];
      ++cand[q * R + r];
      BlockRect next = table_rect(prob, cand, eval, inner, rng.next(), &cur, 1);
      const double delta = next.rect.value - cur.rect.value;
      if (delta <= 0.0 || rng.uniform() < std::exp(-delta / temp)) {
        N = std::move(cand);
        cur = std::move(next);
        if (cur.rect.value < best) {
          best = cur.rect.value;
          best_N = N;
        }
      }
    }
    results[k] = {best, best_N, false};
  });
  std::size_t win = 0;
  for (std::size_t k = 1; k < restarts; ++k)
    if (results[k].value < results[win].value) win = k;
  auto eval = make_eval();
  BlockRect final_rect = table_rect(prob, results[win].table, eval, budget, derive_seed(seed, 0, 2), nullptr, 4 * budget.local_restarts);
  return {final_rect.rect.value, results[win].table, false};
}

/// Calls fn(table) for every contingency table with the given margins.
template <class Fn>
void for_each_table(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols, Fn&& fn) {
  const std::size_t P = rows.size(), R = cols.size();
  if (P == 0 || R == 0) return;
  std::vector<std::size_t> N(P * R, 0), colcap(cols);
  auto rec = [&](auto&& self, std::size_t e, std::size_t rowrem) -> void {
    const std::size_t p = e / R, r = e % R;
    if (p == P) {
      fn(static_cast<const std::vector<std::size_t>&>(N));
      return;
    }
    std::size_t after = 0;
    for (std::size_t r2 = r + 1; r2 < R; ++r2) after += colcap[r2];
    const std::size_t lo = rowrem > after ? rowrem - after : 0;
    const std::size_t hi = std::min(rowrem, colcap[r]);
    for (std::size_t v = lo; v <= hi; ++v) {
      N[e] = v;
      colcap[r] -= v;
      if (r + 1 == R)
        self(self, e + 1, p + 1 < P ? rows[p + 1] : 0);
      else
        self(self, e + 1, rowrem - v);
      colcap[r] += v;
    }
    N[e] = 0;
  };
  rec(rec, 0, rows[0]);
}

/// Minimizes an arbitrary table objective. obj(table, final) returns
/// {value, exact}; `final` asks for full effort. Exhaustive when the table
/// count fits budget.exact_tables, annealing with 2x2 exchanges otherwise.
template <class Objective>
TableResult minimize_tables(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols, Objective&& obj,
                            const Budget& budget, std::uint64_t seed, const std::vector<std::size_t>* initial = nullptr);

// ---------------------------------------------------------------------------
// Quadratic objectives over contingency tables

/// F(N) = sum_{e,f} N_e N_f M[e*PR + f], e = p*R + r.
struct QuadraticProblem {
  std::vector<std::size_t> rows, cols;
  std::vector<double> M;
  bool maximize = true;

  std::size_t P() const noexcept { return rows.size(); }
  std::size_t R() const noexcept { return cols.size(); }
  double value(const std::vector<std::size_t>& N) const {
    const std::size_t E = P() * R();
    double v = 0.0;
    for (std::size_t e = 0; e < E; ++e) {
      if (!N[e]) continue;
      double row = 0.0;
      for (std::size_t f = 0; f < E; ++f) row += M[e * E + f] * static_cast<double>(N[f]);
      v += static_cast<double>(N[e]) * row;
    }
    return v;
  }
};

/// Number of tables with the given margins, or cap + 1 if larger.
inline std::uint64_t count_tables(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols, std::uint64_t cap) {
  const std::size_t P = rows.size(), R = cols.size();
  std::vector<std::size_t> colcap(cols);
  std::uint64_t count = 0;
  // suffix sums of column capacities are recomputed on the fly; instances here are small
  auto rec = [&](auto&& self, std::size_t e, std::size_t rowrem) -> void {
    if (count > cap) return;
    const std::size_t p = e / R, r = e % R;
    if (p == P) {
      ++count;
      return;
    }
    std::size_t after = 0;
    for (std::size_t r2 = r + 1; r2 < R; ++r2) after += colcap[r2];
    const std::size_t lo = rowrem > after ? rowrem - after : 0;
    const std::size_t hi = std::min(rowrem, colcap[r]);
    for (std::size_t v = lo; v <= hi; ++v) {
      colcap[r] -= v;
      const std::size_t rem = rowrem - v;
      if (r + 1 == R)
        self(self, e + 1, p + 1 < P ? rows[p + 1] : 0);
      else
        self(self, e + 1, rem);
      colcap[r] += v;
      if (count > cap) return;
    }
  };
  if (P == 0 || R == 0) return 1;
  rec(rec, 0, rows[0]);
  return count;
}

namespace detail {

inline TableResult quadratic_exhaustive(const QuadraticProblem& qp) {
  const std::size_t P = qp.P(), R = qp.R(), E = P * R;
  std::vector<double> Msym(E * E);
  for (std::size_t e = 0; e < E; ++e)
    for (std::size_t f = 0; f < E; ++f) Msym[e * E + f] = qp.M[e * E + f] + qp.M[f * E + e];
  std::vector<std::size_t> N(E, 0), colcap(qp.cols), best_N;
  const double sign = qp.maximize ? 1.0 : -1.0;
  double best = -std::numeric_limits<double>::infinity();
  auto rec = [&](auto&& self, std::size_t e, std::size_t rowrem, double partial) -> void {
    const std::size_t p = e / R, r = e % R;
    if (p == P) {
      if (sign * partial > best) {
        best = sign * partial;
        best_N = N;
      }
      return;
    }
    std::size_t after = 0;
    for (std::size_t r2 = r + 1; r2 < R; ++r2) after += colcap[r2];
    const std::size_t lo = rowrem > after ? rowrem - after : 0;
    const std::size_t hi = std::min(rowrem, colcap[r]);
    double cross = 0.0;
    for (std::size_t f = 0; f < e; ++f)
      if (N[f]) cross += Msym[e * E + f] * static_cast<double>(N[f]);
    for (std::size_t v = lo; v <= hi; ++v) {
      const double x = static_cast<double>(v);
      N[e] = v;
      colcap[r] -= v;
      const double next = partial + x * cross + x * x * qp.M[e * E + e];
      if (r + 1 == R)
        self(self, e + 1, p + 1 < P ? qp.rows[p + 1] : 0, next);
      else
        self(self, e + 1, rowrem - v, next);
      colcap[r] += v;
    }
    N[e] = 0;
  };
  rec(rec, 0, P ? qp.rows[0] : 0, 0.0);
  return {qp.value(best_N), best_N, true};
}

// Best-improvement hill climbing over all 2x2 exchanges.
inline void quadratic_polish(const QuadraticProblem& qp, std::vector<std::size_t>& N, std::vector<double>& g) {
  const std::size_t P = qp.P(), R = qp.R(), E = P * R;
  const double sign = qp.maximize ? 1.0 : -1.0;
  for (std::size_t pass = 0; pass < 10000; ++pass) {
    double best_gain = 1e-13;
    std::size_t bp = 0, bq = 0, br = 0, bs = 0;
    bool found = false;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < P; ++q) {
        if (p == q) continue;
        for (std::size_t r = 0; r < R; ++r) {
          if (!N[p * R + r]) continue;
          for (std::size_t s = 0; s < R; ++s) {
            if (r == s || !N[q * R + s]) continue;
            const std::size_t e[4] = {p * R + s, q * R + r, p * R + r, q * R + s};
            const double d[4] = {1, 1, -1, -1};
            double delta = 0.0;
            for (int i = 0; i < 4; ++i) {
              delta += d[i] * g[e[i]];
              for (int j = 0; j < 4; ++j) delta += d[i] * d[j] * qp.M[e[i] * E + e[j]];
            }
            if (sign * delta > best_gain) {
              best_gain = sign * delta;
              bp = p, bq = q, br = r, bs = s;
              found = true;
            }
          }
        }
      }
    if (!found) return;
    const std::size_t e[4] = {bp * R + bs, bq * R + br, bp * R + br, bq * R + bs};
    const int d[4] = {1, 1, -1, -1};
    for (int i = 0; i < 4; ++i) {
      N[e[i]] = static_cast<std::size_t>(static_cast<long long>(N[e[i]]) + d[i]);
      for (std::size_t f = 0; f < E; ++f) g[f] += d[i] * (qp.M[f * E + e[i]] + qp.M[e[i] * E + f]);
    }
  }
}

inline std::vector<double> quadratic_gradient(const QuadraticProblem& qp, const std::vector<std::size_t>& N) {
  const std::size_t E = qp.P() * qp.R();
  std::vector<double> g(E, 0.0);
  for (std::size_t f = 0; f < E; ++f)
    for (std::size_t e = 0; e < E; ++e)
      if (N[e]) g[f] += (qp.M[f * E + e] + qp.M[e * E + f]) * static_cast<double>(N[e]);
  return g;
}

} // namespace detail

/// Optimum of the quadratic objective. Exhaustive (exact) when the number of
/// tables is at most budget.exact_tables; otherwise annealing with 2x2
/// exchanges followed by hill climbing, flagged inexact.
inline TableResult quadratic_tables(const QuadraticProblem& qp, const Budget& budget, std::uint64_t seed,
                                    const std::vector<std::size_t>* initial = nullptr) {
  const std::size_t P = qp.P(), R = qp.R(), E = P * R;
  if (E > 4096) throw BudgetError("quadratic search supports at most 4096 table cells (got " + std::to_string(E) + ")");
  if (count_tables(qp.rows, qp.cols, budget.exact_tables) <= budget.exact_tables) return detail::quadratic_exhaustive(qp);
  const double sign = qp.maximize ? 1.0 : -1.0;
  const std::size_t restarts = std::max<std::size_t>(1, budget.restarts);
  std::vector<TableResult> results(restarts);
  parallel_for(restarts, budget.threads, [&](std::size_t k) {
    Rng rng(derive_seed(seed, k, 3));
    std::vector<std::size_t> N = (k == 0 && initial) ? *initial : detail::random_table(qp.rows, qp.cols, rng);
    std::vector<double> g = detail::quadratic_gradient(qp, N);
    double cur = qp.value(N), best = cur;
    std::vector<std::size_t> best_N = N;
    // Temperature scale from the typical size of a single exchange.
    double scale = 0.0;
    for (std::size_t e = 0; e < E; ++e) scale = std::max(scale, std::abs(qp.M[e * E + e]));
    double temp = std::max(1e-12, 2.0 * scale);
    const double cooling = budget.steps > 1 ? std::pow(1e-4, 1.0 / static_cast<double>(budget.steps - 1)) : 1.0;
    for (std::size_t step = 0; step < budget.steps && best > 0.0; ++step, temp *= cooling) {
      std::size_t p, q, r, s;
      if (!detail::random_exchange(N, P, R, rng, p, q, r, s)) break;
      const std::size_t e[4] = {p * R + s, q * R + r, p * R + r, q * R + s};
      const double d[4] = {1, 1, -1, -1};
      double delta = 0.0;
      for (int i = 0; i < 4; ++i) {
        delta += d[i] * g[e[i]];
        for (int j = 0; j < 4; ++j) delta += d[i] * d[j] * qp.M[e[i] * E + e[j]];
      }
      const double gain = sign * delta;
      if (gain >= 0.0 || rng.uniform() < std::exp(gain / temp)) {
        for (int i = 0; i < 4; ++i) {
          N[e[i]] = static_cast<std::size_t>(static_cast<long long>(N[e[i]]) + static_cast<long long>(d[i]));
          for (std::size_t f = 0; f < E; ++f) g[f] += d[i] * (qp.M[f * E + e[i]] + qp.M[e[i] * E + f]);
        }
        cur += delta;
        if (sign * cur > sign * best) {
          best = cur;
          best_N = N;
        }
      }
    }
    g = detail::quadratic_gradient(qp, best_N);
    detail::quadratic_polish(qp, best_N, g);
    results[k] = {qp.value(best_N), best_N, false};
  });
  std::size_t win = 0;
  for (std::size_t k = 1; k < restarts; ++k)
    if (sign * results[k].value > sign * results[win].value) win = k;
  return results[win];
}

// ---------------------------------------------------------------------------
// Continuous ascent on the transportation polytope

struct TransportResult {
  double value = 0.0;
  std::vector<double> rho; // P x R
};

namespace detail {

inline double transport_value(const std::vector<double>& M, const std::vector<double>& x) {
  const std::size_t E = x.size();
  double v = 0.0;
  for (std::size_t e = 0; e < E; ++e) {
    if (x[e] == 0.0) continue;
    double row = 0.0;
    for (std::size_t f = 0; f < E; ++f) row += M[e * E + f] * x[f];
    v += x[e] * row;
  }
  return v;
}

// Northwest-corner vertex after permuting rows and columns.
inline std::vector<double> random_vertex(const std::vector<double>& rows, const std::vector<double>& cols, Rng& rng) {
  const std::size_t P = rows.size(), R = cols.size();
  std::vector<std::size_t> pr(P), pc(R);
  std::iota(pr.begin(), pr.end(), std::size_t{0});
  std::iota(pc.begin(), pc.end(), std::size_t{0});
  rng.shuffle(pr);
  rng.shuffle(pc);
  std::vector<double> rr(rows), cc(cols), x(P * R, 0.0);
  std::size_t i = 0, j = 0;
  while (i < P && j < R) {
    const std::size_t p = pr[i], r = pc[j];
    const double v = std::min(rr[p], cc[r]);
    x[p * R + r] = v;
    rr[p] -= v;
    cc[r] -= v;
    if (rr[p] <= cc[r])
      ++i;
    else
      ++j;
  }
  return x;
}

// Sinkhorn scaling of a random positive matrix; falls back to a vertex when
// the marginals do not settle.
inline std::vector<double> random_interior(const std::vector<double>& rows, const std::vector<double>& cols, Rng& rng) {
  const std::size_t P = rows.size(), R = cols.size();
  std::vector<double> x(P * R);
  for (double& v : x) v = 0.05 + rng.uniform();
  for (std::size_t p = 0; p < P; ++p)
    if (rows[p] == 0.0)
      for (std::size_t r = 0; r < R; ++r) x[p * R + r] = 0.0;
  for (std::size_t r = 0; r < R; ++r)
    if (cols[r] == 0.0)
      for (std::size_t p = 0; p < P; ++p) x[p * R + r] = 0.0;
  double err = 1.0;
  for (int it = 0; it < 5000 && err > 1e-14; ++it) {
    for (std::size_t p = 0; p < P; ++p) {
      double s = 0.0;
      for (std::size_t r = 0; r < R; ++r) s += x[p * R + r];
      if (s > 0.0)
        for (std::size_t r = 0; r < R; ++r) x[p * R + r] *= rows[p] / s;
    }
    err = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      double s = 0.0;
      for (std::size_t p = 0; p < P; ++p) s += x[p * R + r];
      err = std::max(err, std::abs(s - cols[r]));
      if (s > 0.0)
        for (std::size_t p = 0; p < P; ++p) x[p * R + r] *= cols[r] / s;
    }
  }
  if (err > 1e-10) return random_vertex(rows, cols, rng);
  return x;
}

// Exact line maximization along every 2x2 exchange cycle until no cycle
// improves the objective.
inline void exchange_ascent(const std::vector<double>& M, std::size_t P, std::size_t R, std::vector<double>& x) {
  const std::size_t E = P * R;
  std::vector<double> g(E, 0.0);
  for (std::size_t f = 0; f < E; ++f)
    for (std::size_t e = 0; e < E; ++e) g[f] += (M[f * E + e] + M[e * E + f]) * x[e];
  for (std::size_t pass = 0; pass < 2000; ++pass) {
    bool improved = false;
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = p + 1; q < P; ++q)
        for (std::size_t r = 0; r < R; ++r)
          for (std::size_t s = r + 1; s < R; ++s) {
            const std::size_t e[4] = {p * R + r, q * R + s, p * R + s, q * R + r};
            const double d[4] = {1, 1, -1, -1};
            const double lo = -std::min(x[e[0]], x[e[1]]);
            const double hi = std::min(x[e[2]], x[e[3]]);
            if (hi - lo <= 0.0) continue;
            double a = 0.0, c = 0.0;
            for (int i = 0; i < 4; ++i) {
              a += d[i] * g[e[i]];
              for (int j = 0; j < 4; ++j) c += d[i] * d[j] * M[e[i] * E + e[j]];
            }
            auto phi = [&](double t) { return t * a + t * t * c; };
            double t = phi(lo) >= phi(hi) ? lo : hi;
            if (c < 0.0) {
              const double v = -a / (2.0 * c);
              if (v > lo && v < hi && phi(v) > phi(t)) t = v;
            }
            if (phi(t) <= 1e-15 || t == 0.0) continue;
            for (int i = 0; i < 4; ++i) {
              x[e[i]] = std::max(0.0, x[e[i]] + d[i] * t);
              for (std::size_t f = 0; f < E; ++f) g[f] += d[i] * t * (M[f * E + e[i]] + M[e[i] * E + f]);
            }
            improved = true;
          }
    if (!improved) return;
  }
}

} // namespace detail

/// Multistart ascent for max rho^T M rho over {rho >= 0, row sums = rows,
/// column sums = cols}. Starts alternate between random vertices and random
/// interior points; `seeds` are extra user-supplied starting points.
inline TransportResult ascend_transport(const std::vector<double>& rows, const std::vector<double>& cols, const std::vector<double>& M,
                                        const Budget& budget, std::uint64_t seed, const std::vector<std::vector<double>>& seeds = {}) {
  const std::size_t P = rows.size(), R = cols.size();
  const std::size_t starts = std::max<std::size_t>(1, budget.ascent_starts) + seeds.size();
  std::vector<TransportResult> results(starts);
  parallel_for(starts, budget.threads, [&](std::size_t k) {
    Rng rng(derive_seed(seed, k, 4));
    std::vector<double> x;
    if (k < seeds.size())
      x = seeds[k];
    else if ((k - seeds.size()) % 2 == 0)
      x = detail::random_vertex(rows, cols, rng);
    else
      x = detail::random_interior(rows, cols, rng);
    detail::exchange_ascent(M, P, R, x);
    results[k] = {detail::transport_value(M, x), std::move(x)};
  });
  std::size_t win = 0;
  for (std::size_t k = 1; k < starts; ++k)
    if (results[k].value > results[win].value) win = k;
  return results[win];
}

template <class Objective>
TableResult minimize_tables(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols, Objective&& obj,
                            const Budget& budget, std::uint64_t seed, const std::vector<std::size_t>* initial) {
  const std::size_t P = rows.size(), R = cols.size();
  if (count_tables(rows, cols, budget.exact_tables) <= budget.exact_tables) {
    TableResult best{std::numeric_limits<double>::infinity(), {}, true};
    bool all_exact = true;
    for_each_table(rows, cols, [&](const std::vector<std::size_t>& N) {
      const auto [v, exact] = obj(N, true);
      all_exact = all_exact && exact;
      if (v < best.value) best = {v, N, true};
    });
    best.exact = all_exact;
    return best;
  }
  const std::size_t restarts = std::max<std::size_t>(1, budget.restarts);
  std::vector<TableResult> results(restarts);
  parallel_for(restarts, budget.threads, [&](std::size_t k) {
    Rng rng(derive_seed(seed, k, 5));
    std::vector<std::size_t> N = (k == 0 && initial) ? *initial : detail::random_table(rows, cols, rng);
    double cur = obj(N, false).first, best = cur;
    std::vector<std::size_t> best_N = N;
    double temp = std::max(1e-4, 0.05 * cur);
    const double cooling = budget.steps > 1 ? std::pow(1e-3, 1.0 / static_cast<double>(budget.steps - 1)) : 1.0;
    for (std::size_t step = 0; step < budget.steps && best > 0.0; ++step, temp *= cooling) {
      std::size_t p, q, r, s;
      if (!detail::random_exchange(N, P, R, rng, p, q, r, s)) break;
      std::vector<std::size_t> cand = N;
      --cand[p * R + r];
      --cand[q * R + s];
      ++cand[p * R + s];
      ++cand[q * R + r];
      const double v = obj(cand, false).first;
      if (v <= cur || rng.uniform() < std::exp(-(v - cur) / temp)) {
        N = std::move(cand);
        cur = v;
        if (cur < best) {
          best = cur;
          best_N = N;
        }
      }
    }
    results[k] = {best, best_N, false};
  });
  std::size_t win = 0;
  for (std::size_t k = 1; k < restarts; ++k)
    if (results[k].value < results[win].value) win = k;
  return {obj(results[win].table, true).first, results[win].table, false};
}

} // namespace pgraphon
