#pragma once

// Property suites over seeded random instances and the convergence
// experiment. Reports are pure functions of (suites, seed, counts): instances
// run in per-index slots and are reduced in index order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "pgraphon/generate.hpp"
#include "pgraphon/io.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/metrics.hpp"
#include "pgraphon/overlay.hpp"
#include "pgraphon/quotients.hpp"
#include "pgraphon/rng.hpp"
#include "pgraphon/sampling.hpp"
#include "pgraphon/search.hpp"

namespace pgraphon::verify {

using json = nlohmann::json;

/// Two-point kernel with w = 0.2 on the diagonal blocks and 0.8 across.
inline StepKernel running_example() { return from_real_graphon(make_real_kernel({0.5, 0.5}, {{0.2, 0.8}, {0.8, 0.2}})); }

/// Two vertices of weight 1/2 joined in both directions by 1_{z=1}.
inline CbGraph cross_graph() {
  CbGraph g(DecorationSpace::two_point(), 2);
  g.set_edge(0, 1, {0.0, 1.0});
  g.set_edge(1, 0, {0.0, 1.0});
  return g;
}

struct Outcome {
  double margin = 0.0; // >= -tolerance passes
  json instance;
};

struct CheckResult {
  std::string suite;
  std::string name;
  std::string statement;
  std::size_t instances = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  json reproducer;  // null unless violated
  json details;     // null unless the check records a table

  bool passed() const noexcept { return violations == 0; }
};

struct VerifyOptions {
  std::vector<std::string> suites{"all"};
  std::uint64_t seed = 1;
  std::size_t trials = 0; // 0 keeps each check's default instance count
  std::vector<std::size_t> schedule{4, 8, 16, 32};
  std::size_t theorem_trials = 100;
  std::size_t threads = 1;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<std::string> suites;
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"measures", "cutnorm", "delta", "overlay", "quotients", "sampling", "theorem"};
  return names;
}

namespace detail {

inline std::uint64_t name_key(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

struct Context {
  const VerifyOptions& opt;
  std::vector<CheckResult>& out;
  std::string suite;

  std::size_t count(std::size_t fallback) const { return opt.trials ? opt.trials : fallback; }

  /// Runs fn(seed) for `n` instances; margins below -tol are violations.
  void run(const std::string& name, const std::string& statement, std::size_t n, double tol, const std::function<Outcome(std::uint64_t)>& fn) {
    run_indexed(name, statement, n, tol, [&](std::uint64_t seed, std::size_t) { return fn(seed); });
  }

  void run_indexed(const std::string& name, const std::string& statement, std::size_t n, double tol,
                   const std::function<Outcome(std::uint64_t, std::size_t)>& fn) {
    std::vector<Outcome> slots(n);
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t i = 0; i < n; ++i) seeds[i] = derive_seed(opt.seed ^ name_key(name), i);
    parallel_for(n, opt.threads, [&](std::size_t i) { slots[i] = fn(seeds[i], i); });
    CheckResult r;
    r.suite = suite;
    r.name = name;
    r.statement = statement;
    r.instances = n;
    r.tolerance = tol;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = slots[i].margin;
      const bool bad = !(m >= -tol);
      if (bad) {
        ++r.violations;
        if (r.reproducer.is_null()) r.reproducer = {{"seed", seeds[i]}, {"index", i}, {"margin", std::isnan(m) ? json("nan") : json(m)}, {"instance", slots[i].instance}};
      }
      if (std::isnan(m)) r.worst_margin = -std::numeric_limits<double>::infinity();
      else r.worst_margin = std::min(r.worst_margin, m);
    }
    out.push_back(std::move(r));
  }
};

inline double equal_margin(double a, double b) { return -std::abs(a - b); }

inline json measure_pair(const SignedMeasure& a, const SignedMeasure& b) { return {{"mu", io::to_json(a)}, {"nu", io::to_json(b)}}; }

inline std::size_t lcm(std::size_t a, std::size_t b) { return a / std::gcd(a, b) * b; }

// ---------------------------------------------------------------------------

inline void suite_measures(Context& ctx) {
  const std::size_t n = ctx.count(1000);
  ctx.run("lp_le_tv", "d_LP(mu,nu) <= ||mu-nu||_TV for nonnegative mu, nu", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(8));
    const double mass = std::array<double, 3>{0.5, 1.0, 3.0}[rng.below(3)];
    auto mu = gen::nonnegative_measure(rng, s, mass), nu = gen::nonnegative_measure(rng, s, mass);
    return Outcome{tv_distance(mu, nu) - lp_distance(mu, nu).value, measure_pair(mu, nu)};
  });
  ctx.run("lp_scaling", "d_LP(mu,nu) <= d_LP(a mu,a nu) <= a d_LP(mu,nu) for a in {1.5, 2, 10}", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(8));
    auto mu = gen::nonnegative_measure(rng, s), nu = gen::nonnegative_measure(rng, s);
    const double d = lp_distance(mu, nu).value;
    double margin = std::numeric_limits<double>::infinity();
    for (double a : {1.5, 2.0, 10.0}) {
      const double da = lp_distance(mu.scaled(a), nu.scaled(a)).value;
      margin = std::min({margin, da - d, a * d - da});
    }
    return Outcome{margin, measure_pair(mu, nu)};
  });
  ctx.run("lp_quasi_convex", "d_LP(t mu1+(1-t) mu2, t nu1+(1-t) nu2) <= max(d_LP(mu1,nu1), d_LP(mu2,nu2))", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(8));
    auto m1 = gen::nonnegative_measure(rng, s), m2 = gen::nonnegative_measure(rng, s);
    auto n1 = gen::nonnegative_measure(rng, s), n2 = gen::nonnegative_measure(rng, s);
    const double t = rng.uniform();
    const double lhs = lp_distance(m1.scaled(t) + m2.scaled(1 - t), n1.scaled(t) + n2.scaled(1 - t)).value;
    const double rhs = std::max(lp_distance(m1, n1).value, lp_distance(m2, n2).value);
    return Outcome{rhs - lhs, {{"mu1", io::to_json(m1)}, {"mu2", io::to_json(m2)}, {"nu1", io::to_json(n1)}, {"nu2", io::to_json(n2)}, {"t", t}}};
  });
  ctx.run("lp_metric", "d_LP is symmetric and satisfies the triangle inequality", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(8));
    auto a = gen::nonnegative_measure(rng, s), b = gen::nonnegative_measure(rng, s), c = gen::nonnegative_measure(rng, s);
    const double ab = lp_distance(a, b).value, ba = lp_distance(b, a).value, bc = lp_distance(b, c).value, ac = lp_distance(a, c).value;
    return Outcome{std::min(equal_margin(ab, ba), ab + bc - ac), {{"a", io::to_json(a)}, {"b", io::to_json(b)}, {"c", io::to_json(c)}}};
  });
  ctx.run("lp_probability_le_1", "d_LP(mu,nu) <= 1 for probability measures", n, 1e-12, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(8));
    auto mu = gen::probability_measure(rng, s), nu = gen::probability_measure(rng, s);
    return Outcome{1.0 - lp_distance(mu, nu).value, measure_pair(mu, nu)};
  });
  // Witnesses: Diracs at distance 10a give d = 1 and d(a.,a.) = a; at distance 1 both equal 1.
  const std::vector<double> alphas{1.5, 2.0, 10.0};
  ctx.run_indexed("lp_scaling_sharpness", "Dirac pairs attain both scaling bounds exactly", alphas.size(), 1e-12, [&](std::uint64_t, std::size_t i) {
    const double a = alphas[i];
    auto far = std::make_shared<const DecorationSpace>(std::vector<std::string>{"0", "10a"}, std::vector<std::vector<double>>{{0.0, 10.0 * a}, {10.0 * a, 0.0}});
    auto near = DecorationSpace::two_point();
    const double d_far = lp_distance(SignedMeasure::dirac(far, 0), SignedMeasure::dirac(far, 1)).value;
    const double d_far_a = lp_distance(SignedMeasure::dirac(far, 0, a), SignedMeasure::dirac(far, 1, a)).value;
    const double d_near = lp_distance(SignedMeasure::dirac(near, 0), SignedMeasure::dirac(near, 1)).value;
    const double d_near_a = lp_distance(SignedMeasure::dirac(near, 0, a), SignedMeasure::dirac(near, 1, a)).value;
    const double margin = std::min({equal_margin(d_far, 1.0), equal_margin(d_far_a, a), equal_margin(d_near, 1.0), equal_margin(d_near_a, 1.0)});
    return Outcome{margin, {{"alpha", a}, {"far", {d_far, d_far_a}}, {"near", {d_near, d_near_a}}}};
  });
  ctx.run("f_norm_le_2tv", "||mu||_F <= 2 ||mu||_TV for signed mu", n, 1e-12, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(8));
    auto fam = gen::family(rng, s, rng.below(3));
    std::vector<double> w(s->size());
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    SignedMeasure mu(s, w);
    return Outcome{2.0 * mu.total_variation() - f_norm(mu, fam), {{"mu", io::to_json(mu)}, {"family", io::to_json(fam)}}};
  });
}

inline void suite_cutnorm(Context& ctx) {
  const std::size_t n = ctx.count(500);
  ctx.run("cut_f_bound", "||W[f_n]||_box,R <= 2^n ||W||_box,F for every f_n in the family", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(4));
    const std::size_t m = 1 + rng.below(6);
    auto w = gen::kernel(rng, s, m, m + rng.below(4), static_cast<gen::EntryKind>(rng.below(3)));
    auto fam = gen::family(rng, s, rng.below(3));
    const CutResult f = cut_norm_f(w, fam);
    double margin = f.exact ? std::numeric_limits<double>::infinity() : -1.0;
    for (std::size_t k = 0; k < fam.size(); ++k) {
      const CutResult r = cut_norm_real(apply_function(w, fam[k]));
      if (!r.exact) margin = -1.0;
      margin = std::min(margin, TestFamily::weight(k) == 0.0 ? 0.0 : std::ldexp(f.value, static_cast<int>(k)) - r.value);
    }
    return Outcome{margin, {{"kernel", io::to_json(w)}, {"family", io::to_json(fam)}}};
  });
  ctx.run("cut_two_point", "two-point embedding: d_box,LP = ||u-w||_box and d_box,F = ||u-w||_box / 2", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t m = 1 + rng.below(6);
    auto sizes = gen::grid_sizes(rng, m, m + rng.below(4));
    auto u = gen::real_kernel(rng, sizes), w = gen::real_kernel(rng, sizes);
    const StepKernel U = from_real_graphon(u), W = from_real_graphon(w);
    const CutResult real = cut_norm_real(u - w);
    const CutResult lp = cut_dist_lp(U, W);
    const TestFamily fam(DecorationSpace::two_point(), {{1.0, 1.0}, {0.0, 1.0}});
    const CutResult f = cut_dist_f(U, W, fam);
    const bool exact = real.exact && lp.exact && f.exact;
    return Outcome{exact ? std::min(equal_margin(lp.value, real.value), equal_margin(f.value, 0.5 * real.value)) : -1.0,
                   {{"u", io::to_json(u)}, {"w", io::to_json(w)}}};
  });
}

// Number of distinct part words of the uniform n-cell refinement.
inline std::size_t distinct_relabellings(const std::vector<double>& sizes, std::size_t n) {
  double r = std::lgamma(static_cast<double>(n) + 1.0);
  for (double a : sizes) r -= std::lgamma(std::round(a * static_cast<double>(n)) + 1.0);
  return static_cast<std::size_t>(std::llround(std::exp(r)));
}

inline constexpr std::size_t kMaxRelabellings = 70;

// A permutation pi whose cell a lands in part word[a] (cells of a part taken in order).
inline Permutation word_permutation(const std::vector<std::size_t>& word, std::size_t parts) {
  std::vector<std::vector<std::size_t>> cells(parts);
  std::vector<std::size_t> sorted = word;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t c = 0; c < sorted.size(); ++c) cells[sorted[c]].push_back(c);
  std::vector<std::size_t> next(parts, 0), image(word.size());
  for (std::size_t a = 0; a < word.size(); ++a) image[a] = cells[word[a]][next[word[a]]++];
  return Permutation(std::move(image));
}

inline void suite_delta(Context& ctx) {
  const std::size_t n = ctx.count(100);
  ctx.run("delta_relabel_zero", "delta_box,LP(W, W^pi) = 0 at the exact tier for every relabelling pi of the n-cell refinement (n <= 8)", n, 1e-9,
          [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(3));
            const std::size_t grid = 2 + rng.below(7);
            std::vector<double> sizes;
            do sizes = gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(grid, 4)), grid);
            while (distinct_relabellings(sizes, grid) > kMaxRelabellings);
            const StepKernel w = gen::kernel(rng, s, sizes);
            const StepKernel wn = uniform_refine(w, grid);
            // Relabellings differ only through the part word a -> part(pi(a)).
            std::vector<std::size_t> word;
            for (std::size_t p = 0; p < sizes.size(); ++p) word.insert(word.end(), static_cast<std::size_t>(std::llround(sizes[p] * grid)), p);
            double margin = std::numeric_limits<double>::infinity();
            std::size_t checked = 0;
            do {
              const DeltaResult d = delta_cut_lp(w, relabel(wn, word_permutation(word, sizes.size())));
              margin = std::min(margin, d.exact ? -d.value : -1.0);
              ++checked;
            } while (std::next_permutation(word.begin(), word.end()));
            return Outcome{margin, {{"kernel", io::to_json(w)}, {"grid", grid}, {"relabellings", checked}}};
          });
  ctx.run("delta_two_point_oracle", "delta_box,LP of two-point embeddings equals the real-valued delta_box (n <= 8)", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t grid = 2 + rng.below(7);
    auto u = gen::real_kernel(rng, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(grid, 4)), grid));
    auto w = gen::real_kernel(rng, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(grid, 4)), grid));
    const DeltaResult lp = delta_cut_lp(from_real_graphon(u), from_real_graphon(w));
    const DeltaResult real = delta_cut_decomposed({u}, {w});
    const bool exact = lp.exact && real.exact;
    return Outcome{exact ? equal_margin(lp.value, real.value) : -1.0, {{"u", io::to_json(u)}, {"w", io::to_json(w)}}};
  });
  ctx.run("delta_f_two_point", "delta_box,F of two-point embeddings with F = {1, 1_{z=1}} is half the real delta_box", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t grid = 2 + rng.below(7);
    auto u = gen::real_kernel(rng, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(grid, 4)), grid));
    auto w = gen::real_kernel(rng, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(grid, 4)), grid));
    const TestFamily fam(DecorationSpace::two_point(), {{1.0, 1.0}, {0.0, 1.0}});
    const DeltaResult f = delta_cut_f(from_real_graphon(u), from_real_graphon(w), fam);
    const DeltaResult real = delta_cut_decomposed({u}, {w});
    return Outcome{f.exact && real.exact ? equal_margin(f.value, 0.5 * real.value) : -1.0, {{"u", io::to_json(u)}, {"w", io::to_json(w)}}};
  });
  ctx.run("delta_le_labelled", "delta_box(U,W) <= d_box(U,W) and delta_box is symmetric", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t m = 1 + rng.below(4);
    auto sizes = gen::grid_sizes(rng, m, m + rng.below(8 - m + 1));
    auto u = gen::kernel(rng, s, sizes), w = gen::kernel(rng, s, sizes);
    const DeltaResult uw = delta_cut_lp(u, w), wu = delta_cut_lp(w, u);
    const CutResult d = cut_dist_lp(u, w);
    return Outcome{std::min(d.value - uw.value, equal_margin(uw.value, wu.value)), {{"u", io::to_json(u)}, {"w", io::to_json(w)}}};
  });
}

inline void suite_overlay(Context& ctx) {
  const std::size_t n = ctx.count(200);
  // U probability kernel and W a [0,1]-valued function kernel on grids dividing d <= 8.
  auto pair = [](Rng& rng, SpacePtr& s, StepKernel& u, CbStepKernel& w) {
    s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(7);
    u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
    const std::size_t r = 1 + rng.below(std::min<std::size_t>(d, 3));
    auto sizes = gen::grid_sizes(rng, r, d);
    std::vector<double> data(r * r * s->size());
    for (auto& v : data) v = rng.uniform();
    w = CbStepKernel(s, sizes, std::move(data));
  };
  ctx.run("overlay_homogeneity", "C(l U, W) = C(U, l W) = l C(U, W) for l > 0", n, 1e-9, [&](std::uint64_t seed) {
    Rng rng(seed);
    SpacePtr s;
    StepKernel u;
    CbStepKernel w;
    pair(rng, s, u, w);
    const double l = std::array<double, 3>{0.5, 2.0, 3.7}[rng.below(3)];
    const OverlayResult base = overlay_kernel(u, w), left = overlay_kernel(u.scaled(l), w), right = overlay_kernel(u, w.scaled(l));
    const bool exact = base.exact && left.exact && right.exact;
    return Outcome{exact ? std::min(equal_margin(left.value, l * base.value), equal_margin(right.value, l * base.value)) : -1.0,
                   {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"lambda", l}}};
  });
  ctx.run("overlay_subadditive", "C(U+V, W) <= C(U,W) + C(V,W) and C(U, W+Q) <= C(U,W) + C(U,Q)", n, 1e-9, [&](std::uint64_t seed) {
    Rng rng(seed);
    SpacePtr s;
    StepKernel u;
    CbStepKernel w;
    pair(rng, s, u, w);
    const StepKernel v = gen::kernel(rng, s, u.part_sizes(), gen::EntryKind::kSigned);
    std::vector<double> qd(w.data().size());
    for (auto& x : qd) x = rng.uniform(-1.0, 1.0);
    const CbStepKernel q(s, w.part_sizes(), std::move(qd));
    const double first = overlay_kernel(u, w).value + overlay_kernel(v, w).value - overlay_kernel(u + v, w).value;
    const double second = overlay_kernel(u, w).value + overlay_kernel(u, q).value - overlay_kernel(u, w + q).value;
    return Outcome{std::min(first, second), {{"u", io::to_json(u)}, {"v", io::to_json(v)}, {"w", io::to_json(w)}, {"q", io::to_json(q)}}};
  });
  ctx.run("overlay_graph_identity", "C(U, G) = C(U, W_G) for decorated graphs with k <= 3", n, 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(7), k = 1 + rng.below(std::min<std::size_t>(d, 3));
    auto u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
    const CbGraph g = gen::graph(rng, s, k, gen::grid_sizes(rng, k, d));
    const GraphOverlayResult a = overlay_graph(u, g);
    const OverlayResult b = overlay_kernel(u, cb_graph_to_kernel(g));
    return Outcome{a.exact && b.exact ? equal_margin(a.value, b.value) : -1.0, {{"u", io::to_json(u)}, {"graph", io::to_json(g)}}};
  });
  ctx.run("overlay_quotient_identity", "C(W, H) = max over quotients L with alpha(L) = alpha(H) of sum_ij alpha_i alpha_j beta_ij(L)(beta_ij(H))", n, 1e-9,
          [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(3));
            const std::size_t d = 2 + rng.below(5), k = 1 + rng.below(std::min<std::size_t>(d, 3));
            auto w = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
            const CbGraph g = gen::graph(rng, s, k, gen::grid_sizes(rng, k, d));
            const GraphOverlayResult a = overlay_graph(w, g);
            CloudOptions opt;
            opt.n = a.n;
            opt.alpha = g.alpha();
            const QuotientCloud cloud = quotient_cloud(w, k, opt);
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& q : cloud.members) {
              double v = 0.0;
              for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                  if (const auto& f = g.beta(i, j)) v += integrate(q.block(i, j), *f);
              best = std::max(best, v);
            }
            return Outcome{a.exact ? equal_margin(a.value, best) : -1.0, {{"w", io::to_json(w)}, {"graph", io::to_json(g)}}};
          });
  auto measure_pair = [](Rng& rng, bool probability, SpacePtr& s, StepKernel& u, StepKernel& w) {
    s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(5);
    const auto kind = probability ? gen::EntryKind::kProbability : static_cast<gen::EntryKind>(rng.below(3));
    u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d, kind);
    w = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d, kind);
  };
  ctx.run("f_overlay_cosine", "C_F(U,W) = (||U||_2F^2 + ||W||_2F^2 - delta_2F(U,W)^2) / 2", n, 1e-9, [&](std::uint64_t seed) {
    Rng rng(seed);
    SpacePtr s;
    StepKernel u, w;
    measure_pair(rng, false, s, u, w);
    auto fam = gen::family(rng, s, rng.below(3));
    const OverlayResult c = f_overlay(u, w, fam);
    const DeltaResult d = delta_2f(u, w, fam);
    const double rhs = 0.5 * (norm_2f_squared(u, fam) + norm_2f_squared(w, fam) - d.value * d.value);
    return Outcome{c.exact && d.exact ? equal_margin(c.value, rhs) : -1.0, {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"family", io::to_json(fam)}}};
  });
  ctx.run("f_overlay_truncation", "|C_F - C_F^N| <= 1/N for probability kernels, N in {1, 2, 4}", n, 1e-9, [&](std::uint64_t seed) {
    Rng rng(seed);
    SpacePtr s;
    StepKernel u, w;
    measure_pair(rng, true, s, u, w);
    auto fam = gen::family(rng, s, 1 + rng.below(4));
    const OverlayResult full = f_overlay(u, w, fam);
    double margin = full.exact ? std::numeric_limits<double>::infinity() : -1.0;
    for (std::size_t N : {1, 2, 4}) {
      const TruncatedOverlay t = f_overlay_truncated(u, w, fam, N);
      if (!t.exact) margin = -1.0;
      margin = std::min(margin, 1.0 / static_cast<double>(N) - std::abs(full.value - t.value));
    }
    return Outcome{margin, {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"family", io::to_json(fam)}}};
  });
  ctx.run("f_overlay_weighted_identity", "C_F(U,W) = C(U, sum_k 2^-k f_k W[f_k])", n, 1e-9, [&](std::uint64_t seed) {
    Rng rng(seed);
    SpacePtr s;
    StepKernel u, w;
    measure_pair(rng, true, s, u, w);
    auto fam = gen::family(rng, s, rng.below(3));
    const OverlayResult a = f_overlay(u, w, fam), b = overlay_kernel(u, f_weighted_kernel(w, fam));
    return Outcome{a.exact && b.exact ? equal_margin(a.value, b.value) : -1.0, {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"family", io::to_json(fam)}}};
  });
}

// Quotients of two random kernels on one space, for k <= kmax.
inline std::pair<Quotient, Quotient> random_quotients(Rng& rng, std::size_t kmax) {
  auto s = gen::space(rng, 1 + rng.below(3));
  const std::size_t k = 1 + rng.below(kmax);
  const auto kind = static_cast<gen::EntryKind>(rng.below(2));
  auto u = gen::kernel(rng, s, 1 + rng.below(4), 4 + rng.below(5), kind);
  auto w = gen::kernel(rng, s, 1 + rng.below(4), 4 + rng.below(5), kind);
  return {quotient(u, gen::overlap(rng, u.part_sizes(), k)), quotient(w, gen::overlap(rng, w.part_sizes(), k))};
}

inline std::map<std::vector<long long>, std::vector<std::size_t>> by_alpha(const QuotientCloud& c) {
  std::map<std::vector<long long>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    std::vector<long long> key;
    for (double a : c.members[i].alpha()) key.push_back(std::llround(a * static_cast<double>(c.n)));
    groups[key].push_back(i);
  }
  return groups;
}

inline QuotientCloud subcloud(const QuotientCloud& c, const std::vector<std::size_t>& idx) {
  QuotientCloud s;
  s.k = c.k;
  s.n = c.n;
  for (std::size_t i : idx) {
    s.members.push_back(c.members[i]);
    s.labels.push_back(c.labels[i]);
  }
  return s;
}

inline void suite_quotients(Context& ctx) {
  ctx.run("quotient_sandwich", "d_1/k^2 <= d_box <= k^2 d_1 for quotient pairs with k <= 5", ctx.count(1000), 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto [a, b] = random_quotients(rng, 5);
    const double k2 = static_cast<double>(a.k() * a.k());
    const double d1 = d1_quotient(a, b), ds = dsquare_quotient(a, b);
    return Outcome{std::min(k2 * d1 - ds, k2 * ds - d1), {{"a", io::to_json(a)}, {"b", io::to_json(b)}}};
  });
  ctx.run("quotient_metric", "d_1 and d_box are symmetric and satisfy the triangle inequality", ctx.count(200), 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t k = 1 + rng.below(4);
    std::vector<Quotient> q;
    for (int i = 0; i < 3; ++i) {
      auto w = gen::kernel(rng, s, 1 + rng.below(4), 4 + rng.below(5));
      q.push_back(quotient(w, gen::overlap(rng, w.part_sizes(), k)));
    }
    double margin = std::numeric_limits<double>::infinity();
    for (auto metric : {QuotientMetric::kD1, QuotientMetric::kDsquare}) {
      const double ab = quotient_distance(q[0], q[1], metric), ba = quotient_distance(q[1], q[0], metric);
      const double bc = quotient_distance(q[1], q[2], metric), ac = quotient_distance(q[0], q[2], metric);
      margin = std::min({margin, equal_margin(ab, ba), ab + bc - ac});
    }
    return Outcome{margin, {{"a", io::to_json(q[0])}, {"b", io::to_json(q[1])}, {"c", io::to_json(q[2])}}};
  });
  ctx.run("quotient_rebalance", "rebalance_partition hits a' monotonically and d_1(W/P, W/P') <= (1 + 2 sup||W||_TV) ||a - a'||_1", ctx.count(200),
          1e-9, [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(3));
            const std::size_t k = 1 + rng.below(5);
            auto w = gen::kernel(rng, s, 1 + rng.below(4), 4 + rng.below(5), static_cast<gen::EntryKind>(rng.below(3)));
            const OverlapMatrix rho = gen::overlap(rng, w.part_sizes(), k);
            const auto target = gen::probability_weights(rng, k);
            const OverlapMatrix rho2 = rebalance_partition(rho, target);
            const auto a = rho.col_sums();
            double margin = rho2.has_marginals(w.part_sizes(), target) ? std::numeric_limits<double>::infinity() : -1.0;
            for (std::size_t i = 0; i < k; ++i) {
              const bool grows = target[i] >= a[i];
              for (std::size_t p = 0; p < rho.rows(); ++p) {
                const double diff = rho2(p, i) - rho(p, i);
                margin = std::min(margin, grows ? diff : -diff);
              }
            }
            double l1 = 0.0;
            for (std::size_t i = 0; i < k; ++i) l1 += std::abs(a[i] - target[i]);
            const double d1 = d1_quotient(quotient(w, rho), quotient(w, rho2));
            margin = std::min(margin, (1.0 + 2.0 * w.sup_norm()) * l1 - d1);
            return Outcome{margin, {{"w", io::to_json(w)}, {"rho", io::to_json(rho)}, {"target", target}}};
          });
  ctx.run("quotient_matched_hausdorff", "d_box^Haus of matched quotient clouds <= delta_box,LP + grid slack", ctx.count(50), 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(7);
    auto u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
    auto w = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
    const std::size_t k = 2 + rng.below(2);
    CloudOptions opt;
    opt.max_assignments = 256;
    opt.count = 64;
    opt.seed = seed;
    const MatchedClouds mc = matched_clouds(u, w, k, opt);
    const double h = hausdorff(mc.u, mc.w, QuotientMetric::kDsquare);
    return Outcome{mc.delta.exact ? mc.delta.value + mc.slack - h : -1.0, {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"k", k}}};
  });
  ctx.run("quotient_hausdorff_by_alpha", "d_box^Haus(Q_k(U), Q_k(W)) <= max_a d_box^Haus(Q_a(U), Q_a(W)) on enumerated clouds", ctx.count(50), 1e-9,
          [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(2));
            const std::size_t d = 2 + rng.below(5);
            auto u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
            auto w = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
            CloudOptions opt;
            opt.n = d;
            const QuotientCloud cu = quotient_cloud(u, 2, opt), cw = quotient_cloud(w, 2, opt);
            const double whole = hausdorff(cu, cw, QuotientMetric::kDsquare);
            const auto gu = by_alpha(cu), gw = by_alpha(cw);
            double worst = 0.0;
            for (const auto& [key, idx] : gu) {
              auto it = gw.find(key);
              if (it == gw.end()) return Outcome{-1.0, {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"missing_alpha", key}}};
              worst = std::max(worst, hausdorff(subcloud(cu, idx), subcloud(cw, it->second), QuotientMetric::kDsquare));
            }
            return Outcome{worst - whole, {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"n", d}}};
          });
  ctx.run("quotient_rebalanced_neighbour", "for H in Q_a(U) and L in Q_k(W): the rebalanced L' in Q_a(W) has d_box(H, L') <= 4 k^2 d_box(H, L)",
          ctx.count(50), 1e-9, [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(2));
            const std::size_t d = 2 + rng.below(5), k = 2 + rng.below(2);
            auto u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
            auto w = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
            CloudOptions opt;
            opt.n = d;
            const QuotientCloud cu = quotient_cloud(u, k, opt), cw = quotient_cloud(w, k, opt);
            const double k2 = static_cast<double>(k * k);
            double margin = std::numeric_limits<double>::infinity();
            for (const auto& h : cu.members) {
              std::size_t best = 0;
              double best_d = std::numeric_limits<double>::infinity();
              for (std::size_t j = 0; j < cw.members.size(); ++j) {
                const double dj = dsquare_quotient(h, cw.members[j]);
                if (dj < best_d) best_d = dj, best = j;
              }
              const OverlapMatrix rho = assignment_overlap(w.part_sizes(), k, cw.labels[best]);
              const Quotient moved = quotient(w, rebalance_partition(rho, h.alpha()));
              margin = std::min(margin, 4.0 * k2 * best_d - dsquare_quotient(h, moved));
            }
            return Outcome{margin, {{"u", io::to_json(u)}, {"w", io::to_json(w)}, {"k", k}, {"n", d}}};
          });
  ctx.run("quotient_cloud_relabel", "quotient clouds of W and of a relabelling of W coincide (d_1^Haus <= 1e-9)", ctx.count(50), 1e-9, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(5);
    auto w = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
    const Permutation pi = gen::permutation(rng, d);
    const StepKernel wp = relabel(uniform_refine(w, d), pi);
    CloudOptions opt;
    opt.n = d;
    const std::size_t k = 1 + rng.below(3);
    const double h = hausdorff(quotient_cloud(w, k, opt), quotient_cloud(wp, k, opt), QuotientMetric::kD1);
    return Outcome{-h, {{"w", io::to_json(w)}, {"pi", pi.image()}, {"k", k}}};
  });
}

// Upper 0.001 quantile of chi-square with df degrees of freedom (Wilson-Hilferty).
inline double chi2_critical(std::size_t df) {
  const double v = static_cast<double>(df), z = 3.090232306167813;
  const double t = 1.0 - 2.0 / (9.0 * v) + z * std::sqrt(2.0 / (9.0 * v));
  return v * t * t * t;
}

inline void suite_sampling(Context& ctx) {
  ctx.run("sample_edge_frequency", "at fixed positions, label frequencies of edge (0,1) lie within 4 sqrt(p(1-p)/T) of U(x_0,x_1)", ctx.count(50),
          1e-12, [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(3));
            auto u = gen::kernel(rng, s, 1 + rng.below(3), 6);
            std::vector<double> x(4);
            for (auto& v : x) v = rng.uniform();
            const std::size_t T = 400;
            std::vector<double> freq(s->size(), 0.0);
            for (std::size_t t = 0; t < T; ++t) freq[sample_graph_at(u, x, derive_seed(seed, t)).label(0, 1)] += 1.0 / T;
            const auto e = u.entry(pgraphon::detail::part_of(u.part_sizes(), x[0]), pgraphon::detail::part_of(u.part_sizes(), x[1]));
            double margin = std::numeric_limits<double>::infinity();
            for (std::size_t z = 0; z < s->size(); ++z) margin = std::min(margin, 4.0 * std::sqrt(e[z] * (1 - e[z]) / T) - std::abs(freq[z] - e[z]));
            return Outcome{margin, {{"u", io::to_json(u)}, {"x", x}, {"trials", T}}};
          });
  ctx.run("sample_dirac_equivalence", "the Dirac decomposition samples the same labels as the probability kernel for every seed", ctx.count(50), 0.0,
          [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(4));
            auto u = gen::kernel(rng, s, 1 + rng.below(4), 8);
            const std::size_t n = 2 + rng.below(12);
            const DecoratedSample a = sample_graph(u, n, seed), b = sample_graph(dirac_decomposition(u), n, seed);
            const bool same = a.x == b.x && a.labels == b.labels;
            return Outcome{same ? 0.0 : -1.0, {{"u", io::to_json(u)}, {"n", n}}};
          });
  ctx.run("sample_decomposed_chi_square", "decomposed sampling at fixed (j,k) passes a chi-square test (p = 0.001) against w_i(x_j, x_k)", ctx.count(50),
          0.0, [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(3));
            const std::size_t N = 1 + rng.below(3);
            auto sizes = gen::grid_sizes(rng, 1 + rng.below(3), 6);
            std::vector<std::vector<double>> fs(N);
            for (auto& f : fs) {
              f.resize(s->size());
              for (auto& v : f) v = rng.uniform();
            }
            std::vector<std::vector<double>> wd(N, std::vector<double>(sizes.size() * sizes.size()));
            for (std::size_t e = 0; e < sizes.size() * sizes.size(); ++e) {
              auto p = gen::probability_weights(rng, N + 1); // last share goes to the zero function
              for (std::size_t i = 0; i < N; ++i) wd[i][e] = p[i];
            }
            std::vector<RealStepKernel> ws;
            for (auto& d : wd) ws.emplace_back(nullptr, sizes, d);
            const DecomposedKernel dk(s, fs, ws);
            std::vector<double> x{rng.uniform(), rng.uniform()};
            const std::size_t T = 2000;
            std::vector<double> counts(N + 1, 0.0);
            for (std::size_t t = 0; t < T; ++t) counts[sample_graph_at(dk, x, derive_seed(seed, t)).label(1, 0)] += 1.0;
            const std::size_t p = pgraphon::detail::part_of(sizes, x[1]), q = pgraphon::detail::part_of(sizes, x[0]);
            double chi = 0.0, rest = 1.0;
            std::size_t df = 0;
            for (std::size_t i = 0; i <= N; ++i) {
              const double prob = i < N ? ws[i].value(p, q) : std::max(0.0, rest);
              if (i < N) rest -= prob;
              const double expect = prob * static_cast<double>(T);
              if (expect <= 0.0) {
                if (counts[i] > 0.0) return Outcome{-1.0, {{"impossible_label", i}}};
                continue;
              }
              chi += (counts[i] - expect) * (counts[i] - expect) / expect;
              ++df;
            }
            const double crit = df > 1 ? chi2_critical(df - 1) : 0.0;
            return Outcome{df > 1 ? crit - chi : 0.0, {{"x", x}, {"chi_square", chi}, {"critical", crit}}};
          });
  ctx.run("sample_exchangeability", "permuting the vertices of a sample gives an empirical kernel at delta_box distance 0", ctx.count(50), 1e-9,
          [](std::uint64_t seed) {
            Rng rng(seed);
            auto s = gen::space(rng, 1 + rng.below(3));
            auto u = gen::kernel(rng, s, 1 + rng.below(3), 6);
            const std::size_t n = 2 + rng.below(7);
            const StepKernel e = empirical_kernel(sample_graph(u, n, seed));
            const Permutation pi = gen::permutation(rng, n);
            const DeltaResult d = delta_cut_lp(e, relabel(e, pi));
            return Outcome{d.exact ? -d.value : -1.0, {{"u", io::to_json(u)}, {"n", n}, {"pi", pi.image()}}};
          });
  ctx.run("sample_symmetric_mode", "symmetric samples are symmetric and agree with directed samples on j >= k", ctx.count(50), 0.0, [](std::uint64_t seed) {
    Rng rng(seed);
    auto s = gen::space(rng, 1 + rng.below(3));
    auto u = gen::kernel(rng, s, 1 + rng.below(3), 6);
    const std::size_t n = 2 + rng.below(10);
    const DecoratedSample a = sample_graph(u, n, seed, false), b = sample_graph(u, n, seed, true);
    bool ok = a.x == b.x;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k <= j; ++k) ok = ok && b.label(j, k) == b.label(k, j) && a.label(j, k) == b.label(j, k);
    return Outcome{ok ? 0.0 : -1.0, {{"u", io::to_json(u)}, {"n", n}}};
  });
  ctx.run("sample_fair_coin", "w = 1/2: the frequency of label 1 over n^2 edges at n = 64 is within 3 sigma of 1/2", ctx.count(10), 0.0,
          [](std::uint64_t seed) {
            const StepKernel u = from_real_graphon(make_real_kernel({1.0}, {{0.5}}));
            const DecoratedSample smp = sample_graph(u, 64, seed);
            double ones = 0.0;
            for (auto l : smp.labels) ones += static_cast<double>(l);
            const double freq = ones / static_cast<double>(smp.labels.size());
            const double sigma = std::sqrt(0.25 / static_cast<double>(smp.labels.size()));
            return Outcome{3.0 * sigma - std::abs(freq - 0.5), {{"frequency", freq}}};
          });
}

inline json median_table(const ConvergenceReport& r, const std::vector<std::string>& metrics, const std::vector<std::size_t>& schedule) {
  json t = json::object();
  for (const auto& m : metrics) {
    json row = json::array();
    for (auto n : schedule) row.push_back(median_of(r, m, n));
    t[m] = row;
  }
  return t;
}

inline void suite_theorem(Context& ctx) {
  ConvergenceConfig cfg;
  cfg.schedule = ctx.opt.schedule;
  cfg.trials = ctx.opt.theorem_trials;
  cfg.seed = ctx.opt.seed;
  cfg.graph = cross_graph();
  cfg.budget.steps = 300;
  cfg.budget.restarts = 2;
  cfg.budget.threads = ctx.opt.threads;
  const StepKernel u = running_example();
  const ConvergenceReport r = convergence_run(u, cfg);
  const json table = median_table(r, cfg.metrics, cfg.schedule);
  std::size_t exact_rows = 0;
  for (const auto& row : r.rows) exact_rows += row.exact ? 1 : 0;
  const std::size_t rows_per_metric = cfg.schedule.size() * cfg.trials;

  // Margin: smallest consecutive decrease of the medians, and the final-median threshold.
  auto trend = [&](const std::string& name, const std::string& metric, const std::string& statement, double final_max) {
    std::vector<double> med;
    for (auto n : cfg.schedule) med.push_back(median_of(r, metric, n));
    ctx.run(name, statement, 1, 0.0, [&](std::uint64_t) {
      double margin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < med.size(); ++i) margin = std::min(margin, med[i - 1] - med[i]);
      if (margin == 0.0) margin = -std::numeric_limits<double>::denorm_min(); // equal medians fail
      if (final_max > 0.0) margin = std::min(margin, final_max - med.back());
      return Outcome{margin, {{"medians", med}, {"schedule", cfg.schedule}, {"trials", cfg.trials}, {"seed", cfg.seed}}};
    });
    ctx.out.back().instances = rows_per_metric;
  };
  trend("theorem_delta_decreasing", "delta_lp", "median delta_box,LP(U_n, U) strictly decreases along the schedule and ends <= 0.15", 0.15);
  trend("theorem_overlay_decreasing", "overlay_gap", "median |C(U_n, H) - C(U, H)| strictly decreases along the schedule and ends <= 0.1", 0.1);
  trend("theorem_quotient_decreasing", "quotient_haus", "median d_box^Haus of matched 2-class quotient clouds strictly decreases along the schedule",
        0.0);
  ctx.out.back().details = {{"medians", table},
                            {"schedule", cfg.schedule},
                            {"trials", cfg.trials},
                            {"limits", r.limits},
                            {"exact_rows", exact_rows},
                            {"rows", r.rows.size()}};
}

} // namespace detail

/// Expands "all" and rejects unknown names; "none" selects nothing.
inline std::vector<std::string> resolve_suites(const std::vector<std::string>& requested) {
  std::set<std::string> picked;
  for (const auto& s : requested) {
    if (s == "none") continue;
    if (s == "all") {
      picked.insert(suite_names().begin(), suite_names().end());
      continue;
    }
    if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
      throw DomainError("unknown suite '" + s + "' (expected measures, cutnorm, delta, overlay, quotients, sampling, theorem, all or none)");
    picked.insert(s);
  }
  std::vector<std::string> out;
  for (const auto& s : suite_names())
    if (picked.count(s)) out.push_back(s);
  return out;
}

inline VerifyReport run(const VerifyOptions& opt) {
  VerifyReport report;
  report.seed = opt.seed;
  report.suites = resolve_suites(opt.suites);
  for (const auto& s : report.suites) {
    detail::Context ctx{opt, report.checks, s};
    if (s == "measures") detail::suite_measures(ctx);
    else if (s == "cutnorm") detail::suite_cutnorm(ctx);
    else if (s == "delta") detail::suite_delta(ctx);
    else if (s == "overlay") detail::suite_overlay(ctx);
    else if (s == "quotients") detail::suite_quotients(ctx);
    else if (s == "sampling") detail::suite_sampling(ctx);
    else if (s == "theorem") detail::suite_theorem(ctx);
  }
  return report;
}

inline json to_json(const CheckResult& c) {
  json j = {{"suite", c.suite},
            {"name", c.name},
            {"statement", c.statement},
            {"instances", c.instances},
            {"violations", c.violations},
            {"tolerance", c.tolerance},
            {"passed", c.passed()},
            {"worst_margin", std::isfinite(c.worst_margin) ? json(c.worst_margin) : json(c.worst_margin > 0 ? "inf" : "-inf")}};
  if (!c.reproducer.is_null()) j["reproducer"] = c.reproducer;
  if (!c.details.is_null()) j["details"] = c.details;
  return j;
}

inline json to_json(const VerifyReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  std::size_t failed = 0;
  for (const auto& c : r.checks) failed += c.passed() ? 0 : 1;
  return {{"seed", r.seed}, {"suites", r.suites}, {"checks", checks}, {"failed", failed}, {"passed", r.passed()}, {"version", io::kVersion}};
}

} // namespace pgraphon::verify
