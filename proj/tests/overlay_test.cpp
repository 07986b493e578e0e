#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pgraphon/generate.hpp"
#include "pgraphon/overlay.hpp"
#include "pgraphon/verify.hpp"

using namespace pgraphon;

namespace {

// Every assignment of n equal cells to k classes with class i holding alpha_i * n cells.
double graph_oracle(const StepKernel& w, const CbGraph& g, std::size_t n) {
  const auto wn = uniform_refine(w, n);
  const std::size_t k = g.k();
  std::vector<std::size_t> target(k);
  for (std::size_t i = 0; i < k; ++i) target[i] = static_cast<std::size_t>(std::llround(g.alpha()[i] * static_cast<double>(n)));
  std::vector<std::size_t> label(n, 0);
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    std::vector<std::size_t> cnt(k, 0);
    for (auto l : label) ++cnt[l];
    if (cnt == target) {
      double v = 0.0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          if (const auto& f = g.beta(label[a], label[b])) v += integrate(wn.entry(a, b), *f);
      best = std::max(best, v / static_cast<double>(n * n));
    }
    std::size_t i = 0;
    while (i < n && ++label[i] == k) label[i++] = 0;
    if (i == n) break;
  }
  return best;
}

double f_overlay_oracle(const StepKernel& u, const StepKernel& w, const TestFamily& fam, std::size_t n) {
  const auto un = uniform_refine(u, n), wn = uniform_refine(w, n);
  std::vector<std::size_t> pi(n);
  std::iota(pi.begin(), pi.end(), std::size_t{0});
  double best = -std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t k = 0; k < fam.size(); ++k)
          v += TestFamily::weight(k) * integrate(un.entry(a, b), fam[k]) * integrate(wn.entry(pi[a], pi[b]), fam[k]);
    best = std::max(best, v / static_cast<double>(n * n));
  } while (std::next_permutation(pi.begin(), pi.end()));
  return best;
}

template <class K>
K scaled(const K& w, double c) {
  std::vector<double> d = w.data();
  for (auto& x : d) x *= c;
  return K(w.space(), w.part_sizes(), std::move(d));
}

template <class K>
K sum(const K& a, const K& b) {
  std::vector<double> d = a.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += b.data()[i];
  return K(a.space(), a.part_sizes(), std::move(d));
}

CbStepKernel cb_kernel(Rng& rng, const SpacePtr& s, const std::vector<double>& sizes) {
  std::vector<double> d(sizes.size() * sizes.size() * s->size());
  for (auto& x : d) x = rng.uniform(-1.0, 1.0);
  return CbStepKernel(s, sizes, std::move(d));
}

} // namespace

TEST(OverlayGraph, ZeroDecorationsGiveZero) {
  Rng rng(1);
  auto s = gen::space(rng, 3);
  auto w = gen::kernel(rng, s, 3, 6);
  const auto r = overlay_graph(w, CbGraph(s, 3));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.exact);
}

TEST(OverlayGraph, SingleVertexIntegratesTheWholeKernel) {
  Rng rng(2);
  for (int it = 0; it < 20; ++it) {
    auto s = gen::space(rng, 1 + rng.below(4));
    auto w = gen::kernel(rng, s, 1 + rng.below(5), 10);
    std::vector<double> f(s->size());
    for (auto& x : f) x = rng.uniform();
    CbGraph g(s, 1);
    g.set_edge(0, 0, f);
    EXPECT_NEAR(overlay_graph(w, g).value, integrate(aggregate_measure(w), f), 1e-12);
  }
}

TEST(OverlayGraph, RunningExampleWithCrossGraph) {
  const auto w = verify::running_example();
  const auto g = verify::cross_graph();
  Budget b;
  b.grid = 8;
  const auto r = overlay_graph(w, g, b);
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.n, 8u);
  EXPECT_NEAR(r.value, graph_oracle(w, g, 8), 1e-12);
  EXPECT_NEAR(r.value, 0.4, 1e-12);
  EXPECT_NEAR(overlay_objective(w, g, r.rho), r.value, 1e-12);
  EXPECT_TRUE(r.rho.has_marginals(w.part_sizes(), g.alpha(), 1e-9));
}

TEST(OverlayGraph, MatchesAssignmentEnumeration) {
  Rng rng(3);
  for (int it = 0; it < 40; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(7), k = 1 + rng.below(std::min<std::size_t>(d, 3));
    auto w = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
    const CbGraph g = gen::graph(rng, s, k, gen::grid_sizes(rng, k, d));
    const auto r = overlay_graph(w, g);
    ASSERT_TRUE(r.exact);
    EXPECT_NEAR(r.value, graph_oracle(w, g, r.n), 1e-9) << it;
  }
}

TEST(OverlayGraph, IncompatibleGridFallsBackWithWarning) {
  auto w = verify::running_example();
  CbGraph g(w.space(), 2, {1.0 / 3.0, 2.0 / 3.0});
  g.set_edge(0, 1, {0.0, 1.0});
  Budget b;
  b.grid = 4;
  const auto r = overlay_graph(w, g, b);
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.n, 0u);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_TRUE(r.rho.has_marginals(w.part_sizes(), g.alpha(), 1e-9));
}

TEST(OverlayGraph, AscentReturnsAFeasibleOverlap) {
  Rng rng(4);
  for (int it = 0; it < 20; ++it) {
    auto s = gen::space(rng, 2);
    auto w = gen::kernel(rng, s, 3, 6);
    const CbGraph g = gen::graph(rng, s, 2, gen::grid_sizes(rng, 2, 6));
    Budget b;
    b.exact_tables = 0;
    const auto r = overlay_graph(w, g, b);
    EXPECT_FALSE(r.exact);
    EXPECT_EQ(r.n, 0u);
    EXPECT_TRUE(r.rho.has_marginals(w.part_sizes(), g.alpha(), 1e-9));
    EXPECT_NEAR(overlay_objective(w, g, r.rho), r.value, 1e-12);
  }
}

TEST(OverlayGraph, FinerGridsNeverLoseValue) {
  Rng rng(41);
  for (int it = 0; it < 20; ++it) {
    auto s = gen::space(rng, 2);
    auto w = gen::kernel(rng, s, 2, 4);
    const CbGraph g = gen::graph(rng, s, 2, {0.5, 0.5});
    Budget coarse, fine;
    coarse.grid = 4;
    fine.grid = 8;
    EXPECT_LE(overlay_graph(w, g, coarse).value, overlay_graph(w, g, fine).value + 1e-12);
  }
}

TEST(OverlayKernel, NormalizingFunctionGivesOne) {
  Rng rng(5);
  auto s = gen::space(rng, 3);
  auto u = gen::kernel(rng, s, 3, 6);
  const CbStepKernel one(s, {1.0}, std::vector<double>(3, 1.0));
  EXPECT_NEAR(overlay_kernel(u, one).value, 1.0, 1e-12);
}

TEST(OverlayKernel, ConstantKernelIgnoresTheRelabelling) {
  Rng rng(6);
  auto s = gen::space(rng, 2);
  const auto mu = gen::probability_weights(rng, 2);
  const auto u = constant_kernel<MeasureValued>(s, mu, {1.0});
  auto w = cb_kernel(rng, s, {0.25, 0.25, 0.5});
  double expect = 0.0;
  for (std::size_t p = 0; p < 3; ++p)
    for (std::size_t q = 0; q < 3; ++q) expect += w.part_size(p) * w.part_size(q) * integrate(SignedMeasure(s, mu), w.entry(p, q));
  EXPECT_NEAR(overlay_kernel(u, w).value, expect, 1e-12);
}

TEST(OverlayKernel, MatchesPermutationSearch) {
  Rng rng(7);
  for (int it = 0; it < 30; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t n = 2 + rng.below(4);
    auto u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(n, 3)), n);
    auto w = cb_kernel(rng, s, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(n, 3)), n));
    const auto r = overlay_kernel(u, w);
    ASSERT_TRUE(r.exact);
    EXPECT_NEAR(r.value, oracle::overlay(u, w, r.n), 1e-12);
  }
}

TEST(OverlayKernel, GraphIdentity) {
  Rng rng(8);
  for (int it = 0; it < 30; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(7), k = 1 + rng.below(std::min<std::size_t>(d, 3));
    auto u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(d, 3)), d);
    const CbGraph g = gen::graph(rng, s, k, gen::grid_sizes(rng, k, d));
    const auto a = overlay_graph(u, g);
    const auto b = overlay_kernel(u, cb_graph_to_kernel(g));
    ASSERT_TRUE(a.exact && b.exact);
    EXPECT_NEAR(a.value, b.value, 1e-9);
  }
}

TEST(OverlayKernel, PositivelyHomogeneousInBothArguments) {
  Rng rng(9);
  for (int it = 0; it < 30; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t n = 2 + rng.below(5);
    auto u = gen::kernel(rng, s, 1 + rng.below(std::min<std::size_t>(n, 3)), n, gen::EntryKind::kSigned);
    auto w = cb_kernel(rng, s, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(n, 3)), n));
    const double c = 0.1 + 3.0 * rng.uniform();
    const double base = overlay_kernel(u, w).value;
    EXPECT_NEAR(overlay_kernel(scaled(u, c), w).value, c * base, 1e-9);
    EXPECT_NEAR(overlay_kernel(u, scaled(w, c)).value, c * base, 1e-9);
  }
}

TEST(OverlayKernel, SubadditiveInBothArguments) {
  Rng rng(10);
  for (int it = 0; it < 40; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t n = 2 + rng.below(5);
    const std::size_t cap = std::min<std::size_t>(n, 3);
    auto us = gen::grid_sizes(rng, 1 + rng.below(cap), n), ws = gen::grid_sizes(rng, 1 + rng.below(cap), n);
    auto u = gen::kernel(rng, s, us, gen::EntryKind::kSigned), v = gen::kernel(rng, s, us, gen::EntryKind::kSigned);
    auto w = cb_kernel(rng, s, ws), q = cb_kernel(rng, s, ws);
    EXPECT_LE(overlay_kernel(sum(u, v), w).value, overlay_kernel(u, w).value + overlay_kernel(v, w).value + 1e-9);
    EXPECT_LE(overlay_kernel(u, sum(w, q)).value, overlay_kernel(u, w).value + overlay_kernel(u, q).value + 1e-9);
  }
}

TEST(OverlayKernel, InvariantUnderRelabelling) {
  Rng rng(11);
  auto s = gen::space(rng, 2);
  auto u = uniform_refine(gen::kernel(rng, s, 3, 6), 6);
  auto w = cb_kernel(rng, s, std::vector<double>(6, 1.0 / 6));
  const double base = overlay_kernel(u, w).value;
  EXPECT_NEAR(overlay_kernel(relabel(u, gen::permutation(rng, 6)), w).value, base, 1e-12);
  EXPECT_NEAR(overlay_kernel(u, relabel(w, gen::permutation(rng, 6))).value, base, 1e-12);
}

TEST(FOverlay, ConstantProbabilityKernelWithConstantFamily) {
  auto s = DecorationSpace::discrete(1);
  const auto u = constant_kernel<MeasureValued>(s, std::vector<double>{1.0}, {1.0});
  const TestFamily fam(s, {{1.0}});
  EXPECT_NEAR(f_overlay(u, u, fam).value, 1.0, 1e-15);
}

TEST(FOverlay, MatchesExhaustivePermutationMaximum) {
  Rng rng(12);
  for (int it = 0; it < 30; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    auto fam = gen::family(rng, s, rng.below(2));
    auto u = gen::kernel(rng, s, 1 + rng.below(4), 4, gen::EntryKind::kSigned), w = gen::kernel(rng, s, 1 + rng.below(4), 4);
    const auto r = f_overlay(u, w, fam);
    ASSERT_TRUE(r.exact);
    EXPECT_NEAR(r.value, f_overlay_oracle(u, w, fam, r.n), 1e-12);
  }
}

TEST(FOverlay, EqualsOverlayAgainstTheWeightedKernel) {
  Rng rng(13);
  for (int it = 0; it < 30; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    auto fam = gen::family(rng, s, rng.below(3));
    auto u = gen::kernel(rng, s, 1 + rng.below(3), 6), w = gen::kernel(rng, s, 1 + rng.below(3), 6);
    EXPECT_NEAR(f_overlay(u, w, fam).value, overlay_kernel(u, f_weighted_kernel(w, fam)).value, 1e-9);
  }
}

TEST(FOverlay, CosineIdentity) {
  Rng rng(14);
  for (int it = 0; it < 30; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    auto fam = gen::family(rng, s, rng.below(3));
    auto u = gen::kernel(rng, s, 1 + rng.below(3), 6, gen::EntryKind::kSigned), w = gen::kernel(rng, s, 1 + rng.below(3), 6);
    const auto c = f_overlay(u, w, fam);
    const auto d = delta_2f(u, w, fam);
    ASSERT_TRUE(c.exact && d.exact);
    EXPECT_NEAR(c.value, 0.5 * (norm_2f_squared(u, fam) + norm_2f_squared(w, fam) - d.value * d.value), 1e-9);
  }
}

TEST(FOverlayTruncated, ProbabilityPairsHaveUnitConstant) {
  Rng rng(15);
  auto s = gen::space(rng, 3);
  auto fam = gen::family(rng, s, 2);
  auto u = gen::kernel(rng, s, 2, 4), w = gen::kernel(rng, s, 3, 6);
  for (std::size_t N : {1, 2, 4, 8}) EXPECT_DOUBLE_EQ(f_overlay_truncated(u, w, fam, N).error_bound, 1.0 / static_cast<double>(N));
}

TEST(FOverlayTruncated, LongTruncationIsTheFullValue) {
  Rng rng(16);
  auto s = gen::space(rng, 2);
  auto fam = gen::family(rng, s, 1);
  auto u = gen::kernel(rng, s, 2, 4), w = gen::kernel(rng, s, 2, 4);
  const auto t = f_overlay_truncated(u, w, fam, fam.size() + 3);
  EXPECT_NEAR(t.value, f_overlay(u, w, fam).value, 1e-15);
  EXPECT_GT(t.error_bound, 0.0);
}

TEST(FOverlayTruncated, EnclosuresContainTheFullValue) {
  Rng rng(17);
  for (int it = 0; it < 50; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    auto fam = gen::family(rng, s, 1 + rng.below(4));
    auto u = gen::kernel(rng, s, 1 + rng.below(3), 6, gen::EntryKind::kNonnegative), w = gen::kernel(rng, s, 1 + rng.below(3), 6);
    const double full = f_overlay(u, w, fam).value;
    for (std::size_t N = 1; N <= fam.size(); ++N) {
      const auto t = f_overlay_truncated(u, w, fam, N);
      EXPECT_LE(std::abs(full - t.value), t.error_bound + 1e-12);
    }
  }
}

TEST(FOverlayTruncated, RejectsZeroTerms) {
  auto w = verify::running_example();
  EXPECT_THROW(f_overlay_truncated(w, w, TestFamily::canonical(w.space()), 0), DomainError);
}
