#include <gtest/gtest.h>

#include <cmath>

#include "pgraphon/generate.hpp"
#include "pgraphon/sampling.hpp"

using namespace pgraphon;

namespace {

StepKernel dirac_constant(const SpacePtr& s, std::size_t z) {
  std::vector<double> mu(s->size(), 0.0);
  mu[z] = 1.0;
  return constant_kernel<MeasureValued>(s, mu, {1.0});
}

StepKernel half_coin() { return from_real_graphon(make_real_kernel({1.0}, {{0.5}})); }

} // namespace

TEST(SampleGraph, ConstantDiracLabelsEveryEdge) {
  auto s = DecorationSpace::discrete(4);
  for (bool sym : {false, true}) {
    const auto g = sample_graph(dirac_constant(s, 2), 12, 5, sym);
    for (auto l : g.labels) EXPECT_EQ(l, 2u);
    EXPECT_EQ(g.kind, LabelKind::kPoint);
  }
}

TEST(SampleGraph, FairCoinWithinThreeSigma) {
  const std::size_t n = 64;
  const auto g = sample_graph(half_coin(), n, 11);
  double ones = 0.0;
  for (auto l : g.labels) ones += l == 1 ? 1.0 : 0.0;
  const double T = static_cast<double>(n * n);
  EXPECT_NEAR(ones / T, 0.5, 3.0 * std::sqrt(0.25 / T));
}

TEST(SampleGraph, DeterministicForAFixedSeed) {
  Rng rng(1);
  auto u = gen::kernel(rng, gen::space(rng, 3), 3, 6);
  const auto a = sample_graph(u, 20, 99), b = sample_graph(u, 20, 99), c = sample_graph(u, 20, 100);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(a.labels, c.labels);
  const std::vector<double> x{0.1, 0.4, 0.9};
  EXPECT_EQ(sample_graph_at(u, x, 3).labels, sample_graph_at(u, x, 3).labels);
}

TEST(SampleGraph, SymmetricModeSharesPositionsAndMirrors) {
  Rng rng(2);
  auto u = gen::kernel(rng, gen::space(rng, 3), 2, 4);
  const auto d = sample_graph(u, 15, 7, false), s = sample_graph(u, 15, 7, true);
  EXPECT_EQ(d.x, s.x);
  EXPECT_TRUE(s.symmetric);
  for (std::size_t j = 0; j < 15; ++j)
    for (std::size_t k = 0; k <= j; ++k) {
      EXPECT_EQ(s.label(j, k), s.label(k, j));
      EXPECT_EQ(s.label(j, k), d.label(j, k));
    }
}

TEST(SampleGraph, EdgeFrequenciesMatchTheKernel) {
  Rng rng(3);
  auto s = gen::space(rng, 3);
  auto u = gen::kernel(rng, s, 2, 4);
  const std::vector<double> x{0.1, 0.7};
  const std::size_t T = 2000;
  std::vector<double> freq(3, 0.0);
  for (std::size_t t = 0; t < T; ++t) freq[sample_graph_at(u, x, derive_seed(17, t)).label(0, 1)] += 1.0;
  const std::size_t p = 0, q = 1;
  for (std::size_t z = 0; z < 3; ++z) {
    const double pr = u.entry(p, q)[z];
    EXPECT_NEAR(freq[z] / T, pr, 4.0 * std::sqrt(pr * (1.0 - pr) / T) + 1e-12) << z;
  }
}

TEST(SampleGraph, DiracDecompositionDrawsTheSameLabels) {
  Rng rng(4);
  auto u = gen::kernel(rng, gen::space(rng, 4), 3, 6);
  const auto dec = dirac_decomposition(u);
  for (bool sym : {false, true}) {
    const auto a = sample_graph(u, 18, 21, sym), b = sample_graph(dec, 18, 21, sym);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(b.label_count, 5u);
  }
}

TEST(SampleGraph, DecomposedKernelUsesTheZeroFunctionForMissingMass) {
  auto s = DecorationSpace::two_point();
  const DecomposedKernel dec(s, {{1.0, 0.0}}, {make_real_kernel({1.0}, {{0.0}})});
  const auto g = sample_graph(dec, 6, 1);
  for (auto l : g.labels) EXPECT_EQ(l, 1u);
  const auto w = empirical_cb_kernel(g, dec);
  for (double v : w.data()) EXPECT_EQ(v, 0.0);
}

TEST(SampleGraph, RejectsInvalidInputs) {
  auto s = DecorationSpace::two_point();
  EXPECT_THROW(sample_graph(half_coin(), 0, 1), DomainError);
  EXPECT_THROW(sample_graph(constant_kernel<MeasureValued>(s, std::vector<double>{0.5, 0.3}, {1.0}), 4, 1), DomainError);
  EXPECT_THROW(DecomposedKernel(s, {{1.0, 0.0}, {0.0, 1.0}}, {make_real_kernel({1.0}, {{0.7}}), make_real_kernel({1.0}, {{0.7}})}), DomainError);
  EXPECT_THROW(sample_graph_at(half_coin(), {1.5}, 1), DomainError);
}

TEST(EmpiricalKernel, SingleVertex) {
  const auto g = sample_graph(half_coin(), 1, 3);
  const auto w = empirical_kernel(g);
  EXPECT_EQ(w.parts(), 1u);
  EXPECT_EQ(w.entry(0, 0)[g.label(0, 0)], 1.0);
}

TEST(EmpiricalKernel, AllSameLabelIsConstant) {
  auto s = DecorationSpace::discrete(3);
  const auto w = empirical_kernel(sample_graph(dirac_constant(s, 1), 5, 3));
  EXPECT_EQ(cut_dist_lp(w, dirac_constant(s, 1)).value, 0.0);
}

TEST(EmpiricalKernel, EntriesFollowTheLabels) {
  Rng rng(5);
  auto u = gen::kernel(rng, gen::space(rng, 3), 2, 4);
  const auto g = sample_graph(u, 4, 8);
  const auto w = empirical_kernel(g);
  EXPECT_EQ(w.part_sizes(), std::vector<double>(4, 0.25));
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = 0; k < 4; ++k)
      for (std::size_t z = 0; z < 3; ++z) EXPECT_EQ(w.entry(j, k)[z], z == g.label(j, k) ? 1.0 : 0.0);
}

TEST(EmpiricalKernel, VertexPermutationIsInvisibleToDelta) {
  Rng rng(6);
  auto u = gen::kernel(rng, gen::space(rng, 2), 2, 4);
  const auto g = sample_graph(u, 6, 4);
  const auto pi = gen::permutation(rng, 6);
  DecoratedSample h = g;
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t k = 0; k < 6; ++k) h.labels[j * 6 + k] = g.label(pi(j), pi(k));
  const auto r = delta_cut_lp(empirical_kernel(g), empirical_kernel(h));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.value, 0.0);
}

TEST(EmpiricalKernel, RejectsFunctionLabels) {
  auto s = DecorationSpace::two_point();
  const DecomposedKernel dec(s, {{1.0, 0.0}}, {make_real_kernel({1.0}, {{0.5}})});
  EXPECT_THROW(empirical_kernel(sample_graph(dec, 3, 1)), DomainError);
}

TEST(ConvergenceRun, ConstantDiracIsAtZeroEverywhere) {
  auto s = DecorationSpace::two_point();
  ConvergenceConfig cfg;
  cfg.schedule = {2, 4, 8};
  cfg.trials = 3;
  cfg.metrics = {"delta_lp", "delta_n", "quotient_haus"};
  const auto r = convergence_run(dirac_constant(s, 0), cfg);
  EXPECT_EQ(r.rows.size(), 27u);
  for (const auto& row : r.rows) EXPECT_NEAR(row.value, 0.0, 1e-12) << row.metric << " n=" << row.n;
}

TEST(ConvergenceRun, HalfCoinDeltaMedianDecreases) {
  ConvergenceConfig cfg;
  cfg.schedule = {4, 8, 16, 32};
  cfg.trials = 20;
  cfg.metrics = {"delta_lp"};
  cfg.budget.steps = 300;
  cfg.budget.restarts = 2;
  const auto r = convergence_run(half_coin(), cfg);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : cfg.schedule) {
    const double m = median_of(r, "delta_lp", n);
    EXPECT_LT(m, prev) << "n=" << n;
    // the centred label matrix has cut norm O(n^{-1/2})
    EXPECT_LE(m, 2.0 / std::sqrt(static_cast<double>(n)));
    prev = m;
  }
}

TEST(ConvergenceRun, ThreadsReproduceTheSequentialReport) {
  ConvergenceConfig cfg;
  cfg.schedule = {4, 8};
  cfg.trials = 4;
  cfg.metrics = {"delta_lp", "f_overlay_gap"};
  const auto u = from_real_graphon(make_real_kernel({0.5, 0.5}, {{0.2, 0.8}, {0.8, 0.2}}));
  const auto a = convergence_run(u, cfg);
  cfg.budget.threads = 3;
  const auto b = convergence_run(u, cfg);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].metric, b.rows[i].metric);
    EXPECT_EQ(a.rows[i].value, b.rows[i].value);
  }
}

TEST(ConvergenceRun, RejectsBadConfigs) {
  const auto u = half_coin();
  ConvergenceConfig cfg;
  cfg.schedule = {8, 4};
  EXPECT_THROW(convergence_run(u, cfg), DomainError);
  cfg.schedule = {4};
  cfg.metrics = {"nonsense"};
  EXPECT_THROW(convergence_run(u, cfg), DomainError);
  cfg.metrics = {"overlay_gap"};
  EXPECT_THROW(convergence_run(u, cfg), DomainError);
}
