#include <gtest/gtest.h>

#include "pgraphon/generate.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/metrics.hpp"

using namespace pgraphon;

namespace {

const std::vector<double> kSame{0.8, 0.2}, kCross{0.2, 0.8};

StepKernel running() { return from_real_graphon(make_real_kernel({0.5, 0.5}, {{0.2, 0.8}, {0.8, 0.2}})); }

void expect_entry(const StepKernel& w, std::size_t p, std::size_t q, const std::vector<double>& x) {
  auto e = w.entry(p, q);
  ASSERT_EQ(e.size(), x.size());
  for (std::size_t z = 0; z < x.size(); ++z) EXPECT_NEAR(e[z], x[z], 1e-15) << p << "," << q << "," << z;
}

bool same_data(const StepKernel& a, const StepKernel& b) { return a.part_sizes() == b.part_sizes() && a.data() == b.data(); }

} // namespace

TEST(FromRealGraphon, ConstantKernelsBecomeDiracs) {
  auto zero = from_real_graphon(make_real_kernel({1.0}, {{0.0}}));
  auto one = from_real_graphon(make_real_kernel({1.0}, {{1.0}}));
  expect_entry(zero, 0, 0, {1, 0});
  expect_entry(one, 0, 0, {0, 1});
}

TEST(FromRealGraphon, RunningExampleEntries) {
  const auto w = running();
  expect_entry(w, 0, 0, kSame);
  expect_entry(w, 0, 1, kCross);
  expect_entry(w, 1, 0, kCross);
  expect_entry(w, 1, 1, kSame);
  EXPECT_EQ(w.kind(), KernelKind::kProbability);
}

TEST(FromRealGraphon, RejectsValuesOutsideUnitInterval) {
  EXPECT_THROW(from_real_graphon(make_real_kernel({1.0}, {{1.2}})), DomainError);
  EXPECT_THROW(from_real_graphon(make_real_kernel({1.0}, {{-0.1}})), DomainError);
}

TEST(ApplyFunction, Examples) {
  const auto w = running();
  const auto ones = apply_function(w, std::vector<double>{1, 1});
  const auto zeros = apply_function(w, std::vector<double>{0, 0});
  const auto ind = apply_function(w, std::vector<double>{0, 1});
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t q = 0; q < 2; ++q) {
      EXPECT_NEAR(ones.value(p, q), 1.0, 1e-15);
      EXPECT_EQ(zeros.value(p, q), 0.0);
    }
  EXPECT_NEAR(ind.value(0, 0), 0.2, 1e-15);
  EXPECT_NEAR(ind.value(0, 1), 0.8, 1e-15);
}

TEST(ApplyFunction, IndicatorOfOneInvertsTheEmbedding) {
  Rng rng(1);
  for (int it = 0; it < 100; ++it) {
    auto w = gen::real_kernel(rng, gen::grid_sizes(rng, 1 + rng.below(5), 8));
    const auto back = apply_function(from_real_graphon(w), std::vector<double>{0, 1});
    for (std::size_t i = 0; i < w.data().size(); ++i) EXPECT_NEAR(back.data()[i], w.data()[i], 1e-15);
  }
}

TEST(BlockIntegral, Examples) {
  const auto w = running();
  const std::vector<double> all{1, 1}, none{0, 0}, first{1, 0}, second{0, 1};
  EXPECT_NEAR(block_integral(w, all, all).total_mass(), 1.0, 1e-15);
  EXPECT_EQ(block_integral(w, none, all).total_variation(), 0.0);
  const auto b = block_integral(w, first, second);
  EXPECT_NEAR(b[0], 0.05, 1e-15);
  EXPECT_NEAR(b[1], 0.2, 1e-15);
}

TEST(BlockIntegral, IsBilinearInTheFractions) {
  Rng rng(2);
  for (int it = 0; it < 50; ++it) {
    auto s = gen::space(rng, 3);
    auto w = gen::kernel(rng, s, 3, 6, gen::EntryKind::kSigned);
    std::vector<double> a(3), b(3), t(3);
    for (std::size_t i = 0; i < 3; ++i) a[i] = rng.uniform(), b[i] = rng.uniform(), t[i] = rng.uniform();
    std::vector<double> mid(3);
    for (std::size_t i = 0; i < 3; ++i) mid[i] = 0.5 * (a[i] + b[i]);
    const auto lhs = block_integral(w, mid, t);
    const auto rhs = block_integral(w, a, t).scaled(0.5) + block_integral(w, b, t).scaled(0.5);
    EXPECT_TRUE(lhs.approx_equal(rhs, 1e-14));
  }
}

TEST(AggregateMeasure, Examples) {
  const auto w = running();
  const auto m = aggregate_measure(w);
  EXPECT_NEAR(m.total_mass(), 1.0, 1e-15);
  EXPECT_NEAR(m[0], 0.25 * (0.8 + 0.2 + 0.2 + 0.8), 1e-15);
  EXPECT_NEAR(m[1], 0.25 * (0.2 + 0.8 + 0.8 + 0.2), 1e-15);
  const std::vector<double> mu{0.3, -0.7};
  const auto c = constant_kernel<MeasureValued>(DecorationSpace::two_point(), mu, {0.25, 0.75});
  const auto mc = aggregate_measure(c);
  EXPECT_NEAR(mc[0], 0.3, 1e-15);
  EXPECT_NEAR(mc[1], 0.7, 1e-15);
}

TEST(UniformRefine, Examples) {
  const auto w = running();
  EXPECT_TRUE(same_data(uniform_refine(w, 2), w));
  const auto w4 = uniform_refine(w, 4);
  ASSERT_EQ(w4.parts(), 4u);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) expect_entry(w4, a, b, (a / 2 == b / 2) ? kSame : kCross);
  const auto u = from_real_graphon(make_real_kernel({1.0 / 3, 2.0 / 3}, {{0.1, 0.2}, {0.3, 0.4}}));
  const auto u3 = uniform_refine(u, 3);
  const std::size_t parent[3] = {0, 1, 1};
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      auto e = u.entry(parent[a], parent[b]);
      expect_entry(u3, a, b, {e[0], e[1]});
    }
}

TEST(UniformRefine, IncompatibleGridNamesTheMinimalOne) {
  const auto u = from_real_graphon(make_real_kernel({1.0 / 3, 2.0 / 3}, {{0.1, 0.2}, {0.3, 0.4}}));
  try {
    uniform_refine(u, 4);
    FAIL() << "expected RefinementError";
  } catch (const RefinementError& e) {
    EXPECT_NE(std::string(e.what()).find("minimal compatible n is 3"), std::string::npos) << e.what();
  }
}

TEST(UniformRefine, IsWeaklyIsomorphic) {
  Rng rng(3);
  for (int it = 0; it < 30; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    const std::size_t d = 2 + rng.below(4);
    auto w = gen::kernel(rng, s, 1 + rng.below(d), d);
    const auto wn = uniform_refine(w, 2 * d);
    EXPECT_EQ(cut_dist_lp(w, wn).value, 0.0);
    EXPECT_EQ(cut_dist_f(w, wn, TestFamily::canonical(s)).value, 0.0);
    EXPECT_NEAR(delta_cut_lp(w, wn).value, 0.0, 1e-12);
    EXPECT_TRUE(aggregate_measure(w).approx_equal(aggregate_measure(wn)));
  }
}

TEST(MinimalGrid, CommonDenominators) {
  EXPECT_EQ(minimal_grid({{0.5, 0.5}}), 2u);
  EXPECT_EQ(minimal_grid({{0.5, 0.5}, {1.0 / 3, 2.0 / 3}}), 6u);
  EXPECT_EQ(minimal_grid({{0.25, 0.75}, {0.1, 0.9}}), 20u);
  EXPECT_THROW(minimal_grid({{1.0 / 127, 126.0 / 127}}), RefinementError);
}

TEST(Relabel, Examples) {
  const auto w = from_real_graphon(make_real_kernel({0.5, 0.5}, {{0.1, 0.2}, {0.3, 0.4}}));
  EXPECT_TRUE(same_data(relabel(w, Permutation::identity(2)), w));
  const auto swapped = relabel(w, Permutation({1, 0}));
  expect_entry(swapped, 0, 0, {0.6, 0.4});
  expect_entry(swapped, 0, 1, {0.7, 0.3});
  expect_entry(swapped, 1, 0, {0.8, 0.2});
  expect_entry(swapped, 1, 1, {0.9, 0.1});
}

TEST(Relabel, GroupAction) {
  Rng rng(4);
  for (int it = 0; it < 50; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    auto w = uniform_refine(gen::kernel(rng, s, 1 + rng.below(4), 4), 4);
    const auto pi = gen::permutation(rng, 4), sigma = gen::permutation(rng, 4);
    EXPECT_TRUE(same_data(relabel(relabel(w, pi), pi.inverse()), w));
    // (W^pi)^sigma(a,b) = W(pi(sigma a), pi(sigma b))
    EXPECT_TRUE(same_data(relabel(relabel(w, pi), sigma), relabel(w, pi.compose(sigma))));
  }
}

TEST(Relabel, PreservesInvariants) {
  Rng rng(5);
  for (int it = 0; it < 50; ++it) {
    auto s = gen::space(rng, 1 + rng.below(3));
    auto w = uniform_refine(gen::kernel(rng, s, 1 + rng.below(4), 6, gen::EntryKind::kSigned), 6);
    const auto wp = relabel(w, gen::permutation(rng, 6));
    EXPECT_DOUBLE_EQ(wp.sup_norm(), w.sup_norm());
    EXPECT_TRUE(aggregate_measure(wp).approx_equal(aggregate_measure(w), 1e-14));
  }
}

TEST(Relabel, RequiresEqualParts) { EXPECT_THROW(relabel(from_real_graphon(make_real_kernel({0.25, 0.75}, {{0, 0}, {0, 0}})), Permutation({1, 0})), MismatchError); }

TEST(Permutation, RejectsNonBijections) { EXPECT_THROW(Permutation({0, 0, 1}), DomainError); }

TEST(Pair, Examples) {
  auto s = DecorationSpace::two_point();
  const std::vector<double> f0{1, 1};
  const auto w = running();
  const auto ones = pair(w, constant_kernel<FunctionValued>(s, f0, {0.5, 0.5}));
  for (double v : ones.data()) EXPECT_NEAR(v, 1.0, 1e-15);
  const std::vector<double> mu{0.3, 0.7}, f{1, 0};
  const auto single = pair(constant_kernel<MeasureValued>(s, mu), constant_kernel<FunctionValued>(s, f));
  EXPECT_NEAR(single.value(0, 0), 0.3, 1e-15);
}

TEST(Pair, IsLinearInBothArguments) {
  Rng rng(6);
  for (int it = 0; it < 50; ++it) {
    auto s = gen::space(rng, 1 + rng.below(4));
    auto sizes = gen::grid_sizes(rng, 1 + rng.below(4), 6);
    auto u = gen::kernel(rng, s, sizes, gen::EntryKind::kSigned), v = gen::kernel(rng, s, sizes, gen::EntryKind::kSigned);
    std::vector<double> wd(sizes.size() * sizes.size() * s->size()), qd(wd.size());
    for (auto& x : wd) x = rng.uniform(-1, 1);
    for (auto& x : qd) x = rng.uniform(-1, 1);
    const CbStepKernel w(s, sizes, wd), q(s, sizes, qd);
    const double a = rng.uniform(-2, 2);
    const auto lhs = pair(u.scaled(a) + v, w);
    const auto rhs = pair(u, w).scaled(a) + pair(v, w);
    const auto lhs2 = pair(u, w.scaled(a) + q);
    const auto rhs2 = pair(u, w).scaled(a) + pair(u, q);
    for (std::size_t i = 0; i < lhs.data().size(); ++i) {
      EXPECT_NEAR(lhs.data()[i], rhs.data()[i], 1e-13);
      EXPECT_NEAR(lhs2.data()[i], rhs2.data()[i], 1e-13);
    }
  }
}

TEST(CbGraphToKernel, Examples) {
  auto s = DecorationSpace::two_point();
  const auto lone = cb_graph_to_kernel(CbGraph(s, 1));
  EXPECT_EQ(lone.parts(), 1u);
  for (double v : lone.data()) EXPECT_EQ(v, 0.0);

  CbGraph g(s, 2);
  g.set_edge(0, 1, {0.0, 1.0});
  const auto w = cb_graph_to_kernel(g);
  EXPECT_EQ(w.part_sizes(), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(w.entry(0, 1)[1], 1.0);
  EXPECT_EQ(w.entry(1, 0)[1], 0.0);
  EXPECT_EQ(w.entry(0, 0)[1], 0.0);

  CbGraph k3(s, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) k3.set_edge(i, j, {0.5, 0.5});
  const auto w3 = cb_graph_to_kernel(k3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(w3.entry(i, j)[0], i == j ? 0.0 : 0.5);
}

TEST(CbGraphToKernel, UsesVertexWeightsAsIntervalLengths) {
  CbGraph g(DecorationSpace::two_point(), 2, {0.25, 0.75});
  EXPECT_EQ(cb_graph_to_kernel(g).part_sizes(), (std::vector<double>{0.25, 0.75}));
  EXPECT_THROW(cb_graph_to_kernel(CbGraph(DecorationSpace::two_point(), 2, {0.0, 1.0})), DomainError);
}

TEST(CbGraph, ZeroDecorationMeansNoEdge) {
  CbGraph g(DecorationSpace::two_point(), 2);
  g.set_edge(0, 1, {0.0, 0.0});
  EXPECT_FALSE(g.has_edge(0, 1));
  g.set_edge(0, 1, {0.0, 0.5});
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_THROW(g.set_edge(2, 0, {1.0, 1.0}), DomainError);
  EXPECT_THROW(CbGraph(DecorationSpace::two_point(), 2, {0.3, 0.3}), DomainError);
}

TEST(StepKernel, Validation) {
  auto s = DecorationSpace::two_point();
  EXPECT_THROW(StepKernel(s, {0.5, 0.4}, std::vector<double>(8, 0.0)), DomainError);
  EXPECT_THROW(StepKernel(s, {0.5, 0.5}, std::vector<double>(6, 0.0)), MismatchError);
  EXPECT_THROW(StepKernel(s, {1.0, 0.0}, std::vector<double>(8, 0.0)), DomainError);
}

TEST(StepKernel, KindClassification) {
  auto s = DecorationSpace::two_point();
  const std::vector<double> half{0.25, 0.25}, neg{0.5, -0.1}, big{1.0, 1.0};
  EXPECT_EQ(constant_kernel<MeasureValued>(s, half).kind(), KernelKind::kSubprobability);
  EXPECT_EQ(constant_kernel<MeasureValued>(s, neg).kind(), KernelKind::kSigned);
  EXPECT_EQ(constant_kernel<MeasureValued>(s, big).kind(), KernelKind::kNonnegative);
  EXPECT_DOUBLE_EQ(constant_kernel<MeasureValued>(s, neg).sup_norm(), 0.6);
}
