#include <gtest/gtest.h>

#include "pgraphon/generate.hpp"
#include "pgraphon/io.hpp"

using namespace pgraphon;
using io::json;

namespace {

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST(Io, SpaceRoundTripAndShorthand) {
  Rng rng(1);
  auto s = gen::space(rng, 4);
  auto back = io::space_from_json(io::to_json(*s));
  ASSERT_EQ(back->size(), 4u);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(back->dist(a, b), s->dist(a, b));
  EXPECT_EQ(io::space_from_json("two_point")->size(), 2u);
}

TEST(Io, KernelRoundTrips) {
  Rng rng(2);
  auto s = gen::space(rng, 3);
  const auto w = gen::kernel(rng, s, 3, 6, gen::EntryKind::kSigned);
  const auto back = io::kernel_from_json(io::to_json(w));
  EXPECT_EQ(back.part_sizes(), w.part_sizes());
  EXPECT_EQ(back.data(), w.data());
  const auto r = gen::real_kernel(rng, {0.25, 0.75});
  EXPECT_EQ(io::real_kernel_from_json(io::to_json(r)).data(), r.data());
}

TEST(Io, GraphFamilyAndOverlapRoundTrip) {
  Rng rng(3);
  auto s = gen::space(rng, 3);
  const auto g = gen::graph(rng, s, 3, {0.25, 0.25, 0.5});
  const auto gb = io::graph_from_json(io::to_json(g));
  EXPECT_EQ(gb.alpha(), g.alpha());
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(gb.beta(i, j), g.beta(i, j));
  const auto fam = gen::family(rng, s, 2);
  const auto fb = io::family_from_json(io::to_json(fam));
  ASSERT_EQ(fb.size(), fam.size());
  for (std::size_t k = 0; k < fam.size(); ++k) EXPECT_TRUE(std::ranges::equal(fb[k], fam[k]));
  const auto rho = gen::overlap(rng, {0.5, 0.5}, 3);
  EXPECT_EQ(io::overlap_from_json(io::to_json(rho)).values(), rho.values());
}

TEST(Io, CloudRoundTrip) {
  Rng rng(4);
  auto s = gen::space(rng, 2);
  const auto w = gen::kernel(rng, s, 2, 4);
  CloudOptions opt;
  opt.n = 4;
  const auto c = quotient_cloud(w, 2, opt);
  const auto back = io::cloud_from_json(io::to_json(c, s));
  ASSERT_EQ(back.members.size(), c.members.size());
  EXPECT_EQ(back.k, c.k);
  for (std::size_t i = 0; i < c.members.size(); ++i) {
    EXPECT_EQ(back.members[i].alpha(), c.members[i].alpha());
    EXPECT_EQ(back.members[i].blocks(), c.members[i].blocks());
  }
}

TEST(Io, BudgetOverridesAndRejectsUnknownKeys) {
  const Budget b = io::budget_from_json(json{{"steps", 10}, {"seed", 3}});
  EXPECT_EQ(b.steps, 10u);
  EXPECT_EQ(b.seed, 3u);
  EXPECT_EQ(b.exact_cells, Budget{}.exact_cells);
  const auto msg = error_of([] { io::budget_from_json(json{{"stpes", 10}}); });
  EXPECT_NE(msg.find("/stpes"), std::string::npos) << msg;
  EXPECT_EQ(io::budget_from_json(io::to_json(b)).steps, 10u);
}

TEST(Io, ErrorsNameTheJsonPointer) {
  json k = io::parse(io::read_file(std::string(PGRAPHON_FIXTURES) + "/running_kernel.json"));
  k["entries"][2][1] = "x";
  auto msg = error_of([&] { io::kernel_from_json(k); });
  EXPECT_NE(msg.find("at /entries/2/1"), std::string::npos) << msg;
  k.erase("part_sizes");
  msg = error_of([&] { io::kernel_from_json(k); });
  EXPECT_NE(msg.find("at /part_sizes"), std::string::npos) << msg;
  json m = {{"space", "two_point"}, {"weights", {0.5, 0.5, 0.5}}};
  msg = error_of([&] { io::measure_from_json(m); });
  EXPECT_FALSE(msg.empty());
  msg = error_of([] { io::parse("{\"a\": ", "f.json"); });
  EXPECT_NE(msg.find("f.json: malformed JSON"), std::string::npos) << msg;
}

TEST(Io, FixturesLoad) {
  const std::string root = PGRAPHON_FIXTURES;
  const auto k = io::kernel_from_json(io::parse(io::read_file(root + "/running_kernel.json")));
  EXPECT_EQ(k.parts(), 2u);
  const auto g = io::graph_from_json(io::parse(io::read_file(root + "/cross_graph.json")));
  EXPECT_EQ(g.k(), 2u);
  const auto cfg = io::experiment_from_json(io::parse(io::read_file(root + "/experiment_quick.json")));
  EXPECT_EQ(cfg.run.schedule, (std::vector<std::size_t>{4, 8}));
  EXPECT_EQ(cfg.run.trials, 3u);
}

TEST(Io, ExperimentConfigValidation) {
  json j = io::parse(io::read_file(std::string(PGRAPHON_FIXTURES) + "/experiment_quick.json"));
  j["trials"] = -1;
  EXPECT_NE(error_of([&] { io::experiment_from_json(j); }).find("at /trials"), std::string::npos);
  j["trials"] = 2;
  j["metrics"] = {"delta_lp", 3};
  EXPECT_NE(error_of([&] { io::experiment_from_json(j); }).find("at /metrics/1"), std::string::npos);
}

TEST(Io, FormatNumberIsShortestRoundTrip) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(0.0), "0");
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.3333333333333333");
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1e3, 1e3);
    EXPECT_EQ(std::strtod(io::format_number(v).c_str(), nullptr), v);
  }
}

TEST(Io, CsvQuotesAndUsesCrlf) {
  EXPECT_EQ(io::csv({"a", "b"}, {{"1", "x,y"}, {"say \"hi\"", "line\nbreak"}}), "a,b\r\n1,\"x,y\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n");
  ConvergenceReport r;
  r.rows.push_back({4, 0, "delta_lp", 0.25, true});
  EXPECT_EQ(io::convergence_csv(r), "n,trial,metric,value,exact\r\n4,0,delta_lp,0.25,true\r\n");
}

TEST(Io, ProvenanceHashesInputs) {
  const auto p = io::provenance({{"a", "hello"}}, {{"seed", 7}});
  EXPECT_EQ(p["version"], io::kVersion);
  EXPECT_EQ(p["seed"], 7);
  // FNV-1a 64 of "hello"
  EXPECT_EQ(p["inputs"]["a"], "a430d84680aabd0b");
  EXPECT_EQ(io::dump(p), io::dump(io::provenance({{"a", "hello"}}, {{"seed", 7}})));
}
