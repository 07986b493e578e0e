#include <gtest/gtest.h>

#include "pgraphon/verify.hpp"

using namespace pgraphon;

namespace {

verify::VerifyOptions small(std::vector<std::string> suites, std::uint64_t seed = 1) {
  verify::VerifyOptions o;
  o.suites = std::move(suites);
  o.seed = seed;
  o.trials = 10;
  o.theorem_trials = 3;
  o.schedule = {4, 8};
  return o;
}

} // namespace

TEST(Verify, SuiteNamesAreResolved) {
  const auto r = verify::run(small({"none"}));
  EXPECT_TRUE(r.suites.empty());
  EXPECT_TRUE(r.checks.empty());
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(verify::run(small({"all"})).suites, verify::suite_names());
  EXPECT_THROW(verify::run(small({"measures", "bogus"})), DomainError);
}

TEST(Verify, SmallRunsPassAndRecordEveryCheck) {
  const auto r = verify::run(small({"measures", "cutnorm", "overlay", "quotients"}));
  EXPECT_TRUE(r.passed());
  for (const auto& c : r.checks) {
    EXPECT_GT(c.instances, 0u) << c.name;
    EXPECT_EQ(c.violations, 0u) << c.name;
    EXPECT_TRUE(c.reproducer.is_null()) << c.name;
    EXPECT_FALSE(c.statement.empty()) << c.name;
  }
}

TEST(Verify, SameSeedSameBytes) {
  const auto a = io::dump(verify::to_json(verify::run(small({"measures", "sampling"}, 9))));
  const auto b = io::dump(verify::to_json(verify::run(small({"measures", "sampling"}, 9))));
  EXPECT_EQ(a, b);
  auto threaded = small({"measures", "sampling"}, 9);
  threaded.threads = 3;
  EXPECT_EQ(io::dump(verify::to_json(verify::run(threaded))), a);
}

TEST(Verify, ReportJsonShape) {
  const auto j = verify::to_json(verify::run(small({"measures"})));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["failed"], 0);
  EXPECT_EQ(j["suites"], io::json::array({"measures"}));
  ASSERT_FALSE(j["checks"].empty());
  EXPECT_TRUE(j["checks"][0].contains("worst_margin"));
}

TEST(Verify, ViolationsCarryAReplayableReproducer) {
  const auto opt = small({"none"});
  std::vector<verify::CheckResult> out;
  verify::detail::Context ctx{opt, out, "synthetic"};
  auto fn = [](std::uint64_t seed) {
    Rng rng(seed);
    return verify::Outcome{rng.uniform() - 0.3, {{"seed", seed}}};
  };
  ctx.run("synthetic_check", "uniform draws exceed 0.3", 50, 0.0, fn);
  ASSERT_EQ(out.size(), 1u);
  const auto& r = out[0];
  EXPECT_FALSE(r.passed());
  EXPECT_GT(r.violations, 0u);
  EXPECT_LT(r.violations, 50u);
  const auto seed = r.reproducer["seed"].get<std::uint64_t>();
  EXPECT_EQ(fn(seed).margin, r.reproducer["margin"].get<double>());
  EXPECT_LT(r.worst_margin, 0.0);
}

TEST(Verify, NanMarginsAreViolations) {
  const auto opt = small({"none"});
  std::vector<verify::CheckResult> out;
  verify::detail::Context ctx{opt, out, "synthetic"};
  ctx.run("nan_check", "never a number", 3, 1.0, [](std::uint64_t) { return verify::Outcome{std::nan(""), nullptr}; });
  EXPECT_EQ(out[0].violations, 3u);
  EXPECT_EQ(out[0].reproducer["margin"], "nan");
}

TEST(Verify, TheoremSuiteRecordsItsTable) {
  const auto r = verify::run(small({"theorem"}));
  ASSERT_EQ(r.checks.size(), 3u);
  const auto& d = r.checks.back().details;
  ASSERT_TRUE(d.is_object());
  EXPECT_EQ(d["trials"], 3);
  EXPECT_TRUE(d.contains("medians"));
  EXPECT_TRUE(d.contains("limits"));
}
