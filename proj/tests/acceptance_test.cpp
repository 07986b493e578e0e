// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "pgraphon/generate.hpp"
#include "pgraphon/verify.hpp"

using namespace pgraphon;

namespace {

struct Criterion {
  bool ok = true;
  std::ostringstream why;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      why << " [" << what << "]";
    }
  }
};

const verify::CheckResult* find(const verify::VerifyReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

// The named check ran at least `min_instances` times without a violation.
void require_check(Criterion& c, const verify::VerifyReport& r, const std::string& name, std::size_t min_instances) {
  const auto* chk = find(r, name);
  if (!chk) return c.require(false, name + " missing");
  std::ostringstream s;
  s << name << ": " << chk->violations << " violations in " << chk->instances << ", worst margin " << chk->worst_margin;
  c.require(chk->instances >= min_instances && chk->passed(), s.str());
}

verify::VerifyReport run_suite(const std::string& suite, std::size_t theorem_trials = 100) {
  verify::VerifyOptions o;
  o.suites = {suite};
  o.theorem_trials = theorem_trials;
  return verify::run(o);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return status = -1, out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
  const int st = pclose(p);
  status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

Criterion lp_suite() {
  Criterion c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_suite("measures");
  require_check(c, r, "lp_le_tv", 1000);
  require_check(c, r, "lp_scaling", 1000);
  require_check(c, r, "lp_quasi_convex", 1000);
  require_check(c, r, "lp_scaling_sharpness", 3);
  // independent bisection oracle on the defining inequalities
  std::size_t off = 0;
  Rng rng(0x1b);
  for (int i = 0; i < 1000; ++i) {
    auto s = gen::space(rng, 1 + rng.below(8));
    auto mu = gen::nonnegative_weights(rng, s->size(), 1.0), nu = gen::nonnegative_weights(rng, s->size(), 1.0);
    const double v = lp_distance(SignedMeasure(s, mu), SignedMeasure(s, nu)).value;
    off += std::abs(v - oracle::lp(*s, mu, nu)) > 1e-9;
  }
  c.require(off == 0, std::to_string(off) + " oracle disagreements");
  const double t = seconds_since(t0);
  c.require(t < 60.0, "runtime " + std::to_string(t) + " s");
  c.why << " runtime " << t << " s";
  return c;
}

Criterion cut_suite() {
  Criterion c;
  require_check(c, run_suite("cutnorm"), "cut_f_bound", 500);
  return c;
}

Criterion delta_suite() {
  Criterion c;
  const auto r = run_suite("delta");
  require_check(c, r, "delta_relabel_zero", 100);
  require_check(c, r, "delta_two_point_oracle", 100);
  // real-graphon permutation oracle, n <= 5 to keep the enumeration small
  std::size_t off = 0, inexact = 0;
  Rng rng(0xde1);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng.below(4);
    auto u = gen::real_kernel(rng, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(n, 3)), n));
    auto w = gen::real_kernel(rng, gen::grid_sizes(rng, 1 + rng.below(std::min<std::size_t>(n, 3)), n));
    const DeltaResult d = delta_cut_lp(from_real_graphon(u), from_real_graphon(w));
    inexact += !d.exact;
    off += std::abs(d.value - oracle::delta_real(u, w, d.n)) > 1e-9;
  }
  c.require(off == 0 && inexact == 0, std::to_string(off) + " oracle disagreements, " + std::to_string(inexact) + " inexact");
  return c;
}

Criterion overlay_suite() {
  Criterion c;
  const auto r = run_suite("overlay");
  require_check(c, r, "overlay_homogeneity", 200);
  require_check(c, r, "overlay_subadditive", 200);
  require_check(c, r, "overlay_graph_identity", 200);
  require_check(c, r, "f_overlay_cosine", 200);
  require_check(c, r, "f_overlay_truncation", 200);
  return c;
}

Criterion quotient_suite() {
  Criterion c;
  const auto r = run_suite("quotients");
  require_check(c, r, "quotient_sandwich", 1000);
  require_check(c, r, "quotient_rebalance", 200);
  require_check(c, r, "quotient_matched_hausdorff", 50);
  return c;
}

Criterion theorem_run() {
  Criterion c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_suite("theorem", 100);
  require_check(c, r, "theorem_delta_decreasing", 1);
  require_check(c, r, "theorem_overlay_decreasing", 1);
  require_check(c, r, "theorem_quotient_decreasing", 1);
  if (const auto* last = find(r, "theorem_quotient_decreasing"); last && last->details.is_object())
    c.why << " medians " << last->details["medians"].dump();
  const double t = seconds_since(t0);
  c.require(t <= 600.0, "runtime " + std::to_string(t) + " s");
  c.why << " runtime " << t << " s";
  return c;
}

Criterion determinism() {
  Criterion c;
  verify::VerifyOptions o;
  o.suites = {"measures", "delta", "sampling", "theorem"};
  o.seed = 42;
  o.trials = 20;
  o.theorem_trials = 4;
  const auto a = io::dump(verify::to_json(verify::run(o)));
  const auto b = io::dump(verify::to_json(verify::run(o)));
  c.require(a == b, "library reports differ");
  const std::string cmd = std::string(PGRAPHON_CLI) + " --seed 42 verify --suite measures,quotients,theorem --trials 20 --theorem-trials 4 2>/dev/null";
  int s1 = 0, s2 = 0;
  const auto x = capture(cmd, s1), y = capture(cmd, s2);
  // exit 1 only reports failed checks at these small trial counts; 2 is a usage or input error
  c.require(s1 >= 0 && s1 <= 1 && s1 == s2 && !x.empty(), "cli exit status " + std::to_string(s1) + "/" + std::to_string(s2));
  c.require(x == y, "cli reports differ");
  return c;
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Criterion()>>> criteria{
      {"1 LP-metric suite", lp_suite},           {"2 cut-norm suite", cut_suite},
      {"3 delta exactness", delta_suite},         {"4 overlay suite", overlay_suite},
      {"5 quotient suite", quotient_suite},       {"6 convergence experiment", theorem_run},
      {"7 determinism", determinism},
  };
  bool all = true;
  for (const auto& [name, fn] : criteria) {
    Criterion c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    all = all && c.ok;
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << name << ":" << c.why.str() << std::endl;
  }
  return all ? 0 : 1;
}
