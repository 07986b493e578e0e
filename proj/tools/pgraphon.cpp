// pgraphon command-line tool. JSON on stdout (or -o), diagnostics on stderr.
// Exit codes: 0 success, 1 verify reported violations, 2 invalid input.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pgraphon/pgraphon.hpp"

namespace {

using pgraphon::io::json;
namespace io = pgraphon::io;

struct Globals {
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::size_t threads = 1;
  std::string output;
};

struct Input {
  std::string path;
  std::string bytes;
  json doc;
};

Input load(const std::string& path) {
  Input in{path, io::read_file(path), {}};
  in.doc = io::parse(in.bytes, path);
  return in;
}

void emit(const Globals& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.output, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + g.output);
  f << text;
}

// A measure-valued kernel; real kernels are read through the two-point embedding.
pgraphon::StepKernel measure_kernel(const Input& in) {
  try {
    if (in.doc.contains("kind") && in.doc["kind"] == "real") return pgraphon::from_real_graphon(io::real_kernel_from_json(in.doc));
    return io::kernel_from_json(in.doc);
  } catch (const pgraphon::SchemaError& e) {
    throw pgraphon::SchemaError(in.path + ": " + e.what());
  }
}

template <class Fn>
auto parse_file(const Input& in, Fn&& fn) -> decltype(fn(in.doc)) {
  try {
    return fn(in.doc);
  } catch (const pgraphon::SchemaError& e) {
    throw pgraphon::SchemaError(in.path + ": " + e.what());
  }
}

// --budget takes a JSON object inline or a path to one.
pgraphon::Budget budget_of(const std::string& arg, const Globals& g) {
  pgraphon::Budget b;
  b.seed = pgraphon::derive_seed(g.seed, 0xb0d6e7ULL);
  if (!arg.empty()) {
    const bool inline_json = arg.find('{') != std::string::npos;
    b = io::budget_from_json(io::parse(inline_json ? arg : io::read_file(arg), inline_json ? "--budget" : arg), b);
  }
  b.threads = g.threads;
  return b;
}

pgraphon::TestFamily family_of(const std::string& path, const pgraphon::SpacePtr& space) {
  if (path.empty()) return pgraphon::TestFamily::canonical(space);
  const Input in = load(path);
  return parse_file(in, [](const json& j) { return io::family_from_json(j); });
}

json provenance(const std::string& command, const std::vector<const Input*>& inputs, const Globals& g, json extra = json::object()) {
  std::vector<std::pair<std::string, std::string>> named;
  for (const Input* in : inputs) named.emplace_back(in->path, in->bytes);
  extra["command"] = command;
  extra["seed"] = g.seed;
  return io::provenance(named, std::move(extra));
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw pgraphon::DomainError("invalid number '" + item + "' in list '" + s + "'");
    v.push_back(x);
  }
  return v;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  for (double x : parse_list(s)) {
    if (!(x >= 1.0) || x != std::floor(x)) throw pgraphon::DomainError("expected positive integers in '" + s + "'");
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distances, overlay functionals, quotient sets and sampling for measure-valued step kernels"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->each([&](const std::string&) { g.seed_given = true; });
  app.add_option("--threads", g.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  app.add_option("-o,--output", g.output, "Write the result to this file instead of stdout");

  std::string budget;
  auto budget_flag = [&](CLI::App* sub) { sub->add_option("--budget", budget, "Budget overrides: inline JSON object or a file"); };

  // dist
  auto* dist = app.add_subcommand("dist", "Cut distance or delta distance between two kernels");
  std::string metric = "delta-lp", dist_a, dist_b, family_path;
  dist->add_option("--metric", metric)->check(CLI::IsMember({"cutlp", "cutf", "delta-lp", "delta-f", "delta2f"}))->capture_default_str();
  dist->add_option("a", dist_a, "First kernel")->required();
  dist->add_option("b", dist_b, "Second kernel")->required();
  dist->add_option("--family", family_path, "Test family (default: 1 and the point indicators)");
  budget_flag(dist);

  // cutnorm
  auto* cutnorm = app.add_subcommand("cutnorm", "Cut norm of one kernel (real kernels: ||W||_box, measure kernels: ||W||_box,F)");
  std::string cut_path;
  cutnorm->add_option("kernel", cut_path)->required();
  cutnorm->add_option("--family", family_path);
  budget_flag(cutnorm);

  // overlay
  auto* overlay = app.add_subcommand("overlay", "Overlay functionals");
  std::string mode = "graph", ov_u, ov_w, alpha_list;
  std::size_t truncate_n = 4;
  overlay->add_option("--mode", mode)->check(CLI::IsMember({"graph", "kernel", "f", "truncated"}))->capture_default_str();
  overlay->add_option("u", ov_u, "Measure-valued kernel")->required();
  overlay->add_option("w", ov_w, "graph: decorated graph; kernel: function kernel; f, truncated: measure kernel")->required();
  overlay->add_option("--alpha", alpha_list, "Vertex weights for --mode graph, comma separated");
  overlay->add_option("--family", family_path);
  overlay->add_option("--N", truncate_n, "Truncation index for --mode truncated")->check(CLI::PositiveNumber)->capture_default_str();
  budget_flag(overlay);

  // quotient
  auto* quot = app.add_subcommand("quotient", "Quotient cloud Q_k of a kernel");
  std::string q_path, q_mode = "enumerate";
  std::size_t q_k = 2, q_n = 0, q_count = 256;
  std::uint64_t q_max = 1000000;
  quot->add_option("kernel", q_path)->required();
  quot->add_option("--k", q_k, "Number of classes")->check(CLI::PositiveNumber)->capture_default_str();
  quot->add_option("--mode", q_mode)->check(CLI::IsMember({"enumerate", "sample"}))->capture_default_str();
  quot->add_option("--n", q_n, "Grid size (0: minimal grid of the kernel)")->capture_default_str();
  quot->add_option("--count", q_count, "Assignments drawn in sample mode")->capture_default_str();
  quot->add_option("--alpha", alpha_list, "Keep only quotients with these class masses, comma separated");
  quot->add_option("--max-assignments", q_max, "Enumeration limit on k^n")->capture_default_str();

  // hausdorff
  auto* haus = app.add_subcommand("hausdorff", "Hausdorff distance between two quotient clouds");
  std::string h_a, h_b, h_metric = "dsquare";
  haus->add_option("a", h_a)->required();
  haus->add_option("b", h_b)->required();
  haus->add_option("--metric", h_metric)->check(CLI::IsMember({"d1", "dsquare"}))->capture_default_str();

  // sample
  auto* sample = app.add_subcommand("sample", "Decorated W-random graph on n vertices");
  std::string s_path;
  std::size_t s_n = 8;
  bool s_sym = false;
  sample->add_option("kernel", s_path)->required();
  sample->add_option("--n", s_n)->check(CLI::PositiveNumber)->capture_default_str();
  sample->add_flag("--symmetric", s_sym, "Sample j >= k and mirror");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Convergence experiment; CSV with columns n, trial, metric, value, exact");
  std::string e_path, e_format = "csv";
  experiment->add_option("config", e_path)->required();
  experiment->add_option("--format", e_format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  // verify
  auto* verify = app.add_subcommand("verify", "Property suites and the convergence experiment");
  std::vector<std::string> suites{"all"};
  std::size_t v_trials = 0, v_theorem_trials = 100;
  std::string v_schedule = "4,8,16,32";
  verify->add_option("--suite", suites, "measures, cutnorm, delta, overlay, quotients, sampling, theorem, all or none")->delimiter(',');
  verify->add_option("--trials", v_trials, "Instances per check (0: each check's default)")->capture_default_str();
  verify->add_option("--n", v_schedule, "Sample sizes of the convergence experiment")->capture_default_str();
  verify->add_option("--theorem-trials", v_theorem_trials, "Trials per sample size in the convergence experiment")->capture_default_str();

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (dist->parsed()) {
      const Input a = load(dist_a), b = load(dist_b);
      const auto u = measure_kernel(a), w = measure_kernel(b);
      const auto bud = budget_of(budget, g);
      json out;
      if (metric == "cutlp") out = io::to_json(pgraphon::cut_dist_lp(u, w, bud));
      else if (metric == "cutf") out = io::to_json(pgraphon::cut_dist_f(u, w, family_of(family_path, u.space()), bud));
      else if (metric == "delta-lp") out = io::to_json(pgraphon::delta_cut_lp(u, w, bud));
      else if (metric == "delta-f") out = io::to_json(pgraphon::delta_cut_f(u, w, family_of(family_path, u.space()), bud));
      else out = io::to_json(pgraphon::delta_2f(u, w, family_of(family_path, u.space()), bud));
      out["metric"] = metric;
      out["provenance"] = provenance("dist", {&a, &b}, g, {{"budget", io::to_json(bud)}});
      emit(g, io::dump(out));
    } else if (cutnorm->parsed()) {
      const Input in = load(cut_path);
      const auto bud = budget_of(budget, g);
      json out;
      if (in.doc.contains("kind") && in.doc["kind"] == "real") {
        out = io::to_json(pgraphon::cut_norm_real(parse_file(in, [](const json& j) { return io::real_kernel_from_json(j); }), bud));
        out["norm"] = "real";
      } else {
        const auto w = measure_kernel(in);
        out = io::to_json(pgraphon::cut_norm_f(w, family_of(family_path, w.space()), bud));
        out["norm"] = "F";
      }
      out["provenance"] = provenance("cutnorm", {&in}, g, {{"budget", io::to_json(bud)}});
      emit(g, io::dump(out));
    } else if (overlay->parsed()) {
      const Input a = load(ov_u), b = load(ov_w);
      const auto u = measure_kernel(a);
      const auto bud = budget_of(budget, g);
      json out;
      if (mode == "graph") {
        auto graph = parse_file(b, [](const json& j) { return io::graph_from_json(j); });
        if (!alpha_list.empty()) {
          pgraphon::CbGraph re(graph.space(), graph.k(), parse_list(alpha_list));
          for (std::size_t i = 0; i < graph.k(); ++i)
            for (std::size_t j = 0; j < graph.k(); ++j)
              if (graph.has_edge(i, j)) re.set_edge(i, j, *graph.beta(i, j));
          graph = std::move(re);
        }
        out = io::to_json(pgraphon::overlay_graph(u, graph, bud));
      } else if (mode == "kernel") {
        out = io::to_json(pgraphon::overlay_kernel(u, parse_file(b, [](const json& j) { return io::cb_kernel_from_json(j); }), bud));
      } else {
        const auto w = measure_kernel(b);
        const auto fam = family_of(family_path, u.space());
        if (mode == "f") out = io::to_json(pgraphon::f_overlay(u, w, fam, bud));
        else out = io::to_json(pgraphon::f_overlay_truncated(u, w, fam, truncate_n, bud));
      }
      out["mode"] = mode;
      out["provenance"] = provenance("overlay", {&a, &b}, g, {{"budget", io::to_json(bud)}});
      emit(g, io::dump(out));
    } else if (quot->parsed()) {
      const Input in = load(q_path);
      const auto w = measure_kernel(in);
      pgraphon::CloudOptions opt;
      opt.mode = q_mode == "enumerate" ? pgraphon::CloudMode::kEnumerate : pgraphon::CloudMode::kSample;
      opt.n = q_n;
      opt.count = q_count;
      opt.seed = g.seed;
      opt.max_assignments = q_max;
      if (!alpha_list.empty()) opt.alpha = parse_list(alpha_list);
      const auto cloud = pgraphon::quotient_cloud(w, q_k, opt);
      json out = io::to_json(cloud, w.space());
      out["provenance"].update(provenance("quotient", {&in}, g));
      emit(g, io::dump(out));
    } else if (haus->parsed()) {
      const Input a = load(h_a), b = load(h_b);
      const auto ca = parse_file(a, [](const json& j) { return io::cloud_from_json(j); });
      const auto cb = parse_file(b, [](const json& j) { return io::cloud_from_json(j); });
      pgraphon::Budget bud;
      bud.threads = g.threads;
      const double h = pgraphon::hausdorff(ca, cb, h_metric == "d1" ? pgraphon::QuotientMetric::kD1 : pgraphon::QuotientMetric::kDsquare, bud);
      json out = {{"value", h}, {"exact", true}, {"metric", h_metric}, {"sizes", {ca.members.size(), cb.members.size()}}};
      out["provenance"] = provenance("hausdorff", {&a, &b}, g);
      emit(g, io::dump(out));
    } else if (sample->parsed()) {
      const Input in = load(s_path);
      const auto w = measure_kernel(in);
      json out = io::to_json(pgraphon::sample_graph(w, s_n, g.seed, s_sym));
      out["provenance"] = provenance("sample", {&in}, g);
      emit(g, io::dump(out));
    } else if (experiment->parsed()) {
      const Input in = load(e_path);
      auto cfg = parse_file(in, [](const json& j) { return io::experiment_from_json(j); });
      if (g.seed_given) cfg.run.seed = g.seed;
      cfg.run.budget.threads = g.threads;
      const auto report = pgraphon::convergence_run(cfg.kernel, cfg.run);
      if (e_format == "csv") {
        emit(g, io::convergence_csv(report));
      } else {
        json rows = json::array();
        for (const auto& r : report.rows) rows.push_back({{"n", r.n}, {"trial", r.trial}, {"metric", r.metric}, {"value", r.value}, {"exact", r.exact}});
        json out = {{"rows", rows}, {"limits", report.limits}, {"limits_exact", report.limits_exact}};
        Globals eg = g;
        eg.seed = cfg.run.seed;
        out["provenance"] = provenance("experiment", {&in}, eg);
        emit(g, io::dump(out));
      }
    } else if (verify->parsed()) {
      pgraphon::verify::VerifyOptions opt;
      opt.suites = suites;
      opt.seed = g.seed;
      opt.trials = v_trials;
      opt.schedule = parse_sizes(v_schedule);
      opt.theorem_trials = v_theorem_trials;
      opt.threads = g.threads;
      const auto report = pgraphon::verify::run(opt);
      emit(g, io::dump(pgraphon::verify::to_json(report)));
      for (const auto& c : report.checks) {
        std::cerr << (c.passed() ? "PASS " : "FAIL ") << c.suite << "/" << c.name << " (" << c.instances << " instances, worst margin " << c.worst_margin << ")\n";
        if (!c.passed()) std::cerr << "  reproducer: " << c.reproducer.dump() << "\n";
      }
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
