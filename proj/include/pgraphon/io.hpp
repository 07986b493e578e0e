#pragma once

// JSON and CSV serialization. Objects are nlohmann::json (std::map backed, so
// keys come out sorted); malformed input raises SchemaError naming the JSON
// pointer of the offending value.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgraphon/error.hpp"
#include "pgraphon/kernel.hpp"
#include "pgraphon/measure.hpp"
#include "pgraphon/metrics.hpp"
#include "pgraphon/overlay.hpp"
#include "pgraphon/quotients.hpp"
#include "pgraphon/sampling.hpp"
#include "pgraphon/search.hpp"

namespace pgraphon::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse(const std::string& text, const std::string& source = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(source + ": malformed JSON: " + e.what());
  }
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Checked accessors

namespace detail {

inline std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
inline std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

[[noreturn]] inline void fail(const std::string& ptr, const std::string& what) { throw SchemaError("at " + (ptr.empty() ? "/" : ptr) + ": " + what); }

inline const json& field(const json& j, const std::string& key, const std::string& ptr) {
  if (!j.is_object()) fail(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(child(ptr, key), "missing required field");
  return *it;
}

inline double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  return j.get<double>();
}

inline std::uint64_t unsigned_int(const json& j, const std::string& ptr) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    fail(ptr, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

inline std::vector<double> numbers(const json& j, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected an array of numbers");
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], child(ptr, i)));
  return v;
}

inline std::vector<std::vector<double>> matrix(const json& j, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected an array of arrays");
  std::vector<std::vector<double>> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(numbers(j[i], child(ptr, i)));
  return v;
}

inline std::vector<std::size_t> indices(const json& j, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected an array of indices");
  std::vector<std::size_t> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(static_cast<std::size_t>(unsigned_int(j[i], child(ptr, i))));
  return v;
}

// Runs a constructor and re-raises its validation errors at `ptr`.
template <class Fn>
auto guarded(const std::string& ptr, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    fail(ptr, e.what());
  }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Measures

inline json to_json(const DecorationSpace& s) {
  json d = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < s.size(); ++j) row.push_back(s.dist(i, j));
    d.push_back(row);
  }
  return {{"points", s.points()}, {"dist", d}};
}

/// Accepts the object form or the string "two_point".
inline SpacePtr space_from_json(const json& j, const std::string& ptr = "") {
  if (j.is_string()) {
    if (j.get<std::string>() == "two_point") return DecorationSpace::two_point();
    detail::fail(ptr, "unknown named space '" + j.get<std::string>() + "' (expected \"two_point\" or an object)");
  }
  const json& pts = detail::field(j, "points", ptr);
  if (!pts.is_array()) detail::fail(detail::child(ptr, "points"), "expected an array");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].is_string()) names.push_back(pts[i].get<std::string>());
    else if (pts[i].is_number()) names.push_back(pts[i].dump());
    else detail::fail(detail::child(detail::child(ptr, "points"), i), "expected a string or number");
  }
  auto dist = detail::matrix(detail::field(j, "dist", ptr), detail::child(ptr, "dist"));
  if (names.size() == 2 && dist == std::vector<std::vector<double>>{{0.0, 1.0}, {1.0, 0.0}} && names[0] == "0" && names[1] == "1")
    return DecorationSpace::two_point();
  return detail::guarded(ptr, [&] { return std::make_shared<const DecorationSpace>(std::move(names), std::move(dist)); });
}

inline json to_json(const SignedMeasure& m) {
  return {{"space", to_json(*m.space())}, {"weights", std::vector<double>(m.weights().begin(), m.weights().end())}};
}

inline SignedMeasure measure_from_json(const json& j, const std::string& ptr = "") {
  SpacePtr s = space_from_json(detail::field(j, "space", ptr), detail::child(ptr, "space"));
  auto w = detail::numbers(detail::field(j, "weights", ptr), detail::child(ptr, "weights"));
  return detail::guarded(ptr, [&] { return SignedMeasure(s, std::move(w)); });
}

inline json to_json(const TestFamily& f) {
  json fs = json::array();
  for (const auto& g : f.functions()) fs.push_back(g);
  return {{"space", to_json(*f.space())}, {"functions", fs}};
}

inline TestFamily family_from_json(const json& j, const std::string& ptr = "") {
  SpacePtr s = space_from_json(detail::field(j, "space", ptr), detail::child(ptr, "space"));
  if (j.contains("canonical") && j["canonical"].is_boolean() && j["canonical"].get<bool>()) return TestFamily::canonical(s);
  auto fs = detail::matrix(detail::field(j, "functions", ptr), detail::child(ptr, "functions"));
  return detail::guarded(ptr, [&] { return TestFamily(s, std::move(fs)); });
}

// ---------------------------------------------------------------------------
// Kernels

template <class Tag>
json entries_json(const GridKernel<Tag>& w) {
  json e = json::array();
  for (std::size_t p = 0; p < w.parts(); ++p)
    for (std::size_t q = 0; q < w.parts(); ++q) {
      auto x = w.entry(p, q);
      e.push_back(std::vector<double>(x.begin(), x.end()));
    }
  return e;
}

inline json to_json(const StepKernel& w) {
  return {{"kind", "measure"}, {"space", to_json(*w.space())}, {"part_sizes", w.part_sizes()}, {"entries", entries_json(w)}};
}

inline json to_json(const CbStepKernel& w) {
  return {{"kind", "function"}, {"space", to_json(*w.space())}, {"part_sizes", w.part_sizes()}, {"entries", entries_json(w)}};
}

inline json to_json(const RealStepKernel& w) {
  json rows = json::array();
  for (std::size_t p = 0; p < w.parts(); ++p) {
    json row = json::array();
    for (std::size_t q = 0; q < w.parts(); ++q) row.push_back(w.value(p, q));
    rows.push_back(row);
  }
  return {{"kind", "real"}, {"part_sizes", w.part_sizes()}, {"values", rows}};
}

namespace detail {

// "entries" is either m*m weight vectors in row-major order or an m x m
// array of weight vectors.
inline std::vector<double> kernel_entries(const json& j, std::size_t m, std::size_t width, const std::string& ptr) {
  if (!j.is_array()) fail(ptr, "expected an array");
  std::vector<double> data;
  data.reserve(m * m * width);
  auto take = [&](const json& e, const std::string& p) {
    auto v = numbers(e, p);
    if (v.size() != width) fail(p, "expected " + std::to_string(width) + " weights, got " + std::to_string(v.size()));
    data.insert(data.end(), v.begin(), v.end());
  };
  const bool flat = j.size() == m * m && (j.empty() || !j[0].is_array() || j[0].empty() || !j[0][0].is_array());
  if (flat) {
    for (std::size_t i = 0; i < j.size(); ++i) take(j[i], child(ptr, i));
  } else if (j.size() == m) {
    for (std::size_t p = 0; p < m; ++p) {
      const json& row = j[p];
      if (!row.is_array() || row.size() != m) fail(child(ptr, p), "expected " + std::to_string(m) + " entries");
      for (std::size_t q = 0; q < m; ++q) take(row[q], child(child(ptr, p), q));
    }
  } else {
    fail(ptr, "expected " + std::to_string(m * m) + " entries (or an " + std::to_string(m) + "x" + std::to_string(m) + " array)");
  }
  return data;
}

} // namespace detail

inline StepKernel kernel_from_json(const json& j, const std::string& ptr = "") {
  if (j.contains("kind") && j["kind"] != "measure") detail::fail(detail::child(ptr, "kind"), "expected a measure-valued kernel");
  SpacePtr s = space_from_json(detail::field(j, "space", ptr), detail::child(ptr, "space"));
  auto sizes = detail::numbers(detail::field(j, "part_sizes", ptr), detail::child(ptr, "part_sizes"));
  auto data = detail::kernel_entries(detail::field(j, "entries", ptr), sizes.size(), s->size(), detail::child(ptr, "entries"));
  return detail::guarded(ptr, [&] { return StepKernel(s, std::move(sizes), std::move(data)); });
}

inline CbStepKernel cb_kernel_from_json(const json& j, const std::string& ptr = "") {
  SpacePtr s = space_from_json(detail::field(j, "space", ptr), detail::child(ptr, "space"));
  auto sizes = detail::numbers(detail::field(j, "part_sizes", ptr), detail::child(ptr, "part_sizes"));
  auto data = detail::kernel_entries(detail::field(j, "entries", ptr), sizes.size(), s->size(), detail::child(ptr, "entries"));
  return detail::guarded(ptr, [&] { return CbStepKernel(s, std::move(sizes), std::move(data)); });
}

inline RealStepKernel real_kernel_from_json(const json& j, const std::string& ptr = "") {
  auto sizes = detail::numbers(detail::field(j, "part_sizes", ptr), detail::child(ptr, "part_sizes"));
  auto rows = detail::matrix(detail::field(j, "values", ptr), detail::child(ptr, "values"));
  return detail::guarded(ptr, [&] { return make_real_kernel(std::move(sizes), std::move(rows)); });
}

inline json to_json(const CbGraph& g) {
  json beta = json::array();
  for (std::size_t i = 0; i < g.k(); ++i)
    for (std::size_t j = 0; j < g.k(); ++j)
      if (g.has_edge(i, j)) beta.push_back(json::array({i, j, *g.beta(i, j)}));
  return {{"space", to_json(*g.space())}, {"k", g.k()}, {"alpha", g.alpha()}, {"beta", beta}};
}

/// beta entries are [i, j, [f...]] triples; absent pairs carry the zero marker.
inline CbGraph graph_from_json(const json& j, const std::string& ptr = "") {
  SpacePtr s = space_from_json(detail::field(j, "space", ptr), detail::child(ptr, "space"));
  const auto k = static_cast<std::size_t>(detail::unsigned_int(detail::field(j, "k", ptr), detail::child(ptr, "k")));
  std::vector<double> alpha;
  if (j.contains("alpha")) alpha = detail::numbers(j["alpha"], detail::child(ptr, "alpha"));
  CbGraph g = detail::guarded(ptr, [&] { return CbGraph(s, k, alpha); });
  const json& beta = detail::field(j, "beta", ptr);
  const std::string bptr = detail::child(ptr, "beta");
  if (!beta.is_array()) detail::fail(bptr, "expected an array of [i, j, function] triples");
  for (std::size_t e = 0; e < beta.size(); ++e) {
    const std::string eptr = detail::child(bptr, e);
    if (!beta[e].is_array() || beta[e].size() != 3) detail::fail(eptr, "expected an [i, j, function] triple");
    const auto a = static_cast<std::size_t>(detail::unsigned_int(beta[e][0], detail::child(eptr, 0)));
    const auto b = static_cast<std::size_t>(detail::unsigned_int(beta[e][1], detail::child(eptr, 1)));
    auto f = detail::numbers(beta[e][2], detail::child(eptr, 2));
    detail::guarded(eptr, [&] {
      g.set_edge(a, b, std::move(f));
      return 0;
    });
  }
  return g;
}

inline json to_json(const Permutation& p) { return p.image(); }

inline json to_json(const OverlapMatrix& rho) {
  json rows = json::array();
  for (std::size_t r = 0; r < rho.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < rho.cols(); ++c) row.push_back(rho(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline OverlapMatrix overlap_from_json(const json& j, const std::string& ptr = "") {
  auto rows = detail::matrix(j, ptr);
  if (rows.empty()) detail::fail(ptr, "expected a nonempty matrix");
  std::vector<double> v;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) detail::fail(detail::child(ptr, r), "rows must have equal length");
    v.insert(v.end(), rows[r].begin(), rows[r].end());
  }
  return detail::guarded(ptr, [&] { return OverlapMatrix(rows.size(), rows[0].size(), std::move(v)); });
}

// ---------------------------------------------------------------------------
// Budgets and results

inline json to_json(const Budget& b) {
  return {{"exact_cells", b.exact_cells}, {"exact_rect_parts", b.exact_rect_parts}, {"exact_cut_parts", b.exact_cut_parts},
          {"exact_tables", b.exact_tables}, {"restarts", b.restarts},           {"steps", b.steps},
          {"local_restarts", b.local_restarts}, {"ascent_starts", b.ascent_starts}, {"grid", b.grid},
          {"seed", b.seed}};
}

/// Overrides the defaults with the fields present; unknown keys are errors.
inline Budget budget_from_json(const json& j, Budget b = {}, const std::string& ptr = "") {
  if (!j.is_object()) detail::fail(ptr, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = detail::child(ptr, it.key());
    const auto v = detail::unsigned_int(it.value(), p);
    const std::string& k = it.key();
    if (k == "exact_cells") b.exact_cells = v;
    else if (k == "exact_rect_parts") b.exact_rect_parts = v;
    else if (k == "exact_cut_parts") b.exact_cut_parts = v;
    else if (k == "exact_tables") b.exact_tables = v;
    else if (k == "restarts") b.restarts = v;
    else if (k == "steps") b.steps = v;
    else if (k == "local_restarts") b.local_restarts = v;
    else if (k == "ascent_starts") b.ascent_starts = v;
    else if (k == "grid") b.grid = v;
    else if (k == "threads") b.threads = v;
    else if (k == "seed") b.seed = v;
    else detail::fail(p, "unknown budget field");
  }
  return b;
}

inline json sets_json(const std::vector<char>& s) {
  json a = json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) a.push_back(i);
  return a;
}

inline json to_json(const CutResult& r) { return {{"value", r.value}, {"exact", r.exact}, {"S", sets_json(r.S)}, {"T", sets_json(r.T)}}; }

inline json to_json(const DeltaResult& r) { return {{"value", r.value}, {"exact", r.exact}, {"certificate", to_json(r.certificate)}, {"n", r.n}}; }

inline json to_json(const OverlayResult& r) { return {{"value", r.value}, {"exact", r.exact}, {"certificate", to_json(r.certificate)}, {"n", r.n}}; }

inline json to_json(const GraphOverlayResult& r) {
  return {{"value", r.value}, {"exact", r.exact}, {"certificate", to_json(r.rho)}, {"n", r.n}, {"warnings", r.warnings}};
}

inline json to_json(const TruncatedOverlay& r) {
  return {{"value", r.value}, {"exact", r.exact}, {"error_bound", r.error_bound}, {"enclosure", {r.value - r.error_bound, r.value + r.error_bound}}};
}

// ---------------------------------------------------------------------------
// Quotients

inline json to_json(const Quotient& q) {
  json blocks = json::array();
  for (std::size_t i = 0; i < q.k(); ++i)
    for (std::size_t j = 0; j < q.k(); ++j) {
      auto b = q.block(i, j);
      blocks.push_back(std::vector<double>(b.begin(), b.end()));
    }
  json beta = json::array();
  for (std::size_t i = 0; i < q.k(); ++i)
    for (std::size_t j = 0; j < q.k(); ++j) {
      auto m = q.beta(i, j);
      beta.push_back(std::vector<double>(m.weights().begin(), m.weights().end()));
    }
  return {{"alpha", q.alpha()}, {"blocks", blocks}, {"beta", beta}};
}

inline Quotient quotient_from_json(const json& j, const SpacePtr& space, const std::string& ptr = "") {
  auto alpha = detail::numbers(detail::field(j, "alpha", ptr), detail::child(ptr, "alpha"));
  const std::size_t k = alpha.size();
  auto blocks = detail::kernel_entries(detail::field(j, "blocks", ptr), k, space->size(), detail::child(ptr, "blocks"));
  return detail::guarded(ptr, [&] { return Quotient(space, std::move(alpha), std::move(blocks)); });
}

inline json to_json(const QuotientCloud& c, const SpacePtr& space) {
  json members = json::array();
  for (const auto& q : c.members) members.push_back(to_json(q));
  return {{"k", c.k},
          {"space", to_json(*space)},
          {"quotients", members},
          {"labels", c.labels},
          {"provenance", {{"mode", c.mode}, {"n", c.n}, {"seed", c.seed}, {"assignments", c.assignments}}}};
}

inline QuotientCloud cloud_from_json(const json& j, const std::string& ptr = "") {
  QuotientCloud c;
  c.k = static_cast<std::size_t>(detail::unsigned_int(detail::field(j, "k", ptr), detail::child(ptr, "k")));
  SpacePtr s = space_from_json(detail::field(j, "space", ptr), detail::child(ptr, "space"));
  const json& qs = detail::field(j, "quotients", ptr);
  const std::string qptr = detail::child(ptr, "quotients");
  if (!qs.is_array()) detail::fail(qptr, "expected an array");
  for (std::size_t i = 0; i < qs.size(); ++i) {
    c.members.push_back(quotient_from_json(qs[i], s, detail::child(qptr, i)));
    if (c.members.back().k() != c.k) detail::fail(detail::child(qptr, i), "quotient has the wrong number of classes");
  }
  if (j.contains("labels")) {
    const json& ls = j["labels"];
    if (!ls.is_array()) detail::fail(detail::child(ptr, "labels"), "expected an array");
    for (std::size_t i = 0; i < ls.size(); ++i) c.labels.push_back(detail::indices(ls[i], detail::child(detail::child(ptr, "labels"), i)));
  }
  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    if (p.contains("mode") && p["mode"].is_string()) c.mode = p["mode"].get<std::string>();
    if (p.contains("n")) c.n = detail::unsigned_int(p["n"], "/provenance/n");
    if (p.contains("seed")) c.seed = detail::unsigned_int(p["seed"], "/provenance/seed");
    if (p.contains("assignments")) c.assignments = detail::unsigned_int(p["assignments"], "/provenance/assignments");
  }
  return c;
}

// ---------------------------------------------------------------------------
// Samples

inline json to_json(const DecoratedSample& s) {
  json rows = json::array();
  for (std::size_t j = 0; j < s.n; ++j) {
    json row = json::array();
    for (std::size_t k = 0; k < s.n; ++k) row.push_back(s.label(j, k));
    rows.push_back(row);
  }
  return {{"n", s.n},
          {"x", s.x},
          {"labels", rows},
          {"label_kind", s.kind == LabelKind::kPoint ? "point" : "function"},
          {"label_count", s.label_count},
          {"seed", s.seed},
          {"symmetric", s.symmetric},
          {"space", to_json(*s.space)}};
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180: CRLF records, fields quoted when they contain , " CR or LF)

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_field(r[i]);
    }
    out += "\r\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

inline std::string convergence_csv(const ConvergenceReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : report.rows)
    rows.push_back({std::to_string(r.n), std::to_string(r.trial), r.metric, format_number(r.value), r.exact ? "true" : "false"});
  return csv({"n", "trial", "metric", "value", "exact"}, rows);
}

// ---------------------------------------------------------------------------
// Experiment config

struct ExperimentConfig {
  StepKernel kernel;
  ConvergenceConfig run;
};

/// {kernel, n_schedule, trials, seed, budgets, graph?, family?, metrics?, symmetric?, quotient_k?, cloud_count?}
inline ExperimentConfig experiment_from_json(const json& j, const std::string& ptr = "") {
  ExperimentConfig c;
  c.kernel = kernel_from_json(detail::field(j, "kernel", ptr), detail::child(ptr, "kernel"));
  c.run.schedule = detail::indices(detail::field(j, "n_schedule", ptr), detail::child(ptr, "n_schedule"));
  c.run.trials = detail::unsigned_int(detail::field(j, "trials", ptr), detail::child(ptr, "trials"));
  c.run.seed = detail::unsigned_int(detail::field(j, "seed", ptr), detail::child(ptr, "seed"));
  if (j.contains("budgets")) c.run.budget = budget_from_json(j["budgets"], {}, detail::child(ptr, "budgets"));
  if (j.contains("graph")) c.run.graph = graph_from_json(j["graph"], detail::child(ptr, "graph"));
  if (j.contains("family")) c.run.family = family_from_json(j["family"], detail::child(ptr, "family"));
  if (j.contains("metrics")) {
    const json& m = j["metrics"];
    if (!m.is_array()) detail::fail(detail::child(ptr, "metrics"), "expected an array of metric names");
    c.run.metrics.clear();
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!m[i].is_string()) detail::fail(detail::child(detail::child(ptr, "metrics"), i), "expected a string");
      c.run.metrics.push_back(m[i].get<std::string>());
    }
  }
  if (j.contains("symmetric")) {
    if (!j["symmetric"].is_boolean()) detail::fail(detail::child(ptr, "symmetric"), "expected a boolean");
    c.run.symmetric = j["symmetric"].get<bool>();
  }
  if (j.contains("quotient_k")) c.run.quotient_k = detail::unsigned_int(j["quotient_k"], detail::child(ptr, "quotient_k"));
  if (j.contains("cloud_count")) c.run.cloud_count = detail::unsigned_int(j["cloud_count"], detail::child(ptr, "cloud_count"));
  return c;
}

/// {"version", "inputs": {name: fnv1a}, ...extra}
inline json provenance(const std::vector<std::pair<std::string, std::string>>& named_inputs, json extra = json::object()) {
  json inputs = json::object();
  for (const auto& [name, bytes] : named_inputs) inputs[name] = fnv1a_hex(bytes);
  extra["version"] = kVersion;
  extra["inputs"] = inputs;
  return extra;
}

} // namespace pgraphon::io
