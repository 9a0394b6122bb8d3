#pragma once

// Parameter and sweep configuration files (JSON or TOML), report and
// sweep-result serialization.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"
#include "toml++/toml.hpp"

#include "ssir/attractor.hpp"
#include "ssir/equilibria.hpp"
#include "ssir/errors.hpp"
#include "ssir/model.hpp"
#include "ssir/sweep.hpp"

namespace ssir::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Reading

inline json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json j = json::object();
    for (auto&& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = n.as_array()) {
    json j = json::array();
    for (auto&& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  if (const auto* v = n.as_string()) return v->get();
  throw ConfigError("TOML dates and times are not accepted");
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// JSON for .json files, TOML for .toml; anything else is tried as JSON
/// first and TOML second.
inline json parse_config_text(const std::string& text, const std::string& ext, const std::string& where) {
  auto as_json = [&] {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  };
  auto as_toml = [&] {
    try {
      return toml_to_json(toml::parse(text, where));
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << where << ": " << e.description() << " (line " << e.source().begin.line << ")";
      throw ConfigError(os.str());
    }
  };
  if (ext == ".json") return as_json();
  if (ext == ".toml") return as_toml();
  try {
    return as_json();
  } catch (const ConfigError&) {
    return as_toml();
  }
}

inline json load_config(const fs::path& path) {
  return parse_config_text(read_text(path), path.extension().string(), path.string());
}

namespace detail {

inline double number(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_number()) throw ConfigError(ctx + ": '" + key + "' must be a number");
  return j.get<double>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(ctx + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

inline Forcing forcing_from_json(const json& j) {
  const std::string ctx = "forcing";
  if (!j.is_object()) throw ConfigError("forcing must be a table");
  const std::string type = j.value("type", std::string("cosine"));
  try {
    if (type == "cosine") {
      detail::reject_unknown(j, {"type", "offset", "amplitude"}, ctx);
      const double c0 = j.contains("offset") ? detail::number(j["offset"], "offset", ctx) : 1.0;
      const double c1 = j.contains("amplitude") ? detail::number(j["amplitude"], "amplitude", ctx) : 0.5;
      return Forcing::cosine(c0, c1);
    }
    if (type == "table") {
      detail::reject_unknown(j, {"type", "period", "samples"}, ctx);
      if (!j.contains("samples") || !j["samples"].is_array()) throw ConfigError("forcing: table needs 'samples'");
      std::vector<double> s;
      for (const auto& v : j["samples"]) s.push_back(detail::number(v, "samples", ctx));
      const double T = j.contains("period") ? detail::number(j["period"], "period", ctx) : 2.0 * std::numbers::pi;
      return Forcing::table(T, std::move(s));
    }
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("forcing: unknown type '" + type + "'");
}

/// Required keys: A, r, beta0, a, mu. Optional: d, gamma, omega, forcing.
inline ModelParams params_from_json(const json& j) {
  const std::string ctx = "params";
  if (!j.is_object()) throw ConfigError("params must be a table");
  detail::reject_unknown(j, {"A", "r", "beta0", "a", "mu", "d", "gamma", "omega", "forcing"}, ctx);
  ModelParams p;
  for (const char* k : {"A", "r", "beta0", "a", "mu"})
    if (!j.contains(k)) throw ConfigError(ctx + ": missing '" + k + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "forcing") continue;
    p = p.with(it.key(), detail::number(it.value(), it.key(), ctx));
  }
  if (j.contains("forcing")) p.forcing = forcing_from_json(j["forcing"]);
  try {
    p.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  return p;
}

inline ModelParams load_params(const fs::path& path) {
  const json j = load_config(path);
  // Either a bare parameter table or one nested under "params".
  return params_from_json(j.contains("params") ? j["params"] : j);
}

inline Axis axis_from_json(const json& j) {
  const std::string ctx = "axis";
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) throw ConfigError("axis needs a 'name'");
  const std::string name = j["name"].get<std::string>();
  if (j.contains("values")) {
    detail::reject_unknown(j, {"name", "values"}, ctx);
    Axis a{name, {}};
    for (const auto& v : j["values"]) a.values.push_back(detail::number(v, "values", ctx));
    if (a.values.empty()) throw ConfigError("axis '" + name + "': empty values");
    return a;
  }
  detail::reject_unknown(j, {"name", "min", "max", "n"}, ctx);
  for (const char* k : {"min", "max", "n"})
    if (!j.contains(k)) throw ConfigError("axis '" + name + "': missing '" + k + "'");
  const double n = detail::number(j["n"], "n", ctx);
  if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("axis '" + name + "': n must be a positive integer");
  return Axis::linspace(name, detail::number(j["min"], "min", ctx), detail::number(j["max"], "max", ctx),
                        static_cast<std::size_t>(n));
}

inline void classify_options_from_json(const json& j, ClassifyOptions& o) {
  const std::string ctx = "classify";
  detail::reject_unknown(j,
                         {"n_transient", "n_keep", "min_time", "min_transient_time", "eps_fix", "eps_per", "k_max",
                          "lambda_chaos", "conv_tol", "max_gap_deg", "contraction_ratio", "abs_tol", "rel_tol",
                          "dt_max"},
                         ctx);
  auto num = [&](const char* k, double& dst) {
    if (j.contains(k)) dst = detail::number(j[k], k, ctx);
  };
  auto count = [&](const char* k, auto& dst) {
    if (!j.contains(k)) return;
    const double v = detail::number(j[k], k, ctx);
    if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError(ctx + ": '" + k + "' must be a nonnegative integer");
    dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
  };
  count("n_transient", o.n_transient);
  count("n_keep", o.n_keep);
  count("k_max", o.k_max);
  num("min_time", o.min_time);
  num("min_transient_time", o.min_transient_time);
  num("eps_fix", o.eps_fix);
  num("eps_per", o.eps_per);
  num("lambda_chaos", o.lambda_chaos);
  num("conv_tol", o.conv_tol);
  num("max_gap_deg", o.max_gap_deg);
  num("contraction_ratio", o.contraction_ratio);
  num("abs_tol", o.integrator.abs_tol);
  num("rel_tol", o.integrator.rel_tol);
  num("dt_max", o.integrator.dt_max);
}

/// Sweep file: base (inline table or path relative to the file), axes,
/// job, workers, seed, x0, jitter, classify.
inline SweepConfig sweep_config_from_json(const json& j, const fs::path& dir = {}) {
  detail::reject_unknown(j, {"base", "axes", "job", "workers", "seed", "x0", "jitter", "classify"}, "sweep");
  SweepConfig c;
  if (!j.contains("base")) throw ConfigError("sweep: missing 'base'");
  if (j["base"].is_string())
    c.base = load_params(dir / j["base"].get<std::string>());
  else
    c.base = params_from_json(j["base"]);
  if (!j.contains("axes") || !j["axes"].is_array()) throw ConfigError("sweep: 'axes' must be an array");
  for (const auto& a : j["axes"]) c.axes.push_back(axis_from_json(a));
  if (j.contains("job")) {
    const std::string job = j["job"].get<std::string>();
    if (job == "classify")
      c.job = JobKind::Classify;
    else if (job == "lyapunov")
      c.job = JobKind::Lyapunov;
    else if (job == "analyze")
      c.job = JobKind::Analyze;
    else
      throw ConfigError("sweep: unknown job '" + job + "'");
  }
  if (j.contains("workers")) c.workers = static_cast<unsigned>(detail::number(j["workers"], "workers", "sweep"));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw ConfigError("sweep: 'seed' must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("x0")) {
    const auto& x = j["x0"];
    if (!x.is_array() || x.size() != 2) throw ConfigError("sweep: 'x0' must be [S, I]");
    c.x0 = State2{{detail::number(x[0], "x0", "sweep"), detail::number(x[1], "x0", "sweep")}};
  }
  if (j.contains("jitter")) c.jitter = detail::number(j["jitter"], "jitter", "sweep");
  if (j.contains("classify")) classify_options_from_json(j["classify"], c.classify);
  try {
    c.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline SweepConfig load_sweep_config(const fs::path& path) {
  return sweep_config_from_json(load_config(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Writing

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const ModelParams& p) {
  json j = {{"A", p.A}, {"r", p.r}, {"beta0", p.beta0}, {"a", p.a},         {"mu", p.mu},
            {"d", p.d}, {"gamma", p.gamma}, {"omega", p.omega}};
  if (const auto* c = std::get_if<CosineForcing>(&p.forcing.kind()))
    j["forcing"] = {{"type", "cosine"}, {"offset", c->offset}, {"amplitude", c->amplitude}};
  else if (const auto* t = std::get_if<TableForcing>(&p.forcing.kind()))
    j["forcing"] = {{"type", "table"}, {"period", t->period}, {"samples", t->samples}};
  return j;
}

inline json to_json(const Thresholds& t) {
  return {{"r0", t.r0},       {"phi0", t.phi0},
          {"phi1", t.phi1},   {"hopf_h", t.hopf_h ? json(*t.hopf_h) : json(nullptr)},
          {"a_star", t.a_star}, {"delta", t.delta}};
}

inline json to_json(const EquilibriumReport& e) {
  json ev = json::array();
  for (const auto& z : e.eigenvalues) ev.push_back({{"re", z.real()}, {"im", z.imag()}});
  return {{"label", std::string(to_string(e.label))},
          {"S", e.point[kS]},
          {"I", e.point[kI]},
          {"eigenvalues", ev},
          {"trace", e.trace},
          {"det", e.det},
          {"stability", std::string(to_string(e.stability))},
          {"admissible", e.admissible},
          {"residual", e.residual}};
}

inline json to_json(const Regime& g) {
  json j = {{"tag", std::string(to_string(g.tag))}, {"degenerate", g.degenerate}};
  j["e3_stability"] = g.e3_stability ? json(std::string(to_string(*g.e3_stability))) : json(nullptr);
  return j;
}

/// Report of the autonomous analysis: thresholds, equilibria, regime, Hopf test.
inline json analysis_report(const ModelParams& p) {
  json j;
  j["params"] = to_json(p);
  j["thresholds"] = to_json(thresholds(p));
  j["equilibria"] = json::array();
  for (const auto& e : equilibria(p)) j["equilibria"].push_back(to_json(e));
  j["regime"] = to_json(detect_regime(p));
  const HopfCheck h = hopf_condition(p);
  j["hopf"] = {{"holds", h.holds},
               {"bound", h.bound ? json(*h.bound) : json(nullptr)},
               {"margin", h.margin ? json(*h.margin) : json(nullptr)}};
  return j;
}

inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// One flat CSV row (with header) for sweep post-processing.
inline std::string analysis_csv(const ModelParams& p) {
  const Thresholds t = thresholds(p);
  const Regime g = detect_regime(p);
  std::ostringstream os;
  os << "A,r,beta0,a,mu,d,r0,phi0,phi1,hopf_h,a_star,delta,regime,degenerate\n";
  for (double v : {p.A, p.r, p.beta0, p.a, p.mu, p.d, t.r0, t.phi0, t.phi1})
    os << fmt17(v) << ',';
  os << (t.hopf_h ? fmt17(*t.hopf_h) : std::string("nan")) << ',' << fmt17(t.a_star) << ',' << fmt17(t.delta)
     << ',' << to_string(g.tag) << ',' << (g.degenerate ? 1 : 0) << '\n';
  return os.str();
}

inline json to_json(const LyapunovEstimate& e, bool with_history = false) {
  json j = {{"lambda_max", number_or_null(e.lambda_max)},
            {"converged", e.converged},
            {"window_spread", e.window_spread},
            {"total_time", e.total_time},
            {"n_renorm", e.history.size()}};
  if (with_history) j["history"] = e.history;
  return j;
}

inline json to_json(const AttractorVerdict& v) {
  const auto& d = v.diagnostics;
  return {{"kind", std::string(to_string(v.kind))},
          {"label", verdict_label(v)},
          {"period", v.period},
          {"lambda_max", number_or_null(v.lambda_max)},
          {"diagnostics",
           {{"recurrence_distance", number_or_null(d.recurrence_distance)},
            {"periodic_distance", number_or_null(d.periodic_distance)},
            {"best_k", d.best_k},
            {"curve_gap_deg", d.curve_gap_deg},
            {"contraction_ratio", d.contraction_ratio},
            {"window_spread", d.window_spread},
            {"converged", d.converged},
            {"n_points", d.n_points},
            {"note", d.note}}}};
}

// Sweep results.

/// Columns: axis1[,axis2],verdict,lambda_max[,runtime_ms].
inline std::string sweep_csv(const SweepResult& r, bool with_runtime = true) {
  std::ostringstream os;
  for (const auto& a : r.axes) os << a.name << ',';
  os << "verdict,lambda_max";
  if (with_runtime) os << ",runtime_ms";
  os << '\n';
  for (const auto& c : r.cells) {
    for (double x : c.coords) os << fmt17(x) << ',';
    os << c.verdict << ',' << fmt17(c.lambda_max);
    if (with_runtime) os << ',' << fmt17(c.runtime_ms);
    os << '\n';
  }
  return os.str();
}

inline json to_json(const SweepSummary& s) {
  json cf = json::array();
  for (const auto& [w, f] : s.chaotic_fraction) cf.push_back({{"omega", w}, {"fraction", f}});
  return {{"chaotic_fraction", cf}, {"counts", s.counts}};
}

inline json to_json(const SweepResult& r) {
  json j;
  j["job"] = std::string(to_string(r.job));
  j["base_omega"] = r.base_omega;
  j["axes"] = json::array();
  for (const auto& a : r.axes) j["axes"].push_back({{"name", a.name}, {"values", a.values}});
  j["cells"] = json::array();
  for (const auto& c : r.cells)
    j["cells"].push_back({{"coords", c.coords},
                          {"verdict", c.verdict},
                          {"lambda_max", number_or_null(c.lambda_max)},
                          {"converged", c.converged},
                          {"runtime_ms", c.runtime_ms},
                          {"note", c.note}});
  j["summary"] = to_json(r.summary);
  return j;
}

inline SweepSummary summary_from_json(const json& j) {
  SweepSummary s;
  for (const auto& e : j.at("chaotic_fraction")) s.chaotic_fraction[e.at("omega").get<double>()] = e.at("fraction");
  for (auto it = j.at("counts").begin(); it != j.at("counts").end(); ++it) s.counts[it.key()] = it.value();
  return s;
}

inline SweepResult sweep_result_from_json(const json& j) {
  try {
    SweepResult r;
    const std::string job = j.at("job").get<std::string>();
    r.job = job == "analyze" ? JobKind::Analyze : job == "lyapunov" ? JobKind::Lyapunov : JobKind::Classify;
    r.base_omega = j.at("base_omega").get<double>();
    for (const auto& a : j.at("axes")) r.axes.push_back({a.at("name"), a.at("values").get<std::vector<double>>()});
    for (const auto& c : j.at("cells")) {
      SweepCell cell;
      cell.coords = c.at("coords").get<std::vector<double>>();
      cell.verdict = c.at("verdict");
      cell.lambda_max = c.at("lambda_max").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                     : c.at("lambda_max").get<double>();
      cell.converged = c.at("converged");
      cell.runtime_ms = c.at("runtime_ms");
      cell.note = c.value("note", std::string{});
      r.cells.push_back(std::move(cell));
    }
    r.summary = summary_from_json(j.at("summary"));
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep result: ") + e.what());
  }
}

/// Matrix blocks for gnuplot's `matrix` format: block 0 holds lambda_max,
/// block 1 the verdict code (AttractorKind order, -1 for other labels).
/// Rows follow the first axis, columns the second.
inline std::string sweep_gnuplot(const SweepResult& r) {
  const std::size_t n1 = r.axes.empty() ? 0 : r.axes[0].values.size();
  const std::size_t n2 = r.axes.size() > 1 ? r.axes[1].values.size() : 1;
  auto code = [](const std::string& label) {
    const std::string k = verdict_kind(label);
    for (int i = 0; i <= static_cast<int>(AttractorKind::Undetermined); ++i)
      if (k == to_string(static_cast<AttractorKind>(i))) return i;
    return -1;
  };
  std::ostringstream os;
  os << "# rows: " << (r.axes.empty() ? "" : r.axes[0].name) << " (" << n1 << ")";
  if (r.axes.size() > 1) os << ", columns: " << r.axes[1].name << " (" << n2 << ")";
  os << "\n# block 0: lambda_max\n";
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t k = 0; k < n2; ++k) os << (k ? " " : "") << fmt17(r.cells[i * n2 + k].lambda_max);
    os << '\n';
  }
  os << "\n\n# block 1: verdict code\n";
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t k = 0; k < n2; ++k) os << (k ? " " : "") << code(r.cells[i * n2 + k].verdict);
    os << '\n';
  }
  return os.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace ssir::io
