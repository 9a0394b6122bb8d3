#pragma once

// Parameter sweeps over one or two axes, run on a fixed pool of threads.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ssir/attractor.hpp"
#include "ssir/equilibria.hpp"
#include "ssir/errors.hpp"
#include "ssir/model.hpp"

namespace ssir {

struct Axis {
  std::string name;
  std::vector<double> values;

  /// n evenly spaced values from lo to hi inclusive (just lo when n == 1).
  static Axis linspace(std::string name, double lo, double hi, std::size_t n) {
    if (n == 0) throw ConfigError("axis '" + name + "': need n >= 1");
    Axis a{std::move(name), {}};
    a.values.reserve(n);
    for (std::size_t k = 0; k < n; ++k)
      a.values.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1));
    return a;
  }
};

enum class JobKind { Classify, Lyapunov, Analyze };

inline std::string_view to_string(JobKind j) {
  switch (j) {
    case JobKind::Classify: return "classify";
    case JobKind::Lyapunov: return "lyapunov";
    case JobKind::Analyze: return "analyze";
  }
  return "?";
}

struct SweepConfig {
  ModelParams base;
  std::vector<Axis> axes;  // one or two
  JobKind job = JobKind::Classify;
  unsigned workers = 1;  // 0: one per hardware thread
  std::uint64_t seed = 0;
  std::optional<State2> x0;  // otherwise seeded from the gamma = 0 cycle, or next to E3
  double jitter = 1e-3;
  ClassifyOptions classify;

  std::size_t cell_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }

  void validate() const {
    if (axes.empty() || axes.size() > 2) throw ConfigError("sweep: need one or two axes");
    for (const auto& a : axes) {
      if (!ModelParams::is_field(a.name)) throw ConfigError("sweep: unknown axis '" + a.name + "'");
      if (a.values.empty()) throw ConfigError("sweep: axis '" + a.name + "' has no values");
      if (a.name == "gamma" && a.values.size() > 1 && !(*std::max_element(a.values.begin(), a.values.end()) > 0.0))
        throw ConfigError("sweep: a gamma axis needs a positive upper end");
    }
    if (axes.size() == 2 && axes[0].name == axes[1].name) throw ConfigError("sweep: axes must differ");
    if (!(jitter >= 0.0)) throw ConfigError("sweep: jitter must be >= 0");
    base.validate();
  }
};

struct SweepCell {
  std::vector<double> coords;
  std::string verdict;  // verdict label, or regime tag for analyze jobs
  double lambda_max = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  double runtime_ms = 0.0;
  std::string note;
};

struct SweepSummary {
  std::map<double, double> chaotic_fraction;  // keyed by omega
  std::map<std::string, std::size_t> counts;  // keyed by verdict kind

  friend bool operator==(const SweepSummary&, const SweepSummary&) = default;
};

struct SweepResult {
  std::vector<Axis> axes;
  JobKind job = JobKind::Classify;
  double base_omega = 1.0;
  std::vector<SweepCell> cells;  // first axis outermost
  SweepSummary summary;
};

/// Kind name of a verdict label: "PeriodicOrbit(3)" -> "PeriodicOrbit".
inline std::string verdict_kind(const std::string& label) { return label.substr(0, label.find('(')); }

inline SweepSummary summarize(const SweepResult& r) {
  SweepSummary s;
  std::size_t omega_axis = r.axes.size();
  for (std::size_t k = 0; k < r.axes.size(); ++k)
    if (r.axes[k].name == "omega") omega_axis = k;
  std::map<double, std::pair<std::size_t, std::size_t>> per_omega;
  for (const auto& c : r.cells) {
    ++s.counts[verdict_kind(c.verdict)];
    const double w = omega_axis < r.axes.size() ? c.coords[omega_axis] : r.base_omega;
    auto& [chaotic, total] = per_omega[w];
    ++total;
    if (c.verdict == "Chaotic") ++chaotic;
  }
  for (const auto& [w, ct] : per_omega)
    s.chaotic_fraction[w] = static_cast<double>(ct.first) / static_cast<double>(ct.second);
  return s;
}

/// Cycle point of the unforced system when one exists, else a point next
/// to E3, else the middle of the susceptible axis.
inline State2 default_initial_state(const ModelParams& p) {
  ModelParams q = p;
  q.gamma = 0.0;
  const auto e3 = endemic_e3(q);
  if (!e3) return State2{{0.5 * p.A, 0.1 * p.A}};
  try {
    const LimitCycle c = locate_limit_cycle(q, *e3 + State2{{0.01, 0.0}});
    return c.section_point;
  } catch (const Error&) {
    return *e3 + State2{{0.01, 0.0}};
  }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline State2 jittered(State2 x, double radius, std::uint64_t seed, std::size_t cell) {
  if (radius <= 0.0) return x;
  std::mt19937_64 rng(splitmix64(seed ^ splitmix64(cell)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rho = radius * std::sqrt(u(rng));
  const double ang = 2.0 * std::numbers::pi * u(rng);
  x[kS] += rho * std::cos(ang);
  x[kI] = std::max(0.0, x[kI] + rho * std::sin(ang));
  return x;
}

inline std::vector<double> coords_of(const std::vector<Axis>& axes, std::size_t idx) {
  std::vector<double> c(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    const std::size_t n = axes[k].values.size();
    c[k] = axes[k].values[idx % n];
    idx /= n;
  }
  return c;
}

inline void run_cell(const SweepConfig& cfg, std::size_t idx, SweepCell& cell) {
  const auto t0 = std::chrono::steady_clock::now();
  cell.coords = coords_of(cfg.axes, idx);
  try {
    ModelParams p = cfg.base;
    for (std::size_t k = 0; k < cfg.axes.size(); ++k) p = p.with(cfg.axes[k].name, cell.coords[k]);
    p.validate();
    if (cfg.job == JobKind::Analyze) {
      const Regime g = detect_regime(p);
      cell.verdict = std::string(to_string(g.tag));
      if (g.degenerate) cell.note = "degenerate";
    } else {
      const State2 x0 = jittered(cfg.x0 ? *cfg.x0 : default_initial_state(p), cfg.jitter, cfg.seed, idx);
      if (cfg.job == JobKind::Classify) {
        const AttractorVerdict v = classify_attractor(p, x0, cfg.classify);
        cell.verdict = verdict_label(v);
        cell.lambda_max = v.lambda_max;
        cell.converged = v.diagnostics.converged;
        cell.note = v.diagnostics.note;
      } else {
        LyapunovOptions lo;
        lo.n_renorm = cfg.classify.n_keep;
        lo.min_time = cfg.classify.min_time;
        lo.transient = std::max(cfg.classify.min_transient_time,
                                static_cast<double>(cfg.classify.n_transient) * p.forcing_period());
        lo.conv_tol = cfg.classify.conv_tol;
        lo.integrator = cfg.classify.integrator;
        const LyapunovEstimate e = largest_lyapunov(p, x0, lo);
        cell.lambda_max = e.lambda_max;
        cell.converged = e.converged;
        cell.verdict = e.converged && e.lambda_max > cfg.classify.lambda_chaos ? "Chaotic" : "Regular";
      }
    }
  } catch (const std::exception& e) {
    cell.verdict = "Undetermined";
    cell.note = e.what();
  }
  cell.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Runs every cell. Cells are split into contiguous blocks, one per worker;
/// a failing cell is recorded as Undetermined with the error text.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult res;
  res.axes = cfg.axes;
  res.job = cfg.job;
  res.base_omega = cfg.base.omega;
  const std::size_t n = cfg.cell_count();
  res.cells.resize(n);
  unsigned w = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  w = static_cast<unsigned>(std::min<std::size_t>(w, n));
  {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned k = 0; k < w; ++k) {
      const std::size_t lo = n * k / w, hi = n * (k + 1) / w;
      pool.emplace_back([&cfg, &res, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) detail::run_cell(cfg, i, res.cells[i]);
      });
    }
  }
  res.summary = summarize(res);
  return res;
}

struct RegimeCell {
  std::vector<double> coords;
  std::optional<Regime> regime;  // empty when thresholds are undefined there
  std::string note;
};

/// detect_regime over a grid of autonomous parameters; gamma is ignored.
inline std::vector<RegimeCell> regime_map(const ModelParams& base, const std::vector<Axis>& axes) {
  if (axes.empty() || axes.size() > 2) throw ConfigError("regime_map: need one or two axes");
  for (const auto& a : axes)
    if (!ModelParams::is_field(a.name)) throw ConfigError("regime_map: unknown axis '" + a.name + "'");
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values.size();
  std::vector<RegimeCell> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = out[i];
    c.coords = detail::coords_of(axes, i);
    ModelParams p = base;
    p.gamma = 0.0;
    for (std::size_t k = 0; k < axes.size(); ++k) p = p.with(axes[k].name, c.coords[k]);
    try {
      c.regime = detect_regime(p);
    } catch (const Error& e) {
      c.note = e.what();
    }
  }
  return out;
}

}  // namespace ssir
