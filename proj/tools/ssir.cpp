// Command-line front end: analyze | simulate | poincare | lyapunov | sweep | regime-map.
//
// Exit codes: 0 success, 1 numerical failure, 2 bad configuration or
// arguments, 3 file I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssir/io.hpp"
#include "ssir/ssir.hpp"

namespace fs = std::filesystem;
using ssir::io::json;

namespace {

constexpr int kExitNumeric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> formats;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
};

// Writes to <out>/<name> when --out is set, stdout otherwise.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  ssir::io::write_text(fs::path(c.out) / name, text);
  std::cerr << "wrote " << (fs::path(c.out) / name).string() << '\n';
}

ssir::State2 state2_from(const std::vector<double>& v, const ssir::ModelParams& p) {
  if (v.empty()) return ssir::default_initial_state(p);
  if (v.size() != 2) throw ssir::InvalidArgument("--x0 needs S,I");
  return ssir::State2{{v[0], v[1]}};
}

int cmd_analyze(const Common& c, bool csv) {
  const auto p = ssir::io::load_params(c.config);
  if (csv)
    emit(c, "analysis.csv", ssir::io::analysis_csv(p));
  else
    emit(c, "analysis.json", ssir::io::analysis_report(p).dump(2));
  return 0;
}

struct SimulateArgs {
  std::vector<double> x0;
  double t0 = 0.0, t1 = 500.0;
  std::string system = "full";
  std::string method = "rk45";
  double dt = 1e-2, rtol = 1e-10, atol = 1e-12;
  std::size_t stride = 1;
};

template <class Sys>
std::pair<std::string, json> simulate_with(const Sys& sys, const typename Sys::state_type& x0,
                                           const ssir::IntegratorOptions& o, const char* header) {
  const auto tr = ssir::integrate(sys, x0, o);
  std::ostringstream os;
  os << header << '\n';
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << ssir::io::fmt17(tr.times[i]);
    for (std::size_t k = 0; k < Sys::state_type::size(); ++k) os << ',' << ssir::io::fmt17(tr.states[i][k]);
    os << '\n';
  }
  json stats = {{"steps_accepted", tr.stats.steps_accepted},
                {"steps_rejected", tr.stats.steps_rejected},
                {"max_invariant_violation", tr.stats.max_invariant_violation},
                {"samples", tr.size()},
                {"t0", o.t0},
                {"t1", o.t1}};
  return {os.str(), stats};
}

int cmd_simulate(const Common& c, const SimulateArgs& a) {
  const auto p = ssir::io::load_params(c.config);
  ssir::IntegratorOptions o;
  o.t0 = a.t0;
  o.t1 = a.t1;
  o.method = a.method == "rk4" ? ssir::Method::Rk4Fixed : ssir::Method::Rk45Adaptive;
  o.dt = a.dt;
  o.rel_tol = a.rtol;
  o.abs_tol = a.atol;
  o.record_stride = a.stride;
  std::pair<std::string, json> r;
  const ssir::State2 s0 = state2_from(a.x0.size() == 3 ? std::vector<double>{a.x0[0], a.x0[1]} : a.x0, p);
  if (a.system == "full") {
    const double R0 = a.x0.size() == 3 ? a.x0[2] : 0.0;
    r = simulate_with(ssir::FullSystem{p}, ssir::State3{{s0[0], s0[1], R0}}, o, "t,S,I,R");
  } else if (a.system == "reduced") {
    r = simulate_with(ssir::ReducedSystem{p}, s0, o, "t,S,I");
  } else {
    const double th = p.omega * a.t0;
    r = simulate_with(ssir::ExtendedSystem{p}, ssir::StateExt{{s0[0], s0[1], th}}, o, "t,S,I,theta");
  }
  r.second["system"] = a.system;
  r.second["method"] = a.method;
  emit(c, "trajectory.csv", r.first);
  if (c.out.empty())
    std::cerr << r.second.dump(2) << '\n';
  else
    emit(c, "trajectory_stats.json", r.second.dump(2));
  return 0;
}

struct PoincareArgs {
  std::vector<double> x0;
  std::size_t transient = 300, keep = 1000;
  double theta0 = 0.0;
  bool classify = false;
};

int cmd_poincare(const Common& c, const PoincareArgs& a) {
  const auto p = ssir::io::load_params(c.config);
  const ssir::State2 x0 = state2_from(a.x0, p);
  const auto orb = ssir::stroboscopic_orbit(p, x0, a.transient, a.keep, ssir::orbit_integrator(), a.theta0);
  std::ostringstream os;
  os << "k,t,S,I\n";
  const double P = p.forcing_period();
  for (std::size_t k = 0; k < orb.points.size(); ++k) {
    const std::size_t n = k + 1 + a.transient;
    os << n << ',' << ssir::io::fmt17(static_cast<double>(n) * P) << ',' << ssir::io::fmt17(orb.points[k][0]) << ','
       << ssir::io::fmt17(orb.points[k][1]) << '\n';
  }
  emit(c, "poincare.csv", os.str());
  if (a.classify) {
    ssir::ClassifyOptions co;
    co.n_transient = a.transient;
    co.n_keep = a.keep;
    emit(c, "verdict.json", ssir::io::to_json(ssir::classify_attractor(p, x0, co)).dump(2));
  }
  return 0;
}

struct LyapunovArgs {
  std::vector<double> x0;
  std::size_t n_renorm = 1000;
  double interval = 0.0, transient = 2000.0, min_time = 30000.0;
  bool phase = false, history = false;
};

int cmd_lyapunov(const Common& c, const LyapunovArgs& a) {
  const auto p = ssir::io::load_params(c.config);
  ssir::LyapunovOptions o;
  o.n_renorm = a.n_renorm;
  o.renorm_interval = a.interval;
  o.transient = a.transient;
  o.min_time = a.min_time;
  o.include_phase_direction = a.phase;
  const auto e = ssir::largest_lyapunov(p, state2_from(a.x0, p), o);
  emit(c, "lyapunov.json", ssir::io::to_json(e).dump(2));
  if (a.history) {
    std::ostringstream os;
    os << "k,lambda\n";
    for (std::size_t k = 0; k < e.history.size(); ++k) os << k + 1 << ',' << ssir::io::fmt17(e.history[k]) << '\n';
    emit(c, "lyapunov_history.csv", os.str());
  }
  return 0;
}

std::vector<std::string> formats_or(const Common& c, std::vector<std::string> dflt) {
  return c.formats.empty() ? dflt : c.formats;
}

int cmd_sweep(const Common& c) {
  auto cfg = ssir::io::load_sweep_config(c.config);
  if (c.workers) cfg.workers = *c.workers;
  if (c.seed) cfg.seed = *c.seed;
  const auto res = ssir::run_sweep(cfg);
  for (const auto& f : formats_or(c, {"csv", "json"})) {
    if (f == "csv")
      emit(c, "sweep.csv", ssir::io::sweep_csv(res));
    else if (f == "json")
      emit(c, "sweep.json", ssir::io::to_json(res).dump(2));
    else
      emit(c, "sweep.dat", ssir::io::sweep_gnuplot(res));
  }
  for (const auto& [w, frac] : res.summary.chaotic_fraction)
    std::cerr << "omega " << w << ": chaotic fraction " << frac << '\n';
  return 0;
}

int cmd_regime_map(const Common& c) {
  const json j = ssir::io::load_config(c.config);
  const fs::path dir = fs::path(c.config).parent_path();
  ssir::ModelParams base = j.contains("base") && j["base"].is_string()
                               ? ssir::io::load_params(dir / j["base"].get<std::string>())
                               : ssir::io::params_from_json(j.at("base"));
  std::vector<ssir::Axis> axes;
  if (!j.contains("axes") || !j["axes"].is_array()) throw ssir::ConfigError("regime-map: 'axes' must be an array");
  for (const auto& a : j["axes"]) axes.push_back(ssir::io::axis_from_json(a));
  const auto cells = ssir::regime_map(base, axes);

  // Reuse the sweep writers: the verdict column carries the regime tag.
  ssir::SweepResult res;
  res.axes = axes;
  res.job = ssir::JobKind::Analyze;
  res.base_omega = base.omega;
  for (const auto& rc : cells) {
    ssir::SweepCell sc;
    sc.coords = rc.coords;
    sc.verdict = rc.regime ? std::string(ssir::to_string(rc.regime->tag)) : "Undefined";
    sc.note = rc.regime && rc.regime->degenerate ? "degenerate" : rc.note;
    res.cells.push_back(sc);
  }
  res.summary = ssir::summarize(res);
  for (const auto& f : formats_or(c, {"csv"})) {
    if (f == "csv") {
      std::ostringstream os;
      for (const auto& a : axes) os << a.name << ',';
      os << "regime,degenerate,r0,phi0,hopf_h\n";
      for (const auto& rc : cells) {
        for (double x : rc.coords) os << ssir::io::fmt17(x) << ',';
        if (rc.regime) {
          const auto& t = rc.regime->thresholds;
          os << ssir::to_string(rc.regime->tag) << ',' << (rc.regime->degenerate ? 1 : 0) << ','
             << ssir::io::fmt17(t.r0) << ',' << ssir::io::fmt17(t.phi0) << ','
             << (t.hopf_h ? ssir::io::fmt17(*t.hopf_h) : "nan") << '\n';
        } else {
          os << "Undefined,0,nan,nan,nan\n";
        }
      }
      emit(c, "regime_map.csv", os.str());
    } else if (f == "json") {
      emit(c, "regime_map.json", ssir::io::to_json(res).dump(2));
    } else {
      // Regime code matrix.
      std::ostringstream os;
      const std::size_t n1 = axes[0].values.size(), n2 = axes.size() > 1 ? axes[1].values.size() : 1;
      os << "# regime code: 0 DiseaseFreeGlobal, 1 BistableSink, 2 LimitCycle, 3 SupercriticalR0, -1 undefined\n";
      for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t k = 0; k < n2; ++k) {
          const auto& rc = cells[i * n2 + k];
          os << (k ? " " : "") << (rc.regime ? static_cast<int>(rc.regime->tag) : -1);
        }
        os << '\n';
      }
      emit(c, "regime_map.dat", os.str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonally forced SIR model with saturated treatment: analysis and simulation"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Parameter or sweep file (JSON or TOML)")->required();
    sub->add_option("--out", common.out, "Output directory (default: stdout)");
    sub->add_option("--format", common.formats, "csv, json or gnuplot (repeatable)")
        ->check(CLI::IsMember({"csv", "json", "gnuplot"}));
    sub->add_option("--workers", common.workers, "Worker threads (0: all cores)");
    sub->add_option("--seed", common.seed, "Seed for initial-condition jitter");
  };

  bool analyze_csv = false;
  auto* analyze = app.add_subcommand("analyze", "Thresholds, equilibria and regime of the unforced system");
  add_common(analyze);
  analyze->add_flag("--csv", analyze_csv, "One flat CSV row instead of the JSON report");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Integrate one trajectory");
  add_common(simulate);
  simulate->add_option("--x0", sim.x0, "Initial state S,I[,R]")->delimiter(',');
  simulate->add_option("--t0", sim.t0, "Start time");
  simulate->add_option("--t1", sim.t1, "End time");
  simulate->add_option("--system", sim.system, "full, reduced or extended")
      ->check(CLI::IsMember({"full", "reduced", "extended"}));
  simulate->add_option("--method", sim.method, "rk45 or rk4")->check(CLI::IsMember({"rk45", "rk4"}));
  simulate->add_option("--dt", sim.dt, "RK4 step");
  simulate->add_option("--rtol", sim.rtol, "Relative tolerance (rk45)");
  simulate->add_option("--atol", sim.atol, "Absolute tolerance (rk45)");
  simulate->add_option("--stride", sim.stride, "Record every n-th step");

  PoincareArgs pc;
  auto* poincare = app.add_subcommand("poincare", "Stroboscopic section points");
  add_common(poincare);
  poincare->add_option("--x0", pc.x0, "Initial state S,I")->delimiter(',');
  poincare->add_option("--transient", pc.transient, "Forcing periods to discard");
  poincare->add_option("--keep", pc.keep, "Forcing periods to keep");
  poincare->add_option("--theta0", pc.theta0, "Phase of the section");
  poincare->add_flag("--classify", pc.classify, "Also write the attractor verdict");

  LyapunovArgs ly;
  auto* lyapunov = app.add_subcommand("lyapunov", "Largest Lyapunov exponent");
  add_common(lyapunov);
  lyapunov->add_option("--x0", ly.x0, "Initial state S,I")->delimiter(',');
  lyapunov->add_option("--n-renorm", ly.n_renorm, "Renormalizations to accumulate");
  lyapunov->add_option("--interval", ly.interval, "Renormalization interval (default: forcing period)");
  lyapunov->add_option("--transient", ly.transient, "Time discarded first");
  lyapunov->add_option("--min-time", ly.min_time, "Minimum accumulation time");
  lyapunov->add_flag("--phase", ly.phase, "Include the phase direction in the tangent space");
  lyapunov->add_flag("--history", ly.history, "Write the running averages");

  auto* sweep = app.add_subcommand("sweep", "Grid sweep over one or two parameters");
  add_common(sweep);
  auto* rmap = app.add_subcommand("regime-map", "Regime of the unforced system over a parameter grid");
  add_common(rmap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*analyze) return cmd_analyze(common, analyze_csv);
    if (*simulate) return cmd_simulate(common, sim);
    if (*poincare) return cmd_poincare(common, pc);
    if (*lyapunov) return cmd_lyapunov(common, ly);
    if (*sweep) return cmd_sweep(common);
    if (*rmap) return cmd_regime_map(common);
  } catch (const ssir::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ssir::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ssir::InvalidParams& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ssir::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
