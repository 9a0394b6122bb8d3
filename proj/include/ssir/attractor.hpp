#pragma once

// Stroboscopic sampling, Benettin Lyapunov estimates, limit-cycle shooting
// for the autonomous system, and long-run attractor classification.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssir/equilibria.hpp"
#include "ssir/errors.hpp"
#include "ssir/integrate.hpp"
#include "ssir/model.hpp"
#include "ssir/point.hpp"

namespace ssir {

struct TangentTag {};
struct CycleTag {};

/// Defaults for long orbit runs.
inline IntegratorOptions orbit_integrator() {
  IntegratorOptions o;
  o.method = Method::Rk45Adaptive;
  o.abs_tol = 1e-11;
  o.rel_tol = 1e-9;
  o.dt_min = 1e-12;
  o.dt_max = 0.5;
  return o;
}

/// Extended field plus its tangent flow. State: (S, I, theta, vS, vI) or,
/// with the phase direction, (S, I, theta, vS, vI, vtheta).
template <bool WithPhase>
struct ExtendedTangentSystem {
  static constexpr std::size_t phase_dim = 3;
  using state_type = Point<WithPhase ? 6 : 5, TangentTag>;
  ModelParams params;

  state_type operator()(double /*t*/, const state_type& x) const {
    const double S = x[0], I = x[1], th = x[2];
    const double beta = beta_at_phase(params, th);
    const State2 f = detail::reduced_rhs(S, I, beta, params);
    const Mat2 J = detail::reduced_jacobian(S, I, beta, params);
    state_type out;
    out[0] = f[kS];
    out[1] = f[kI];
    out[2] = params.omega;
    const double vS = x[3], vI = x[4];
    out[3] = J.a11 * vS + J.a12 * vI;
    out[4] = J.a21 * vS + J.a22 * vI;
    if constexpr (WithPhase) {
      // d beta / d theta enters through the incidence term only.
      const double db = params.beta0 * params.gamma * params.forcing.derivative(th) * I * S;
      out[3] -= db * x[5];
      out[4] += db * x[5];
      out[5] = 0.0;
    }
    return out;
  }

  void normalize(state_type& x) const {
    const double T = params.forcing.period();
    double th = std::fmod(x[2], T);
    if (th < 0.0) th += T;
    x[2] = th;
  }
};

/// x' = diag(l1, l2) x with its tangent flow; a check on the Lyapunov
/// machinery with known exponents.
struct DiagonalTestSystem {
  static constexpr std::size_t phase_dim = 2;
  using state_type = Point<4, TangentTag>;
  double l1 = -1.0, l2 = -2.0;

  state_type operator()(double, const state_type& x) const { return {{l1 * x[0], l2 * x[1], l1 * x[2], l2 * x[3]}}; }
};

struct LyapunovOptions {
  double renorm_interval = 0.0;  ///< 0 means one forcing period
  std::size_t n_renorm = 1000;
  double transient = 0.0;  ///< time discarded before accumulating, in whole intervals
  double min_time = 0.0;   ///< accumulation time floor; raises n_renorm when needed
  double conv_tol = 5e-4;
  double window_frac = 0.25;
  bool include_phase_direction = false;
  IntegratorOptions integrator = orbit_integrator();
};

struct LyapunovEstimate {
  double lambda_max = 0.0;
  std::vector<double> history;  // running average after each renormalization
  bool converged = false;
  double window_spread = 0.0;
  double total_time = 0.0;
};

namespace detail {

template <class State>
double tangent_norm(const State& x, std::size_t from) {
  double s = 0.0;
  for (std::size_t i = from; i < State::size(); ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

template <class State>
void scale_tangent(State& x, std::size_t from, double f) {
  for (std::size_t i = from; i < State::size(); ++i) x[i] *= f;
}

inline void finish_estimate(LyapunovEstimate& e, double conv_tol, double window_frac) {
  e.lambda_max = e.history.back();
  const auto n = e.history.size();
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(window_frac * static_cast<double>(n))));
  const auto [lo, hi] = std::minmax_element(e.history.end() - static_cast<std::ptrdiff_t>(w), e.history.end());
  e.window_spread = *hi - *lo;
  e.converged = e.window_spread < conv_tol;
}

}  // namespace detail

/// Benettin estimate for any system whose state is [phase | tangent] with
/// the tangent starting at index Sys::phase_dim. The system is advanced in
/// segments of `interval`; the first `n_transient` segments only
/// renormalize. on_segment(k, kept, state) runs after each segment.
template <OdeSystem Sys, class OnSegment>
LyapunovEstimate benettin(const Sys& sys, typename Sys::state_type x, double interval, std::size_t n_transient,
                          std::size_t n_keep, const LyapunovOptions& o, OnSegment&& on_segment) {
  constexpr std::size_t from = Sys::phase_dim;
  if (!(interval > 0.0)) throw InvalidArgument("lyapunov: renormalization interval must be > 0");
  if (n_keep == 0) throw InvalidArgument("lyapunov: need at least one renormalization");
  const double v0 = detail::tangent_norm(x, from);
  if (!(v0 > 0.0)) throw InvalidArgument("lyapunov: initial tangent vector is zero");
  detail::scale_tangent(x, from, 1.0 / v0);

  IntegratorOptions io = o.integrator;
  IntegrationStats stats;
  LyapunovEstimate est;
  est.history.reserve(n_keep);
  double sum = 0.0;
  const std::size_t total = n_transient + n_keep;
  for (std::size_t k = 0; k < total; ++k) {
    io.t0 = static_cast<double>(k) * interval;
    io.t1 = static_cast<double>(k + 1) * interval;
    x = detail::march(sys, x, io, stats, [](const auto&) {});
    if (stats.last_step > 0.0) io.initial_step = stats.last_step;
    const double nv = detail::tangent_norm(x, from);
    if (!(nv > 0.0) || !std::isfinite(nv)) throw NonFiniteState("lyapunov: tangent vector degenerated");
    detail::scale_tangent(x, from, 1.0 / nv);
    const bool kept = k >= n_transient;
    if (kept) {
      sum += std::log(nv);
      est.history.push_back(sum / (static_cast<double>(k - n_transient + 1) * interval));
    }
    on_segment(k, kept, x);
  }
  est.total_time = static_cast<double>(n_keep) * interval;
  detail::finish_estimate(est, o.conv_tol, o.window_frac);
  return est;
}

namespace detail {

inline std::size_t segments_for(double time, double interval) {
  return time > 0.0 ? static_cast<std::size_t>(std::ceil(time / interval - 1e-9)) : 0;
}

}  // namespace detail

/// Largest Lyapunov exponent of the forced (S, I) system started at x0 with
/// phase theta0. Renormalizes once per forcing period unless told otherwise.
inline LyapunovEstimate largest_lyapunov(const ModelParams& params, const State2& x0, const LyapunovOptions& o = {},
                                         double theta0 = 0.0) {
  params.validate();
  const double interval = o.renorm_interval > 0.0 ? o.renorm_interval : params.forcing_period();
  const std::size_t n_keep = std::max(o.n_renorm, detail::segments_for(o.min_time, interval));
  const std::size_t n_tr = detail::segments_for(o.transient, interval);
  auto noop = [](std::size_t, bool, const auto&) {};
  if (o.include_phase_direction) {
    const double c = 1.0 / std::sqrt(3.0);
    ExtendedTangentSystem<true> sys{params};
    return benettin(sys, {{x0[kS], x0[kI], theta0, c, c, c}}, interval, n_tr, n_keep, o, noop);
  }
  const double c = 1.0 / std::sqrt(2.0);
  ExtendedTangentSystem<false> sys{params};
  return benettin(sys, {{x0[kS], x0[kI], theta0, c, c}}, interval, n_tr, n_keep, o, noop);
}

// ---------------------------------------------------------------------------
// Stroboscopic map

struct StroboscopicOrbit {
  std::vector<State2> points;
  std::size_t transient_discarded = 0;
  ModelParams params;
  double theta0 = 0.0;
};

/// (S, I) at t_k = k * 2pi/omega on the extended flow started at (x0, theta0);
/// the first n_transient samples are dropped.
inline StroboscopicOrbit stroboscopic_orbit(const ModelParams& params, const State2& x0, std::size_t n_transient,
                                            std::size_t n_keep, const IntegratorOptions& integrator = orbit_integrator(),
                                            double theta0 = 0.0) {
  params.validate();
  StroboscopicOrbit orb;
  orb.params = params;
  orb.theta0 = theta0;
  orb.transient_discarded = n_transient;
  orb.points.reserve(n_keep);
  if (n_keep == 0) return orb;
  const ExtendedSystem sys{params};
  const double P = params.forcing_period();
  StateExt x{{x0[kS], x0[kI], theta0}};
  IntegratorOptions io = integrator;
  IntegrationStats stats;
  for (std::size_t k = 0; k < n_transient + n_keep; ++k) {
    io.t0 = static_cast<double>(k) * P;
    io.t1 = static_cast<double>(k + 1) * P;
    x = detail::march(sys, x, io, stats, [](const auto&) {});
    if (stats.last_step > 0.0) io.initial_step = stats.last_step;
    if (k >= n_transient) orb.points.push_back(State2{{x[kS], x[kI]}});
  }
  return orb;
}

// ---------------------------------------------------------------------------
// Limit cycle of the autonomous system

/// Reduced autonomous field with tangent flow and the running integral of
/// tr J. State: (S, I, vS, vI, int trJ).
struct CycleVariationalSystem {
  using state_type = Point<5, CycleTag>;
  ModelParams params;

  state_type operator()(double, const state_type& x) const {
    const State2 f = detail::reduced_rhs(x[0], x[1], params.beta0, params);
    const Mat2 J = detail::reduced_jacobian(x[0], x[1], params.beta0, params);
    return {{f[kS], f[kI], J.a11 * x[2] + J.a12 * x[3], J.a21 * x[2] + J.a22 * x[3], J.trace()}};
  }
};

struct CycleOptions {
  double max_return_time = 0.0;  ///< 0: twenty turns at the E3 rotation rate
  int max_map_iterations = 40;
  int max_newton = 40;
  double newton_tol = 1e-11;
  double collapse_tol = 1e-7;  ///< section coordinate below this counts as E3
  std::size_t n_cycle_points = 256;
  IntegratorOptions integrator = [] {
    IntegratorOptions o;
    o.abs_tol = 1e-13;
    o.rel_tol = 1e-12;
    o.dt_max = 0.1;
    return o;
  }();
};

/// One application of the return map to the half-line {I = I3, S > S3},
/// crossed with I increasing. `s` is the offset S - S3.
struct ReturnMapValue {
  double s_next = 0.0;
  double time = 0.0;
  double derivative = 0.0;  ///< dP/ds, time-of-flight corrected
  double log_abel = 0.0;    ///< int tr J over the flight
  State2 point{};
};

namespace detail {

inline double default_return_time(const ModelParams& p, const State2& e3) {
  const auto ev = jacobian_reduced(e3, 0.0, p).eigenvalues();
  const double w = std::abs(ev[1].imag());
  return w > 0.0 ? 20.0 * 2.0 * std::numbers::pi / w : 500.0;
}

inline std::optional<Crossing<CycleVariationalSystem::state_type>> next_hit(
    const ModelParams& p, const State2& e3, const CycleVariationalSystem::state_type& x0, double tmax,
    const IntegratorOptions& base) {
  using St = CycleVariationalSystem::state_type;
  const CycleVariationalSystem sys{p};
  const LineSection sec{e3[kS], e3[kI], 0.0, 1.0};
  IntegratorOptions io = base;
  io.t0 = 0.0;
  io.t1 = tmax;
  std::optional<Crossing<St>> hit;
  IntegrationStats stats;
  march(sys, x0, io, stats, [&](const StepInfo<St>& s) {
    const double g0 = sec(s.x0), g1 = sec(s.x1);
    if (!oriented(g0, g1, Direction::Increasing)) return false;
    auto at = [&](double tau) { return restep(sys, io.method, s.t0, s.x0, s.f0, tau); };
    auto [tau, x] = bisect<St>(s.t1 - s.t0, g0, at, sec);
    if (!(x[kS] > e3[kS])) return false;
    hit = Crossing<St>{s.t0 + tau, x};
    return true;
  });
  return hit;
}

}  // namespace detail

inline std::optional<ReturnMapValue> return_map(const ModelParams& p, double s, const CycleOptions& o = {}) {
  const auto e3 = endemic_e3(p);
  if (!e3) return std::nullopt;
  const double tmax = o.max_return_time > 0.0 ? o.max_return_time : detail::default_return_time(p, *e3);
  const auto hit = detail::next_hit(p, *e3, {{(*e3)[kS] + s, (*e3)[kI], 1.0, 0.0, 0.0}}, tmax, o.integrator);
  if (!hit) return std::nullopt;
  const auto& x = hit->x;
  const State2 f = field_reduced(State2{{x[0], x[1]}}, 0.0, p);
  ReturnMapValue v;
  v.s_next = x[0] - (*e3)[kS];
  v.time = hit->t;
  v.derivative = x[2] - f[kS] * x[3] / f[kI];
  v.log_abel = x[4];
  v.point = State2{{x[0], x[1]}};
  return v;
}

struct LimitCycle {
  State2 section_point{};
  std::vector<State2> points;  // one period, evenly spaced in time
  double period = 0.0;
  double multiplier = 0.0;     // return-map derivative at the fixed point
  double abel_liouville = 0.0; // exp(int_0^period tr J dt)
  int newton_iterations = 0;
};

/// Poincare shooting for a periodic orbit of the gamma = 0 system around E3.
inline LimitCycle locate_limit_cycle(const ModelParams& params, const State2& guess, const CycleOptions& o = {}) {
  if (params.gamma != 0.0) throw InvalidArgument("locate_limit_cycle: needs gamma = 0");
  params.validate();
  const auto e3 = endemic_e3(params);
  if (!e3) throw NoCycleFound("no endemic equilibrium E3 to circle");
  const double tmax = o.max_return_time > 0.0 ? o.max_return_time : detail::default_return_time(params, *e3);
  CycleOptions co = o;
  co.max_return_time = tmax;

  const auto first = detail::next_hit(params, *e3, {{guess[kS], guess[kI], 0.0, 0.0, 0.0}}, tmax, o.integrator);
  if (!first) throw NoCycleFound("trajectory from the guess never reaches the section");
  double s = first->x[0] - (*e3)[kS];

  auto step_map = [&](double s_in) {
    const auto v = return_map(params, s_in, co);
    if (!v) throw NoCycleFound("return map undefined at s = " + std::to_string(s_in));
    return *v;
  };

  for (int it = 0; it < o.max_map_iterations; ++it) {
    if (s < o.collapse_tol) throw NoCycleFound("orbit collapses onto E3");
    const ReturnMapValue v = step_map(s);
    const bool settled = std::abs(v.s_next - s) < 1e-9 * (1.0 + s);
    s = v.s_next;
    if (settled) break;
  }

  // Newton on F(s) = P(s) - s, safeguarded by the sign bracket seen so far.
  // Close to a Hopf point F is nearly cubic and a raw Newton step can jump
  // past zero; the sign of F says which way the cycle lies.
  LimitCycle cyc;
  std::optional<ReturnMapValue> fixed;
  std::optional<double> above, below;  // offsets with F < 0 and F > 0
  for (int it = 0; it < o.max_newton; ++it) {
    if (s < o.collapse_tol) throw NoCycleFound("Newton iterate collapses onto E3");
    const ReturnMapValue v = step_map(s);
    const double F = v.s_next - s;
    cyc.newton_iterations = it;
    if (std::abs(F) < o.newton_tol * (1.0 + s)) {
      fixed = v;
      break;
    }
    (F > 0.0 ? below : above) = s;
    const double dF = v.derivative - 1.0;
    double s_new = std::abs(dF) > 1e-14 ? s - F / dF : -1.0;
    const double lo = below.value_or(0.0);
    const double hi = above.value_or(std::numeric_limits<double>::infinity());
    if (!(s_new > lo && s_new < hi)) {
      if (below && above)
        s_new = 0.5 * (*below + *above);
      else
        s_new = F > 0.0 ? 2.0 * s : 0.5 * s;
    }
    s = s_new;
  }
  if (!fixed) throw NoCycleFound("Newton iteration did not converge");
  if (s < o.collapse_tol) throw NoCycleFound("fixed point of the return map is E3 itself");

  cyc.section_point = State2{{(*e3)[kS] + s, (*e3)[kI]}};
  cyc.period = fixed->time;
  cyc.multiplier = fixed->derivative;
  cyc.abel_liouville = std::exp(fixed->log_abel);

  IntegratorOptions io = o.integrator;
  io.t0 = 0.0;
  io.t1 = cyc.period;
  io.dense_output = true;
  const auto tr = integrate(ReducedSystem{params}, cyc.section_point, io);
  const std::size_t n = std::max<std::size_t>(o.n_cycle_points, 2);
  cyc.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) cyc.points.push_back(tr.interpolate(cyc.period * static_cast<double>(k) / n));
  return cyc;
}

// ---------------------------------------------------------------------------
// Classification

enum class AttractorKind { FixedPoint, PeriodicOrbit, InvariantCurve, Chaotic, Undetermined };

inline std::string_view to_string(AttractorKind k) {
  switch (k) {
    case AttractorKind::FixedPoint: return "FixedPoint";
    case AttractorKind::PeriodicOrbit: return "PeriodicOrbit";
    case AttractorKind::InvariantCurve: return "InvariantCurve";
    case AttractorKind::Chaotic: return "Chaotic";
    case AttractorKind::Undetermined: return "Undetermined";
  }
  return "?";
}

struct AttractorDiagnostics {
  double recurrence_distance = 0.0;  // max |x_{j+1} - x_j| over the final window
  double periodic_distance = 0.0;    // smallest max |x_{j+k} - x_j| over 2 <= k <= k_max
  int best_k = 0;
  double curve_gap_deg = 360.0;      // largest angular gap around the centroid
  double contraction_ratio = 1.0;    // extent of last quarter / extent of first quarter
  double window_spread = 0.0;
  bool converged = false;
  std::size_t n_points = 0;
  std::string note;
};

struct AttractorVerdict {
  AttractorKind kind = AttractorKind::Undetermined;
  int period = 0;  // for PeriodicOrbit
  double lambda_max = 0.0;
  AttractorDiagnostics diagnostics;
};

/// "PeriodicOrbit(k)" for locked orbits, the kind name otherwise.
inline std::string verdict_label(const AttractorVerdict& v) {
  if (v.kind == AttractorKind::PeriodicOrbit) return "PeriodicOrbit(" + std::to_string(v.period) + ")";
  return std::string(to_string(v.kind));
}

struct ClassifyOptions {
  std::size_t n_transient = 300;
  std::size_t n_keep = 1000;
  double min_transient_time = 2000.0;
  double min_time = 30000.0;
  double eps_fix = 1e-6;
  double eps_per = 1e-6;
  int k_max = 64;
  double lambda_chaos = 1e-3;
  double conv_tol = 5e-4;
  double max_gap_deg = 15.0;
  double contraction_ratio = 0.9;
  IntegratorOptions integrator = orbit_integrator();
};

namespace detail {

inline double block_extent(const std::vector<State2>& pts, std::size_t lo, std::size_t hi) {
  double cs = 0, ci = 0;
  for (std::size_t j = lo; j < hi; ++j) {
    cs += pts[j][kS];
    ci += pts[j][kI];
  }
  const double n = static_cast<double>(hi - lo);
  cs /= n;
  ci /= n;
  double e = 0.0;
  for (std::size_t j = lo; j < hi; ++j) e = std::max(e, std::hypot(pts[j][kS] - cs, pts[j][kI] - ci));
  return e;
}

inline double max_angular_gap_deg(const std::vector<State2>& pts, std::size_t lo, std::size_t hi) {
  double cs = 0, ci = 0;
  for (std::size_t j = lo; j < hi; ++j) {
    cs += pts[j][kS];
    ci += pts[j][kI];
  }
  const double n = static_cast<double>(hi - lo);
  cs /= n;
  ci /= n;
  std::vector<double> ang;
  ang.reserve(hi - lo);
  for (std::size_t j = lo; j < hi; ++j) {
    const double ds = pts[j][kS] - cs, di = pts[j][kI] - ci;
    if (ds != 0.0 || di != 0.0) ang.push_back(std::atan2(di, ds));
  }
  if (ang.size() < 2) return 360.0;
  std::sort(ang.begin(), ang.end());
  double gap = ang.front() + 2.0 * std::numbers::pi - ang.back();
  for (std::size_t j = 1; j < ang.size(); ++j) gap = std::max(gap, ang[j] - ang[j - 1]);
  return gap * 180.0 / std::numbers::pi;
}

inline double lag_distance(const std::vector<State2>& pts, std::size_t lo, std::size_t k) {
  double d = 0.0;
  for (std::size_t j = lo; j + k < pts.size(); ++j) d = std::max(d, norm_inf(pts[j + k] - pts[j]));
  return d;
}

}  // namespace detail

/// Long-run behaviour of the stroboscopic orbit from x0 (phase 0). Runs the
/// orbit and its tangent flow once, then applies the ladder: fixed point,
/// k-periodic recurrence, slowly contracting spiral (reported as a fixed
/// point), invariant curve, chaos, otherwise undetermined.
inline AttractorVerdict classify_attractor(const ModelParams& params, const State2& x0, const ClassifyOptions& o = {}) {
  params.validate();
  const double P = params.forcing_period();
  const std::size_t n_tr = std::max(o.n_transient, detail::segments_for(o.min_transient_time, P));
  const std::size_t n_keep = std::max({o.n_keep, detail::segments_for(o.min_time, P), std::size_t{8}});

  LyapunovOptions lo;
  lo.conv_tol = o.conv_tol;
  lo.integrator = o.integrator;
  std::vector<State2> pts;
  pts.reserve(n_keep);
  const double c = 1.0 / std::sqrt(2.0);
  ExtendedTangentSystem<false> sys{params};
  const LyapunovEstimate est =
      benettin(sys, {{x0[kS], x0[kI], 0.0, c, c}}, P, n_tr, n_keep, lo, [&](std::size_t, bool kept, const auto& x) {
        if (kept) pts.push_back(State2{{x[0], x[1]}});
      });

  AttractorVerdict v;
  v.lambda_max = est.lambda_max;
  auto& d = v.diagnostics;
  d.window_spread = est.window_spread;
  d.converged = est.converged;
  d.n_points = pts.size();

  const std::size_t half = pts.size() / 2;
  d.recurrence_distance = detail::lag_distance(pts, half, 1);
  d.periodic_distance = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= o.k_max && half + static_cast<std::size_t>(k) < pts.size(); ++k) {
    const double dk = detail::lag_distance(pts, half, static_cast<std::size_t>(k));
    if (dk < d.periodic_distance) {
      d.periodic_distance = dk;
      d.best_k = k;
    }
    if (dk < o.eps_per) break;  // smallest locking period wins
  }
  const std::size_t q = pts.size() / 4;
  const double e_first = detail::block_extent(pts, 0, q);
  const double e_last = detail::block_extent(pts, pts.size() - q, pts.size());
  d.contraction_ratio = e_first > 0.0 ? e_last / e_first : 1.0;
  d.curve_gap_deg = detail::max_angular_gap_deg(pts, half, pts.size());

  if (d.recurrence_distance < o.eps_fix) {
    v.kind = AttractorKind::FixedPoint;
  } else if (d.periodic_distance < o.eps_per) {
    v.kind = AttractorKind::PeriodicOrbit;
    v.period = d.best_k;
  } else if (est.lambda_max <= o.lambda_chaos && d.contraction_ratio < o.contraction_ratio) {
    v.kind = AttractorKind::FixedPoint;
    d.note = "slowly contracting spiral";
  } else if (est.lambda_max <= o.lambda_chaos && d.curve_gap_deg < o.max_gap_deg) {
    v.kind = AttractorKind::InvariantCurve;
  } else if (est.lambda_max > o.lambda_chaos && est.converged) {
    v.kind = AttractorKind::Chaotic;
  } else {
    v.kind = AttractorKind::Undetermined;
    if (est.lambda_max > o.lambda_chaos) d.note = "positive exponent not converged";
  }
  return v;
}

}  // namespace ssir
