#pragma once

// Explicit Runge-Kutta integration (classical RK4, Dormand-Prince 5(4)),
// section crossings and a Richardson order estimate.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "ssir/errors.hpp"
#include "ssir/point.hpp"

namespace ssir {

template <class S>
concept OdeSystem = requires(const S& sys, double t, const typename S::state_type& x) {
  { sys(t, x) } -> std::convertible_to<typename S::state_type>;
};

enum class Method { Rk4Fixed, Rk45Adaptive };

struct IntegratorOptions {
  Method method = Method::Rk45Adaptive;
  double dt = 1e-2;  ///< RK4 step (rounded so that it divides the span)
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double dt_min = 1e-12;
  double dt_max = 1.0;
  double initial_step = 0.0;  ///< 0 picks a starting step automatically
  double t0 = 0.0;
  double t1 = 1.0;
  bool dense_output = false;  ///< keep f(t, x) per sample for Hermite interpolation
  std::size_t record_stride = 1;

  void validate() const {
    if (!(std::isfinite(t0) && std::isfinite(t1)) || !(t1 > t0))
      throw InvalidArgument("integrator: need finite t0 < t1");
    if (method == Method::Rk4Fixed) {
      if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("integrator: dt must be > 0");
    } else {
      if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw InvalidArgument("integrator: tolerances must be > 0");
      if (!(dt_min > 0.0) || !(dt_max >= dt_min)) throw InvalidArgument("integrator: need 0 < dt_min <= dt_max");
    }
    if (record_stride == 0) throw InvalidArgument("integrator: record_stride must be >= 1");
  }
};

struct IntegrationStats {
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  double max_invariant_violation = 0.0;
  double last_step = 0.0;  ///< size of the last full accepted step
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<State> derivatives;  // filled when dense_output is set
  IntegrationStats stats;

  std::size_t size() const { return times.size(); }
  const State& back() const { return states.back(); }

  /// Cubic Hermite interpolation between recorded samples.
  State interpolate(double t) const {
    if (derivatives.size() != states.size()) throw InvalidArgument("interpolate: trajectory has no dense output");
    if (times.empty() || t < times.front() || t > times.back())
      throw InvalidArgument("interpolate: t outside the recorded span");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = it == times.end() ? times.size() - 1 : static_cast<std::size_t>(it - times.begin());
    if (i == 0) return states.front();
    return hermite(times[i - 1], states[i - 1], derivatives[i - 1], times[i], states[i], derivatives[i], t);
  }

  static State hermite(double ta, const State& xa, const State& fa, double tb, const State& xb, const State& fb,
                       double t) {
    const double h = tb - ta;
    const double s = (t - ta) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    State out;
    for (std::size_t k = 0; k < State::size(); ++k)
      out[k] = h00 * xa[k] + h10 * h * fa[k] + h01 * xb[k] + h11 * h * fb[k];
    return out;
  }
};

/// One accepted step as seen by march callbacks. `x1` is the state before
/// the system's normalize hook runs.
template <class State>
struct StepInfo {
  double t0, t1;
  const State& x0;
  const State& f0;
  const State& x1;
  const State& f1;
};

namespace detail {

template <class Sys, class State>
void normalize_if_any(const Sys& sys, State& x) {
  if constexpr (requires { sys.normalize(x); }) sys.normalize(x);
}

template <class Sys, class State>
double violation_if_any(const Sys& sys, const State& x) {
  if constexpr (requires { { sys.violation(x) } -> std::convertible_to<double>; })
    return sys.violation(x);
  else
    return 0.0;
}

template <class Sys, class State>
State rk4_step(const Sys& f, double t, const State& x, const State& k1, double h) {
  const State k2 = f(t + 0.5 * h, x + (0.5 * h) * k1);
  const State k3 = f(t + 0.5 * h, x + (0.5 * h) * k2);
  const State k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) tableau.
namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp

/// Fifth-order solution; `err` receives the embedded error estimate and
/// `f_new` the derivative at the new point (FSAL).
template <class Sys, class State>
State dopri_step(const Sys& f, double t, const State& x, const State& k1, double h, State& err, State& f_new) {
  using namespace dp;
  const State k2 = f(t + c2 * h, x + h * (a21 * k1));
  const State k3 = f(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
  const State k4 = f(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const State k5 = f(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const State k6 = f(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  const State y = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  f_new = f(t + h, y);
  err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * f_new);
  return y;
}

template <class State>
double scaled_error(const State& err, const State& x, const State& y, double atol, double rtol) {
  double m = 0.0;
  for (std::size_t i = 0; i < State::size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(y[i]));
    m = std::max(m, std::abs(err[i]) / sc);
  }
  return m;
}

// Hairer-Wanner starting step.
template <class Sys, class State>
double initial_step(const Sys& f, double t, const State& x, const State& f0, const IntegratorOptions& o) {
  double d0 = 0, d1 = 0;
  for (std::size_t i = 0; i < State::size(); ++i) {
    const double sc = o.abs_tol + o.rel_tol * std::abs(x[i]);
    d0 = std::max(d0, std::abs(x[i]) / sc);
    d1 = std::max(d1, std::abs(f0[i]) / sc);
  }
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, o.t1 - t);
  const State x1 = x + h0 * f0;
  const State f1 = f(t + h0, x1);
  double d2 = 0;
  for (std::size_t i = 0; i < State::size(); ++i) {
    const double sc = o.abs_tol + o.rel_tol * std::abs(x[i]);
    d2 = std::max(d2, std::abs(f1[i] - f0[i]) / sc);
  }
  d2 /= h0;
  const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
  return std::clamp(std::min(100.0 * h0, h1), o.dt_min, o.dt_max);
}

template <class State>
void check_finite(const State& x, double t) {
  if (!is_finite(x)) throw NonFiniteState("non-finite state at t = " + std::to_string(t));
}

/// Drives the chosen method from opts.t0 to opts.t1, calling on_step after
/// every accepted step. A callback returning bool can end the run early by
/// returning true. Returns the final (normalized) state.
template <OdeSystem Sys, class OnStep>
typename Sys::state_type march(const Sys& sys, typename Sys::state_type x, const IntegratorOptions& opts,
                               IntegrationStats& stats, OnStep&& on_step) {
  using State = typename Sys::state_type;
  opts.validate();
  check_finite(x, opts.t0);
  stats.max_invariant_violation = std::max(stats.max_invariant_violation, violation_if_any(sys, x));
  double t = opts.t0;
  State f = sys(t, x);

  // Returns true when the callback asks to stop.
  auto accept = [&](double t_new, State& x_new, const State& f_new) {
    check_finite(x_new, t_new);
    bool stop = false;
    if constexpr (std::is_same_v<std::invoke_result_t<OnStep&, const StepInfo<State>&>, bool>)
      stop = on_step(StepInfo<State>{t, t_new, x, f, x_new, f_new});
    else
      on_step(StepInfo<State>{t, t_new, x, f, x_new, f_new});
    normalize_if_any(sys, x_new);
    stats.max_invariant_violation = std::max(stats.max_invariant_violation, violation_if_any(sys, x_new));
    ++stats.steps_accepted;
    t = t_new;
    x = x_new;
    f = f_new;
    return stop;
  };

  if (opts.method == Method::Rk4Fixed) {
    const double span = opts.t1 - opts.t0;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(span / opts.dt)));
    const double h = span / static_cast<double>(n);
    stats.last_step = h;
    for (std::size_t k = 1; k <= n; ++k) {
      const double t_new = k == n ? opts.t1 : opts.t0 + static_cast<double>(k) * h;
      State x_new = rk4_step(sys, t, x, f, t_new - t);
      check_finite(x_new, t_new);
      const State f_new = sys(t_new, x_new);
      if (accept(t_new, x_new, f_new)) break;
    }
    return x;
  }

  double h = opts.initial_step > 0.0 ? std::clamp(opts.initial_step, opts.dt_min, opts.dt_max)
                                     : initial_step(sys, t, x, f, opts);
  double err_prev = 1e-4;
  constexpr double safety = 0.9, fac_min = 0.2, fac_max = 5.0;
  constexpr double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
  State err, f_new;
  while (t < opts.t1) {
    const double remaining = opts.t1 - t;
    bool last = false;
    double h_try = h;
    if (h_try >= remaining * (1.0 - 1e-12)) {
      h_try = remaining;
      last = true;
    }
    State x_new = dopri_step(sys, t, x, f, h_try, err, f_new);
    const double e = is_finite(x_new) ? scaled_error(err, x, x_new, opts.abs_tol, opts.rel_tol)
                                      : std::numeric_limits<double>::infinity();
    if (e <= 1.0) {
      double fac = e == 0.0 ? fac_max : safety * std::pow(e, -alpha) * std::pow(err_prev, beta);
      fac = std::clamp(fac, fac_min, fac_max);
      err_prev = std::max(e, 1e-4);
      if (!last) {
        stats.last_step = h_try;
        h = std::min(opts.dt_max, h_try * fac);
      }
      if (accept(last ? opts.t1 : t + h_try, x_new, f_new)) break;
    } else {
      ++stats.steps_rejected;
      const double fac = std::isfinite(e) ? std::max(fac_min, safety * std::pow(e, -0.2)) : fac_min;
      h = h_try * fac;
      if (h < opts.dt_min)
        throw StepSizeUnderflow("step size " + std::to_string(h) + " below dt_min at t = " + std::to_string(t));
    }
  }
  return x;
}

}  // namespace detail

/// Integrates `sys` from x0 over [opts.t0, opts.t1], recording every
/// record_stride-th accepted step plus both endpoints.
template <OdeSystem Sys>
Trajectory<typename Sys::state_type> integrate(const Sys& sys, const typename Sys::state_type& x0,
                                               const IntegratorOptions& opts) {
  using State = typename Sys::state_type;
  Trajectory<State> tr;
  State x = x0;
  detail::normalize_if_any(sys, x);
  tr.times.push_back(opts.t0);
  tr.states.push_back(x);
  if (opts.dense_output) tr.derivatives.push_back(sys(opts.t0, x));
  std::size_t k = 0;
  State last_f{};
  double last_t = opts.t0;
  bool pending = false;
  const State xf = detail::march(sys, x, opts, tr.stats, [&](const StepInfo<State>& s) {
    ++k;
    last_t = s.t1;
    last_f = s.f1;
    pending = k % opts.record_stride != 0;
    if (!pending) {
      tr.times.push_back(s.t1);
      State xn = s.x1;
      detail::normalize_if_any(sys, xn);
      tr.states.push_back(xn);
      if (opts.dense_output) tr.derivatives.push_back(s.f1);
    }
  });
  if (pending) {
    tr.times.push_back(last_t);
    tr.states.push_back(xf);
    if (opts.dense_output) tr.derivatives.push_back(last_f);
  }
  return tr;
}

/// Final state only; `stats` accumulates across calls.
template <OdeSystem Sys>
typename Sys::state_type advance(const Sys& sys, const typename Sys::state_type& x0, const IntegratorOptions& opts,
                                 IntegrationStats* stats = nullptr) {
  IntegrationStats local;
  IntegrationStats& s = stats ? *stats : local;
  auto x = x0;
  detail::normalize_if_any(sys, x);
  return detail::march(sys, x, opts, s, [](const auto&) {});
}

// ---------------------------------------------------------------------------
// Convergence order

struct ConvergenceEstimate {
  double order = 0.0;
  std::vector<double> estimates;  // one per consecutive triple of dts
};

/// Observed RK4 order from final states at geometrically refined steps:
/// p = log(|y(h0) - y(h1)| / |y(h1) - y(h2)|) / log(h0 / h1).
template <OdeSystem Sys>
ConvergenceEstimate convergence_order(const Sys& sys, const typename Sys::state_type& x0, double t0, double t1,
                                      const std::vector<double>& dts) {
  if (dts.size() < 3) throw InvalidArgument("convergence_order: need at least three step sizes");
  const double q = dts[0] / dts[1];
  if (!(q > 1.0)) throw InvalidArgument("convergence_order: step sizes must decrease");
  for (std::size_t i = 1; i + 1 < dts.size(); ++i)
    if (std::abs(dts[i] / dts[i + 1] - q) > 1e-9 * q)
      throw InvalidArgument("convergence_order: step sizes must form a geometric sequence");
  for (double h : dts) {
    const double n = (t1 - t0) / h;
    if (std::abs(n - std::round(n)) > 1e-9 * n)
      throw InvalidArgument("convergence_order: each dt must divide the time span");
  }

  using State = typename Sys::state_type;
  std::vector<State> finals;
  for (double h : dts) {
    IntegratorOptions o;
    o.method = Method::Rk4Fixed;
    o.dt = h;
    o.t0 = t0;
    o.t1 = t1;
    finals.push_back(advance(sys, x0, o));
  }
  ConvergenceEstimate out;
  for (std::size_t i = 0; i + 2 < finals.size(); ++i) {
    const double num = norm_inf(finals[i] - finals[i + 1]);
    const double den = norm_inf(finals[i + 1] - finals[i + 2]);
    out.estimates.push_back(den > 0.0 ? std::log(num / den) / std::log(q) : std::numeric_limits<double>::quiet_NaN());
  }
  out.order = out.estimates.back();
  return out;
}

// ---------------------------------------------------------------------------
// Sections

/// theta = theta0 (mod forcing period) of the extended system.
struct ThetaSection {
  double theta0 = 0.0;
};

/// nS (S - S0) + nI (I - I0) = 0 in the (S, I) plane.
struct LineSection {
  double S0 = 0.0, I0 = 0.0;
  double nS = 1.0, nI = 0.0;

  template <class State>
  double operator()(const State& x) const {
    return nS * (x[kS] - S0) + nI * (x[kI] - I0);
  }
};

enum class Direction { Increasing, Decreasing, Both };

template <class State>
struct Crossing {
  double t;
  State x;
};

namespace detail {

inline bool oriented(double g0, double g1, Direction d) {
  const bool up = g0 < 0.0 && g1 >= 0.0;
  const bool down = g0 > 0.0 && g1 <= 0.0;
  switch (d) {
    case Direction::Increasing: return up;
    case Direction::Decreasing: return down;
    case Direction::Both: return up || down;
  }
  return false;
}

inline constexpr double kSectionTol = 1e-10;

// Bisection on tau in (0, h]; `at(tau)` returns the state and `g` evaluates
// the section function. Stops at |g| < kSectionTol or when the bracket
// collapses to rounding level.
template <class State, class At, class G>
std::pair<double, State> bisect(double h, double g0, At&& at, G&& g) {
  double lo = 0.0, hi = h;
  double glo = g0;
  State x_mid = at(hi);
  double tau = hi;
  for (int it = 0; it < 200; ++it) {
    tau = 0.5 * (lo + hi);
    x_mid = at(tau);
    const double gm = g(x_mid);
    if (std::abs(gm) < kSectionTol || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + hi)) break;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = tau;
      glo = gm;
    } else {
      hi = tau;
    }
  }
  return {tau, x_mid};
}

template <class Sys, class State>
State restep(const Sys& sys, Method m, double t, const State& x, const State& f, double tau) {
  if (tau == 0.0) return x;
  if (m == Method::Rk4Fixed) return rk4_step(sys, t, x, f, tau);
  State err, fn;
  return dopri_step(sys, t, x, f, tau, err, fn);
}

}  // namespace detail

/// Crossings of a line section, located on the vector field by re-stepping
/// from the start of the bracketing step.
template <OdeSystem Sys>
std::vector<Crossing<typename Sys::state_type>> section_crossings(const Sys& sys,
                                                                  const typename Sys::state_type& x0,
                                                                  const IntegratorOptions& opts,
                                                                  const LineSection& sec, Direction dir) {
  using State = typename Sys::state_type;
  std::vector<Crossing<State>> out;
  IntegrationStats stats;
  detail::march(sys, x0, opts, stats, [&](const StepInfo<State>& s) {
    const double g0 = sec(s.x0), g1 = sec(s.x1);
    if (!detail::oriented(g0, g1, dir)) return;
    auto at = [&](double tau) { return detail::restep(sys, opts.method, s.t0, s.x0, s.f0, tau); };
    auto [tau, x] = detail::bisect<State>(s.t1 - s.t0, g0, at, sec);
    detail::normalize_if_any(sys, x);
    out.push_back({s.t0 + tau, x});
  });
  return out;
}

/// Crossings of theta = theta0 (mod period) for a system whose state carries
/// a phase at index kTheta advancing at a constant rate.
template <OdeSystem Sys>
std::vector<Crossing<typename Sys::state_type>> section_crossings(const Sys& sys,
                                                                  const typename Sys::state_type& x0,
                                                                  const IntegratorOptions& opts,
                                                                  const ThetaSection& sec, Direction dir) {
  using State = typename Sys::state_type;
  std::vector<Crossing<State>> out;
  if (dir == Direction::Decreasing) return out;
  const double T = sys.params.forcing.period();
  IntegrationStats stats;
  detail::march(sys, x0, opts, stats, [&](const StepInfo<State>& s) {
    // x1 is not yet wrapped, so theta is continuous across the step.
    const double th0 = s.x0[kTheta], th1 = s.x1[kTheta];
    const double m = std::floor((th1 - sec.theta0) / T);
    const double target = sec.theta0 + m * T;
    if (!(th0 < target && th1 >= target)) return;
    auto g = [&](const State& x) { return x[kTheta] - target; };
    auto at = [&](double tau) { return detail::restep(sys, opts.method, s.t0, s.x0, s.f0, tau); };
    auto [tau, x] = detail::bisect<State>(s.t1 - s.t0, th0 - target, at, g);
    detail::normalize_if_any(sys, x);
    out.push_back({s.t0 + tau, x});
  });
  return out;
}

/// Crossings located on a recorded trajectory through its Hermite interpolant.
template <class State>
std::vector<Crossing<State>> section_crossings(const Trajectory<State>& tr, const LineSection& sec, Direction dir) {
  if (tr.derivatives.size() != tr.states.size())
    throw InvalidArgument("section_crossings: trajectory needs dense output");
  std::vector<Crossing<State>> out;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double g0 = sec(tr.states[i - 1]), g1 = sec(tr.states[i]);
    if (!detail::oriented(g0, g1, dir)) continue;
    const double ta = tr.times[i - 1], tb = tr.times[i];
    auto at = [&](double tau) {
      return Trajectory<State>::hermite(ta, tr.states[i - 1], tr.derivatives[i - 1], tb, tr.states[i],
                                        tr.derivatives[i], ta + tau);
    };
    auto [tau, x] = detail::bisect<State>(tb - ta, g0, at, sec);
    out.push_back({ta + tau, x});
  }
  return out;
}

/// Theta crossings on a recorded extended-system trajectory. The stored
/// phase is wrapped, so it is unwrapped with the recorded phase velocity.
template <class State>
std::vector<Crossing<State>> section_crossings(const Trajectory<State>& tr, const ThetaSection& sec, double period,
                                               Direction dir) {
  if (tr.derivatives.size() != tr.states.size())
    throw InvalidArgument("section_crossings: trajectory needs dense output");
  std::vector<Crossing<State>> out;
  if (dir == Direction::Decreasing || tr.size() < 2) return out;
  double th_prev = tr.states[0][kTheta];
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double ta = tr.times[i - 1], tb = tr.times[i];
    const double th_next = th_prev + 0.5 * (tr.derivatives[i - 1][kTheta] + tr.derivatives[i][kTheta]) * (tb - ta);
    const double m = std::floor((th_next - sec.theta0) / period);
    const double target = sec.theta0 + m * period;
    if (th_prev < target && th_next >= target) {
      // Linear phase inside the step; Hermite for (S, I).
      const double tc = ta + (target - th_prev) / (th_next - th_prev) * (tb - ta);
      State x = Trajectory<State>::hermite(ta, tr.states[i - 1], tr.derivatives[i - 1], tb, tr.states[i],
                                           tr.derivatives[i], tc);
      x[kTheta] = std::fmod(sec.theta0, period);
      if (x[kTheta] < 0.0) x[kTheta] += period;
      out.push_back({tc, x});
    }
    th_prev = th_next;
  }
  return out;
}

}  // namespace ssir
