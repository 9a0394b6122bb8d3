#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "ssir/errors.hpp"
#include "ssir/forcing.hpp"
#include "ssir/point.hpp"

namespace ssir {

/// Parameters of the seasonally forced SIR-type model.
///
/// `mu` is the natural death rate and `d` the disease death rate. The full
/// (S, I, R) field keeps them apart. The reduced and extended fields, and
/// every threshold formula, use mu_eff() = mu + d.
struct ModelParams {
  double A = 1.0;      ///< carrying capacity of susceptibles
  double r = 0.0;      ///< cure rate
  double beta0 = 1.0;  ///< baseline transmission rate
  double a = 1.0;      ///< treatment-delay saturation
  double mu = 0.0;     ///< natural death rate
  double d = 0.0;      ///< disease death rate
  double gamma = 0.0;  ///< seasonal amplitude
  double omega = 1.0;  ///< seasonal frequency
  Forcing forcing{};

  double mu_eff() const { return mu + d; }

  /// Time between stroboscopic samples, T_Phi / omega.
  double forcing_period() const { return forcing.period() / omega; }

  /// Throws InvalidParams on the first violated invariant.
  void validate() const {
    auto finite_nonneg = [](double x, const char* name) {
      if (!std::isfinite(x)) throw InvalidParams(std::string(name) + " must be finite");
      if (x < 0.0) throw InvalidParams(std::string(name) + " must be nonnegative");
    };
    finite_nonneg(A, "A");
    finite_nonneg(r, "r");
    finite_nonneg(beta0, "beta0");
    finite_nonneg(a, "a");
    finite_nonneg(mu, "mu");
    finite_nonneg(d, "d");
    finite_nonneg(gamma, "gamma");
    finite_nonneg(omega, "omega");
    if (!(a > 0.0)) throw InvalidParams("a must be > 0");
    if (!(omega > 0.0)) throw InvalidParams("omega must be > 0");
    if (!(gamma < 1.0)) throw InvalidParams("gamma must lie in [0, 1)");
    if (1.0 + gamma * forcing.min_value() <= 0.0) throw InvalidParams("beta_gamma must stay positive");
  }

  /// Copy with one named field replaced. Names: A, r, beta0, a, mu, d, gamma, omega.
  ModelParams with(std::string_view field, double value) const {
    ModelParams p = *this;
    field_ref(p, field) = value;
    return p;
  }

  double get(std::string_view field) const { return field_ref(*this, field); }

  static bool is_field(std::string_view f) {
    return f == "A" || f == "r" || f == "beta0" || f == "a" || f == "mu" || f == "d" || f == "gamma" ||
           f == "omega";
  }

 private:
  template <class Self>
  static auto field_ref(Self& p, std::string_view field) -> decltype((p.A)) {
    if (field == "A") return p.A;
    if (field == "r") return p.r;
    if (field == "beta0") return p.beta0;
    if (field == "a") return p.a;
    if (field == "mu") return p.mu;
    if (field == "d") return p.d;
    if (field == "gamma") return p.gamma;
    if (field == "omega") return p.omega;
    throw InvalidArgument("unknown parameter field '" + std::string(field) + "'");
  }
};

/// beta0 * (1 + gamma * Phi(theta)) at forcing phase theta.
inline double beta_at_phase(const ModelParams& p, double theta) {
  return p.beta0 * (1.0 + p.gamma * p.forcing(theta));
}

/// Seasonal transmission rate beta0 * (1 + gamma * Phi(omega t)).
inline double beta_gamma(const ModelParams& p, double t) {
  if (p.gamma == 0.0) return p.beta0;
  return beta_at_phase(p, p.omega * t);
}

namespace detail {

inline State2 reduced_rhs(double S, double I, double beta, const ModelParams& p) {
  const double inf = beta * I * S;
  return {{S * (p.A - S) - inf, inf - p.mu_eff() * I - p.r * I / (p.a + I)}};
}

inline Mat2 reduced_jacobian(double S, double I, double beta, const ModelParams& p) {
  const double q = p.a + I;
  return {-beta * I + p.A - 2.0 * S, -beta * S, beta * I, beta * S - p.mu_eff() - p.r * p.a / (q * q)};
}

}  // namespace detail

/// Full (S, I, R) field. I decays at mu + d, R at the natural rate mu.
inline State3 field_full(const State3& x, double t, const ModelParams& p) {
  const double S = x[kS], I = x[kI], R = x[kR];
  const double beta = beta_gamma(p, t);
  const double inf = beta * I * S;
  const double cure = p.r * I / (p.a + I);
  return {{S * (p.A - S) - inf, inf - (p.mu + p.d) * I - cure, cure - p.mu * R}};
}

/// Reduced (S, I) field with mu_eff.
inline State2 field_reduced(const State2& x, double t, const ModelParams& p) {
  return detail::reduced_rhs(x[kS], x[kI], beta_gamma(p, t), p);
}

/// Autonomous extension on R^2 x S^1: beta is evaluated at the phase theta.
inline StateExt field_extended(const StateExt& x, const ModelParams& p) {
  const State2 f = detail::reduced_rhs(x[kS], x[kI], beta_at_phase(p, x[kTheta]), p);
  return {{f[kS], f[kI], p.omega}};
}

/// Analytic Jacobian of field_reduced; also the tangent-flow generator.
inline Mat2 jacobian_reduced(const State2& x, double t, const ModelParams& p) {
  return detail::reduced_jacobian(x[kS], x[kI], beta_gamma(p, t), p);
}

/// Bound on S + I (+ R) inside the positively invariant region, A(m + A)/m.
inline double population_bound(double A, double death_rate) {
  if (death_rate <= 0.0) return std::numeric_limits<double>::infinity();
  return A * (death_rate + A) / death_rate;
}

// Integrable systems. Each is a value type holding its parameters; the
// integrator only needs operator()(t, x). `violation` measures how far a
// state lies outside the invariant region (largest constraint violation,
// zero inside). `normalize` is applied after every accepted step.

struct FullSystem {
  using state_type = State3;
  ModelParams params;

  State3 operator()(double t, const State3& x) const { return field_full(x, t, params); }

  double violation(const State3& x) const {
    const double nmax = population_bound(params.A, params.mu);
    const double n = x[kS] + x[kI] + x[kR];
    double v = std::max({0.0, -x[kS], x[kS] - params.A, -x[kI], -x[kR]});
    if (std::isfinite(nmax)) v = std::max(v, n - nmax);
    return v;
  }
};

struct ReducedSystem {
  using state_type = State2;
  ModelParams params;

  State2 operator()(double t, const State2& x) const { return field_reduced(x, t, params); }

  double violation(const State2& x) const {
    const double nmax = population_bound(params.A, params.mu_eff());
    double v = std::max({0.0, -x[kS], x[kS] - params.A, -x[kI]});
    if (std::isfinite(nmax)) v = std::max(v, x[kS] + x[kI] - nmax);
    return v;
  }
};

struct ExtendedSystem {
  using state_type = StateExt;
  ModelParams params;

  StateExt operator()(double /*t*/, const StateExt& x) const { return field_extended(x, params); }

  void normalize(StateExt& x) const {
    const double T = params.forcing.period();
    double th = std::fmod(x[kTheta], T);
    if (th < 0.0) th += T;
    x[kTheta] = th;
  }

  double violation(const StateExt& x) const {
    const double nmax = population_bound(params.A, params.mu_eff());
    double v = std::max({0.0, -x[kS], x[kS] - params.A, -x[kI]});
    if (std::isfinite(nmax)) v = std::max(v, x[kS] + x[kI] - nmax);
    return v;
  }
};

}  // namespace ssir
