#pragma once

// Closed-form analysis of the autonomous (gamma = 0) reduced system:
// equilibria, thresholds on the R0 axis, stability, regime labels.

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ssir/errors.hpp"
#include "ssir/model.hpp"
#include "ssir/point.hpp"

namespace ssir {

inline constexpr double kEigenTol = 1e-8;      // relative to 1 + |J|_F
inline constexpr double kResidualTol = 1e-10;  // relative to 1 + |x|_inf
inline constexpr double kTieTol = 1e-12;

enum class EquilibriumLabel { E1, E2, E3, E4, EStar, Unlabeled };
enum class Stability { Sink, Source, Saddle, CenterLike, Degenerate };

inline std::string_view to_string(EquilibriumLabel l) {
  switch (l) {
    case EquilibriumLabel::E1: return "E1";
    case EquilibriumLabel::E2: return "E2";
    case EquilibriumLabel::E3: return "E3";
    case EquilibriumLabel::E4: return "E4";
    case EquilibriumLabel::EStar: return "E*";
    case EquilibriumLabel::Unlabeled: break;
  }
  return "equilibrium";
}

inline std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::Sink: return "sink";
    case Stability::Source: return "source";
    case Stability::Saddle: return "saddle";
    case Stability::CenterLike: return "center-like";
    case Stability::Degenerate: return "degenerate";
  }
  return "?";
}

struct EquilibriumReport {
  EquilibriumLabel label = EquilibriumLabel::Unlabeled;
  State2 point{};
  std::array<std::complex<double>, 2> eigenvalues{};
  double trace = 0.0;
  double det = 0.0;
  Stability stability = Stability::Degenerate;
  bool admissible = true;  // I >= 0 and 0 <= S <= A
  double residual = 0.0;   // |f_0(point)|_inf
};

struct Thresholds {
  double r0 = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;
  std::optional<double> hopf_h;  // only when beta0 > 1
  double a_star = 0.0;
  double delta = 0.0;
};

enum class RegimeTag { DiseaseFreeGlobal, BistableSink, LimitCycle, SupercriticalR0 };

inline std::string_view to_string(RegimeTag t) {
  switch (t) {
    case RegimeTag::DiseaseFreeGlobal: return "DiseaseFreeGlobal";
    case RegimeTag::BistableSink: return "BistableSink";
    case RegimeTag::LimitCycle: return "LimitCycle";
    case RegimeTag::SupercriticalR0: return "SupercriticalR0";
  }
  return "?";
}

struct Regime {
  RegimeTag tag = RegimeTag::DiseaseFreeGlobal;
  bool degenerate = false;  // R0 within kTieTol of a threshold
  Thresholds thresholds;
  /// Stability of E3 from its Jacobian, when E3 exists. The H threshold
  /// does not always agree with the sign of tr J(E3).
  std::optional<Stability> e3_stability;
};

struct HopfCheck {
  bool holds = false;
  std::optional<double> bound;   // A(beta0-1) + a beta0 - 2 sqrt(beta0(beta0-1) a A)
  std::optional<double> margin;  // bound - mu_eff
};

struct Phi0Gradient {
  double d_a = 0.0;
  double d_beta0 = 0.0;
  double d_mu = 0.0;
  double d_r = 0.0;
};

struct TraceDet {
  double trace = 0.0;
  double det = 0.0;
};

/// R0 = beta0 A / (mu_eff + r/a).
inline double basic_reproduction_number(const ModelParams& p) {
  if (!(p.a > 0.0)) throw InvalidParams("R0 needs a > 0");
  const double denom = p.mu_eff() + p.r / p.a;
  if (!(denom > 0.0)) throw InvalidParams("R0 needs mu_eff + r/a > 0");
  return p.beta0 * p.A / denom;
}

/// Endemic discriminant [a beta0 + A - mu/beta0]^2 - 4r.
inline double discriminant(const ModelParams& p) {
  if (!(p.beta0 > 0.0)) throw InvalidParams("discriminant needs beta0 > 0");
  const double b = p.a * p.beta0 + p.A - p.mu_eff() / p.beta0;
  return b * b - 4.0 * p.r;
}

/// The same discriminant written through R0.
inline double discriminant_from_r0(const ModelParams& p) {
  if (!(p.beta0 > 0.0)) throw InvalidParams("discriminant needs beta0 > 0");
  const double r0 = basic_reproduction_number(p);
  const double m = p.mu_eff() / p.beta0;
  const double b = p.a * p.beta0 + r0 * (m + p.r / (p.a * p.beta0)) - m;
  return b * b - 4.0 * p.r;
}

inline double double_root_tolerance(const ModelParams& p) {
  const double b = p.a * p.beta0 + p.A - p.mu_eff() / p.beta0;
  return kTieTol * (1.0 + b * b + 4.0 * p.r);
}

inline Thresholds thresholds(const ModelParams& p) {
  if (!(p.a > 0.0)) throw InvalidParams("thresholds need a > 0");
  if (!(p.beta0 > 0.0)) throw InvalidParams("thresholds need beta0 > 0");
  const double mu = p.mu_eff();
  const double am_r = p.a * mu + p.r;
  if (!(am_r > 0.0)) throw InvalidParams("thresholds need a mu + r > 0");
  const double sr = std::sqrt(p.r);
  const double ab = p.a * p.beta0;

  Thresholds t;
  t.r0 = basic_reproduction_number(p);
  t.phi0 = 1.0 - (ab - sr) * (ab - sr) / am_r;
  t.phi1 = (ab * ab + p.a * mu) / am_r;
  // A-value where the discriminant vanishes: a beta0 + A - mu/beta0 = 2 sqrt(r).
  t.a_star = 2.0 * sr - ab + mu / p.beta0;
  t.delta = discriminant(p);
  if (p.beta0 > 1.0) {
    const double rad = p.beta0 * (p.beta0 - 1.0) * p.a * p.A;
    const double den = p.r / p.a + p.A * (p.beta0 - 1.0) + ab - 2.0 * std::sqrt(rad);
    if (rad >= 0.0 && den > 0.0) t.hopf_h = p.beta0 * p.A / den;
  }
  return t;
}

/// Stability report for an equilibrium of the autonomous field.
/// Throws NotAnEquilibrium when |f_0(x)| is above the residual tolerance.
inline EquilibriumReport classify_equilibrium(const State2& x, const ModelParams& params,
                                              EquilibriumLabel label = EquilibriumLabel::Unlabeled) {
  ModelParams p = params;
  p.gamma = 0.0;
  EquilibriumReport rep;
  rep.label = label;
  rep.point = x;
  rep.residual = norm_inf(field_reduced(x, 0.0, p));
  if (!(rep.residual < kResidualTol * (1.0 + norm_inf(x))))
    throw NotAnEquilibrium("point (" + std::to_string(x[kS]) + ", " + std::to_string(x[kI]) +
                           ") has residual " + std::to_string(rep.residual));
  rep.admissible = x[kI] >= 0.0 && x[kS] >= 0.0 && x[kS] <= p.A;

  const Mat2 J = jacobian_reduced(x, 0.0, p);
  rep.eigenvalues = J.eigenvalues();
  rep.trace = J.trace();
  rep.det = J.det();
  const double tol = kEigenTol * (1.0 + J.frobenius());
  const double min_mod = std::min(std::abs(rep.eigenvalues[0]), std::abs(rep.eigenvalues[1]));
  if (min_mod < tol)
    rep.stability = Stability::Degenerate;
  else if (rep.det < 0.0)
    rep.stability = Stability::Saddle;
  else if (std::abs(rep.trace) < tol)
    rep.stability = Stability::CenterLike;
  else
    rep.stability = rep.trace < 0.0 ? Stability::Sink : Stability::Source;
  return rep;
}

/// E1 and E2 always; E3/E4 when the discriminant is positive, or a single
/// degenerate E* when it vanishes within tolerance. Roots that violate
/// I >= 0 or S <= A are kept and flagged non-admissible.
inline std::vector<EquilibriumReport> equilibria(const ModelParams& params) {
  ModelParams p = params;
  p.gamma = 0.0;
  std::vector<EquilibriumReport> out;
  out.push_back(classify_equilibrium(State2{{0.0, 0.0}}, p, EquilibriumLabel::E1));
  out.push_back(classify_equilibrium(State2{{p.A, 0.0}}, p, EquilibriumLabel::E2));
  if (!(p.beta0 > 0.0)) return out;

  const double mu = p.mu_eff();
  const double B = p.a * p.beta0 + p.A + mu / p.beta0;
  const double C = mu / p.beta0 * (p.a * p.beta0 + p.A) + p.r;
  const double delta = discriminant(p);
  if (std::abs(delta) <= double_root_tolerance(p)) {
    const double s = 0.5 * B;
    out.push_back(classify_equilibrium(State2{{s, (p.A - s) / p.beta0}}, p, EquilibriumLabel::EStar));
  } else if (delta > 0.0) {
    const double s4 = 0.5 * (B + std::sqrt(delta));
    const double s3 = C / s4;  // Vieta; avoids cancellation in (B - sqrt(delta)) / 2
    out.push_back(classify_equilibrium(State2{{s3, (p.A - s3) / p.beta0}}, p, EquilibriumLabel::E3));
    out.push_back(classify_equilibrium(State2{{s4, (p.A - s4) / p.beta0}}, p, EquilibriumLabel::E4));
  }
  return out;
}

/// Endemic equilibrium E3, when two endemic equilibria exist.
inline std::optional<State2> endemic_e3(const ModelParams& p) {
  if (!(p.beta0 > 0.0)) return std::nullopt;
  const double delta = discriminant(p);
  if (!(delta > double_root_tolerance(p))) return std::nullopt;
  const double B = p.a * p.beta0 + p.A + p.mu_eff() / p.beta0;
  const double C = p.mu_eff() / p.beta0 * (p.a * p.beta0 + p.A) + p.r;
  const double s3 = C / (0.5 * (B + std::sqrt(delta)));
  return State2{{s3, (p.A - s3) / p.beta0}};
}

/// tr J(E3) = [(beta0 - 1) S3 I3 - mu I3 - a S3] / (a + I3) and
/// det J(E3) = I3 S3 (beta0^2 - r / (a + I3)^2).
inline TraceDet trace_det_e3(const ModelParams& p) {
  const auto e3 = endemic_e3(p);
  if (!e3) throw NoEndemicEquilibria("trace_det_e3: discriminant is not positive");
  const double S = (*e3)[kS], I = (*e3)[kI];
  const double q = p.a + I;
  TraceDet td;
  td.trace = ((p.beta0 - 1.0) * S * I - p.mu_eff() * I - p.a * S) / q;
  td.det = I * S * (p.beta0 * p.beta0 - p.r / (q * q));
  return td;
}

/// Analytic gradient of phi0 over (a, beta0, mu, r); needs sqrt(r) > a beta0.
inline Phi0Gradient sensitivity_phi0(const ModelParams& p) {
  const double sr = std::sqrt(p.r);
  const double a = p.a, b = p.beta0, mu = p.mu_eff(), r = p.r;
  if (!(sr - a * b > 0.0)) throw InvalidParams("sensitivity_phi0 needs a beta0 < sqrt(r)");
  const double den = a * mu + r;
  const double den2 = den * den;
  Phi0Gradient g;
  g.d_a = (sr - a * b) * (a * b * mu + sr * mu + 2.0 * b * r) / den2;
  g.d_beta0 = 2.0 * a * (sr - a * b) / den;
  g.d_mu = (a * b - sr) * (a * b - sr) * a / den2;
  g.d_r = a * (a * b - sr) * (sr * b + mu) / (den2 * sr);
  return g;
}

inline HopfCheck hopf_condition(const ModelParams& p) {
  HopfCheck h;
  if (p.beta0 < 1.0) return h;
  const double rad = p.beta0 * (p.beta0 - 1.0) * p.a * p.A;
  const double bound = p.A * (p.beta0 - 1.0) + p.a * p.beta0 - 2.0 * std::sqrt(rad);
  h.bound = bound;
  h.margin = bound - p.mu_eff();
  h.holds = p.beta0 > 1.0 && p.mu_eff() <= bound;
  return h;
}

/// Regime from R0 against phi0, H and 1.
inline Regime detect_regime(const ModelParams& p) {
  Regime g;
  g.thresholds = thresholds(p);
  const Thresholds& t = g.thresholds;
  const double r0 = t.r0;
  g.degenerate = std::abs(r0 - t.phi0) < kTieTol || std::abs(r0 - 1.0) < kTieTol ||
                 (t.hopf_h && std::abs(r0 - *t.hopf_h) < kTieTol);
  if (r0 >= 1.0)
    g.tag = RegimeTag::SupercriticalR0;
  else if (r0 < t.phi0)
    g.tag = RegimeTag::DiseaseFreeGlobal;
  else if (t.hopf_h && r0 > *t.hopf_h)
    g.tag = RegimeTag::LimitCycle;
  else
    g.tag = RegimeTag::BistableSink;
  if (const auto e3 = endemic_e3(p)) g.e3_stability = classify_equilibrium(*e3, p, EquilibriumLabel::E3).stability;
  return g;
}

/// a beta0 < sqrt(r), phi0 < R0 < 1, beta0 < 1.
inline bool in_u1(const ModelParams& p) {
  if (!(p.a > 0.0 && p.beta0 > 0.0)) return false;
  const Thresholds t = thresholds(p);
  return p.a * p.beta0 < std::sqrt(p.r) && t.phi0 < t.r0 && t.r0 < 1.0 && p.beta0 < 1.0;
}

/// beta0 > 1, mu_eff below the Hopf bound, phi0 < R0 < 1.
inline bool in_u2(const ModelParams& p) {
  if (!(p.a > 0.0 && p.beta0 > 0.0)) return false;
  const Thresholds t = thresholds(p);
  return hopf_condition(p).holds && t.phi0 < t.r0 && t.r0 < 1.0;
}

/// Second branch of the Delta > 0 dichotomy, a beta0 + A - mu/beta0 < -2 sqrt(r).
/// Never holds once S4 < A; kept as a checkable predicate.
inline bool spurious_delta_branch(const ModelParams& p) {
  return p.a * p.beta0 + p.A - p.mu_eff() / p.beta0 < -2.0 * std::sqrt(p.r);
}

}  // namespace ssir
