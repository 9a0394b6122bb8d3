#pragma once

#include <cmath>
#include <random>

#include "ssir/ssir.hpp"

namespace fx {

using namespace ssir;

// Parameter set with only the two disease-free equilibria (R0 < phi0).
inline ModelParams disease_free() {
  ModelParams p;
  p.A = 0.96;
  p.a = 0.02;
  p.r = 0.25;
  p.beta0 = 0.8;
  p.mu = 0.2;
  return p;
}

// Reference parameter set. E3 is a weakly stable focus here.
inline ModelParams reference() {
  ModelParams p;
  p.A = 0.96;
  p.a = 0.14;
  p.r = 0.25;
  p.beta0 = 2.0;
  p.mu = 0.2;
  return p;
}

// Same as reference but slightly past the Hopf point, where a small attracting
// cycle surrounds E3.
inline ModelParams past_hopf() {
  ModelParams p = reference();
  p.A = 0.97;
  return p;
}

// 40-digit evaluations of the closed forms at the reference and disease-free sets (mpmath).
namespace oracle {
inline constexpr double delta = 0.2996;
inline constexpr double S3 = 0.39632135633191982658;
inline constexpr double I3 = 0.28183932183404008671;
inline constexpr double S4 = 0.94367864366808017342;
inline constexpr double I4 = 0.0081606781659599132899;
inline constexpr double R0 = 0.96690647482014388489;
inline constexpr double phi0 = 0.82589928057553956835;
inline constexpr double phi1 = 0.38273381294964028777;
inline constexpr double H = 0.96540832655143230007;
inline constexpr double a_star = 0.82;
inline constexpr double hopf_bound = 0.20308148825474236305;
inline constexpr double dphi0_dbeta0 = 0.22158273381294964029;
inline constexpr double trace_e3 = -0.00036485919727064257444;
inline constexpr double det_e3 = 0.28986975319490084075;
inline constexpr double disease_free_R0 = 0.060472440944881889764;
inline constexpr double disease_free_delta = -0.472924;
inline constexpr double disease_free_phi0 = 0.077732283464566929134;
}  // namespace oracle

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

/// Draw from U1: a beta0 < sqrt(r), phi0 < R0 < 1, beta0 < 1. A is chosen
/// inside the R0 window, the rest uniformly.
inline ModelParams draw_u1(std::mt19937_64& g) {
  for (;;) {
    ModelParams p;
    p.a = uniform(g, 0.01, 1.0);
    p.beta0 = uniform(g, 0.05, 0.99);
    p.r = uniform(g, 0.01, 1.0);
    p.mu = uniform(g, 0.01, 0.5);
    if (!(p.a * p.beta0 < std::sqrt(p.r))) continue;
    const double m = p.mu + p.r / p.a;
    const double phi0 = 1.0 - std::pow(p.a * p.beta0 - std::sqrt(p.r), 2) / (p.a * p.mu + p.r);
    const double lo = std::max(phi0, 0.0), hi = 1.0;
    if (hi - lo < 1e-3) continue;
    const double r0 = uniform(g, lo + 1e-4 * (hi - lo), hi - 1e-4 * (hi - lo));
    p.A = r0 * m / p.beta0;
    return p;
  }
}

/// Broad draw over the positive orthant of (A, a, r, beta0, mu).
inline ModelParams draw_any(std::mt19937_64& g) {
  ModelParams p;
  p.A = uniform(g, 0.05, 3.0);
  p.a = uniform(g, 0.01, 2.0);
  p.r = uniform(g, 0.0, 2.0);
  p.beta0 = uniform(g, 0.05, 5.0);
  p.mu = uniform(g, 0.01, 1.0);
  return p;
}

}  // namespace fx
