#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace ssir;
using fx::reference;

namespace {

constexpr double kPi = std::numbers::pi;

State2 central_column(const State2& x, double t, const ModelParams& p, std::size_t k, double h) {
  State2 xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  return (1.0 / (2.0 * h)) * (field_reduced(xp, t, p) - field_reduced(xm, t, p));
}

}  // namespace

TEST(Forcing, DefaultCosine) {
  const Forcing f;
  EXPECT_DOUBLE_EQ(f(0.0), 1.5);
  EXPECT_NEAR(f(kPi), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(f.period(), 2.0 * kPi);
  EXPECT_DOUBLE_EQ(f.min_value(), 0.5);
  EXPECT_DOUBLE_EQ(f.max_value(), 1.5);
  EXPECT_TRUE(f.is_cosine());
  EXPECT_NEAR(f.derivative(0.5 * kPi), -0.5, 1e-15);
}

TEST(Forcing, RejectsZeroAmplitudeAndNonPositiveMinimum) {
  EXPECT_THROW(Forcing::cosine(1.0, 0.0), InvalidParams);
  EXPECT_THROW(Forcing::cosine(0.5, 0.5), InvalidParams);
}

TEST(Forcing, TableInterpolatesSamplesAndIsPeriodic) {
  std::vector<double> s;
  const std::size_t n = 16;
  for (std::size_t k = 0; k < n; ++k) s.push_back(1.0 + 0.5 * std::cos(2.0 * kPi * k / n));
  const Forcing f = Forcing::table(2.0 * kPi, s);
  EXPECT_FALSE(f.is_cosine());
  for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(f(2.0 * kPi * k / n), s[k], 1e-12);
  // A band-limited table reproduces the cosine between samples as well.
  for (double x : {0.1, 1.3, 2.9, 5.5}) {
    EXPECT_NEAR(f(x), 1.0 + 0.5 * std::cos(x), 1e-12);
    EXPECT_NEAR(f(x + 4.0 * kPi), f(x), 1e-12);
    EXPECT_NEAR(f.derivative(x), -0.5 * std::sin(x), 1e-12);
  }
}

TEST(Forcing, TableValidation) {
  EXPECT_THROW(Forcing::table(2.0 * kPi, {1.0, 1.2, 0.8}), InvalidParams);
  EXPECT_THROW(Forcing::table(0.0, {1.0, 1.2, 1.0, 0.8}), InvalidParams);
  EXPECT_THROW(Forcing::table(1.0, {1.0, -0.2, 1.0, 0.8}), InvalidParams);
  EXPECT_THROW(Forcing::table(1.0, {1.0, std::nan(""), 1.0, 0.8}), InvalidParams);
  EXPECT_THROW(Forcing::table(1.0, {1.0, 1.0, 1.0, 1.0}), InvalidParams);
  EXPECT_NO_THROW(Forcing::table(1.0, {1.0, 1.2, 1.0, 0.8}));
}

TEST(Beta, Examples) {
  ModelParams p = reference();
  EXPECT_DOUBLE_EQ(beta_gamma(p, 123.4), 2.0);
  p.gamma = 0.1;
  p.omega = 1.0;
  EXPECT_NEAR(beta_gamma(p, 0.0), 2.3, 1e-15);
  p.omega = 2.0;
  EXPECT_NEAR(beta_gamma(p, kPi), 2.3, 1e-14);
}

TEST(FieldFull, Equilibria) {
  const ModelParams p = reference();
  EXPECT_EQ(norm_inf(field_full(State3{{p.A, 0.0, 0.0}}, 0.0, p)), 0.0);
  EXPECT_EQ(norm_inf(field_full(State3{{0.0, 0.0, 0.0}}, 0.0, p)), 0.0);
}

TEST(FieldFull, HandArithmetic) {
  const ModelParams p = reference();
  const State3 f = field_full(State3{{0.5, 0.1, 0.0}}, 0.0, p);
  const double cure = 0.025 / 0.24;
  EXPECT_NEAR(f[kS], 0.13, 1e-15);
  EXPECT_NEAR(f[kI], 0.1 - 0.02 - cure, 1e-15);
  EXPECT_NEAR(f[kI], -0.0241667, 1e-7);
  EXPECT_NEAR(f[kR], cure, 1e-15);
}

TEST(FieldFull, DiseaseDeathOnlyOnInfected) {
  ModelParams p = reference();
  p.mu = 0.15;
  p.d = 0.05;
  const State3 x{{0.5, 0.1, 0.2}};
  const State3 f = field_full(x, 0.0, p);
  const double cure = 0.025 / 0.24;
  EXPECT_NEAR(f[kI], 0.1 - 0.2 * 0.1 - cure, 1e-15);
  EXPECT_NEAR(f[kR], cure - 0.15 * 0.2, 1e-15);
  // The reduced field sees mu + d.
  const State2 g = field_reduced(State2{{0.5, 0.1}}, 0.0, p);
  EXPECT_NEAR(g[kI], f[kI], 1e-15);
}

TEST(FieldReduced, Examples) {
  const ModelParams p = reference();
  EXPECT_EQ(norm_inf(field_reduced(State2{{p.A, 0.0}}, 0.0, p)), 0.0);
  const State2 f = field_reduced(State2{{0.5, 0.1}}, 0.0, p);
  EXPECT_NEAR(f[kS], 0.13, 1e-15);
  EXPECT_NEAR(f[kI], -0.0241667, 1e-7);
  const State2 e3{{fx::oracle::S3, fx::oracle::I3}};
  EXPECT_LT(norm_inf(field_reduced(e3, 0.0, p)), 1e-12);
}

TEST(FieldExtended, Examples) {
  ModelParams p = reference();
  p.omega = 3.0;
  const StateExt fe = field_extended(StateExt{{0.5, 0.1, 1.7}}, p);
  const State2 fr = field_reduced(State2{{0.5, 0.1}}, 0.0, p);
  EXPECT_EQ(fe[kS], fr[kS]);
  EXPECT_EQ(fe[kI], fr[kI]);
  EXPECT_EQ(fe[kTheta], 3.0);

  p.gamma = 0.2;
  for (double th : {0.0, 1.0, 4.0}) {
    const StateExt f = field_extended(StateExt{{p.A, 0.0, th}}, p);
    EXPECT_EQ(f[kS], 0.0);
    EXPECT_EQ(f[kI], 0.0);
    EXPECT_EQ(f[kTheta], p.omega);
  }

  ModelParams q = reference();
  q.gamma = 0.05;
  q.omega = 5.0;
  const StateExt f = field_extended(StateExt{{0.5, 0.1, 0.0}}, q);
  const double beta = 2.0 * (1.0 + 0.05 * 1.5);
  EXPECT_NEAR(f[kS], 0.5 * 0.46 - beta * 0.1 * 0.5, 1e-15);
  EXPECT_NEAR(f[kI], beta * 0.05 - 0.02 - 0.025 / 0.24, 1e-15);
  EXPECT_EQ(f[kTheta], 5.0);
}

TEST(FieldExtended, PhaseMatchesTime) {
  ModelParams p = reference();
  p.gamma = 0.12;
  p.omega = 2.5;
  for (double t : {0.0, 0.3, 7.1, 100.0}) {
    const StateExt fe = field_extended(StateExt{{0.4, 0.2, p.omega * t}}, p);
    const State2 fr = field_reduced(State2{{0.4, 0.2}}, t, p);
    EXPECT_NEAR(fe[kS], fr[kS], 1e-14);
    EXPECT_NEAR(fe[kI], fr[kI], 1e-14);
  }
}

TEST(Jacobian, DiseaseFreeDisplays) {
  const ModelParams p = reference();
  const Mat2 j1 = jacobian_reduced(State2{{0.0, 0.0}}, 0.0, p);
  EXPECT_DOUBLE_EQ(j1.a11, p.A);
  EXPECT_DOUBLE_EQ(j1.a12, 0.0);
  EXPECT_DOUBLE_EQ(j1.a21, 0.0);
  EXPECT_DOUBLE_EQ(j1.a22, -p.mu - p.r / p.a);
  const Mat2 j2 = jacobian_reduced(State2{{p.A, 0.0}}, 0.0, p);
  EXPECT_DOUBLE_EQ(j2.a11, -p.A);
  EXPECT_DOUBLE_EQ(j2.a12, -p.beta0 * p.A);
  EXPECT_DOUBLE_EQ(j2.a21, 0.0);
  EXPECT_NEAR(j2.a22, p.beta0 * p.A - p.mu - p.r / p.a, 1e-15);
}

TEST(Jacobian, CentralDifferencesAtHandPoint) {
  const ModelParams p = reference();
  const State2 x{{0.5, 0.1}};
  const Mat2 J = jacobian_reduced(x, 0.0, p);
  const State2 c0 = central_column(x, 0.0, p, kS, 1e-6);
  const State2 c1 = central_column(x, 0.0, p, kI, 1e-6);
  const double an[4] = {J.a11, J.a21, J.a12, J.a22};
  const double fd[4] = {c0[kS], c0[kI], c1[kS], c1[kI]};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(fd[k], an[k], 1e-6 * std::max(1.0, std::abs(an[k])));
}

TEST(Jacobian, CentralDifferencesRandomStates) {
  std::mt19937_64 g(11);
  for (int n = 0; n < 100; ++n) {
    ModelParams p = fx::draw_any(g);
    p.gamma = fx::uniform(g, 0.0, 0.5);
    p.omega = fx::uniform(g, 0.1, 10.0);
    const State2 x{{fx::uniform(g, 0.0, p.A), fx::uniform(g, 0.0, 2.0)}};
    const double t = fx::uniform(g, 0.0, 50.0);
    const Mat2 J = jacobian_reduced(x, t, p);
    const State2 c0 = central_column(x, t, p, kS, 1e-6);
    const State2 c1 = central_column(x, t, p, kI, 1e-6);
    const double an[4] = {J.a11, J.a21, J.a12, J.a22};
    const double fd[4] = {c0[kS], c0[kI], c1[kS], c1[kI]};
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(fd[k], an[k], 1e-5 * std::max(1.0, std::abs(an[k]))) << n;
  }
}

TEST(FieldReduced, PeriodicInTime) {
  std::mt19937_64 g(3);
  for (int n = 0; n < 50; ++n) {
    ModelParams p = fx::draw_any(g);
    p.gamma = fx::uniform(g, 0.0, 0.6);
    p.omega = fx::uniform(g, 0.1, 40.0);
    const State2 x{{fx::uniform(g, 0.0, p.A), fx::uniform(g, 0.0, 1.0)}};
    const double t = fx::uniform(g, 0.0, 10.0);
    const State2 f0 = field_reduced(x, t, p);
    for (int k : {1, 2, 7}) {
      const State2 fk = field_reduced(x, t + 2.0 * kPi * k / p.omega, p);
      EXPECT_NEAR(fk[kS], f0[kS], 1e-12 * (1.0 + std::abs(f0[kS])));
      EXPECT_NEAR(fk[kI], f0[kI], 1e-12 * (1.0 + std::abs(f0[kI])));
    }
  }
}

TEST(FieldReduced, AutonomousWhenUnforced) {
  const ModelParams p = reference();
  const State2 x{{0.3, 0.4}};
  const State2 f0 = field_reduced(x, 0.0, p);
  for (double t : {1.0, 17.0, 1e6}) EXPECT_EQ(norm_inf(field_reduced(x, t, p) - f0), 0.0);
}

TEST(FieldReduced, AxisInvariance) {
  std::mt19937_64 g(5);
  for (int n = 0; n < 100; ++n) {
    ModelParams p = fx::draw_any(g);
    p.gamma = fx::uniform(g, 0.0, 0.5);
    const double t = fx::uniform(g, 0.0, 30.0);
    EXPECT_EQ(field_reduced(State2{{fx::uniform(g, 0.0, 3.0), 0.0}}, t, p)[kI], 0.0);
    EXPECT_EQ(field_reduced(State2{{0.0, fx::uniform(g, 0.0, 3.0)}}, t, p)[kS], 0.0);
  }
}

TEST(ModelParams, Validation) {
  EXPECT_NO_THROW(reference().validate());
  auto bad = [](const char* field, double v) { return reference().with(field, v); };
  EXPECT_THROW(bad("A", -1.0).validate(), InvalidParams);
  EXPECT_THROW(bad("a", 0.0).validate(), InvalidParams);
  EXPECT_THROW(bad("omega", 0.0).validate(), InvalidParams);
  EXPECT_THROW(bad("gamma", 1.0).validate(), InvalidParams);
  EXPECT_THROW(bad("mu", std::nan("")).validate(), InvalidParams);
  EXPECT_THROW(bad("r", INFINITY).validate(), InvalidParams);
  EXPECT_THROW(reference().with("kappa", 1.0), InvalidArgument);
  EXPECT_DOUBLE_EQ(reference().with("beta0", 0.5).get("beta0"), 0.5);
  EXPECT_TRUE(ModelParams::is_field("omega"));
  EXPECT_FALSE(ModelParams::is_field("forcing"));
}

TEST(ModelParams, ForcingPeriodAndMuEff) {
  ModelParams p = reference();
  p.omega = 4.0;
  p.d = 0.05;
  EXPECT_DOUBLE_EQ(p.forcing_period(), kPi / 2.0);
  EXPECT_DOUBLE_EQ(p.mu_eff(), 0.25);
}

TEST(PopulationBound, Formula) {
  EXPECT_DOUBLE_EQ(population_bound(0.96, 0.2), 0.96 * 1.16 / 0.2);
  EXPECT_TRUE(std::isinf(population_bound(1.0, 0.0)));
}

TEST(Mat2, Eigenvalues) {
  const Mat2 m{2.0, 1.0, 1.0, 2.0};
  const auto ev = m.eigenvalues();
  EXPECT_NEAR(ev[0].real(), 1.0, 1e-15);
  EXPECT_NEAR(ev[1].real(), 3.0, 1e-15);
  const auto rot = Mat2{0.0, -1.0, 1.0, 0.0}.eigenvalues();
  EXPECT_NEAR(std::abs(rot[0].imag()), 1.0, 1e-15);
  EXPECT_NEAR(rot[0].real(), 0.0, 1e-15);
}
