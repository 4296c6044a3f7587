#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nps/errors.hpp"
#include "nps/mesh.hpp"
#include "nps/steady.hpp"
#include "nps/transport.hpp"

using namespace nps;
using std::numbers::pi;

namespace {

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

BoundaryData constant_bd(const Grid& g, double g1, double g2, double w) {
  return {BoundaryTrace::constant(g, g1), BoundaryTrace::constant(g, g2), BoundaryTrace::constant(g, w)};
}

// Equilibrium data: log gamma1 + W = -log Z1, log gamma2 - W = -log Z2.
BoundaryData equilibrium_bd(const Grid& g, BoltzmannParams Z, const std::function<double(double, double)>& w) {
  BoundaryData bd;
  bd.W = BoundaryTrace::from_function(g, w);
  bd.gamma1 = bd.W.map([&](double v) { return std::exp(-v) / Z.Z1; });
  bd.gamma2 = bd.W.map([&](double v) { return std::exp(v) / Z.Z2; });
  return bd;
}

VectorField swirl(const Grid& g, double U) {
  return VectorField::from_stream_function(g, [&](double x, double y) {
    const double a = std::sin(pi * x / g.Lx), b = std::sin(pi * y / g.Ly);
    return U * a * a * b * b;
  });
}

}  // namespace

TEST(Bernoulli, ValuesAndBranches) {
  EXPECT_EQ(bernoulli(0.0), 1.0);
  for (double s : {-30.0, -2.0, -1e-3, 1e-3, 0.5, 4.0, 40.0})
    EXPECT_NEAR(bernoulli(s), s / std::expm1(s), 1e-14 * (1.0 + std::abs(s)));
  // Continuity across the series switch.
  for (double s : {1e-5, -1e-5}) {
    EXPECT_NEAR(bernoulli(s * (1 - 1e-9)), bernoulli(s * (1 + 1e-9)), 1e-13);
  }
  // B(-s) - B(s) = s
  for (double s : {-7.0, -1e-6, 0.0, 3e-6, 0.2, 11.0}) EXPECT_NEAR(bernoulli(-s) - bernoulli(s), s, 1e-13);
}

TEST(Bernoulli, DerivativeMatchesDifferenceQuotient) {
  EXPECT_NEAR(bernoulli_derivative(0.0), -0.5, 1e-15);
  for (double s : {-5.0, -0.3, -2e-3, -5e-4, 5e-4, 2e-3, 0.7, 6.0}) {
    const double h = 1e-6 * std::max(1.0, std::abs(s));
    const double fd = (bernoulli(s + h) - bernoulli(s - h)) / (2 * h);
    EXPECT_NEAR(bernoulli_derivative(s), fd, 1e-8) << s;
  }
}

TEST(SgFlux, SpecExamples) {
  EXPECT_DOUBLE_EQ(sg_flux(3.0, 1.0, 0.0, 2.0, 0.5), 2.0 * 2.0 / 0.5);
  for (double dV : {-2.0, -0.1, 1e-7, 0.4, 3.0}) EXPECT_NEAR(sg_flux(1.7, 1.7, dV, 0.8, 0.25), 0.8 * 1.7 * (-dV) / 0.25, 1e-12);
  for (auto [VL, VR] : {std::pair{0.3, -0.5}, std::pair{2.0, 2.1}, std::pair{-1.0, 1.0}})
    EXPECT_NEAR(sg_flux(std::exp(-VL), std::exp(-VR), VR - VL, 1.3, 0.1), 0.0, 1e-14);
}

TEST(SgFlux, MonotoneInConcentrations) {
  for (double dV : {-20.0, -1.0, 0.0, 2.0, 25.0}) {
    EXPECT_GT(sg_flux(1.1, 1.0, dV, 1.0, 1.0), sg_flux(1.0, 1.0, dV, 1.0, 1.0));
    EXPECT_LT(sg_flux(1.0, 1.1, dV, 1.0, 1.0), sg_flux(1.0, 1.0, dV, 1.0, 1.0));
  }
}

TEST(NpStep, ConstantStateIsSteady) {
  Grid g(12, 10);
  Params p;
  const BoundaryData bd = constant_bd(g, 1.3, 1.3, 0.7);
  State s = make_state(ScalarField(g, 1.3), ScalarField(g, 1.3), VectorField(g), bd, p);
  auto [c1, c2] = np_step(s, 0.1, bd, p);
  EXPECT_LE(max_abs_diff(c1, s.c1), 1e-13);
  EXPECT_LE(max_abs_diff(c2, s.c2), 1e-13);
}

TEST(NpStep, BoltzmannStateIsSteady) {
  Grid g(24, 20);
  Params p;
  p.eps = 0.05;
  const BoltzmannParams Z{0.8, 1.4};
  const BoundaryData bd = equilibrium_bd(g, Z, [](double x, double y) { return 0.6 * x - 0.4 * y * y; });
  const SteadyState st = boltzmann_state(g, Z, bd.W, p.eps);
  State s = make_state(st.c1, st.c2, VectorField(g), bd, p);
  auto [c1, c2] = np_step(s, 0.05, bd, p);
  EXPECT_LE(max_abs_diff(c1, s.c1), 1e-8);
  EXPECT_LE(max_abs_diff(c2, s.c2), 1e-8);
}

TEST(NpStep, DiffusionRelaxesToLinearProfile) {
  Grid g(20, 12, 2.0, 1.0);
  Params p;
  BoundaryData bd;
  bd.gamma1 = BoundaryTrace::from_function(g, [&](double x, double) { return 1.0 + x / g.Lx; });
  bd.gamma2 = bd.gamma1;
  bd.W = BoundaryTrace::zero(g);
  State s = make_state(ScalarField(g, 1.0), ScalarField(g, 1.0), VectorField(g), bd, p);
  for (int n = 0; n < 30; ++n) {
    auto [c1, c2] = np_step(s, 10.0, bd, p);
    s = make_state(c1, c2, s.u, bd, p, s.t + 10.0);
  }
  const ScalarField exact = ScalarField::from_function(g, [&](double x, double) { return 1.0 + x / g.Lx; });
  EXPECT_LE(max_abs_diff(s.c1, exact), 1e-8);
  EXPECT_LE(s.phi.max() - s.phi.min(), 1e-12);
}

TEST(NpStep, MaxPrincipleAndPositivity) {
  Grid g(20, 20);
  Params p;
  p.eps = 0.02;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(0.0, 3.0);
  BoundaryData bd;
  bd.gamma1 = BoundaryTrace::from_function(g, [](double x, double y) { return 1.0 + 0.5 * x * y; });
  bd.gamma2 = BoundaryTrace::from_function(g, [](double x, double) { return 1.2 - 0.1 * x; });
  bd.W = BoundaryTrace::from_function(g, [](double x, double y) { return 2.0 * x - y; });
  ScalarField c1(g), c2(g);
  for (std::size_t k = 0; k < g.cells(); ++k) {
    c1[k] = d(rng);
    c2[k] = d(rng);
  }
  State s = make_state(c1, c2, swirl(g, 0.4), bd, p);
  for (double dt : {1e-4, 1e-2, 1.0, 100.0}) {
    auto [n1, n2] = np_step(s, dt, bd, p);
    for (int sp = 0; sp < 2; ++sp) {
      const ScalarField& old = s.c(sp);
      const ScalarField& nw = sp == 0 ? n1 : n2;
      const double lo = std::min(old.min(), bd.gamma(sp).min()), hi = std::max(old.max(), bd.gamma(sp).max());
      EXPECT_GE(nw.min(), lo - 1e-10);
      EXPECT_LE(nw.max(), hi + 1e-10);
      EXPECT_GE(nw.min(), 0.0);
    }
  }
}

TEST(ElectrochemicalPotentials, Examples) {
  Grid g(10, 10);
  Params p;
  const BoundaryData bd0 = constant_bd(g, 1.0, 1.0, 0.0);
  State s = make_state(ScalarField(g, 1.0), ScalarField(g, 1.0), VectorField(g), bd0, p);
  auto [m1, m2] = electrochemical_potentials(s);
  EXPECT_LE(std::max(std::abs(m1.max()), std::abs(m1.min())), 1e-14);
  EXPECT_LE(std::max(std::abs(m2.max()), std::abs(m2.min())), 1e-14);

  // c1 = e^{-Phi}, with arbitrary Phi stored in the state.
  s.phi = ScalarField::from_function(g, [](double x, double y) { return std::sin(3 * x) + y; });
  s.c1 = ScalarField::from_function(g, [](double x, double y) { return std::exp(-(std::sin(3 * x) + y)); });
  auto [n1, n2] = electrochemical_potentials(s);
  EXPECT_LE(std::max(std::abs(n1.max()), std::abs(n1.min())), 1e-14);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(0.01, 5.0);
  for (std::size_t k = 0; k < g.cells(); ++k) {
    s.c1[k] = d(rng);
    s.phi[k] = d(rng) - 2.5;
  }
  auto [r1, r2] = electrochemical_potentials(s);
  for (std::size_t k = 0; k < g.cells(); ++k) EXPECT_NEAR(std::exp(r1[k] - s.phi[k]), s.c1[k], 1e-12 * s.c1[k]);

  s.c2[5] = 0.0;
  try {
    electrochemical_potentials(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonpositiveConcentration);
  }
}

class NpSystemTest : public ::testing::Test {
 protected:
  Grid g{10, 9, 1.0, 0.8};
  Params p;
  BoundaryData bd;
  State s;
  void SetUp() override {
    p.eps = 0.1;
    p.D1 = 1.3;
    p.D2 = 0.7;
    bd.gamma1 = BoundaryTrace::from_function(g, [](double x, double y) { return 1.0 + 0.3 * x + 0.1 * y; });
    bd.gamma2 = BoundaryTrace::from_function(g, [](double x, double) { return 0.9 + 0.2 * x * x; });
    bd.W = BoundaryTrace::from_function(g, [](double x, double y) { return 0.5 * x - y; });
    ScalarField c1 = ScalarField::from_function(g, [](double x, double y) { return 1.2 + 0.4 * std::sin(5 * x * y); });
    ScalarField c2 = ScalarField::from_function(g, [](double x, double y) { return 0.8 + 0.3 * std::cos(4 * x + y); });
    s = make_state(c1, c2, swirl(g, 0.7), bd, p);
  }
};

TEST_F(NpSystemTest, JacobianMatchesFiniteDifferences) {
  NpPoissonSystem sys(g, p, bd);
  const Vec c_old = NpPoissonSystem::pack_concentrations(s.c1, s.c2);
  Vec y = NpPoissonSystem::pack(s.c1, s.c2, s.phi);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-0.1, 0.1);
  for (int k = 0; k < y.size(); ++k) y[k] += d(rng);
  Vec r0, r1, r2;
  sys.assemble(y, c_old, s.u, 0.03, nullptr, r0, true);
  const SpMat J = sys.jacobian();
  Vec dir(y.size());
  for (int k = 0; k < y.size(); ++k) dir[k] = d(rng);
  const double h = 1e-6;
  sys.assemble(y + h * dir, c_old, s.u, 0.03, nullptr, r1, false);
  sys.assemble(y - h * dir, c_old, s.u, 0.03, nullptr, r2, false);
  const Vec fd = (r1 - r2) / (2 * h);
  const Vec jd = J * dir;
  EXPECT_LE((fd - jd).lpNorm<Eigen::Infinity>(), 1e-6 * (1.0 + jd.lpNorm<Eigen::Infinity>()));
}

TEST_F(NpSystemTest, VelocityDerivativeMatchesFiniteDifferences) {
  NpPoissonSystem sys(g, p, bd);
  const Vec c_old = NpPoissonSystem::pack_concentrations(s.c1, s.c2);
  const Vec y = NpPoissonSystem::pack(s.c1, s.c2, s.phi);
  const VectorField du = VectorField::from_stream_function(g, [](double x, double y) {
    return std::sin(pi * x) * std::sin(pi * x) * std::sin(1.25 * pi * y) * std::sin(1.25 * pi * y) * (1 + x);
  });
  const double h = 1e-6;
  Vec r1, r2;
  sys.assemble(y, c_old, s.u + h * du, 0.03, nullptr, r1, false);
  sys.assemble(y, c_old, s.u - h * du, 0.03, nullptr, r2, false);
  const Vec fd = (r1 - r2) / (2 * h);
  const Vec an = sys.velocity_derivative(y, s.u, du);
  EXPECT_GT(an.lpNorm<Eigen::Infinity>(), 1e-3);
  EXPECT_LE((fd - an).lpNorm<Eigen::Infinity>(), 1e-6 * (1.0 + an.lpNorm<Eigen::Infinity>()));
}

TEST_F(NpSystemTest, NewtonSolvesCoupledSystem) {
  NpPoissonSystem sys(g, p, bd);
  const Vec c_old = NpPoissonSystem::pack_concentrations(s.c1, s.c2);
  Vec y = NpPoissonSystem::pack(s.c1, s.c2, s.phi);
  auto rep = sys.solve(y, c_old, s.u, 0.05, nullptr);
  EXPECT_GE(rep.iterations, 1);
  Vec r;
  sys.assemble(y, c_old, s.u, 0.05, nullptr, r, false);
  EXPECT_LE(r.lpNorm<Eigen::Infinity>(), 1e-8);
  ScalarField c1(g), c2(g), phi(g);
  sys.unpack(y, c1, c2, phi);
  EXPECT_GT(c1.min(), 0.0);
  EXPECT_GT(c2.min(), 0.0);
}
