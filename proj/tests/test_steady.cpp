#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "nps/errors.hpp"
#include "nps/steady.hpp"
#include "nps/transport.hpp"

using namespace nps;

namespace {

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double max_abs(const ScalarField& a) { return std::max(std::abs(a.min()), std::abs(a.max())); }

// -eps phi'' = e^{-phi}/Z1 - e^{phi}/Z2 on [0, 1] with phi(0) = a, phi(1) = b, by RK4
// shooting with bisection on phi'(0). Returns phi at the cell centres of an n-cell partition.
std::vector<double> pb_shooting(double eps, double Z1, double Z2, double a, double b, int n) {
  const int sub = 400;
  const int steps = 2 * n * sub;
  const double h = 1.0 / steps;
  auto rhs = [&](double p) { return (std::exp(p) / Z2 - std::exp(-p) / Z1) / eps; };
  auto shoot = [&](double slope, std::vector<double>* out) {
    double p = a, q = slope;
    for (int k = 0; k < steps; ++k) {
      if (out && k % (2 * sub) == sub) out->push_back(p);
      const double k1p = q, k1q = rhs(p);
      const double k2p = q + 0.5 * h * k1q, k2q = rhs(p + 0.5 * h * k1p);
      const double k3p = q + 0.5 * h * k2q, k3q = rhs(p + 0.5 * h * k2p);
      const double k4p = q + h * k3q, k4q = rhs(p + h * k3p);
      p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      q += h / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
      if (std::abs(p) > 50) break;
    }
    return p;
  };
  double lo = -20, hi = 20;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (shoot(mid, nullptr) > b ? hi : lo) = mid;
  }
  std::vector<double> out;
  shoot(0.5 * (lo + hi), &out);
  return out;
}

}  // namespace

TEST(PoissonBoltzmann, NeutralState) {
  Grid g(12, 12);
  const double cbar = 1.7;
  const SteadyState s = boltzmann_state(g, {1 / cbar, 1 / cbar}, BoundaryTrace::zero(g), 0.1);
  EXPECT_LE(max_abs(s.phi), 1e-12);
  EXPECT_LE(max_abs_diff(s.c1, ScalarField(g, cbar)), 1e-12);
  EXPECT_LE(max_abs_diff(s.c2, ScalarField(g, cbar)), 1e-12);
}

TEST(PoissonBoltzmann, ConstantRoot) {
  Grid g(12, 10);
  const BoltzmannParams Z{0.4, 2.5};
  const double root = 0.5 * std::log(Z.Z2 / Z.Z1);
  auto [phi, rep] = solve_poisson_boltzmann(g, Z, BoundaryTrace::constant(g, root), 0.03);
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(max_abs_diff(phi, ScalarField(g, root)), 1e-10);
}

TEST(PoissonBoltzmann, SlabMatchesShootingOracle) {
  const double eps = 0.1, Z1 = 1.0, Z2 = 1.0;
  auto err = [&](int n) {
    Grid g(n, 8);
    const std::vector<double> ref = pb_shooting(eps, Z1, Z2, 0.5, -0.5, n);
    BoundaryTrace W = BoundaryTrace::zero(g);
    for (int j = 0; j < g.ny; ++j) {
      W.left[j] = 0.5;
      W.right[j] = -0.5;
    }
    for (int i = 0; i < g.nx; ++i) W.bottom[i] = W.top[i] = ref[i];
    auto [phi, rep] = solve_poisson_boltzmann(g, {Z1, Z2}, W, eps);
    EXPECT_TRUE(rep.converged);
    double e = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) e = std::max(e, std::abs(phi(i, j) - ref[i]));
    return e;
  };
  const double e1 = err(16), e2 = err(32), e3 = err(64);
  EXPECT_LT(e3, 1e-3);
  EXPECT_GT(std::log2(e1 / e2), 1.7);
  EXPECT_GT(std::log2(e2 / e3), 1.7);
}

TEST(PoissonBoltzmann, EnergyDecreasesMonotonically) {
  Grid g(24, 24);
  const BoundaryTrace W = BoundaryTrace::from_function(g, [](double x, double y) { return 4.0 * std::sin(6 * x) + 3 * y; });
  std::vector<double> energies;
  auto [phi, rep] = solve_poisson_boltzmann(g, {0.5, 2.0}, W, 0.01, &energies);
  EXPECT_TRUE(rep.converged);
  ASSERT_GE(energies.size(), 3u);
  for (std::size_t k = 1; k < energies.size(); ++k) EXPECT_LE(energies[k], energies[k - 1] + 1e-12 * std::abs(energies[k - 1]));
}

TEST(EquilibriumConstants, ReadOffBoundary) {
  Grid g(10, 10);
  BoundaryData bd;
  bd.W = BoundaryTrace::from_function(g, [](double x, double y) { return x - y; });
  bd.gamma1 = bd.W.map([](double w) { return 2.0 * std::exp(-w); });
  bd.gamma2 = bd.W.map([](double w) { return 0.5 * std::exp(w); });
  const auto Z = equilibrium_constants(bd);
  ASSERT_TRUE(Z.has_value());
  EXPECT_NEAR(Z->Z1, 0.5, 1e-14);
  EXPECT_NEAR(Z->Z2, 2.0, 1e-14);
  bd.gamma1.top[3] *= 1.01;
  EXPECT_FALSE(equilibrium_constants(bd).has_value());
}

TEST(Gummel, NeutralConstantData) {
  Grid g(12, 12);
  Params p;
  BoundaryData bd{BoundaryTrace::constant(g, 1.4), BoundaryTrace::constant(g, 1.4), BoundaryTrace::zero(g)};
  const SteadyState s = solve_steady_np(g, bd, p);
  EXPECT_LE(max_abs_diff(s.c1, ScalarField(g, 1.4)), 1e-10);
  EXPECT_LE(max_abs_diff(s.c2, ScalarField(g, 1.4)), 1e-10);
  EXPECT_LE(max_abs(s.phi), 1e-10);
  EXPECT_LE(max_abs(s.c1 - s.c2), 1e-10);
}

TEST(Gummel, MatchesBoltzmannStateForEquilibriumData) {
  Grid g(24, 24);
  Params p;
  p.eps = 0.05;
  BoundaryData bd;
  bd.W = BoundaryTrace::from_function(g, [](double x, double y) { return 1.5 * x - y * y; });
  bd.gamma1 = bd.W.map([](double w) { return 0.8 * std::exp(-w); });
  bd.gamma2 = bd.W.map([](double w) { return 1.3 * std::exp(w); });
  const auto Z = equilibrium_constants(bd);
  ASSERT_TRUE(Z);
  const SteadyState b = boltzmann_state(g, *Z, bd.W, p.eps);
  const SteadyState s = solve_steady_np(g, bd, p);
  EXPECT_LE(s.residual_np, 1e-8);
  EXPECT_LE(s.residual_poisson, 1e-8);
  EXPECT_LE(max_abs_diff(s.c1, b.c1), 1e-7);
  EXPECT_LE(max_abs_diff(s.c2, b.c2), 1e-7);
  EXPECT_LE(max_abs_diff(s.phi, b.phi), 1e-7);
}

TEST(Gummel, LinearNeutralProfileHasConstantFlux) {
  Grid g(20, 10);
  Params p;
  p.D1 = 1.5;
  BoundaryData bd;
  bd.gamma1 = BoundaryTrace::from_function(g, [](double x, double) { return 1.0 + x; });
  bd.gamma2 = bd.gamma1;
  bd.W = BoundaryTrace::zero(g);
  const SteadyState s = solve_steady_np(g, bd, p);
  EXPECT_LE(max_abs(s.phi), 1e-9);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const double J = -p.D1 * (s.c1(i, j) - s.c1(i - 1, j)) / g.hx();
      EXPECT_NEAR(J, -p.D1, 1e-8);
    }
}

TEST(Gummel, NonequilibriumSolveKeepsPositivityAndBounds) {
  Grid g(24, 24);
  Params p;
  p.eps = 0.05;
  BoundaryData bd;
  bd.gamma1 = BoundaryTrace::from_function(g, [](double x, double) { return 1.0 + x; });
  bd.gamma2 = BoundaryTrace::from_function(g, [](double, double y) { return 2.0 - y; });
  bd.W = BoundaryTrace::from_function(g, [](double x, double y) { return x * y; });
  SteadyState last;
  GummelOptions opt;
  opt.last_iterate = &last;
  const SteadyState s = solve_steady_np(g, bd, p, opt);
  EXPECT_GT(s.c1.min(), 0.0);
  EXPECT_GT(s.c2.min(), 0.0);
  EXPECT_LE(s.residual_np, 1e-8);
  EXPECT_LE(s.residual_poisson, 1e-8);
  EXPECT_EQ(last.sweeps, s.sweeps);
  const UbStarReport r = verify_ubstar(s, bd, p);
  EXPECT_TRUE(r.all_pass());

  // Warm start from a nearby eps needs fewer sweeps.
  Params q = p;
  q.eps = 0.025;
  const SteadyState cold = solve_steady_np(g, bd, q);
  GummelOptions warm;
  warm.initial = &s;
  const SteadyState hot = solve_steady_np(g, bd, q, warm);
  EXPECT_LT(hot.sweeps, cold.sweeps);
  EXPECT_LE(max_abs_diff(hot.c1, cold.c1), 1e-6);
}

TEST(Gummel, SweepLimit) {
  Grid g(16, 16);
  Params p;
  p.eps = 0.05;
  BoundaryData bd;
  bd.gamma1 = BoundaryTrace::from_function(g, [](double x, double) { return 1.0 + x; });
  bd.gamma2 = BoundaryTrace::constant(g, 1.0);
  bd.W = BoundaryTrace::from_function(g, [](double x, double y) { return x * y; });
  GummelOptions opt;
  opt.max_sweeps = 1;
  try {
    solve_steady_np(g, bd, p, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::NonConvergence || e.kind() == ErrorKind::GummelDivergence);
  }
}

TEST(UbStar, NeutralAndCorrupted) {
  Grid g(12, 12);
  Params p;
  BoundaryData bd{BoundaryTrace::constant(g, 1.0), BoundaryTrace::constant(g, 1.0), BoundaryTrace::zero(g)};
  // Neutral state strictly inside the bounds when the data span an interval.
  bd.gamma1 = BoundaryTrace::from_function(g, [](double x, double) { return 1.0 + x; });
  bd.gamma2 = bd.gamma1;
  SteadyState s = solve_steady_np(g, bd, p);
  UbStarReport r = verify_ubstar(s, bd, p);
  EXPECT_TRUE(r.all_pass());
  EXPECT_GT(r.envelope.worst_margin, 0.0);
  EXPECT_GT(r.scaled.worst_margin, 0.0);

  const std::size_t bad = g.cell(5, 7);
  s.c2[bad] = 2.5;
  r = verify_ubstar(s, bd, p);
  EXPECT_FALSE(r.envelope.pass);
  EXPECT_EQ(r.envelope.worst_cell, bad);
  EXPECT_EQ(r.envelope.worst_species, 1);
  EXPECT_LT(r.envelope.worst_margin, 0.0);
}
