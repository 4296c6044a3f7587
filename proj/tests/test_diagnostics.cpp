#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "nps/diagnostics.hpp"
#include "nps/elliptic.hpp"
#include "nps/errors.hpp"
#include "nps/kernels.hpp"
#include "nps/mesh.hpp"
#include "nps/operators.hpp"
#include "nps/sim.hpp"

using namespace nps;
using std::numbers::pi;

namespace {

BoundaryData constant_bd(const Grid& g, double g1, double g2, double w) {
  return {BoundaryTrace::constant(g, g1), BoundaryTrace::constant(g, g2), BoundaryTrace::constant(g, w)};
}

ScalarField random_positive(const Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.2, 3.0);
  ScalarField f(g);
  for (auto& v : f.values) v = d(rng);
  return f;
}

Trajectory rows_with_rho(const std::vector<std::pair<double, double>>& tv) {
  Trajectory tr;
  for (auto [t, v] : tv) {
    DiagnosticsRecord r;
    r.t = t;
    r.rho_l2_sq = v;
    tr.rows.push_back(r);
  }
  return tr;
}

}  // namespace

TEST(EnergyF, Examples) {
  Grid g(12, 10, 2.0, 1.5);
  Params p;
  p.delta = 1.0;
  const BoundaryData bd = constant_bd(g, 1.0, 1.0, 0.0);
  const State z = make_state(ScalarField(g), ScalarField(g), VectorField(g), bd, p);
  EXPECT_EQ(energy_F(z, p), 0.0);
  const State one = make_state(ScalarField(g, 1.0), ScalarField(g, 1.0), VectorField(g), bd, p);
  EXPECT_NEAR(energy_F(one, p), 2.0 * g.Lx * g.Ly, 1e-12);
  EXPECT_NEAR(coulomb_energy(one, p), 0.0, 1e-14);
}

TEST(EnergyF, CoulombEnergyByParts) {
  Grid g(20, 16);
  Params p;
  p.eps = 0.07;
  const BoundaryData bd = constant_bd(g, 1.0, 1.0, 0.0);
  const State s = make_state(random_positive(g, 1), random_positive(g, 2), VectorField(g), bd, p);
  const double P = coulomb_energy(s, p);
  const ScalarField phi = (1.0 / p.eps) * inv_dirichlet_laplacian(s.rho);
  const BoundaryTrace zero = BoundaryTrace::zero(g);
  const double alt = 0.5 * p.eps * kernels::gradient_dot(g, phi.span(), &zero, phi.span(), &zero);
  EXPECT_GT(P, 0.0);
  EXPECT_NEAR(P, alt, 1e-8 * P);
}

TEST(EnergyF, KineticTermAndRecordConsistency) {
  Grid g(16, 16);
  Params p;
  p.K = 2.5;
  p.delta = 0.7;
  const BoundaryData bd = constant_bd(g, 1.0, 1.0, 0.3);
  const VectorField u = VectorField::from_stream_function(g, [](double x, double y) {
    return std::pow(std::sin(pi * x) * std::sin(pi * y), 2);
  });
  const State s = make_state(random_positive(g, 3), random_positive(g, 4), u, bd, p);
  const DiagnosticsRecord r = diagnose(s, bd, p, nullptr);
  EXPECT_NEAR(r.F, energy_F(s, p), 1e-12 * r.F);
  EXPECT_NEAR(r.F, r.kinetic / p.K + r.P + p.delta * (r.l2_c1 + r.l2_c2), 1e-12 * r.F);
  EXPECT_GT(r.u_V_sq, 0.0);
  EXPECT_TRUE(std::isnan(r.E_rel));
  EXPECT_LE(r.m, r.M);
}

TEST(RelativeEntropy, Examples) {
  Grid g(16, 16);
  Params p;
  p.eps = 0.1;
  BoundaryData bd;
  bd.gamma1 = BoundaryTrace::from_function(g, [](double x, double) { return 1.0 + x; });
  bd.gamma2 = BoundaryTrace::from_function(g, [](double, double y) { return 2.0 - y; });
  bd.W = BoundaryTrace::from_function(g, [](double x, double y) { return x - y; });
  const SteadyState st = solve_steady_np(g, bd, p);
  State s = make_state(st.c1, st.c2, VectorField(g), bd, p);
  s.phi = st.phi;
  const RelativeEntropy r0 = relative_entropy(s, st, bd, p);
  EXPECT_NEAR(r0.E_rel, 0.0, 1e-14);
  EXPECT_LE(r0.mu_dissipation, 1e-10);

  State d = s;
  d.c1 = 2.0 * st.c1;
  d.c2 = 2.0 * st.c2;
  const RelativeEntropy r1 = relative_entropy(d, st, bd, p);
  const double expect = (2 * std::log(2.0) - 1) * (integrate(st.c1) + integrate(st.c2));
  EXPECT_NEAR(r1.E_rel, expect, 1e-12 * expect);

  d.c1[3] = 0.0;
  EXPECT_THROW(relative_entropy(d, st, bd, p), Error);
}

TEST(RelativeEntropy, NonnegativeForRandomStates) {
  Grid g(12, 12);
  Params p;
  const BoundaryData bd = constant_bd(g, 1.0, 1.0, 0.0);
  const SteadyState st = solve_steady_np(g, bd, p);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const State s = make_state(random_positive(g, seed), random_positive(g, seed + 10), VectorField(g), bd, p);
    const RelativeEntropy r = relative_entropy(s, st, bd, p);
    EXPECT_GE(r.E_rel, 0.0);
    EXPECT_GE(r.mu_dissipation, 0.0);
    EXPECT_GE(coulomb_energy(s, p), 0.0);
  }
}

TEST(Electroneutrality, Averages) {
  const Trajectory zero = rows_with_rho({{0, 0}, {0.5, 0}, {1, 0}});
  EXPECT_EQ(electroneutrality_average(zero, 0.1, 0.7), 0.0);
  const Trajectory cst = rows_with_rho({{0, 2.5}, {0.3, 2.5}, {0.7, 2.5}, {1, 2.5}});
  EXPECT_NEAR(electroneutrality_average(cst, 0.0, 1.0), 2.5, 1e-14);
  EXPECT_NEAR(electroneutrality_average(cst, 0.13, 0.61), 2.5, 1e-14);
  // Linear in time: the trapezoid rule is exact.
  const Trajectory lin = rows_with_rho({{0, 0}, {0.25, 0.25}, {0.5, 0.5}, {1, 1}});
  EXPECT_NEAR(electroneutrality_average(lin, 0.1, 0.8), 0.5, 1e-14);
  try {
    electroneutrality_average(cst, 0.5, 0.6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientWindow);
  }
}

TEST(DissipationResidual, SteadyRowsAndSigns) {
  std::vector<DiagnosticsRecord> rows(4);
  for (int k = 0; k < 4; ++k) {
    rows[k].t = 0.1 * k;
    rows[k].F = 3.0;
  }
  for (const auto& d : dissipation_residual(rows)) EXPECT_NEAR(d.dFdt, 0.0, 1e-8);
  rows.resize(2);
  EXPECT_THROW(dissipation_residual(rows), Error);

  SimConfig cfg;
  cfg.grid = Grid(16, 16);
  cfg.params.eps = 0.05;
  cfg.bd.gamma1 = BoundaryTrace::constant(cfg.grid, 1.0);
  cfg.bd.gamma2 = BoundaryTrace::constant(cfg.grid, 1.0);
  cfg.bd.W = BoundaryTrace::zero(cfg.grid);
  cfg.init.perturb = 0.5;
  cfg.init.velocity = 0.3;
  cfg.seed = 5;
  cfg.time.dt = 0.01;
  cfg.time.t_end = 0.2;
  const Trajectory tr = run(cfg);
  const auto d = dissipation_residual(tr.rows);
  for (const auto& r : d) {
    EXPECT_TRUE(std::isfinite(r.dFdt));
    EXPECT_GE(r.u_V_sq, 0.0);
    EXPECT_GE(r.sum_h1_c, 0.0);
    EXPECT_GE(r.rho_l3_cubed, 0.0);
  }
  // Equilibrium data with a perturbed start: F decays.
  for (std::size_t k = 2; k < d.size(); ++k) EXPECT_LE(d[k].dFdt, 0.0);
}

TEST(DirichletQuotient, EigenmodeAndScaling) {
  Grid g(32, 32);
  Params p;
  p.D1 = 1.7;
  const BoundaryData bd = constant_bd(g, 1.0, 1.0, 0.0);
  const EigenPairs ep = smallest_eigenpairs(g, SpectralOperator::DirichletLaplacian, 1);
  ScalarField eta(g);
  for (std::size_t k = 0; k < g.cells(); ++k) eta[k] = 0.1 * ep.vectors[0][k] / ep.vectors[0].lpNorm<Eigen::Infinity>();
  const State a = make_state(ScalarField(g, 1.0), ScalarField(g, 1.0), VectorField(g), bd, p);
  const State b = make_state(ScalarField(g, 1.0) + eta, ScalarField(g, 1.0), VectorField(g), bd, p);
  const DirichletQuotient q = dirichlet_quotient(a, b, p);
  EXPECT_NEAR(q.ratio, p.D1 * ep.values[0], 0.01 * p.D1 * ep.values[0]);
  EXPECT_NEAR(ep.values[0], 2 * pi * pi, 0.01 * 2 * pi * pi);

  State c = make_state(random_positive(g, 1), random_positive(g, 2), VectorField(g), bd, p);
  c.u = VectorField::from_stream_function(g, [](double x, double y) { return std::pow(std::sin(pi * x) * std::sin(pi * y), 2); });
  State c2 = c;
  c2.c1 = c.c1 + 3.0 * (b.c1 - a.c1);
  c2.u = 4.0 * c.u;
  State c3 = c;
  c3.c1 = c.c1 + 30.0 * (b.c1 - a.c1);
  c3.u = c.u + 10.0 * (c2.u - c.u);
  const DirichletQuotient q2 = dirichlet_quotient(c, c2, p), q3 = dirichlet_quotient(c, c3, p);
  EXPECT_NEAR(q2.ratio, q3.ratio, 1e-10 * q2.ratio);

  try {
    dirichlet_quotient(a, a, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IdenticalStates);
  }
  const Grid other(16, 16);
  const State o = make_state(ScalarField(other, 1.0), ScalarField(other, 1.0), VectorField(other),
                             constant_bd(other, 1.0, 1.0, 0.0), p);
  EXPECT_THROW(dirichlet_quotient(a, o, p), Error);
}

TEST(Envelope, Example) {
  Grid g(8, 8);
  Params p;
  const BoundaryData bd = constant_bd(g, 1.0, 1.0, 0.0);
  const State s = make_state(ScalarField(g, 1.0), ScalarField(g, 2.0), VectorField(g), bd, p);
  const Envelope e = linf_envelope(s);
  EXPECT_EQ(e.M, 2.0);
  EXPECT_EQ(e.m, 1.0);
}

TEST(TransientEnd, FindsFirstFlatWindow) {
  std::vector<DiagnosticsRecord> rows;
  for (int k = 0; k <= 100; ++k) {
    DiagnosticsRecord r;
    r.t = 0.1 * k;
    r.F = 1.0 + std::exp(-r.t);
    rows.push_back(r);
  }
  const auto t = transient_end(rows, 10.0);
  ASSERT_TRUE(t.has_value());
  // |F(t0 + 1) - F(t0)| <= 0.01 F(t0) first holds near t0 = log(0.632.../0.01) ~ 4.1
  EXPECT_GT(*t, 3.5);
  EXPECT_LT(*t, 4.5);
  rows.resize(5);
  EXPECT_FALSE(transient_end(rows, 10.0).has_value());
}

TEST(Csv, HeaderAndRoundTrip) {
  DiagnosticsRecord r;
  r.t = 0.1;
  r.F = 1.0 / 3.0;
  r.E_rel = std::nan("");
  const std::string csv = diagnostics_csv({r});
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header,
            "t,F,P,kinetic,l2_c1,l2_c2,h1_c1,h1_c2,rho_l2_sq,rho_l3_cubed,u_V_sq,grad_phi_l2,M,m,E_rel,mu_dissipation");
  std::getline(in, line);
  std::istringstream ls(line);
  std::string tok;
  std::getline(ls, tok, ',');
  EXPECT_EQ(std::stod(tok), 0.1);
  std::getline(ls, tok, ',');
  EXPECT_EQ(std::stod(tok), 1.0 / 3.0);
}
