#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nps/errors.hpp"
#include "nps/mesh.hpp"

using namespace nps;
using std::numbers::pi;

namespace {
double sinsin(double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }
}  // namespace

TEST(Grid, RejectsSmallGrids) {
  EXPECT_THROW(Grid(4, 16), Error);
  EXPECT_THROW(Grid(16, 16, 0.0, 1.0), Error);
  Grid g(16, 32, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(g.hx(), 0.125);
  EXPECT_DOUBLE_EQ(g.yc(0), 1.0 / 64.0);
}

TEST(Integrate, ConstantAndZero) {
  Grid g(16, 16);
  EXPECT_NEAR(integrate(ScalarField(g, 3.0)), 3.0, 1e-14);
  EXPECT_EQ(integrate(ScalarField(g)), 0.0);
}

TEST(Integrate, SineProductMatchesAnalyticIntegral) {
  Grid g(128, 128);
  EXPECT_NEAR(integrate(ScalarField::from_function(g, sinsin)), 4.0 / (pi * pi), 1e-3);
}

TEST(Integrate, IsLinear) {
  Grid g(24, 16, 1.5, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g), h(g);
  for (std::size_t k = 0; k < g.cells(); ++k) {
    f[k] = u(rng);
    h[k] = u(rng);
  }
  const double a = 2.5, b = -0.75;
  EXPECT_NEAR(integrate(a * f + b * h), a * integrate(f) + b * integrate(h), 1e-13);
}

TEST(Norms, ZeroField) {
  Grid g(16, 16);
  const Norms n = norms(ScalarField(g));
  EXPECT_EQ(n.l2_sq, 0.0);
  EXPECT_EQ(n.h1semi_sq, 0.0);
}

TEST(Norms, LinearFieldWithoutTrace) {
  Grid g(32, 32);
  const Norms n = norms(ScalarField::from_function(g, [](double x, double) { return x; }), nullptr);
  EXPECT_NEAR(n.h1semi_sq, 1.0, 1e-10);
}

TEST(Norms, SineProductMatchesAnalyticNorms) {
  Grid g(128, 128);
  const Norms n = norms(ScalarField::from_function(g, sinsin));
  EXPECT_NEAR(n.l2_sq, 0.25, 1e-3);
  EXPECT_NEAR(n.h1semi_sq, pi * pi / 2.0, 1e-2);
}

TEST(Norms, L2VanishesOnlyForZero) {
  Grid g(16, 16);
  ScalarField f(g);
  f(3, 5) = 1e-150;
  EXPECT_GT(norms(f).l2_sq, 0.0);
}

TEST(Norms, SecondOrderUnderRefinement) {
  auto err = [](int n) {
    Grid g(n, n);
    const Norms nr = norms(ScalarField::from_function(g, sinsin));
    return std::abs(nr.l2_sq - 0.25) + std::abs(nr.h1semi_sq - pi * pi / 2.0);
  };
  const double e1 = err(16), e2 = err(32), e3 = err(64);
  EXPECT_GE(e1 / e2, 3.5);
  EXPECT_GE(e2 / e3, 3.5);
}

TEST(Divergence, ZeroShearAndLinear) {
  Grid g(16, 16);
  EXPECT_EQ(discrete_divergence(VectorField(g)).max(), 0.0);
  const VectorField shear = VectorField::from_function(
      g, [](double, double y) { return y; }, [](double, double) { return 0.0; });
  const ScalarField ds = discrete_divergence(shear);
  EXPECT_LT(std::max(std::abs(ds.min()), std::abs(ds.max())), 1e-14);
  const VectorField lin = VectorField::from_function(
      g, [](double x, double) { return x; }, [](double, double y) { return y; });
  const ScalarField dl = discrete_divergence(lin);
  EXPECT_NEAR(dl.min(), 2.0, 1e-12);
  EXPECT_NEAR(dl.max(), 2.0, 1e-12);
}

TEST(Divergence, StreamFunctionFieldIsSolenoidal) {
  Grid g(20, 16, 1.25, 1.0);
  const VectorField u = VectorField::from_stream_function(g, [](double x, double y) {
    return std::pow(std::sin(pi * x / 1.25), 2) * std::pow(std::sin(pi * y), 2);
  });
  const ScalarField d = discrete_divergence(u);
  EXPECT_LT(std::max(std::abs(d.min()), std::abs(d.max())), 1e-12);
  EXPECT_GT(u.max_abs(), 0.1);
}

TEST(VelocityNorms, GradientFormMatchesNegativeLaplacian) {
  // Oracle: the V form equals u . (-L u) assembled independently.
  Grid g(12, 10);
  const VectorField u = VectorField::from_stream_function(g, [](double x, double y) {
    return std::pow(std::sin(pi * x), 2) * std::pow(std::sin(pi * y), 2) * (1 + x);
  });
  const double hx = g.hx(), hy = g.hy();
  auto ux = [&](int i, int j) { return (i <= 0 || i >= g.nx || j < 0 || j >= g.ny) ? 0.0 : u.ux[g.xface(i, j)]; };
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      const double lo = j == 0 ? -ux(i, j) : ux(i, j - 1);
      const double hi = j == g.ny - 1 ? -ux(i, j) : ux(i, j + 1);
      const double lap = (ux(i + 1, j) - 2 * ux(i, j) + ux(i - 1, j)) / (hx * hx) + (hi - 2 * ux(i, j) + lo) / (hy * hy);
      s -= ux(i, j) * lap * hx * hy;
    }
  auto uy = [&](int i, int j) { return (j <= 0 || j >= g.ny || i < 0 || i >= g.nx) ? 0.0 : u.uy[g.yface(i, j)]; };
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double lo = i == 0 ? -uy(i, j) : uy(i - 1, j);
      const double hi = i == g.nx - 1 ? -uy(i, j) : uy(i + 1, j);
      const double lap = (uy(i, j + 1) - 2 * uy(i, j) + uy(i, j - 1)) / (hy * hy) + (hi - 2 * uy(i, j) + lo) / (hx * hx);
      s -= uy(i, j) * lap * hx * hy;
    }
  EXPECT_NEAR(norms(u).h1semi_sq, s, 1e-10 * s);
}
