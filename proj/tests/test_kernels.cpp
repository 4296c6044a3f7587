#include <random>

#include <gtest/gtest.h>
#include <omp.h>

#include "nps/kernels.hpp"

using namespace nps;

namespace {

struct Fixture {
  Grid g{37, 29, 1.3, 0.9};
  ScalarField a{g}, b{g};
  BoundaryTrace ta, tb;
  VectorField u{g}, v{g};

  Fixture() {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (std::size_t k = 0; k < g.cells(); ++k) {
      a[k] = d(rng);
      b[k] = d(rng);
    }
    ta = BoundaryTrace::from_function(g, [](double x, double y) { return x - 2 * y; });
    tb = BoundaryTrace::from_function(g, [](double x, double y) { return x * y; });
    for (auto* f : {&u, &v}) {
      for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i) f->ux[g.xface(i, j)] = d(rng);
      for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f->uy[g.yface(i, j)] = d(rng);
    }
  }
};

}  // namespace

TEST(Kernels, ParallelMatchesReference) {
  Fixture f;
  const Grid& g = f.g;
  EXPECT_NEAR(kernels::cell_dot(g, f.a.span(), f.b.span()), kernels::reference::cell_dot(g, f.a.span(), f.b.span()), 1e-12);
  EXPECT_NEAR(kernels::cell_integral(g, f.a.span()), kernels::reference::cell_integral(g, f.a.span()), 1e-12);
  EXPECT_NEAR(kernels::cell_abs_cubed(g, f.a.span()), kernels::reference::cell_abs_cubed(g, f.a.span()), 1e-12);
  for (const BoundaryTrace* t : std::initializer_list<const BoundaryTrace*>{nullptr, &f.ta}) {
    const double p = kernels::gradient_dot(g, f.a.span(), t, f.b.span(), t ? &f.tb : nullptr);
    const double r = kernels::reference::gradient_dot(g, f.a.span(), t, f.b.span(), t ? &f.tb : nullptr);
    EXPECT_NEAR(p, r, 1e-9 * std::abs(r));
  }
  ScalarField l1(g), l2(g);
  kernels::laplacian_apply(g, f.a.span(), f.ta, l1.values);
  kernels::reference::laplacian_apply(g, f.a.span(), f.ta, l2.values);
  for (std::size_t k = 0; k < g.cells(); ++k) EXPECT_NEAR(l1[k], l2[k], 1e-9 * (1 + std::abs(l2[k])));
  ScalarField d1(g), d2(g);
  kernels::divergence(g, f.u.ux, f.u.uy, d1.values);
  kernels::reference::divergence(g, f.u.ux, f.u.uy, d2.values);
  for (std::size_t k = 0; k < g.cells(); ++k) EXPECT_EQ(d1[k], d2[k]);
  EXPECT_NEAR(kernels::velocity_dot(g, f.u, f.v), kernels::reference::velocity_dot(g, f.u, f.v), 1e-12);
  const double vg = kernels::reference::velocity_gradient_dot(g, f.u, f.v);
  EXPECT_NEAR(kernels::velocity_gradient_dot(g, f.u, f.v), vg, 1e-9 * std::abs(vg));
}

TEST(Kernels, SummationByParts) {
  // sum a (-Delta b) = Dirichlet form with traces (0, tb) for a zero-trace a.
  Fixture f;
  const Grid& g = f.g;
  const BoundaryTrace zero = BoundaryTrace::zero(g);
  ScalarField lap(g);
  kernels::laplacian_apply(g, f.b.span(), f.tb, lap.values);
  const double lhs = -kernels::cell_dot(g, f.a.span(), lap.span());
  const double rhs = kernels::gradient_dot(g, f.a.span(), &zero, f.b.span(), &f.tb);
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(rhs));
}

TEST(Kernels, ReductionsIndependentOfThreadCount) {
  Fixture f;
  const Grid& g = f.g;
  const int saved = omp_get_max_threads();
  double ref[4] = {};
  for (int threads : {1, 2, 3, 7}) {
    omp_set_num_threads(threads);
    const double r[4] = {kernels::cell_dot(g, f.a.span(), f.b.span()),
                         kernels::gradient_dot(g, f.a.span(), &f.ta, f.b.span(), &f.tb),
                         kernels::velocity_dot(g, f.u, f.v), kernels::velocity_gradient_dot(g, f.u, f.v)};
    if (threads == 1) {
      std::copy(r, r + 4, ref);
    } else {
      for (int q = 0; q < 4; ++q) EXPECT_EQ(r[q], ref[q]) << "threads=" << threads << " q=" << q;
    }
  }
  omp_set_num_threads(saved);
}
