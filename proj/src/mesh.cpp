#include "nps/mesh.hpp"

#include "nps/kernels.hpp"

namespace nps {

double integrate(const ScalarField& f) { return kernels::cell_integral(f.grid, f.span()); }

Norms norms(const ScalarField& f) {
  const BoundaryTrace zero = BoundaryTrace::zero(f.grid);
  return norms(f, &zero);
}

Norms norms(const ScalarField& f, const BoundaryTrace* trace) {
  Norms n;
  n.l2_sq = kernels::cell_dot(f.grid, f.span(), f.span());
  n.h1semi_sq = kernels::gradient_dot(f.grid, f.span(), trace, f.span(), trace);
  return n;
}

Norms norms(const VectorField& u) {
  Norms n;
  n.l2_sq = kernels::velocity_dot(u.grid, u, u);
  n.h1semi_sq = kernels::velocity_gradient_dot(u.grid, u, u);
  return n;
}

ScalarField discrete_divergence(const VectorField& u) {
  ScalarField out(u.grid);
  kernels::divergence(u.grid, u.ux, u.uy, out.values);
  return out;
}

}  // namespace nps
