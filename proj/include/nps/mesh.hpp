#pragma once

#include "nps/grid.hpp"

namespace nps {

/// Sum of f * hx * hy over the cells.
double integrate(const ScalarField& f);

struct Norms {
  double l2_sq = 0.0;
  double h1semi_sq = 0.0;
};

/// Squared L2 norm and squared H1 seminorm with a zero Dirichlet trace.
Norms norms(const ScalarField& f);
/// As above with the given trace. A null trace disables the Dirichlet
/// closure and extrapolates linearly to the wall instead.
Norms norms(const ScalarField& f, const BoundaryTrace* trace);
/// L2 and V (gradient) norms of a no-slip MAC field.
Norms norms(const VectorField& u);

ScalarField discrete_divergence(const VectorField& u);

}  // namespace nps
