#pragma once

#include <map>
#include <memory>

#include "nps/grid.hpp"
#include "nps/sparse.hpp"

namespace nps {

/// Factorized backward-Euler Stokes saddle systems for one (grid, nu), keyed by dt.
class StokesWorkspace {
 public:
  StokesWorkspace(const Grid& g, double nu);

  const Grid& grid() const { return grid_; }
  double nu() const { return nu_; }

  /// Velocity part of the solution of
  ///   u/dt + nu (-L_h) u + G p = rhs,  Div u = 0,
  /// with rhs given on the packed interior faces.
  Vec solve(const Vec& rhs, double dt);

 private:
  Grid grid_;
  double nu_;
  std::map<double, std::unique_ptr<SparseLU>> lu_;
};

/// -K rho grad(Phi) on interior faces: rho averaged to the face, Phi differenced across it.
VectorField electric_force(const ScalarField& rho, const ScalarField& phi, double K);

/// The same body force written through the zero-advection SG fluxes,
///   -rho grad Phi = sum_i J_i / D_i + grad(c1 + c2),
/// so that it is an exact discrete gradient at Boltzmann states.
VectorField equilibrated_force(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi, double K);

/// Directional derivative of equilibrated_force at (c1, c2, phi).
VectorField equilibrated_force_derivative(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi,
                                          const ScalarField& dc1, const ScalarField& dc2, const ScalarField& dphi,
                                          double K);

/// One backward-Euler Stokes step with no-slip walls; the result is discretely solenoidal.
VectorField stokes_step(const VectorField& u, const VectorField& f, double dt, StokesWorkspace& ws);

}  // namespace nps
