#pragma once

#include <optional>
#include <utility>

#include "nps/grid.hpp"
#include "nps/sparse.hpp"

namespace nps {

/// B(s) = s / (e^s - 1), B(0) = 1.
double bernoulli(double s);
/// B'(s).
double bernoulli_derivative(double s);

/// Scharfetter-Gummel flux from the left cell to the right cell,
/// F = (D/h) [B(dV) cL - B(-dV) cR] with dV = z (Phi_R - Phi_L).
double sg_flux(double cL, double cR, double dV, double D, double h);

/// Solution triple (c1, c2, u) with the derived charge density and potential.
struct State {
  double t = 0.0;
  ScalarField c1, c2;
  VectorField u;
  ScalarField phi;
  ScalarField rho;

  const Grid& grid() const { return c1.grid; }
  const ScalarField& c(int species) const { return species == 0 ? c1 : c2; }
};

/// Builds a State, computing rho and solving for Phi. Throws on invalid data.
State make_state(ScalarField c1, ScalarField c2, VectorField u, const BoundaryData& bd, const Params& p, double t = 0.0);

/// Frozen-potential implicit Nernst-Planck update of both species (advection
/// enters through the SG face potential). Throws LinearSolveFailure or
/// MaxPrincipleViolation when u is discretely solenoidal and a bound is broken.
std::pair<ScalarField, ScalarField> np_step(const State& state, double dt, const BoundaryData& bd, const Params& p);

/// Solves inv_dt (c - c_old) + div_h F(c; phi, u) = 0 for one species with trace gamma.
/// inv_dt = 0 gives the steady equation (c_old is then ignored).
ScalarField sg_linear_solve(const ScalarField& phi, const VectorField& u, const BoundaryTrace& W,
                            const BoundaryTrace& gamma, double z, double D, double inv_dt, const ScalarField* c_old);

/// Cell values of div_h F(c; phi, u), F the SG flux with the given traces.
ScalarField sg_divergence(const ScalarField& c, const ScalarField& phi, const VectorField& u, const BoundaryTrace& W,
                          const BoundaryTrace& gamma, double z, double D);

/// mu_i = log c_i + z_i Phi. Throws NonpositiveConcentration.
std::pair<ScalarField, ScalarField> electrochemical_potentials(const State& state);

/// Cell sources added to the c1, c2 and potential equations (manufactured solutions).
struct NpSources {
  ScalarField s1, s2, sphi;
};

/// Backward-Euler Nernst-Planck equations coupled to the potential equation,
/// with unknowns interleaved as y[3k] = c1, y[3k+1] = c2, y[3k+2] = Phi.
///   c-rows:   (c - c_old)/dt + div_h F(c, Phi; u) - s
///   Phi-rows: -eps Delta_h Phi - (c1 - c2) - s_phi
class NpPoissonSystem {
 public:
  NpPoissonSystem(const Grid& g, const Params& p, const BoundaryData& bd);

  int size() const { return 3 * static_cast<int>(grid_.cells()); }
  const Grid& grid() const { return grid_; }

  /// Residual at y, and the Jacobian in jacobian() when requested.
  void assemble(const Vec& y, const Vec& c_old, const VectorField& u, double dt, const NpSources* src, Vec& residual,
                bool with_jacobian);
  const SpMat& jacobian() const { return jac_.matrix(); }

  /// (dR/du) du at (y, u).
  Vec velocity_derivative(const Vec& y, const VectorField& u, const VectorField& du) const;

  struct NewtonReport {
    int iterations = 0;
    double last_update = 0.0;
    int factorizations = 1;
  };
  /// Newton iteration from y (in place). Throws RetryWithSmallerDt on failure.
  NewtonReport solve(Vec& y, const Vec& c_old, const VectorField& u, double dt, const NpSources* src);

  /// Factorization of the last assembled Jacobian.
  const SparseLU& lu() const { return lu_; }
  void factorize_jacobian() { lu_.factorize(jac_.matrix()); }

  static Vec pack(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi);
  static Vec pack_concentrations(const ScalarField& c1, const ScalarField& c2);
  void unpack(const Vec& y, ScalarField& c1, ScalarField& c2, ScalarField& phi) const;

 private:
  Grid grid_;
  Params p_;
  BoundaryData bd_;
  SlotMatrix jac_;
  SparseLU lu_;
};

}  // namespace nps
