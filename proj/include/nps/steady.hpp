#pragma once

#include <optional>
#include <vector>

#include "nps/elliptic.hpp"
#include "nps/grid.hpp"

namespace nps {

struct SteadyState {
  ScalarField c1, c2, phi;
  double residual_poisson = 0.0;  ///< max |-eps Delta Phi - rho|
  double residual_np = 0.0;       ///< max over species of |div_h F_i|
  int sweeps = 0;

  const ScalarField& c(int species) const { return species == 0 ? c1 : c2; }
};

struct BoltzmannParams {
  double Z1 = 1.0;
  double Z2 = 1.0;
};

/// Damped Newton for -eps Delta Phi = a1 e^{-Phi} - a2 e^{Phi} with Phi = W on the boundary
/// (a1, a2 > 0 per cell). Starts from phi0, or from the harmonic extension of W.
/// Backtracking is Armijo on the convex energy with factor 1/2 down to 2^-20;
/// reaching the floor throws NewtonStall. `energies` receives the energy of every iterate.
ScalarField solve_nonlinear_poisson(const ScalarField& a1, const ScalarField& a2, const BoundaryTrace& W, double eps,
                                    const ScalarField* phi0, SolverReport* report,
                                    std::vector<double>* energies = nullptr);

/// -eps Delta Phi* = Z1^{-1} e^{-Phi*} - Z2^{-1} e^{Phi*}.
std::pair<ScalarField, SolverReport> solve_poisson_boltzmann(const Grid& g, const BoltzmannParams& Z,
                                                             const BoundaryTrace& W, double eps,
                                                             std::vector<double>* energies = nullptr);

/// c_i* = Z_i^{-1} e^{-z_i Phi*} together with Phi*.
SteadyState boltzmann_state(const Grid& g, const BoltzmannParams& Z, const BoundaryTrace& W, double eps);

/// Z_i = exp(-(log gamma_i + z_i W)) when log gamma_i + z_i W is constant on the
/// boundary to within tol; nullopt for nonequilibrium data.
std::optional<BoltzmannParams> equilibrium_constants(const BoundaryData& bd, double tol = 1e-12);

struct GummelOptions {
  double tolerance = 1e-8;
  int max_sweeps = 1000;
  const SteadyState* initial = nullptr;  ///< warm start (e.g. the previous eps)
  SteadyState* last_iterate = nullptr;   ///< filled on every exit path
};

/// Gummel iteration for the steady Nernst-Planck/Poisson system with u = 0.
/// Throws GummelDivergence after 5 consecutive residual increases, NonConvergence after max_sweeps.
SteadyState solve_steady_np(const Grid& g, const BoundaryData& bd, const Params& p, const GummelOptions& opt = {});

/// Residuals of a candidate steady state (fills residual_poisson / residual_np).
void steady_residuals(SteadyState& s, const BoundaryData& bd, const Params& p);

struct BoundCheck {
  bool pass = true;
  double worst_margin = 0.0;  ///< negative when violated
  std::size_t worst_cell = 0;
  int worst_species = 0;
};

struct UbStarReport {
  BoundCheck scaled;     ///< lambda_i <= c_i e^{z_i Phi} <= Lambda_i
  BoundCheck potential;  ///< bounds on Phi*
  BoundCheck envelope;   ///< gamma_lo <= c_i <= gamma_hi
  bool all_pass() const { return scaled.pass && potential.pass && envelope.pass; }
};

UbStarReport verify_ubstar(const SteadyState& s, const BoundaryData& bd, const Params& p, double slack = 1e-8);

}  // namespace nps
