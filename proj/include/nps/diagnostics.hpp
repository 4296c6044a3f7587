#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nps/steady.hpp"
#include "nps/transport.hpp"

namespace nps {

/// One diagnostics row. l2_* and h1_* are squared norms; grad_phi_l2 is the norm itself.
/// E_rel and mu_dissipation are NaN when no steady state is attached.
struct DiagnosticsRecord {
  double t = 0.0;
  double F = 0.0;
  double P = 0.0;
  double kinetic = 0.0;
  double l2_c1 = 0.0, l2_c2 = 0.0;
  double h1_c1 = 0.0, h1_c2 = 0.0;
  double rho_l2_sq = 0.0;
  double rho_l3_cubed = 0.0;
  double u_V_sq = 0.0;
  double grad_phi_l2 = 0.0;
  double M = 0.0, m = 0.0;
  double E_rel = 0.0;
  double mu_dissipation = 0.0;
};

inline constexpr std::array<const char*, 16> kDiagnosticsColumns = {
    "t",         "F",            "P",      "kinetic",     "l2_c1", "l2_c2", "h1_c1", "h1_c2",
    "rho_l2_sq", "rho_l3_cubed", "u_V_sq", "grad_phi_l2", "M",     "m",     "E_rel", "mu_dissipation"};

std::array<double, 16> record_values(const DiagnosticsRecord& r);

struct Trajectory {
  std::vector<DiagnosticsRecord> rows;
  std::vector<State> states;  ///< only when requested
};

/// (1/2eps) int rho (-Delta_D)^{-1} rho.
double coulomb_energy(const State& s, const Params& p);
/// (1/2K)|u|^2 + P + delta (|c1|^2 + |c2|^2).
double energy_F(const State& s, const Params& p);

struct RelativeEntropy {
  double E_rel = 0.0;
  double mu_dissipation = 0.0;
};
/// Throws NonpositiveConcentration.
RelativeEntropy relative_entropy(const State& s, const SteadyState& steady, const BoundaryData& bd, const Params& p);

struct Envelope {
  double M = 0.0;
  double m = 0.0;
};
Envelope linf_envelope(const State& s);

DiagnosticsRecord diagnose(const State& s, const BoundaryData& bd, const Params& p, const SteadyState* steady);

/// (1/tau) int_T^{T+tau} |rho|^2 dt, trapezoid rule with linear interpolation at the window ends.
/// Throws InsufficientWindow.
double electroneutrality_average(const Trajectory& traj, double T, double tau);

struct DissipationRow {
  double t = 0.0;
  double dFdt = 0.0;
  double u_V_sq = 0.0;
  double sum_h1_c = 0.0;
  double rho_l3_cubed = 0.0;
};
/// Raw terms of the energy inequality per row; dF/dt by centred differences (one-sided at the ends).
/// Throws InsufficientWindow with fewer than 3 rows.
std::vector<DissipationRow> dissipation_residual(const std::vector<DiagnosticsRecord>& rows);

struct DirichletQuotient {
  double E0 = 0.0;
  double E1 = 0.0;
  double ratio = 0.0;
};
/// Throws IdenticalStates when the difference vanishes, Mismatch on different grids.
DirichletQuotient dirichlet_quotient(const State& a, const State& b, const Params& p);

/// Start of the first window of length window_frac * t_end over which F stays within rel of its
/// value at the window start; nullopt if no such window fits in the trajectory.
std::optional<double> transient_end(const std::vector<DiagnosticsRecord>& rows, double t_end, double rel = 0.01,
                                    double window_frac = 0.1);

/// CSV text with the fixed header; numbers printed with %.17g.
std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& rows);
std::string format_double(double v);

}  // namespace nps
