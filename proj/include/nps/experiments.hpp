#pragma once

// Batch experiments behind the command line front end. Every driver writes its
// CSV files into an output directory and returns the numbers it wrote, together
// with the list of failed acceptance checks.

#include <string>
#include <vector>

#include "nps/config.hpp"
#include "nps/tangent.hpp"

namespace nps {

struct CheckList {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  bool passed() const { return failures.empty(); }
};

struct RunOutcome {
  Trajectory traj;
  CheckList checks;
};
/// Single run; checks the discrete maximum principle on every row.
RunOutcome experiment_run(const ExperimentSpec& spec, const std::string& out_dir);

struct SweepRow {
  double eps = 0.0;
  int nx = 0, ny = 0;
  double T = 0.0, tau = 0.0;
  double rho_avg = 0.0;
  double grad_phi_scaled = 0.0;  ///< post-transient sup ||grad Phi|| * sqrt(eps)
  double u_sup = 0.0;            ///< post-transient sup ||u||
  bool decreasing = true;        ///< rho_avg below the previous (larger) eps
  std::string status = "ok";
};

struct SweepOutcome {
  std::vector<SweepRow> rows;
  double slope = 0.0;  ///< least-squares log-log slope of rho_avg against eps
  double B1 = 0.0;     ///< rho_avg / eps^(1/3) at the largest eps
  bool bound_holds = false;
  double grad_phi_ratio = 0.0;  ///< max over eps of grad_phi_scaled / its value at the largest eps
  double u_ratio = 0.0;         ///< max u_sup / min u_sup
  CheckList checks;
};
SweepOutcome experiment_sweep_eps(const ExperimentSpec& spec, const std::string& out_dir);

struct SteadyOutcome {
  SteadyState state;
  UbStarReport ubstar;
  bool equilibrium = false;
  double pb_max_diff = 0.0;  ///< Gummel vs Poisson-Boltzmann (equilibrium data only)
  std::string status = "ok";
  CheckList checks;
};
SteadyOutcome experiment_steady(const ExperimentSpec& spec, const std::string& out_dir);

struct TangentOutcome {
  TangentRun run;
  std::vector<DefectRow> defect;
  CheckList checks;
};
TangentOutcome experiment_tangent(const ExperimentSpec& spec, const std::string& out_dir);

struct PairRow {
  double t = 0.0;
  DirichletQuotient q;
};
struct PairOutcome {
  std::vector<PairRow> rows;
  CheckList checks;
};
PairOutcome experiment_pair_diff(const ExperimentSpec& spec, const std::string& out_dir);

struct ConvergenceRow {
  double h_or_dt = 0.0;
  double err_c = 0.0, err_phi = 0.0, err_u = 0.0;
  double order_c = 0.0, order_phi = 0.0, order_u = 0.0;  ///< against the previous row (NaN for the first)
};
struct ConvergenceOutcome {
  std::vector<ConvergenceRow> space;
  std::vector<ConvergenceRow> time;  ///< differences of successive dt solutions
  CheckList checks;
};
ConvergenceOutcome experiment_convergence(const ExperimentSpec& spec, const std::string& out_dir);

/// Dispatches on spec.kind; returns the failed checks.
CheckList run_experiment(const ExperimentSpec& spec, const std::string& out_dir);

}  // namespace nps
