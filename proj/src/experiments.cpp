#include "nps/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include "nps/errors.hpp"
#include "nps/manufactured.hpp"
#include "nps/steady.hpp"

namespace nps {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out + '\n';
}

std::string fd(double v) { return format_double(v); }

double order(double e_prev, double e, double ratio) {
  if (!(e_prev > 0.0) || !(e > 0.0)) return kNaN;
  return std::log(e_prev / e) / std::log(ratio);
}

}  // namespace

// ---------------------------------------------------------------------------

RunOutcome experiment_run(const ExperimentSpec& spec, const std::string& out_dir) {
  SimConfig cfg = spec.sim;
  if (!out_dir.empty()) cfg.output.dir = out_dir;
  RunOutcome out;
  out.traj = run(cfg);
  const auto& rows = out.traj.rows;
  const double glo = cfg.bd.gamma_min(), ghi = cfg.bd.gamma_max();
  const double m0 = rows.front().m, M0 = rows.front().M;
  const double lo = std::min(m0, glo), hi = std::max(M0, ghi);
  bool bounds = true, mono = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    bounds = bounds && rows[k].m >= lo - 1e-10 && rows[k].M <= hi + 1e-10;
    if (k > 0) {
      if (M0 > ghi) mono = mono && rows[k].M <= rows[k - 1].M + 1e-10;
      if (m0 < glo) mono = mono && rows[k].m >= rows[k - 1].m - 1e-10;
    }
  }
  out.checks.require(bounds, "maximum principle: envelope left [min(m0, gamma_lo), max(M0, gamma_hi)]");
  out.checks.require(mono, "maximum principle: out-of-range envelope not monotone");
  if (M0 > ghi || m0 < glo) {
    const double slack = 0.05 * (ghi - glo);
    out.checks.require(rows.back().M <= ghi + slack && rows.back().m >= glo - slack,
                       "maximum principle: envelope did not enter the 5% neighbourhood of [gamma_lo, gamma_hi]");
  }
  return out;
}

// ---------------------------------------------------------------------------

SweepOutcome experiment_sweep_eps(const ExperimentSpec& spec, const std::string& out_dir) {
  spec.validate();
  const std::vector<double>& eps = spec.sweep.eps;
  const int n = static_cast<int>(eps.size());
  const double c = spec.sweep.min_debye_cells;
  const Grid& g0 = spec.sim.grid;

  // Resolve grids first so a bad configuration fails before any run.
  std::vector<SimConfig> cfgs(n);
  for (int i = 0; i < n; ++i) {
    const double s = std::sqrt(eps[i]);
    Grid g = g0;
    if (spec.sweep.auto_grid) {
      g = Grid(static_cast<int>(std::ceil(c * g0.Lx / s - 1e-9)), static_cast<int>(std::ceil(c * g0.Ly / s - 1e-9)),
               g0.Lx, g0.Ly);
    } else if (s / std::max(g0.hx(), g0.hy()) < c - 1e-12) {
      throw Error(ErrorKind::ConfigError, "grid too coarse for eps = " + fd(eps[i]) + ": sqrt(eps)/h = " +
                                              fd(s / std::max(g0.hx(), g0.hy())) + " < " + fd(c) +
                                              " (enable experiment.auto_grid or refine grid)");
    }
    cfgs[i] = g == g0 ? spec.sim : spec.config_for_grid(g);
    cfgs[i].params.eps = eps[i];
    cfgs[i].output.dir = out_dir.empty() ? std::string() : join_path(out_dir, "eps_" + std::to_string(i));
  }

  SweepOutcome out;
  out.rows.resize(n);
  std::vector<Trajectory> trajs(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    SweepRow& row = out.rows[i];
    row.eps = eps[i];
    row.nx = cfgs[i].grid.nx;
    row.ny = cfgs[i].grid.ny;
    try {
      trajs[i] = run(cfgs[i]);
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
  }

  const double t_end = spec.sim.time.t_end;
  for (int i = 0; i < n; ++i) {
    SweepRow& row = out.rows[i];
    if (row.status != "ok") continue;
    const auto& rows = trajs[i].rows;
    std::optional<double> T = spec.sweep.T;
    if (!T) T = transient_end(rows, t_end);
    if (!T) {
      row.status = "no post-transient window";
      continue;
    }
    row.T = *T;
    row.tau = spec.sweep.tau.value_or(t_end - row.T);
    if (row.tau < std::pow(row.eps, 2.0 / 3.0)) {
      row.status = "window shorter than eps^(2/3)";
      continue;
    }
    try {
      row.rho_avg = electroneutrality_average(trajs[i], row.T, row.tau);
    } catch (const Error& e) {
      row.status = std::string("failed: ") + e.what();
      continue;
    }
    for (const auto& r : rows) {
      if (r.t < row.T - 1e-12 || r.t > row.T + row.tau + 1e-12) continue;
      row.grad_phi_scaled = std::max(row.grad_phi_scaled, r.grad_phi_l2 * std::sqrt(row.eps));
      row.u_sup = std::max(row.u_sup, std::sqrt(2.0 * r.kinetic));
    }
  }

  bool all_ok = true;
  for (int i = 0; i < n; ++i) {
    all_ok = all_ok && out.rows[i].status == "ok";
    if (i > 0) out.rows[i].decreasing = out.rows[i].rho_avg < out.rows[i - 1].rho_avg;
  }
  if (all_ok) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : out.rows) {
      const double x = std::log(r.eps), y = std::log(r.rho_avg);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    out.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    out.B1 = out.rows[0].rho_avg / std::cbrt(out.rows[0].eps);
    out.bound_holds = true;
    for (int i = 1; i < n; ++i)
      out.bound_holds = out.bound_holds && out.rows[i].rho_avg <= out.B1 * std::cbrt(out.rows[i].eps);
    double umin = std::numeric_limits<double>::infinity(), umax = 0.0;
    for (const auto& r : out.rows) {
      out.grad_phi_ratio = std::max(out.grad_phi_ratio, r.grad_phi_scaled / out.rows[0].grad_phi_scaled);
      umin = std::min(umin, r.u_sup);
      umax = std::max(umax, r.u_sup);
    }
    out.u_ratio = umax / umin;
  } else {
    out.slope = out.B1 = out.grad_phi_ratio = out.u_ratio = kNaN;
  }

  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::string csv = csv_line({"eps", "nx", "ny", "T", "tau", "rho_avg", "grad_phi_sqrt_eps", "u_sup", "decreasing",
                                "status"});
    for (const auto& r : out.rows)
      csv += csv_line({fd(r.eps), std::to_string(r.nx), std::to_string(r.ny), fd(r.T), fd(r.tau), fd(r.rho_avg),
                       fd(r.grad_phi_scaled), fd(r.u_sup), r.decreasing ? "1" : "0", "\"" + r.status + "\""});
    write_text_file(join_path(out_dir, "sweep_summary.csv"), csv);
    write_text_file(join_path(out_dir, "sweep_fit.csv"),
                    csv_line({"slope", "B1", "bound_holds", "grad_phi_ratio", "u_ratio"}) +
                        csv_line({fd(out.slope), fd(out.B1), out.bound_holds ? "1" : "0", fd(out.grad_phi_ratio),
                                  fd(out.u_ratio)}));
  }

  CheckList& ck = out.checks;
  ck.require(all_ok, "sweep: at least one member failed or has no valid window");
  for (int i = 1; i < n; ++i)
    ck.require(out.rows[i].decreasing, "sweep: rho average not decreasing at eps = " + fd(out.rows[i].eps));
  ck.require(out.slope >= 1.0 / 3.0 - 0.1, "sweep: log-log slope " + fd(out.slope) + " < 1/3 - 0.1");
  ck.require(out.bound_holds, "sweep: B1 eps^(1/3) bound fitted at the largest eps is violated");
  ck.require(out.grad_phi_ratio <= 2.0, "sweep: sup ||grad Phi|| sqrt(eps) grew by more than 2x");
  ck.require(out.u_ratio < 2.0, "sweep: sup ||u|| varies by 2x or more");
  return out;
}

// ---------------------------------------------------------------------------

SteadyOutcome experiment_steady(const ExperimentSpec& spec, const std::string& out_dir) {
  const SimConfig& cfg = spec.sim;
  cfg.validate();
  SteadyOutcome out;
  SteadyState last;
  GummelOptions opt;
  opt.last_iterate = &last;
  try {
    out.state = solve_steady_np(cfg.grid, cfg.bd, cfg.params, opt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::GummelDivergence && e.kind() != ErrorKind::NonConvergence) throw;
    out.status = std::string("stalled: ") + e.what();
    out.state = last;
    steady_residuals(out.state, cfg.bd, cfg.params);
  }
  out.ubstar = verify_ubstar(out.state, cfg.bd, cfg.params);
  out.pb_max_diff = kNaN;
  if (const auto Z = equilibrium_constants(cfg.bd, 1e-10)) {
    out.equilibrium = true;
    const SteadyState b = boltzmann_state(cfg.grid, *Z, cfg.bd.W, cfg.params.eps);
    double d = 0.0;
    for (std::size_t k = 0; k < cfg.grid.cells(); ++k) {
      d = std::max(d, std::abs(b.c1[k] - out.state.c1[k]));
      d = std::max(d, std::abs(b.c2[k] - out.state.c2[k]));
      d = std::max(d, std::abs(b.phi[k] - out.state.phi[k]));
    }
    out.pb_max_diff = d;
  }
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    checkpoint_save_steady(join_path(out_dir, "steady.ckpt"), out.state, cfg.params.eps);
    write_text_file(join_path(out_dir, "steady_report.csv"),
                    csv_line({"sweeps", "residual_poisson", "residual_np", "ub_scaled_margin", "ub_potential_margin",
                              "ub_envelope_margin", "pb_max_diff", "status"}) +
                        csv_line({std::to_string(out.state.sweeps), fd(out.state.residual_poisson),
                                  fd(out.state.residual_np), fd(out.ubstar.scaled.worst_margin),
                                  fd(out.ubstar.potential.worst_margin), fd(out.ubstar.envelope.worst_margin),
                                  fd(out.pb_max_diff), "\"" + out.status + "\""}));
  }
  CheckList& ck = out.checks;
  ck.require(out.status == "ok", "steady: Gummel iteration " + out.status);
  ck.require(out.state.residual_poisson <= 1e-8 && out.state.residual_np <= 1e-8, "steady: residuals above 1e-8");
  ck.require(out.ubstar.all_pass(), "steady: a priori bounds violated");
  if (out.equilibrium) ck.require(out.pb_max_diff <= 1e-7, "steady: Gummel and Poisson-Boltzmann differ by > 1e-7");
  return out;
}

// ---------------------------------------------------------------------------

TangentOutcome experiment_tangent(const ExperimentSpec& spec, const std::string& out_dir) {
  TangentOutcome out;
  SimConfig cfg = spec.sim;
  cfg.output.dir.clear();
  out.run = analyze_tangent(cfg, spec.tangent);
  if (spec.defect.enabled) out.defect = linearization_defect(cfg, spec.defect.horizon, spec.defect.r, spec.defect.seed);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_text_file(join_path(out_dir, "dimension.csv"), dimension_csv(out.run.table));
    std::string s = csv_line({"j", "sigma", "sigma_half_window"});
    for (std::size_t j = 0; j < out.run.rates.sigma.size(); ++j)
      s += csv_line({std::to_string(j + 1), fd(out.run.rates.sigma[j]),
                     j < out.run.rates_half.sigma.size() ? fd(out.run.rates_half.sigma[j]) : fd(kNaN)});
    write_text_file(join_path(out_dir, "sigma.csv"), s);
    write_text_file(join_path(out_dir, "tangent_summary.csv"),
                    csv_line({"modes", "cycles", "min_log_gram_det", "stabilized", "n_star"}) +
                        csv_line({std::to_string(spec.tangent.modes), std::to_string(out.run.cycles),
                                  fd(out.run.min_log_gram_det), out.run.stabilized ? "1" : "0",
                                  out.run.table.n_star ? std::to_string(*out.run.table.n_star) : "NotReached"}));
    if (!out.defect.empty()) {
      std::string d = csv_line({"r", "defect", "defect_over_r2"});
      for (const auto& r : out.defect) d += csv_line({fd(r.r), fd(r.defect), fd(r.scaled)});
      write_text_file(join_path(out_dir, "defect.csv"), d);
    }
  }
  CheckList& ck = out.checks;
  ck.require(std::isfinite(out.run.min_log_gram_det), "tangent: a Gram determinant vanished");
  ck.require(out.run.table.n_star.has_value(), "tangent: N* not reached within the bundle");
  for (std::size_t k = 1; k < out.defect.size(); ++k)
    ck.require(std::abs(out.defect[k].scaled / out.defect[k - 1].scaled - 1.0) < 0.3,
               "tangent: defect/r^2 changed by 30% or more between r = " + fd(out.defect[k - 1].r) + " and " +
                   fd(out.defect[k].r));
  return out;
}

// ---------------------------------------------------------------------------

PairOutcome experiment_pair_diff(const ExperimentSpec& spec, const std::string& out_dir) {
  SimConfig a = spec.sim, b = spec.sim;
  b.init = spec.pair.init_b;
  b.seed = spec.pair.seed_b;
  a.output.dir = out_dir.empty() ? std::string() : join_path(out_dir, "run_a");
  b.output.dir = out_dir.empty() ? std::string() : join_path(out_dir, "run_b");
  // Identical initial data are rejected before any time stepping.
  const State sa = initial_state(a), sb = initial_state(b);
  dirichlet_quotient(sa, sb, a.params);
  RunOptions opt;
  opt.keep_states = true;
  const Trajectory ta = run(a, opt), tb = run(b, opt);
  if (ta.states.size() != tb.states.size()) throw Error(ErrorKind::Mismatch, "trajectories have different lengths");
  PairOutcome out;
  for (std::size_t k = 0; k < ta.states.size(); ++k)
    out.rows.push_back({ta.states[k].t, dirichlet_quotient(ta.states[k], tb.states[k], a.params)});
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::string csv = csv_line({"t", "E0", "E1", "ratio"});
    for (const auto& r : out.rows) csv += csv_line({fd(r.t), fd(r.q.E0), fd(r.q.E1), fd(r.q.ratio)});
    write_text_file(join_path(out_dir, "pair_diff.csv"), csv);
  }
  bool pos = true, fin = true;
  for (const auto& r : out.rows) {
    pos = pos && r.q.E0 > 0.0;
    fin = fin && std::isfinite(r.q.ratio);
  }
  out.checks.require(pos, "pair: E0 vanished");
  out.checks.require(fin, "pair: ratio not finite");
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct FieldErrors {
  double c = 0.0, phi = 0.0, u = 0.0;
};

double interior_velocity_diff(const VectorField& a, const VectorField& b) {
  const Grid& g = a.grid;
  double m = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) m = std::max(m, std::abs(a.ux[g.xface(i, j)] - b.ux[g.xface(i, j)]));
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) m = std::max(m, std::abs(a.uy[g.yface(i, j)] - b.uy[g.yface(i, j)]));
  return m;
}

FieldErrors state_diff(const State& a, const State& b, const VectorField& ub) {
  FieldErrors e;
  for (std::size_t k = 0; k < a.c1.size(); ++k) {
    e.c = std::max({e.c, std::abs(a.c1[k] - b.c1[k]), std::abs(a.c2[k] - b.c2[k])});
    e.phi = std::max(e.phi, std::abs(a.phi[k] - b.phi[k]));
  }
  e.u = interior_velocity_diff(a.u, ub);
  return e;
}

State manufactured_final(const SimConfig& base, const Grid& g, bool steady, double dt, double t_end) {
  SimConfig cfg;
  cfg.grid = g;
  cfg.params = base.params;
  const ManufacturedSolution m(g, cfg.params, steady);
  cfg.bd = m.boundary();
  cfg.manufactured = true;
  cfg.manufactured_steady = steady;
  cfg.init.kind = InitKind::Manufactured;
  cfg.time.dt = dt;
  cfg.time.t_end = t_end;
  cfg.output.every = t_end;
  RunOptions opt;
  opt.keep_states = true;
  return run(cfg, opt).states.back();
}

}  // namespace

ConvergenceOutcome experiment_convergence(const ExperimentSpec& spec, const std::string& out_dir) {
  const ConvergenceSpec& cs = spec.convergence;
  const Grid& g0 = spec.sim.grid;
  ConvergenceOutcome out;

  // Space: steady manufactured problem, errors against the exact fields.
  for (std::size_t k = 0; k < cs.grids.size(); ++k) {
    const Grid g(cs.grids[k], cs.grids[k], g0.Lx, g0.Ly);
    const State s = manufactured_final(spec.sim, g, true, cs.steady_dt, cs.steady_t_end);
    const ManufacturedSolution m(g, spec.sim.params, true);
    const FieldErrors e = state_diff(s, m.exact_state(0.0), m.exact_velocity(0.0));
    ConvergenceRow r{g.hx(), e.c, e.phi, e.u, kNaN, kNaN, kNaN};
    if (k > 0) {
      const ConvergenceRow& p = out.space.back();
      const double ratio = p.h_or_dt / r.h_or_dt;
      r.order_c = order(p.err_c, r.err_c, ratio);
      r.order_phi = order(p.err_phi, r.err_phi, ratio);
      r.order_u = order(p.err_u, r.err_u, ratio);
    }
    out.space.push_back(r);
  }

  // Time: unsteady manufactured problem on one grid, differences of successive dt.
  const Grid gt(cs.temporal_grid, cs.temporal_grid, g0.Lx, g0.Ly);
  std::vector<State> finals;
  for (double dt : cs.dts) finals.push_back(manufactured_final(spec.sim, gt, false, dt, cs.temporal_t_end));
  for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
    const FieldErrors e = state_diff(finals[k], finals[k + 1], finals[k + 1].u);
    ConvergenceRow r{cs.dts[k], e.c, e.phi, e.u, kNaN, kNaN, kNaN};
    if (k > 0) {
      const ConvergenceRow& p = out.time.back();
      const double ratio = p.h_or_dt / r.h_or_dt;
      r.order_c = order(p.err_c, r.err_c, ratio);
      r.order_phi = order(p.err_phi, r.err_phi, ratio);
      r.order_u = order(p.err_u, r.err_u, ratio);
    }
    out.time.push_back(r);
  }

  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    auto table = [&](const char* first, const std::vector<ConvergenceRow>& rows) {
      std::string csv = csv_line({first, "err_c", "err_phi", "err_u", "order_c", "order_phi", "order_u"});
      for (const auto& r : rows)
        csv += csv_line({fd(r.h_or_dt), fd(r.err_c), fd(r.err_phi), fd(r.err_u), fd(r.order_c), fd(r.order_phi),
                         fd(r.order_u)});
      return csv;
    };
    write_text_file(join_path(out_dir, "convergence_space.csv"), table("h", out.space));
    write_text_file(join_path(out_dir, "convergence_time.csv"), table("dt", out.time));
  }

  CheckList& ck = out.checks;
  const ConvergenceRow& s = out.space.back();
  ck.require(std::abs(s.order_c - 2.0) <= 0.3, "convergence: spatial order of c is " + fd(s.order_c));
  ck.require(std::abs(s.order_phi - 2.0) <= 0.3, "convergence: spatial order of Phi is " + fd(s.order_phi));
  ck.require(s.order_u >= 1.0, "convergence: spatial order of u is " + fd(s.order_u));
  if (out.time.size() >= 2) {
    const ConvergenceRow& t = out.time.back();
    ck.require(std::abs(t.order_c - 1.0) <= 0.2, "convergence: temporal order of c is " + fd(t.order_c));
  } else {
    ck.require(false, "convergence: temporal study needs at least three dt values");
  }
  return out;
}

// ---------------------------------------------------------------------------

CheckList run_experiment(const ExperimentSpec& spec, const std::string& out_dir) {
  switch (spec.kind) {
    case ExperimentKind::Run: return experiment_run(spec, out_dir).checks;
    case ExperimentKind::SweepEps: return experiment_sweep_eps(spec, out_dir).checks;
    case ExperimentKind::Steady: return experiment_steady(spec, out_dir).checks;
    case ExperimentKind::TangentDim: return experiment_tangent(spec, out_dir).checks;
    case ExperimentKind::PairDiff: return experiment_pair_diff(spec, out_dir).checks;
    case ExperimentKind::Convergence: return experiment_convergence(spec, out_dir).checks;
  }
  return {};
}

}  // namespace nps
