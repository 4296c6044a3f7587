#include "nps/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "nps/elliptic.hpp"
#include "nps/errors.hpp"
#include "nps/kernels.hpp"
#include "nps/mesh.hpp"

namespace nps {

std::array<double, 16> record_values(const DiagnosticsRecord& r) {
  return {r.t,         r.F,            r.P,      r.kinetic,     r.l2_c1, r.l2_c2, r.h1_c1, r.h1_c2,
          r.rho_l2_sq, r.rho_l3_cubed, r.u_V_sq, r.grad_phi_l2, r.M,     r.m,     r.E_rel, r.mu_dissipation};
}

double coulomb_energy(const State& s, const Params& p) {
  const ScalarField phi = inv_dirichlet_laplacian(s.rho);
  return kernels::cell_dot(s.grid(), s.rho.span(), phi.span()) / (2.0 * p.eps);
}

double energy_F(const State& s, const Params& p) {
  const Grid& g = s.grid();
  const double u2 = kernels::velocity_dot(g, s.u, s.u);
  const double c2 = kernels::cell_dot(g, s.c1.span(), s.c1.span()) + kernels::cell_dot(g, s.c2.span(), s.c2.span());
  return u2 / (2.0 * p.K) + coulomb_energy(s, p) + p.delta * c2;
}

namespace {

// c* psi(c/c*) = c log(c/c*) - c + c*, written to stay accurate near c = c*.
double entropy_density(double c, double cs) {
  const double x = (c - cs) / cs;
  return cs * ((1.0 + x) * std::log1p(x) - x);
}

}  // namespace

RelativeEntropy relative_entropy(const State& s, const SteadyState& steady, const BoundaryData& bd, const Params& p) {
  const Grid& g = s.grid();
  if (!(s.c1.min() > 0.0) || !(s.c2.min() > 0.0) || !(steady.c1.min() > 0.0) || !(steady.c2.min() > 0.0))
    throw Error(ErrorKind::NonpositiveConcentration, "relative entropy needs positive concentrations");
  RelativeEntropy out;
  double ent = 0.0;
  for (int sp = 0; sp < 2; ++sp)
    for (std::size_t k = 0; k < g.cells(); ++k) ent += entropy_density(s.c(sp)[k], steady.c(sp)[k]);
  ent *= g.cell_volume();
  const ScalarField dphi = s.phi - steady.phi;
  const BoundaryTrace zero = BoundaryTrace::zero(g);
  const double grad = kernels::gradient_dot(g, dphi.span(), &zero, dphi.span(), &zero);
  out.E_rel = ent + 0.5 * p.eps * grad + kernels::velocity_dot(g, s.u, s.u) / (2.0 * p.K);

  // sum_i (D_i/2) int c_i |grad(mu_i - mu_i*)|^2 on faces; mu_i - mu_i* vanishes on the wall.
  double diss = 0.0;
  for (int sp = 0; sp < 2; ++sp) {
    const double z = Params::z(sp);
    const ScalarField& c = s.c(sp);
    const ScalarField& cs = steady.c(sp);
    const BoundaryTrace& gam = bd.gamma(sp);
    ScalarField w(g);
    for (std::size_t k = 0; k < g.cells(); ++k) w[k] = std::log(c[k] / cs[k]) + z * (s.phi[k] - steady.phi[k]);
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i <= g.nx; ++i) {
        double cf, dw, wt = 1.0;
        const double h = g.hx();
        if (i == 0) {
          cf = 0.5 * (c(0, j) + gam.left[j]);
          dw = w(0, j) / (0.5 * h);
          wt = 0.5;
        } else if (i == g.nx) {
          cf = 0.5 * (c(g.nx - 1, j) + gam.right[j]);
          dw = -w(g.nx - 1, j) / (0.5 * h);
          wt = 0.5;
        } else {
          cf = 0.5 * (c(i, j) + c(i - 1, j));
          dw = (w(i, j) - w(i - 1, j)) / h;
        }
        acc += wt * cf * dw * dw;
      }
    }
    for (int j = 0; j <= g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        double cf, dw, wt = 1.0;
        const double h = g.hy();
        if (j == 0) {
          cf = 0.5 * (c(i, 0) + gam.bottom[i]);
          dw = w(i, 0) / (0.5 * h);
          wt = 0.5;
        } else if (j == g.ny) {
          cf = 0.5 * (c(i, g.ny - 1) + gam.top[i]);
          dw = -w(i, g.ny - 1) / (0.5 * h);
          wt = 0.5;
        } else {
          cf = 0.5 * (c(i, j) + c(i, j - 1));
          dw = (w(i, j) - w(i, j - 1)) / h;
        }
        acc += wt * cf * dw * dw;
      }
    }
    diss += 0.5 * p.D(sp) * acc * g.cell_volume();
  }
  out.mu_dissipation = diss;
  return out;
}

Envelope linf_envelope(const State& s) {
  return {std::max(s.c1.max(), s.c2.max()), std::min(s.c1.min(), s.c2.min())};
}

DiagnosticsRecord diagnose(const State& s, const BoundaryData& bd, const Params& p, const SteadyState* steady) {
  const Grid& g = s.grid();
  DiagnosticsRecord r;
  r.t = s.t;
  r.P = coulomb_energy(s, p);
  const double u2 = kernels::velocity_dot(g, s.u, s.u);
  r.kinetic = 0.5 * u2;
  const Norms n1 = norms(s.c1, &bd.gamma1), n2 = norms(s.c2, &bd.gamma2);
  r.l2_c1 = n1.l2_sq;
  r.l2_c2 = n2.l2_sq;
  r.h1_c1 = n1.h1semi_sq;
  r.h1_c2 = n2.h1semi_sq;
  r.F = u2 / (2.0 * p.K) + r.P + p.delta * (r.l2_c1 + r.l2_c2);
  r.rho_l2_sq = kernels::cell_dot(g, s.rho.span(), s.rho.span());
  r.rho_l3_cubed = kernels::cell_abs_cubed(g, s.rho.span());
  r.u_V_sq = kernels::velocity_gradient_dot(g, s.u, s.u);
  r.grad_phi_l2 = std::sqrt(kernels::gradient_dot(g, s.phi.span(), &bd.W, s.phi.span(), &bd.W));
  const Envelope e = linf_envelope(s);
  r.M = e.M;
  r.m = e.m;
  if (steady) {
    const RelativeEntropy re = relative_entropy(s, *steady, bd, p);
    r.E_rel = re.E_rel;
    r.mu_dissipation = re.mu_dissipation;
  } else {
    r.E_rel = std::numeric_limits<double>::quiet_NaN();
    r.mu_dissipation = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double electroneutrality_average(const Trajectory& traj, double T, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "window length must be positive");
  const auto& rows = traj.rows;
  const double a = T, b = T + tau;
  const double slack = 1e-9 * std::max(1.0, std::abs(b));
  if (rows.size() < 2 || rows.front().t > a + slack || rows.back().t < b - slack)
    throw Error(ErrorKind::InsufficientWindow, "trajectory does not cover the averaging window");
  auto value_at = [&](double t) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].t >= t) {
        const double w = (t - rows[i - 1].t) / (rows[i].t - rows[i - 1].t);
        return (1.0 - w) * rows[i - 1].rho_l2_sq + w * rows[i].rho_l2_sq;
      }
    }
    return rows.back().rho_l2_sq;
  };
  double acc = 0.0, tprev = a, vprev = value_at(a);
  for (const auto& r : rows) {
    if (r.t <= a) continue;
    if (r.t >= b) break;
    acc += 0.5 * (vprev + r.rho_l2_sq) * (r.t - tprev);
    tprev = r.t;
    vprev = r.rho_l2_sq;
  }
  acc += 0.5 * (vprev + value_at(b)) * (b - tprev);
  return acc / tau;
}

std::vector<DissipationRow> dissipation_residual(const std::vector<DiagnosticsRecord>& rows) {
  if (rows.size() < 3) throw Error(ErrorKind::InsufficientWindow, "need at least 3 rows");
  std::vector<DissipationRow> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == rows.size() ? i : i + 1;
    DissipationRow& d = out[i];
    d.t = rows[i].t;
    d.dFdt = (rows[hi].F - rows[lo].F) / (rows[hi].t - rows[lo].t);
    d.u_V_sq = rows[i].u_V_sq;
    d.sum_h1_c = rows[i].h1_c1 + rows[i].h1_c2;
    d.rho_l3_cubed = rows[i].rho_l3_cubed;
  }
  return out;
}

DirichletQuotient dirichlet_quotient(const State& a, const State& b, const Params& p) {
  const Grid& g = a.grid();
  if (!(b.grid() == g)) throw Error(ErrorKind::Mismatch, "states live on different grids");
  const ScalarField d1 = a.c1 - b.c1, d2 = a.c2 - b.c2;
  const VectorField du = a.u - b.u;
  const BoundaryTrace zero = BoundaryTrace::zero(g);
  DirichletQuotient q;
  q.E0 = kernels::cell_dot(g, d1.span(), d1.span()) + kernels::cell_dot(g, d2.span(), d2.span()) +
         kernels::velocity_dot(g, du, du);
  if (!(q.E0 > 0.0)) throw Error(ErrorKind::IdenticalStates, "states coincide");
  q.E1 = p.D1 * kernels::gradient_dot(g, d1.span(), &zero, d1.span(), &zero) +
         p.D2 * kernels::gradient_dot(g, d2.span(), &zero, d2.span(), &zero) +
         p.nu * kernels::velocity_gradient_dot(g, du, du);
  q.ratio = q.E1 / q.E0;
  return q;
}

std::optional<double> transient_end(const std::vector<DiagnosticsRecord>& rows, double t_end, double rel,
                                    double window_frac) {
  const double w = window_frac * t_end;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double t0 = rows[i].t, f0 = rows[i].F;
    if (rows.back().t < t0 + w - 1e-12 * std::max(1.0, t_end)) return std::nullopt;
    bool flat = true;
    for (std::size_t j = i + 1; j < rows.size() && rows[j].t <= t0 + w + 1e-12 * std::max(1.0, t_end); ++j)
      if (std::abs(rows[j].F - f0) > rel * std::abs(f0)) {
        flat = false;
        break;
      }
    if (flat) return t0;
  }
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& rows) {
  std::string out;
  for (std::size_t c = 0; c < kDiagnosticsColumns.size(); ++c) {
    if (c) out += ',';
    out += kDiagnosticsColumns[c];
  }
  out += '\n';
  for (const auto& r : rows) {
    const auto v = record_values(r);
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (c) out += ',';
      out += format_double(v[c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace nps
