#include "nps/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "nps/errors.hpp"
#include "nps/kernels.hpp"
#include "nps/operators.hpp"
#include "nps/transport.hpp"

namespace nps {

namespace {

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

ScalarField solve_nonlinear_poisson(const ScalarField& a1, const ScalarField& a2, const BoundaryTrace& W, double eps,
                                    const ScalarField* phi0, SolverReport* report, std::vector<double>* energies) {
  const Grid& g = a1.grid;
  const int n = static_cast<int>(g.cells());
  const SpMat A = LaplaceSolver::get(g)->matrix();
  Vec bw = Vec::Zero(n);
  add_dirichlet_rhs(g, W, 1.0, {bw.data(), g.cells()});
  Vec phi(n);
  if (phi0) {
    for (int k = 0; k < n; ++k) phi[k] = (*phi0)[k];
  } else {
    const ScalarField h = harmonic_extension(g, W);
    for (int k = 0; k < n; ++k) phi[k] = h[k];
  }

  auto energy = [&](const Vec& x) {
    const Vec ax = A * x;
    double e = 0.0;
    for (int k = 0; k < n; ++k) e += 0.5 * eps * x[k] * ax[k] - eps * bw[k] * x[k] + a1[k] * std::exp(-x[k]) + a2[k] * std::exp(x[k]);
    return e;
  };
  auto gradient = [&](const Vec& x, double* scale) {
    Vec f = eps * (A * x - bw);
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double e1 = a1[k] * std::exp(-x[k]), e2 = a2[k] * std::exp(x[k]);
      f[k] += -e1 + e2;
      s = std::max(s, e1 + e2);
    }
    *scale = 1.0 + s;
    return f;
  };

  Eigen::SimplicialLDLT<SpMat> ldlt;
  SpMat J = eps * A;
  ldlt.analyzePattern(J);
  SolverReport rep;
  double e = energy(phi);
  if (energies) energies->push_back(e);
  const double tol = 1e-10;
  for (int it = 0; it < 100; ++it) {
    double scale = 1.0;
    const Vec f = gradient(phi, &scale);
    rep.residual_l2 = f.lpNorm<Eigen::Infinity>() / scale;
    if (rep.residual_l2 <= tol) {
      rep.converged = true;
      break;
    }
    J = eps * A;
    for (int k = 0; k < n; ++k) J.coeffRef(k, k) += a1[k] * std::exp(-phi[k]) + a2[k] * std::exp(phi[k]);
    ldlt.factorize(J);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::LinearSolveFailure, "Poisson-Boltzmann Jacobian factorization failed");
    const Vec d = -ldlt.solve(f);
    const double slope = f.dot(d);
    double alpha = 1.0;
    Vec trial = phi + d;
    double et = energy(trial);
    // At round-off level the energy cannot resolve the decrease; take the full step.
    const bool tiny = std::abs(slope) <= 1e-13 * (1.0 + std::abs(e));
    while (!tiny && !(et <= e + 1e-4 * alpha * slope)) {
      alpha *= 0.5;
      if (alpha < std::ldexp(1.0, -20)) throw Error(ErrorKind::NewtonStall, "Poisson-Boltzmann damping floor reached");
      trial = phi + alpha * d;
      et = energy(trial);
    }
    phi = trial;
    e = et;
    if (energies) energies->push_back(e);
    rep.iterations = it + 1;
  }
  if (!rep.converged) {
    double scale = 1.0;
    rep.residual_l2 = gradient(phi, &scale).lpNorm<Eigen::Infinity>() / scale;
    rep.converged = rep.residual_l2 <= tol;
  }
  if (report) *report = rep;
  if (!rep.converged) throw Error(ErrorKind::NonConvergence, "Poisson-Boltzmann Newton did not converge");
  ScalarField out(g);
  for (int k = 0; k < n; ++k) out[k] = phi[k];
  return out;
}

std::pair<ScalarField, SolverReport> solve_poisson_boltzmann(const Grid& g, const BoltzmannParams& Z,
                                                             const BoundaryTrace& W, double eps,
                                                             std::vector<double>* energies) {
  if (!(Z.Z1 > 0.0) || !(Z.Z2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "Z1, Z2 must be positive");
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  if (!W.matches(g)) throw Error(ErrorKind::InvalidArgument, "trace does not match the grid");
  SolverReport rep;
  ScalarField phi = solve_nonlinear_poisson(ScalarField(g, 1.0 / Z.Z1), ScalarField(g, 1.0 / Z.Z2), W, eps, nullptr,
                                            &rep, energies);
  return {std::move(phi), rep};
}

SteadyState boltzmann_state(const Grid& g, const BoltzmannParams& Z, const BoundaryTrace& W, double eps) {
  SteadyState s;
  s.phi = solve_poisson_boltzmann(g, Z, W, eps).first;
  s.c1 = ScalarField(g);
  s.c2 = ScalarField(g);
  for (std::size_t k = 0; k < g.cells(); ++k) {
    s.c1[k] = std::exp(-s.phi[k]) / Z.Z1;
    s.c2[k] = std::exp(s.phi[k]) / Z.Z2;
  }
  return s;
}

std::optional<BoltzmannParams> equilibrium_constants(const BoundaryData& bd, double tol) {
  double out[2];
  for (int s = 0; s < 2; ++s) {
    const double z = Params::z(s);
    const BoundaryTrace m = bd.gamma(s).combine(bd.W, [z](double gam, double w) { return std::log(gam) + z * w; });
    if (m.max() - m.min() > tol * (1.0 + std::abs(m.max()))) return std::nullopt;
    out[s] = std::exp(-0.5 * (m.max() + m.min()));
  }
  return BoltzmannParams{out[0], out[1]};
}

void steady_residuals(SteadyState& s, const BoundaryData& bd, const Params& p) {
  const Grid& g = s.phi.grid;
  ScalarField lap(g);
  kernels::laplacian_apply(g, s.phi.span(), bd.W, lap.values);
  double rp = 0.0;
  for (std::size_t k = 0; k < g.cells(); ++k) rp = std::max(rp, std::abs(-p.eps * lap[k] - (s.c1[k] - s.c2[k])));
  s.residual_poisson = rp;
  const VectorField zero(g);
  s.residual_np = std::max(max_abs(sg_divergence(s.c1, s.phi, zero, bd.W, bd.gamma1, 1.0, p.D1)),
                           max_abs(sg_divergence(s.c2, s.phi, zero, bd.W, bd.gamma2, -1.0, p.D2)));
}

SteadyState solve_steady_np(const Grid& g, const BoundaryData& bd, const Params& p, const GummelOptions& opt) {
  p.validate();
  bd.validate(g);
  SteadyState it;
  if (opt.initial) {
    it = *opt.initial;
  } else {
    it.phi = harmonic_extension(g, bd.W);
    it.c1 = harmonic_extension(g, bd.gamma1);
    it.c2 = harmonic_extension(g, bd.gamma2);
  }
  const VectorField zero(g);
  double prev = std::numeric_limits<double>::infinity();
  int increases = 0;
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    // Potential update with the Boltzmann-linearized charge around the current iterate.
    ScalarField a1(g), a2(g);
    for (std::size_t k = 0; k < g.cells(); ++k) {
      a1[k] = it.c1[k] * std::exp(it.phi[k]);
      a2[k] = it.c2[k] * std::exp(-it.phi[k]);
    }
    SolverReport rep;
    it.phi = solve_nonlinear_poisson(a1, a2, bd.W, p.eps, &it.phi, &rep);
    it.c1 = sg_linear_solve(it.phi, zero, bd.W, bd.gamma1, 1.0, p.D1, 0.0, nullptr);
    it.c2 = sg_linear_solve(it.phi, zero, bd.W, bd.gamma2, -1.0, p.D2, 0.0, nullptr);
    it.sweeps = sweep;
    steady_residuals(it, bd, p);
    if (opt.last_iterate) *opt.last_iterate = it;
    const double res = std::max(it.residual_poisson, it.residual_np);
    if (res <= opt.tolerance) return it;
    increases = res > prev ? increases + 1 : 0;
    if (increases >= 5) throw Error(ErrorKind::GummelDivergence, "Gummel residual increased over 5 consecutive sweeps");
    prev = res;
  }
  throw Error(ErrorKind::NonConvergence, "Gummel iteration reached the sweep limit");
}

UbStarReport verify_ubstar(const SteadyState& s, const BoundaryData& bd, const Params& p, double slack) {
  (void)p;
  const Grid& g = s.phi.grid;
  UbStarReport rep;
  auto update = [slack](BoundCheck& b, double margin, std::size_t k, int species) {
    if (margin < b.worst_margin) {
      b.worst_margin = margin;
      b.worst_cell = k;
      b.worst_species = species;
    }
    if (margin < -slack) b.pass = false;
  };
  for (auto* b : {&rep.scaled, &rep.potential, &rep.envelope}) b->worst_margin = std::numeric_limits<double>::infinity();
  double lam[2], Lam[2];
  for (int sp = 0; sp < 2; ++sp) {
    const double z = Params::z(sp);
    const BoundaryTrace m = bd.gamma(sp).combine(bd.W, [z](double gam, double w) { return gam * std::exp(z * w); });
    lam[sp] = m.min();
    Lam[sp] = m.max();
  }
  const double phi_lo = std::min(bd.W.min(), 0.5 * std::log(lam[0] / Lam[1]));
  const double phi_hi = std::max(bd.W.max(), 0.5 * std::log(Lam[0] / lam[1]));
  const double glo = bd.gamma_min(), ghi = bd.gamma_max();
  for (std::size_t k = 0; k < g.cells(); ++k) {
    for (int sp = 0; sp < 2; ++sp) {
      const double c = s.c(sp)[k];
      const double v = c * std::exp(Params::z(sp) * s.phi[k]);
      update(rep.scaled, std::min(v - lam[sp], Lam[sp] - v), k, sp);
      update(rep.envelope, std::min(c - glo, ghi - c), k, sp);
    }
    update(rep.potential, std::min(s.phi[k] - phi_lo, phi_hi - s.phi[k]), k, 0);
  }
  return rep;
}

}  // namespace nps
