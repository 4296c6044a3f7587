#include "nps/transport.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nps/elliptic.hpp"
#include "nps/errors.hpp"
#include "nps/mesh.hpp"

namespace nps {

double bernoulli(double s) {
  if (std::abs(s) < 1e-5) return 1.0 - 0.5 * s + s * s / 12.0;
  return s / std::expm1(s);
}

double bernoulli_derivative(double s) {
  if (std::abs(s) < 1e-3) return -0.5 + s / 6.0 - s * s * s / 180.0;
  const double b = bernoulli(s);
  return b * (1.0 - b) / s - b;
}

double sg_flux(double cL, double cR, double dV, double D, double h) {
  return (D / h) * (bernoulli(dV) * cL - bernoulli(-dV) * cR);
}

State make_state(ScalarField c1, ScalarField c2, VectorField u, const BoundaryData& bd, const Params& p, double t) {
  p.validate();
  const Grid g = c1.grid;
  bd.validate(g);
  if (!(c2.grid == g) || !(u.grid == g)) throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
  if (!c1.all_finite() || !c2.all_finite() || !u.all_finite())
    throw Error(ErrorKind::InvalidArgument, "state fields must be finite");
  if (c1.min() < 0.0 || c2.min() < 0.0) throw Error(ErrorKind::NonpositiveConcentration, "negative concentration");
  State s;
  s.t = t;
  s.rho = c1 - c2;
  auto [phi, rep] = solve_potential(s.rho, bd.W, p.eps);
  if (!rep.converged) throw Error(ErrorKind::NonConvergence, "potential solve did not converge");
  s.c1 = std::move(c1);
  s.c2 = std::move(c2);
  s.u = std::move(u);
  s.phi = std::move(phi);
  return s;
}

namespace {

// One of the four faces of a cell. n < 0 marks a wall face.
struct Face {
  int n;
  double d;      // centre-to-centre (or centre-to-wall) distance
  double h;      // cell width normal to the face
  double u_out;  // outward normal velocity
  double wall_index;
};

enum Dir { West = 0, East = 1, South = 2, North = 3 };

inline Face face_of(const Grid& g, const VectorField& u, int i, int j, int dir) {
  const double hx = g.hx(), hy = g.hy();
  switch (dir) {
    case West:
      if (i == 0) return {-1, 0.5 * hx, hx, 0.0, static_cast<double>(j)};
      return {static_cast<int>(g.cell(i - 1, j)), hx, hx, -u.ux[g.xface(i, j)], 0};
    case East:
      if (i == g.nx - 1) return {-1, 0.5 * hx, hx, 0.0, static_cast<double>(j)};
      return {static_cast<int>(g.cell(i + 1, j)), hx, hx, u.ux[g.xface(i + 1, j)], 0};
    case South:
      if (j == 0) return {-1, 0.5 * hy, hy, 0.0, static_cast<double>(i)};
      return {static_cast<int>(g.cell(i, j - 1)), hy, hy, -u.uy[g.yface(i, j)], 0};
    default:
      if (j == g.ny - 1) return {-1, 0.5 * hy, hy, 0.0, static_cast<double>(i)};
      return {static_cast<int>(g.cell(i, j + 1)), hy, hy, u.uy[g.yface(i, j + 1)], 0};
  }
}

inline double wall_value(const BoundaryTrace& t, int dir, int idx) {
  switch (dir) {
    case West: return t.left[idx];
    case East: return t.right[idx];
    case South: return t.bottom[idx];
    default: return t.top[idx];
  }
}

// Outward normal velocity on a face, without the wall shortcut (used for du).
inline double outward(const Grid& g, const VectorField& u, int i, int j, int dir) {
  switch (dir) {
    case West: return -u.ux[g.xface(i, j)];
    case East: return u.ux[g.xface(i + 1, j)];
    case South: return -u.uy[g.yface(i, j)];
    default: return u.uy[g.yface(i, j + 1)];
  }
}

constexpr int kSlotsPerCell = 27;
// c-row of species s: base 10*s; [0] diag, [1+dir] c neighbour, [5] Phi_k, [6+dir] Phi neighbour.
// Phi-row: base 20; [0] Phi_k, [1+dir] Phi neighbour, [5] c1_k, [6] c2_k.

}  // namespace

ScalarField sg_linear_solve(const ScalarField& phi, const VectorField& u, const BoundaryTrace& W,
                            const BoundaryTrace& gamma, double z, double D, double inv_dt, const ScalarField* c_old) {
  const Grid& g = phi.grid;
  const int n = static_cast<int>(g.cells());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * g.cells());
  Vec b(n);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = static_cast<int>(g.cell(i, j));
      double diag = inv_dt;
      double rhs = inv_dt > 0.0 ? inv_dt * (*c_old)[k] : 0.0;
      for (int dir = 0; dir < 4; ++dir) {
        const Face f = face_of(g, u, i, j, dir);
        const int w = static_cast<int>(f.wall_index);
        const double phin = f.n >= 0 ? phi[f.n] : wall_value(W, dir, w);
        const double sig = z * (phin - phi[k]) - f.u_out * f.d / D;
        const double G = D / (f.d * f.h);
        diag += G * bernoulli(sig);
        if (f.n >= 0)
          trip.emplace_back(k, f.n, -G * bernoulli(-sig));
        else
          rhs += G * bernoulli(-sig) * wall_value(gamma, dir, w);
      }
      trip.emplace_back(k, k, diag);
      b[k] = rhs;
    }
  }
  SpMat a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  SparseLU lu;
  lu.compute(a);
  const Vec x = lu.solve(b);
  ScalarField c(g);
  for (int k = 0; k < n; ++k) c[k] = x[k];
  return c;
}

ScalarField sg_divergence(const ScalarField& c, const ScalarField& phi, const VectorField& u, const BoundaryTrace& W,
                          const BoundaryTrace& gamma, double z, double D) {
  const Grid& g = c.grid;
  ScalarField out(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = static_cast<int>(g.cell(i, j));
      double r = 0.0;
      for (int dir = 0; dir < 4; ++dir) {
        const Face f = face_of(g, u, i, j, dir);
        const int w = static_cast<int>(f.wall_index);
        const double phin = f.n >= 0 ? phi[f.n] : wall_value(W, dir, w);
        const double cn = f.n >= 0 ? c[f.n] : wall_value(gamma, dir, w);
        const double sig = z * (phin - phi[k]) - f.u_out * f.d / D;
        r += D / (f.d * f.h) * (bernoulli(sig) * c[k] - bernoulli(-sig) * cn);
      }
      out[k] = r;
    }
  }
  return out;
}

std::pair<ScalarField, ScalarField> np_step(const State& state, double dt, const BoundaryData& bd, const Params& p) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  const Grid& g = state.grid();
  bd.validate(g);
  ScalarField out[2];
  for (int s = 0; s < 2; ++s)
    out[s] = sg_linear_solve(state.phi, state.u, bd.W, bd.gamma(s), Params::z(s), p.D(s), 1.0 / dt, &state.c(s));
  for (auto& c : out) {
    for (auto& v : c.values) {
      if (v < -1e-12) throw Error(ErrorKind::NonpositiveConcentration, "negative concentration after transport step");
      v = std::max(v, 0.0);
    }
  }
  const ScalarField div = discrete_divergence(state.u);
  if (std::max(std::abs(div.min()), std::abs(div.max())) <= 1e-9) {
    const double lo = std::min({state.c1.min(), state.c2.min(), bd.gamma_min()}) - 1e-10;
    const double hi = std::max({state.c1.max(), state.c2.max(), bd.gamma_max()}) + 1e-10;
    for (const auto& c : out)
      if (c.min() < lo || c.max() > hi)
        throw Error(ErrorKind::MaxPrincipleViolation, "transport step left the admissible envelope");
  }
  return {std::move(out[0]), std::move(out[1])};
}

std::pair<ScalarField, ScalarField> electrochemical_potentials(const State& state) {
  if (!(state.c1.min() > 0.0) || !(state.c2.min() > 0.0))
    throw Error(ErrorKind::NonpositiveConcentration, "electrochemical potential needs positive concentrations");
  ScalarField mu1(state.grid()), mu2(state.grid());
  for (std::size_t k = 0; k < mu1.size(); ++k) {
    mu1[k] = std::log(state.c1[k]) + state.phi[k];
    mu2[k] = std::log(state.c2[k]) - state.phi[k];
  }
  return {std::move(mu1), std::move(mu2)};
}

// ---------------------------------------------------------------------------

NpPoissonSystem::NpPoissonSystem(const Grid& g, const Params& p, const BoundaryData& bd) : grid_(g), p_(p), bd_(bd) {
  p.validate();
  bd.validate(g);
  const int ncell = static_cast<int>(g.cells());
  std::vector<std::pair<int, int>> slots(static_cast<std::size_t>(kSlotsPerCell) * ncell, {-1, -1});
  const VectorField zero(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = static_cast<int>(g.cell(i, j));
      auto* sl = &slots[static_cast<std::size_t>(kSlotsPerCell) * k];
      for (int s = 0; s < 2; ++s) {
        const int row = 3 * k + s;
        sl[10 * s] = {row, 3 * k + s};
        sl[10 * s + 5] = {row, 3 * k + 2};
        for (int dir = 0; dir < 4; ++dir) {
          const Face f = face_of(g, zero, i, j, dir);
          if (f.n < 0) continue;
          sl[10 * s + 1 + dir] = {row, 3 * f.n + s};
          sl[10 * s + 6 + dir] = {row, 3 * f.n + 2};
        }
      }
      const int row = 3 * k + 2;
      sl[20] = {row, 3 * k + 2};
      for (int dir = 0; dir < 4; ++dir) {
        const Face f = face_of(g, zero, i, j, dir);
        if (f.n >= 0) sl[21 + dir] = {row, 3 * f.n + 2};
      }
      sl[25] = {row, 3 * k};
      sl[26] = {row, 3 * k + 1};
    }
  }
  jac_ = SlotMatrix(3 * ncell, slots);
  // Symbolic analysis waits for the first numeric Jacobian: UMFPACK picks its strategy from the values.
}

Vec NpPoissonSystem::pack(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi) {
  Vec y(3 * c1.size());
  for (std::size_t k = 0; k < c1.size(); ++k) {
    y[3 * k] = c1[k];
    y[3 * k + 1] = c2[k];
    y[3 * k + 2] = phi[k];
  }
  return y;
}

Vec NpPoissonSystem::pack_concentrations(const ScalarField& c1, const ScalarField& c2) {
  Vec y = Vec::Zero(3 * c1.size());
  for (std::size_t k = 0; k < c1.size(); ++k) {
    y[3 * k] = c1[k];
    y[3 * k + 1] = c2[k];
  }
  return y;
}

void NpPoissonSystem::unpack(const Vec& y, ScalarField& c1, ScalarField& c2, ScalarField& phi) const {
  c1 = ScalarField(grid_);
  c2 = ScalarField(grid_);
  phi = ScalarField(grid_);
  for (std::size_t k = 0; k < grid_.cells(); ++k) {
    c1[k] = y[3 * k];
    c2[k] = y[3 * k + 1];
    phi[k] = y[3 * k + 2];
  }
}

void NpPoissonSystem::assemble(const Vec& y, const Vec& c_old, const VectorField& u, double dt, const NpSources* src,
                               Vec& residual, bool with_jacobian) {
  const Grid& g = grid_;
  residual.resize(size());
  const double eps = p_.eps;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = static_cast<int>(g.cell(i, j));
      const std::size_t base = static_cast<std::size_t>(kSlotsPerCell) * k;
      const double phik = y[3 * k + 2];
      Face faces[4];
      double phin[4];
      for (int dir = 0; dir < 4; ++dir) {
        faces[dir] = face_of(g, u, i, j, dir);
        phin[dir] = faces[dir].n >= 0 ? y[3 * faces[dir].n + 2]
                                      : wall_value(bd_.W, dir, static_cast<int>(faces[dir].wall_index));
      }
      for (int s = 0; s < 2; ++s) {
        const double z = Params::z(s), D = p_.D(s);
        const double ck = y[3 * k + s];
        double r = (ck - c_old[3 * k + s]) / dt;
        double diag = 1.0 / dt, dphik = 0.0;
        for (int dir = 0; dir < 4; ++dir) {
          const Face& f = faces[dir];
          const double cn = f.n >= 0 ? y[3 * f.n + s] : wall_value(bd_.gamma(s), dir, static_cast<int>(f.wall_index));
          const double sig = z * (phin[dir] - phik) - f.u_out * f.d / D;
          const double G = D / (f.d * f.h);
          const double bp = bernoulli(sig), bm = bernoulli(-sig);
          r += G * (bp * ck - bm * cn);
          if (with_jacobian) {
            const double dfds = G * (bernoulli_derivative(sig) * ck + bernoulli_derivative(-sig) * cn);
            diag += G * bp;
            dphik -= z * dfds;
            if (f.n >= 0) {
              jac_.set(base + 10 * s + 1 + dir, -G * bm);
              jac_.set(base + 10 * s + 6 + dir, z * dfds);
            }
          }
        }
        if (src) r -= (s == 0 ? src->s1[k] : src->s2[k]);
        residual[3 * k + s] = r;
        if (with_jacobian) {
          jac_.set(base + 10 * s, diag);
          jac_.set(base + 10 * s + 5, dphik);
        }
      }
      double r = -(y[3 * k] - y[3 * k + 1]);
      double diag = 0.0;
      for (int dir = 0; dir < 4; ++dir) {
        const double a = eps / (faces[dir].d * faces[dir].h);
        r += a * (phik - phin[dir]);
        diag += a;
        if (with_jacobian && faces[dir].n >= 0) jac_.set(base + 21 + dir, -a);
      }
      if (src) r -= src->sphi[k];
      residual[3 * k + 2] = r;
      if (with_jacobian) {
        jac_.set(base + 20, diag);
        jac_.set(base + 25, -1.0);
        jac_.set(base + 26, 1.0);
      }
    }
  }
}

Vec NpPoissonSystem::velocity_derivative(const Vec& y, const VectorField& u, const VectorField& du) const {
  const Grid& g = grid_;
  Vec out = Vec::Zero(size());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = static_cast<int>(g.cell(i, j));
      for (int dir = 0; dir < 4; ++dir) {
        const Face f = face_of(g, u, i, j, dir);
        if (f.n < 0) continue;  // wall-normal velocity is pinned at zero
        const double dout = outward(g, du, i, j, dir);
        const double sphi = y[3 * f.n + 2] - y[3 * k + 2];
        for (int s = 0; s < 2; ++s) {
          const double D = p_.D(s);
          const double sig = Params::z(s) * sphi - f.u_out * f.d / D;
          const double ck = y[3 * k + s], cn = y[3 * f.n + s];
          out[3 * k + s] -= (bernoulli_derivative(sig) * ck + bernoulli_derivative(-sig) * cn) / f.h * dout;
        }
      }
    }
  }
  return out;
}

NpPoissonSystem::NewtonReport NpPoissonSystem::solve(Vec& y, const Vec& c_old, const VectorField& u, double dt,
                                                     const NpSources* src) {
  // Chord iteration: the Jacobian is refactorized only when the frozen one stops contracting.
  NewtonReport rep;
  Vec r, rt;
  const int n = size();
  auto refactor = [&] {
    assemble(y, c_old, u, dt, src, r, true);
    try {
      lu_.factorize(jac_.matrix());
    } catch (const Error&) {
      throw Error(ErrorKind::RetryWithSmallerDt, "singular Newton Jacobian");
    }
  };
  refactor();
  bool fresh = true;
  for (int it = 0; it < 60; ++it) {
    const Vec dy = -lu_.solve(r);
    const double rn = r.norm();
    const double ynorm = y.lpNorm<Eigen::Infinity>();
    double alpha = 1.0;
    Vec yt(n);
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      yt = y + alpha * dy;
      bool positive = true;
      for (int k = 0; k < n && positive; k += 3) positive = yt[k] > 0.0 && yt[k + 1] > 0.0;
      if (positive) {
        assemble(yt, c_old, u, dt, src, rt, false);
        const double step = alpha * dy.lpNorm<Eigen::Infinity>();
        if (rt.norm() <= (1.0 - 1e-4 * alpha) * rn || step <= 1e-8 * (1.0 + ynorm)) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
      if (alpha < 1.0 / 1024.0) break;
    }
    if (!accepted) {
      if (fresh) throw Error(ErrorKind::RetryWithSmallerDt, "Newton line search failed");
      refactor();
      fresh = true;
      ++rep.factorizations;
      continue;
    }
    y = yt;
    rep.iterations = it + 1;
    rep.last_update = alpha * dy.lpNorm<Eigen::Infinity>();
    if (alpha == 1.0 && rep.last_update <= 1e-10 * (1.0 + y.lpNorm<Eigen::Infinity>())) return rep;
    if (rt.norm() > 0.1 * rn) {
      refactor();
      fresh = true;
      ++rep.factorizations;
    } else {
      r = rt;
      fresh = false;
    }
  }
  throw Error(ErrorKind::RetryWithSmallerDt, "Newton iteration did not converge");
}

}  // namespace nps
