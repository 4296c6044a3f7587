#include "nps/fluid.hpp"

#include "nps/errors.hpp"
#include "nps/operators.hpp"
#include "nps/transport.hpp"

namespace nps {

StokesWorkspace::StokesWorkspace(const Grid& g, double nu) : grid_(g), nu_(nu) {
  if (!(nu > 0.0)) throw Error(ErrorKind::InvalidArgument, "viscosity must be positive");
}

Vec StokesWorkspace::solve(const Vec& rhs, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  auto it = lu_.find(dt);
  if (it == lu_.end()) {
    if (lu_.size() >= 8) lu_.erase(lu_.begin());
    auto lu = std::make_unique<SparseLU>();
    lu->compute(stokes_saddle_matrix(grid_, 1.0 / dt, nu_));
    it = lu_.emplace(dt, std::move(lu)).first;
  }
  const VelocityIndex vi(grid_);
  Vec b = Vec::Zero(vi.size() + static_cast<int>(grid_.cells()));
  b.head(vi.size()) = rhs;
  return it->second->solve(b).head(vi.size());
}

VectorField electric_force(const ScalarField& rho, const ScalarField& phi, double K) {
  const Grid& g = rho.grid;
  VectorField f(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      const std::size_t l = g.cell(i - 1, j), r = g.cell(i, j);
      f.ux[g.xface(i, j)] = -K * 0.5 * (rho[l] + rho[r]) * (phi[r] - phi[l]) / g.hx();
    }
    if (j > 0) {
      for (int i = 0; i < g.nx; ++i) {
        const std::size_t l = g.cell(i, j - 1), r = g.cell(i, j);
        f.uy[g.yface(i, j)] = -K * 0.5 * (rho[l] + rho[r]) * (phi[r] - phi[l]) / g.hy();
      }
    }
  }
  return f;
}

namespace {

inline double face_force(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi, std::size_t l,
                         std::size_t r, double h) {
  const double dphi = phi[r] - phi[l];
  double s = (c1[r] + c2[r]) - (c1[l] + c2[l]);
  s += bernoulli(dphi) * c1[l] - bernoulli(-dphi) * c1[r];
  s += bernoulli(-dphi) * c2[l] - bernoulli(dphi) * c2[r];
  return s / h;
}

inline double face_force_derivative(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi,
                                    const ScalarField& dc1, const ScalarField& dc2, const ScalarField& dphi,
                                    std::size_t l, std::size_t r, double h) {
  const double s = phi[r] - phi[l];
  const double ds = dphi[r] - dphi[l];
  const double bp = bernoulli(s), bm = bernoulli(-s);
  double d = (dc1[r] + dc2[r]) - (dc1[l] + dc2[l]);
  d += bp * dc1[l] - bm * dc1[r] + bm * dc2[l] - bp * dc2[r];
  const double dbp = bernoulli_derivative(s), dbm = bernoulli_derivative(-s);
  // d/ds of B(s) c1l - B(-s) c1r + B(-s) c2l - B(s) c2r
  d += ds * (dbp * c1[l] + dbm * c1[r] - dbm * c2[l] - dbp * c2[r]);
  return d / h;
}

}  // namespace

VectorField equilibrated_force(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi, double K) {
  const Grid& g = c1.grid;
  VectorField f(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i)
      f.ux[g.xface(i, j)] = K * face_force(c1, c2, phi, g.cell(i - 1, j), g.cell(i, j), g.hx());
    if (j > 0)
      for (int i = 0; i < g.nx; ++i)
        f.uy[g.yface(i, j)] = K * face_force(c1, c2, phi, g.cell(i, j - 1), g.cell(i, j), g.hy());
  }
  return f;
}

VectorField equilibrated_force_derivative(const ScalarField& c1, const ScalarField& c2, const ScalarField& phi,
                                          const ScalarField& dc1, const ScalarField& dc2, const ScalarField& dphi,
                                          double K) {
  const Grid& g = c1.grid;
  VectorField f(g);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i)
      f.ux[g.xface(i, j)] =
          K * face_force_derivative(c1, c2, phi, dc1, dc2, dphi, g.cell(i - 1, j), g.cell(i, j), g.hx());
    if (j > 0)
      for (int i = 0; i < g.nx; ++i)
        f.uy[g.yface(i, j)] =
            K * face_force_derivative(c1, c2, phi, dc1, dc2, dphi, g.cell(i, j - 1), g.cell(i, j), g.hy());
  }
  return f;
}

VectorField stokes_step(const VectorField& u, const VectorField& f, double dt, StokesWorkspace& ws) {
  const Grid& g = ws.grid();
  if (!(u.grid == g) || !(f.grid == g)) throw Error(ErrorKind::InvalidArgument, "fields do not match the workspace grid");
  const Vec rhs = pack_velocity(u) / dt + pack_velocity(f);
  return unpack_velocity(g, ws.solve(rhs, dt));
}

}  // namespace nps
