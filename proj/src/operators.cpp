#include "nps/operators.hpp"

#include <vector>

namespace nps {

using Trip = Eigen::Triplet<double>;

SpMat neg_laplacian_matrix(const Grid& g) {
  const double ax = 1.0 / (g.hx() * g.hx()), ay = 1.0 / (g.hy() * g.hy());
  std::vector<Trip> t;
  t.reserve(5 * g.cells());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int k = static_cast<int>(g.cell(i, j));
      double diag = 0.0;
      auto link = [&](int ii, int jj, double a) {
        if (ii < 0 || ii >= g.nx || jj < 0 || jj >= g.ny) {
          diag += 2.0 * a;  // wall at h/2
        } else {
          diag += a;
          t.emplace_back(k, static_cast<int>(g.cell(ii, jj)), -a);
        }
      };
      link(i - 1, j, ax);
      link(i + 1, j, ax);
      link(i, j - 1, ay);
      link(i, j + 1, ay);
      t.emplace_back(k, k, diag);
    }
  }
  SpMat m(static_cast<int>(g.cells()), static_cast<int>(g.cells()));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void add_dirichlet_rhs(const Grid& g, const BoundaryTrace& trace, double scale, std::span<double> b) {
  const double ax = 2.0 / (g.hx() * g.hx()), ay = 2.0 / (g.hy() * g.hy());
  for (int j = 0; j < g.ny; ++j) {
    b[g.cell(0, j)] += scale * ax * trace.left[j];
    b[g.cell(g.nx - 1, j)] += scale * ax * trace.right[j];
  }
  for (int i = 0; i < g.nx; ++i) {
    b[g.cell(i, 0)] += scale * ay * trace.bottom[i];
    b[g.cell(i, g.ny - 1)] += scale * ay * trace.top[i];
  }
}

Vec pack_velocity(const VectorField& u) {
  const Grid& g = u.grid;
  const VelocityIndex vi(g);
  Vec v(vi.size());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) v[vi.ux(i, j)] = u.ux[g.xface(i, j)];
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) v[vi.uy(i, j)] = u.uy[g.yface(i, j)];
  return v;
}

VectorField unpack_velocity(const Grid& g, const Vec& v) {
  const VelocityIndex vi(g);
  VectorField u(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) u.ux[g.xface(i, j)] = v[vi.ux(i, j)];
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u.uy[g.yface(i, j)] = v[vi.uy(i, j)];
  return u;
}

namespace {

void vector_laplacian_triplets(const Grid& g, double alpha, double beta, std::vector<Trip>& t) {
  const VelocityIndex vi(g);
  const double ax = beta / (g.hx() * g.hx()), ay = beta / (g.hy() * g.hy());
  // x-component
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 1; i < g.nx; ++i) {
      const int r = vi.ux(i, j);
      double diag = alpha + 2.0 * ax + 2.0 * ay;
      if (i > 1) t.emplace_back(r, vi.ux(i - 1, j), -ax);
      if (i < g.nx - 1) t.emplace_back(r, vi.ux(i + 1, j), -ax);
      if (j > 0) t.emplace_back(r, vi.ux(i, j - 1), -ay); else diag += ay;
      if (j < g.ny - 1) t.emplace_back(r, vi.ux(i, j + 1), -ay); else diag += ay;
      t.emplace_back(r, r, diag);
    }
  }
  // y-component
  for (int j = 1; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int r = vi.uy(i, j);
      double diag = alpha + 2.0 * ax + 2.0 * ay;
      if (j > 1) t.emplace_back(r, vi.uy(i, j - 1), -ay);
      if (j < g.ny - 1) t.emplace_back(r, vi.uy(i, j + 1), -ay);
      if (i > 0) t.emplace_back(r, vi.uy(i - 1, j), -ax); else diag += ax;
      if (i < g.nx - 1) t.emplace_back(r, vi.uy(i + 1, j), -ax); else diag += ax;
      t.emplace_back(r, r, diag);
    }
  }
}

}  // namespace

SpMat neg_vector_laplacian_matrix(const Grid& g) {
  const VelocityIndex vi(g);
  std::vector<Trip> t;
  t.reserve(5 * static_cast<std::size_t>(vi.size()));
  vector_laplacian_triplets(g, 0.0, 1.0, t);
  SpMat m(vi.size(), vi.size());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

SpMat stokes_saddle_matrix(const Grid& g, double alpha, double beta) {
  const VelocityIndex vi(g);
  const int nu = vi.size();
  const int n = nu + static_cast<int>(g.cells());
  std::vector<Trip> t;
  t.reserve(9 * static_cast<std::size_t>(n));
  vector_laplacian_triplets(g, alpha, beta, t);
  const double ix = 1.0 / g.hx(), iy = 1.0 / g.hy();
  // Pressure gradient on interior faces.
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      t.emplace_back(vi.ux(i, j), nu + static_cast<int>(g.cell(i, j)), ix);
      t.emplace_back(vi.ux(i, j), nu + static_cast<int>(g.cell(i - 1, j)), -ix);
    }
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      t.emplace_back(vi.uy(i, j), nu + static_cast<int>(g.cell(i, j)), iy);
      t.emplace_back(vi.uy(i, j), nu + static_cast<int>(g.cell(i, j - 1)), -iy);
    }
  // Divergence rows.
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int r = nu + static_cast<int>(g.cell(i, j));
      if (r == nu) continue;
      if (i + 1 < g.nx) t.emplace_back(r, vi.ux(i + 1, j), ix);
      if (i > 0) t.emplace_back(r, vi.ux(i, j), -ix);
      if (j + 1 < g.ny) t.emplace_back(r, vi.uy(i, j + 1), iy);
      if (j > 0) t.emplace_back(r, vi.uy(i, j), -iy);
    }
  t.emplace_back(nu, nu, 1.0);
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace nps
