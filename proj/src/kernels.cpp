#include "nps/kernels.hpp"

#include <cmath>
#include <vector>

namespace nps::kernels {

namespace {

// Gradient across x-face i of row j (i = 0..nx).
inline double grad_x(const Grid& g, std::span<const double> f, const BoundaryTrace* t, int i, int j) {
  const double hx = g.hx();
  const std::size_t row = static_cast<std::size_t>(g.nx) * j;
  if (i == 0) {
    const double f0 = f[row];
    const double wall = t ? t->left[j] : 0.5 * (3.0 * f0 - f[row + 1]);
    return (f0 - wall) / (0.5 * hx);
  }
  if (i == g.nx) {
    const double fl = f[row + g.nx - 1];
    const double wall = t ? t->right[j] : 0.5 * (3.0 * fl - f[row + g.nx - 2]);
    return (wall - fl) / (0.5 * hx);
  }
  return (f[row + i] - f[row + i - 1]) / hx;
}

// Gradient across y-face j of column i (j = 0..ny).
inline double grad_y(const Grid& g, std::span<const double> f, const BoundaryTrace* t, int i, int j) {
  const double hy = g.hy();
  const std::size_t nx = g.nx;
  if (j == 0) {
    const double f0 = f[i];
    const double wall = t ? t->bottom[i] : 0.5 * (3.0 * f0 - f[i + nx]);
    return (f0 - wall) / (0.5 * hy);
  }
  if (j == g.ny) {
    const double fl = f[i + nx * (g.ny - 1)];
    const double wall = t ? t->top[i] : 0.5 * (3.0 * fl - f[i + nx * (g.ny - 2)]);
    return (wall - fl) / (0.5 * hy);
  }
  return (f[i + nx * j] - f[i + nx * (j - 1)]) / hy;
}

double ordered_sum(const std::vector<double>& partial) {
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

}  // namespace

double cell_dot(const Grid& g, std::span<const double> a, std::span<const double> b) {
  std::vector<double> partial(g.ny, 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(g.nx) * j;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i) s += a[row + i] * b[row + i];
    partial[j] = s;
  }
  return ordered_sum(partial) * g.cell_volume();
}

double cell_integral(const Grid& g, std::span<const double> a) {
  std::vector<double> partial(g.ny, 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(g.nx) * j;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i) s += a[row + i];
    partial[j] = s;
  }
  return ordered_sum(partial) * g.cell_volume();
}

double cell_abs_cubed(const Grid& g, std::span<const double> a) {
  std::vector<double> partial(g.ny, 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(g.nx) * j;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const double v = std::abs(a[row + i]);
      s += v * v * v;
    }
    partial[j] = s;
  }
  return ordered_sum(partial) * g.cell_volume();
}

double gradient_dot(const Grid& g, std::span<const double> a, const BoundaryTrace* ta, std::span<const double> b,
                    const BoundaryTrace* tb) {
  const double hx = g.hx(), hy = g.hy();
  // Row j owns the x-faces of row j and the y-face below it; the last slot owns the top wall.
  std::vector<double> partial(g.ny + 1, 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= g.ny; ++j) {
    double s = 0.0;
    if (j < g.ny) {
      for (int i = 0; i <= g.nx; ++i) {
        const double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
        s += w * grad_x(g, a, ta, i, j) * grad_x(g, b, tb, i, j);
      }
    }
    const double wy = (j == 0 || j == g.ny) ? 0.5 : 1.0;
    for (int i = 0; i < g.nx; ++i) s += wy * grad_y(g, a, ta, i, j) * grad_y(g, b, tb, i, j);
    partial[j] = s;
  }
  return ordered_sum(partial) * hx * hy;
}

void laplacian_apply(const Grid& g, std::span<const double> f, const BoundaryTrace& trace, std::span<double> out) {
  const double hx = g.hx(), hy = g.hy();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double dxx = (grad_x(g, f, &trace, i + 1, j) - grad_x(g, f, &trace, i, j)) / hx;
      const double dyy = (grad_y(g, f, &trace, i, j + 1) - grad_y(g, f, &trace, i, j)) / hy;
      out[g.cell(i, j)] = dxx + dyy;
    }
  }
}

void divergence(const Grid& g, std::span<const double> ux, std::span<const double> uy, std::span<double> out) {
  const double hx = g.hx(), hy = g.hy();
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      out[g.cell(i, j)] = (ux[g.xface(i + 1, j)] - ux[g.xface(i, j)]) / hx +
                          (uy[g.yface(i, j + 1)] - uy[g.yface(i, j)]) / hy;
    }
  }
}

double velocity_dot(const Grid& g, const VectorField& u, const VectorField& v) {
  std::vector<double> partial(g.ny + 1, 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= g.ny; ++j) {
    double s = 0.0;
    if (j < g.ny)
      for (int i = 1; i < g.nx; ++i) s += u.ux[g.xface(i, j)] * v.ux[g.xface(i, j)];
    if (j > 0 && j < g.ny)
      for (int i = 0; i < g.nx; ++i) s += u.uy[g.yface(i, j)] * v.uy[g.yface(i, j)];
    partial[j] = s;
  }
  return ordered_sum(partial) * g.cell_volume();
}

double velocity_gradient_dot(const Grid& g, const VectorField& u, const VectorField& v) {
  const double hx = g.hx(), hy = g.hy();
  const int nx = g.nx, ny = g.ny;
  std::vector<double> partial(ny + 1, 0.0);
#pragma omp parallel for schedule(static)
  for (int j = 0; j <= ny; ++j) {
    double s = 0.0;
    if (j < ny) {
      // d(ux)/dx at cell centres of row j.
      for (int i = 0; i < nx; ++i) {
        const double du = (u.ux[g.xface(i + 1, j)] - u.ux[g.xface(i, j)]) / hx;
        const double dv = (v.ux[g.xface(i + 1, j)] - v.ux[g.xface(i, j)]) / hx;
        s += du * dv;
      }
      // d(ux)/dy across the horizontal line y = j*hy (wall ghost for j == 0).
      for (int i = 1; i < nx; ++i) {
        if (j == 0) {
          s += 0.5 * (u.ux[g.xface(i, 0)] / (0.5 * hy)) * (v.ux[g.xface(i, 0)] / (0.5 * hy));
        } else {
          const double du = (u.ux[g.xface(i, j)] - u.ux[g.xface(i, j - 1)]) / hy;
          const double dv = (v.ux[g.xface(i, j)] - v.ux[g.xface(i, j - 1)]) / hy;
          s += du * dv;
        }
      }
      // d(uy)/dy at cell centres of row j.
      for (int i = 0; i < nx; ++i) {
        const double du = (u.uy[g.yface(i, j + 1)] - u.uy[g.yface(i, j)]) / hy;
        const double dv = (v.uy[g.yface(i, j + 1)] - v.uy[g.yface(i, j)]) / hy;
        s += du * dv;
      }
      // d(uy)/dx across vertical lines x = i*hx for interior y-faces of row j (j >= 1).
      if (j > 0) {
        for (int i = 0; i <= nx; ++i) {
          double du, dv;
          if (i == 0) {
            du = u.uy[g.yface(0, j)] / (0.5 * hx);
            dv = v.uy[g.yface(0, j)] / (0.5 * hx);
            s += 0.5 * du * dv;
          } else if (i == nx) {
            du = -u.uy[g.yface(nx - 1, j)] / (0.5 * hx);
            dv = -v.uy[g.yface(nx - 1, j)] / (0.5 * hx);
            s += 0.5 * du * dv;
          } else {
            du = (u.uy[g.yface(i, j)] - u.uy[g.yface(i - 1, j)]) / hx;
            dv = (v.uy[g.yface(i, j)] - v.uy[g.yface(i - 1, j)]) / hx;
            s += du * dv;
          }
        }
      }
    } else {
      // Top wall ghost for ux.
      for (int i = 1; i < nx; ++i)
        s += 0.5 * (u.ux[g.xface(i, ny - 1)] / (0.5 * hy)) * (v.ux[g.xface(i, ny - 1)] / (0.5 * hy));
    }
    partial[j] = s;
  }
  return ordered_sum(partial) * hx * hy;
}

// ---------------------------------------------------------------------------

namespace reference {

double cell_dot(const Grid& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.cells(); ++k) s += a[k] * b[k] * g.cell_volume();
  return s;
}

double cell_integral(const Grid& g, std::span<const double> a) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.cells(); ++k) s += a[k] * g.cell_volume();
  return s;
}

double cell_abs_cubed(const Grid& g, std::span<const double> a) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.cells(); ++k) s += std::pow(std::abs(a[k]), 3) * g.cell_volume();
  return s;
}

namespace {
// Full face-gradient arrays, boundary values taken from the trace or extrapolated.
void face_gradients(const Grid& g, std::span<const double> f, const BoundaryTrace* t, std::vector<double>& gx,
                    std::vector<double>& gy) {
  const int nx = g.nx, ny = g.ny;
  auto at = [&](int i, int j) { return f[static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j]; };
  gx.assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);
  gy.assign(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
  for (int j = 0; j < ny; ++j) {
    const double wl = t ? t->left[j] : 1.5 * at(0, j) - 0.5 * at(1, j);
    const double wr = t ? t->right[j] : 1.5 * at(nx - 1, j) - 0.5 * at(nx - 2, j);
    gx[g.xface(0, j)] = 2.0 * (at(0, j) - wl) / g.hx();
    gx[g.xface(nx, j)] = 2.0 * (wr - at(nx - 1, j)) / g.hx();
    for (int i = 1; i < nx; ++i) gx[g.xface(i, j)] = (at(i, j) - at(i - 1, j)) / g.hx();
  }
  for (int i = 0; i < nx; ++i) {
    const double wb = t ? t->bottom[i] : 1.5 * at(i, 0) - 0.5 * at(i, 1);
    const double wt = t ? t->top[i] : 1.5 * at(i, ny - 1) - 0.5 * at(i, ny - 2);
    gy[g.yface(i, 0)] = 2.0 * (at(i, 0) - wb) / g.hy();
    gy[g.yface(i, ny)] = 2.0 * (wt - at(i, ny - 1)) / g.hy();
    for (int j = 1; j < ny; ++j) gy[g.yface(i, j)] = (at(i, j) - at(i, j - 1)) / g.hy();
  }
}
}  // namespace

double gradient_dot(const Grid& g, std::span<const double> a, const BoundaryTrace* ta, std::span<const double> b,
                    const BoundaryTrace* tb) {
  std::vector<double> ax, ay, bx, by;
  face_gradients(g, a, ta, ax, ay);
  face_gradients(g, b, tb, bx, by);
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const double w = (i == 0 || i == g.nx) ? 0.5 : 1.0;
      s += w * ax[g.xface(i, j)] * bx[g.xface(i, j)] * g.cell_volume();
    }
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double w = (j == 0 || j == g.ny) ? 0.5 : 1.0;
      s += w * ay[g.yface(i, j)] * by[g.yface(i, j)] * g.cell_volume();
    }
  return s;
}

void laplacian_apply(const Grid& g, std::span<const double> f, const BoundaryTrace& trace, std::span<double> out) {
  std::vector<double> gx, gy;
  face_gradients(g, f, &trace, gx, gy);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out[g.cell(i, j)] = (gx[g.xface(i + 1, j)] - gx[g.xface(i, j)]) / g.hx() +
                          (gy[g.yface(i, j + 1)] - gy[g.yface(i, j)]) / g.hy();
}

void divergence(const Grid& g, std::span<const double> ux, std::span<const double> uy, std::span<double> out) {
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out[g.cell(i, j)] = (ux[g.xface(i + 1, j)] - ux[g.xface(i, j)]) / g.hx() +
                          (uy[g.yface(i, j + 1)] - uy[g.yface(i, j)]) / g.hy();
}

double velocity_dot(const Grid& g, const VectorField& u, const VectorField& v) {
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) s += u.ux[g.xface(i, j)] * v.ux[g.xface(i, j)];
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) s += u.uy[g.yface(i, j)] * v.uy[g.yface(i, j)];
  return s * g.cell_volume();
}

double velocity_gradient_dot(const Grid& g, const VectorField& u, const VectorField& v) {
  // Component-wise: pad each component with its wall ghosts on a (nx+1) x (ny+2) or
  // (nx+2) x (ny+1) lattice and sum squared differences along both directions.
  const int nx = g.nx, ny = g.ny;
  const double hx = g.hx(), hy = g.hy();
  double s = 0.0;
  // ux: x-differences between consecutive faces (all rows).
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      s += (u.ux[g.xface(i + 1, j)] - u.ux[g.xface(i, j)]) * (v.ux[g.xface(i + 1, j)] - v.ux[g.xface(i, j)]) /
           (hx * hx) * hx * hy;
  // ux: y-differences, including the wall ghost (-value) at half spacing.
  for (int i = 1; i < nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const double au = j == 0 ? 0.0 : u.ux[g.xface(i, j - 1)];
      const double bu = j == ny ? 0.0 : u.ux[g.xface(i, j)];
      const double av = j == 0 ? 0.0 : v.ux[g.xface(i, j - 1)];
      const double bv = j == ny ? 0.0 : v.ux[g.xface(i, j)];
      const double d = (j == 0 || j == ny) ? 0.5 * hy : hy;
      const double w = (j == 0 || j == ny) ? 0.5 : 1.0;
      s += w * ((bu - au) / d) * ((bv - av) / d) * hx * hy;
    }
  }
  // uy: y-differences between consecutive faces (all columns).
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      s += (u.uy[g.yface(i, j + 1)] - u.uy[g.yface(i, j)]) * (v.uy[g.yface(i, j + 1)] - v.uy[g.yface(i, j)]) /
           (hy * hy) * hx * hy;
  // uy: x-differences with wall ghosts.
  for (int j = 1; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double au = i == 0 ? 0.0 : u.uy[g.yface(i - 1, j)];
      const double bu = i == nx ? 0.0 : u.uy[g.yface(i, j)];
      const double av = i == 0 ? 0.0 : v.uy[g.yface(i - 1, j)];
      const double bv = i == nx ? 0.0 : v.uy[g.yface(i, j)];
      const double d = (i == 0 || i == nx) ? 0.5 * hx : hx;
      const double w = (i == 0 || i == nx) ? 0.5 : 1.0;
      s += w * ((bu - au) / d) * ((bv - av) / d) * hx * hy;
    }
  }
  return s;
}

}  // namespace reference

}  // namespace nps::kernels
