#pragma once

// Sparse matrices of the discrete operators on the MAC grid.

#include <span>

#include "nps/grid.hpp"
#include "nps/sparse.hpp"

namespace nps {

/// -Delta_h on cells with homogeneous Dirichlet closure (wall at distance h/2). SPD.
SpMat neg_laplacian_matrix(const Grid& g);

/// Adds the boundary part of -Delta_h for a nonzero trace to b.
void add_dirichlet_rhs(const Grid& g, const BoundaryTrace& trace, double scale, std::span<double> b);

/// Packing of the interior velocity faces (wall-normal faces are fixed at zero).
struct VelocityIndex {
  int nx = 0, ny = 0;
  explicit VelocityIndex(const Grid& g) : nx(g.nx), ny(g.ny) {}
  int nux() const { return (nx - 1) * ny; }
  int nuy() const { return nx * (ny - 1); }
  int size() const { return nux() + nuy(); }
  /// Interior x-face (i in 1..nx-1).
  int ux(int i, int j) const { return (i - 1) + (nx - 1) * j; }
  /// Interior y-face (j in 1..ny-1).
  int uy(int i, int j) const { return nux() + i + nx * (j - 1); }
};

Vec pack_velocity(const VectorField& u);
VectorField unpack_velocity(const Grid& g, const Vec& v);

/// -L_h, the vector Laplacian on interior faces with no-slip ghost reflection.
SpMat neg_vector_laplacian_matrix(const Grid& g);

/// Saddle matrix [[alpha I + beta (-L_h), G], [Div, 0]] in (velocity, pressure)
/// ordering; the continuity row of cell 0 is replaced by p_0 = 0.
SpMat stokes_saddle_matrix(const Grid& g, double alpha, double beta);

}  // namespace nps
