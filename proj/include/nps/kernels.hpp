#pragma once

// Structured-grid kernels shared by every module.
//
// The functions in nps::kernels are OpenMP-parallel over grid rows. Reductions
// accumulate one partial sum per row and then add the rows in order, so the
// result is bitwise independent of the thread count. nps::kernels::reference
// holds plain serial loops with the same contracts; they are kept for testing
// and benchmarking only.

#include <span>

#include "nps/grid.hpp"

namespace nps::kernels {

/// Sum over cells of a[k] * b[k] * hx * hy.
double cell_dot(const Grid& g, std::span<const double> a, std::span<const double> b);
/// Sum over cells of a[k] * hx * hy.
double cell_integral(const Grid& g, std::span<const double> a);
/// Sum over cells of |a[k]|^3 * hx * hy.
double cell_abs_cubed(const Grid& g, std::span<const double> a);

/// Face-based discrete Dirichlet form  sum_f w_f (grad a)_f (grad b)_f.
/// Boundary faces use the trace at distance h/2 and half weight. A null trace
/// means the boundary value is extrapolated linearly from the two nearest cells.
double gradient_dot(const Grid& g, std::span<const double> a, const BoundaryTrace* ta, std::span<const double> b,
                    const BoundaryTrace* tb);

/// out = Delta_h f (5-point, Dirichlet trace at the walls).
void laplacian_apply(const Grid& g, std::span<const double> f, const BoundaryTrace& trace, std::span<double> out);

/// Cell-centred divergence of a MAC field.
void divergence(const Grid& g, std::span<const double> ux, std::span<const double> uy, std::span<double> out);

/// L2 inner product of two MAC fields (interior-face weights hx*hy).
double velocity_dot(const Grid& g, const VectorField& u, const VectorField& v);
/// Discrete (grad u : grad v) with no-slip ghost reflection at the walls.
double velocity_gradient_dot(const Grid& g, const VectorField& u, const VectorField& v);

namespace reference {
double cell_dot(const Grid& g, std::span<const double> a, std::span<const double> b);
double cell_integral(const Grid& g, std::span<const double> a);
double cell_abs_cubed(const Grid& g, std::span<const double> a);
double gradient_dot(const Grid& g, std::span<const double> a, const BoundaryTrace* ta, std::span<const double> b,
                    const BoundaryTrace* tb);
void laplacian_apply(const Grid& g, std::span<const double> f, const BoundaryTrace& trace, std::span<double> out);
void divergence(const Grid& g, std::span<const double> ux, std::span<const double> uy, std::span<double> out);
double velocity_dot(const Grid& g, const VectorField& u, const VectorField& v);
double velocity_gradient_dot(const Grid& g, const VectorField& u, const VectorField& v);
}  // namespace reference

}  // namespace nps::kernels
