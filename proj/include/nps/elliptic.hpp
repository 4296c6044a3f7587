#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "nps/grid.hpp"
#include "nps/sparse.hpp"

namespace nps {

struct SolverReport {
  int iterations = 0;
  double residual_l2 = 0.0;
  bool converged = false;
};

/// Cached Cholesky (LDL^T) factorization of -Delta_h for one grid.
/// Instances are immutable after construction and may be shared between threads.
class LaplaceSolver {
 public:
  explicit LaplaceSolver(const Grid& g);
  ~LaplaceSolver();

  /// Shared instance for the grid, built on first use.
  static std::shared_ptr<const LaplaceSolver> get(const Grid& g);

  /// Solves -Delta_h x = b (b already contains any boundary terms), with
  /// iterative refinement until the relative residual is below tol.
  Vec solve(const Vec& b, SolverReport* report = nullptr, double tol = 1e-10) const;
  const SpMat& matrix() const { return a_; }
  const Grid& grid() const { return grid_; }

 private:
  struct Impl;
  Grid grid_;
  SpMat a_;
  std::unique_ptr<Impl> impl_;
};

/// -eps Delta Phi = rho, Phi = W on the boundary.
std::pair<ScalarField, SolverReport> solve_potential(const ScalarField& rho, const BoundaryTrace& W, double eps);

/// phi with -Delta phi = rho and zero trace. Throws NonConvergence.
ScalarField inv_dirichlet_laplacian(const ScalarField& rho);

/// Discrete harmonic function with the given trace. Throws NonConvergence.
ScalarField harmonic_extension(const Grid& g, const BoundaryTrace& gamma);

enum class SpectralOperator { DirichletLaplacian, Stokes };

struct EigenPairs {
  std::vector<double> values;  ///< nondecreasing
  std::vector<Vec> vectors;    ///< cell values, or packed interior velocity faces for Stokes
};

/// k smallest eigenpairs (k <= 64) by block inverse subspace iteration with a
/// fixed-seed start block. Throws InvalidArgument / NonConvergence.
EigenPairs smallest_eigenpairs(const Grid& g, SpectralOperator op, int k);
std::vector<double> smallest_eigenvalues(const Grid& g, SpectralOperator op, int k);

}  // namespace nps
