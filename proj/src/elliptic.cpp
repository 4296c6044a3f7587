#include "nps/elliptic.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <tuple>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "nps/errors.hpp"
#include "nps/operators.hpp"

namespace nps {

struct LaplaceSolver::Impl {
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

LaplaceSolver::LaplaceSolver(const Grid& g) : grid_(g), a_(neg_laplacian_matrix(g)), impl_(std::make_unique<Impl>()) {
  impl_->ldlt.compute(a_);
  if (impl_->ldlt.info() != Eigen::Success) throw Error(ErrorKind::LinearSolveFailure, "Laplacian factorization failed");
}

LaplaceSolver::~LaplaceSolver() = default;

std::shared_ptr<const LaplaceSolver> LaplaceSolver::get(const Grid& g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double, double>, std::shared_ptr<const LaplaceSolver>> cache;
  const auto key = std::make_tuple(g.nx, g.ny, g.Lx, g.Ly);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto s = std::make_shared<const LaplaceSolver>(g);
  cache.emplace(key, s);
  return s;
}

Vec LaplaceSolver::solve(const Vec& b, SolverReport* report, double tol) const {
  SolverReport rep;
  const double bn = b.norm();
  Vec x = Vec::Zero(b.size());
  if (bn == 0.0) {
    rep.converged = true;
    if (report) *report = rep;
    return x;
  }
  Vec r = b;
  for (int it = 0; it < 4; ++it) {
    x += impl_->ldlt.solve(r);
    r = b - a_ * x;
    rep.iterations = it + 1;
    rep.residual_l2 = r.norm() / bn;
    if (rep.residual_l2 <= tol) {
      rep.converged = true;
      break;
    }
  }
  if (report) *report = rep;
  return x;
}

std::pair<ScalarField, SolverReport> solve_potential(const ScalarField& rho, const BoundaryTrace& W, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps must be positive");
  const Grid& g = rho.grid;
  if (!W.matches(g)) throw Error(ErrorKind::InvalidArgument, "trace does not match the grid");
  auto solver = LaplaceSolver::get(g);
  Vec b(g.cells());
  for (std::size_t k = 0; k < g.cells(); ++k) b[k] = rho[k] / eps;
  add_dirichlet_rhs(g, W, 1.0, {b.data(), g.cells()});
  SolverReport rep;
  Vec x = solver->solve(b, &rep);
  ScalarField phi(g);
  for (std::size_t k = 0; k < g.cells(); ++k) phi[k] = x[k];
  return {std::move(phi), rep};
}

ScalarField inv_dirichlet_laplacian(const ScalarField& rho) {
  auto [phi, rep] = solve_potential(rho, BoundaryTrace::zero(rho.grid), 1.0);
  if (!rep.converged) throw Error(ErrorKind::NonConvergence, "Dirichlet Laplacian solve did not converge");
  return phi;
}

ScalarField harmonic_extension(const Grid& g, const BoundaryTrace& gamma) {
  auto [phi, rep] = solve_potential(ScalarField(g), gamma, 1.0);
  if (!rep.converged) throw Error(ErrorKind::NonConvergence, "harmonic extension did not converge");
  return phi;
}

// ---------------------------------------------------------------------------

namespace {

using Mat = Eigen::MatrixXd;

// Symmetric positive operator given through its inverse.
struct InverseOperator {
  int n = 0;
  std::function<Vec(const Vec&)> apply;
};

Mat apply_block(const InverseOperator& op, const Mat& x) {
  Mat y(x.rows(), x.cols());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < static_cast<int>(x.cols()); ++c) y.col(c) = op.apply(x.col(c));
  return y;
}

Mat orthonormal_basis(const Mat& y) {
  Eigen::HouseholderQR<Mat> qr(y);
  return qr.householderQ() * Mat::Identity(y.rows(), y.cols());
}

EigenPairs subspace_iteration(const InverseOperator& op, int k) {
  const int m = std::min(k + 8, op.n);
  std::mt19937_64 rng(20240611ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat x(op.n, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < op.n; ++r) x(r, c) = normal(rng);
  Mat y = apply_block(op, x);

  const double tol = 1e-8;
  for (int it = 0; it < 500; ++it) {
    const Mat q = orthonormal_basis(y);
    const Mat z = apply_block(op, q);
    Mat t = q.transpose() * z;
    t = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(t);
    // Ascending mu; the largest mu are the smallest eigenvalues.
    Mat v(m, m);
    Vec mu(m);
    for (int c = 0; c < m; ++c) {
      v.col(c) = es.eigenvectors().col(m - 1 - c);
      mu[c] = es.eigenvalues()[m - 1 - c];
    }
    const Mat ritz = q * v;
    const Mat zr = z * v;
    bool done = true;
    for (int c = 0; c < k; ++c) {
      if (!(mu[c] > 0.0)) {
        done = false;
        break;
      }
      const double res = (zr.col(c) - mu[c] * ritz.col(c)).norm();
      if (res > tol * mu[c]) {
        done = false;
        break;
      }
    }
    if (done) {
      EigenPairs out;
      for (int c = 0; c < k; ++c) {
        out.values.push_back(1.0 / mu[c]);
        out.vectors.push_back(ritz.col(c));
      }
      return out;
    }
    y = zr;
  }
  throw Error(ErrorKind::NonConvergence, "eigenvalue iteration did not converge");
}

}  // namespace

EigenPairs smallest_eigenpairs(const Grid& g, SpectralOperator op, int k) {
  if (k < 1 || k > 64) throw Error(ErrorKind::InvalidArgument, "eigenvalue count must be in 1..64");
  if (op == SpectralOperator::DirichletLaplacian) {
    const int n = static_cast<int>(g.cells());
    if (k + 8 > n / 2) throw Error(ErrorKind::InvalidArgument, "more eigenvalues requested than the grid resolves");
    auto solver = LaplaceSolver::get(g);
    InverseOperator inv{n, [solver](const Vec& x) { return solver->solve(x); }};
    return subspace_iteration(inv, k);
  }
  const VelocityIndex vi(g);
  const int nu = vi.size();
  if (k + 8 > static_cast<int>(g.cells()) / 4)
    throw Error(ErrorKind::InvalidArgument, "more eigenvalues requested than the grid resolves");
  auto lu = std::make_shared<SparseLU>();
  lu->compute(stokes_saddle_matrix(g, 0.0, 1.0));
  const int ntot = nu + static_cast<int>(g.cells());
  InverseOperator inv{nu, [lu, nu, ntot](const Vec& x) {
                        Vec b = Vec::Zero(ntot);
                        b.head(nu) = x;
                        return Vec(lu->solve(b).head(nu));
                      }};
  return subspace_iteration(inv, k);
}

std::vector<double> smallest_eigenvalues(const Grid& g, SpectralOperator op, int k) {
  return smallest_eigenpairs(g, op, k).values;
}

}  // namespace nps
