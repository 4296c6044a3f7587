#include "nps/sparse.hpp"

#include <Eigen/UmfPackSupport>

#include "nps/errors.hpp"

namespace nps {

SlotMatrix::SlotMatrix(int n, const std::vector<std::pair<int, int>>& entries) : mat_(n, n) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(entries.size());
  for (std::size_t s = 0; s < entries.size(); ++s)
    if (entries[s].first >= 0) trip.emplace_back(entries[s].first, entries[s].second, static_cast<double>(s));
  mat_.setFromTriplets(trip.begin(), trip.end(), [](double, double) -> double {
    throw Error(ErrorKind::InvalidArgument, "duplicate entry in sparse pattern");
  });
  mat_.makeCompressed();
  const double* values = mat_.valuePtr();
  position_.assign(entries.size(), -1);
  for (int p = 0; p < mat_.nonZeros(); ++p) position_[static_cast<std::size_t>(values[p])] = p;
  zero();
}

void SlotMatrix::zero() {
  mat_.coeffs().setZero();
}

// UMFPACK reads the matrix arrays again during solve, so the impl keeps its own copy.
struct SparseLU::Impl {
  SpMat a;
  Eigen::UmfPackLU<SpMat> lu;
  bool analyzed = false;
};

SparseLU::SparseLU() : impl_(std::make_unique<Impl>()) {}
SparseLU::~SparseLU() = default;

void SparseLU::analyze(const SpMat& a) {
  impl_->a = a;
  impl_->lu.analyzePattern(impl_->a);
  if (impl_->lu.info() != Eigen::Success) throw Error(ErrorKind::LinearSolveFailure, "sparse LU analysis failed");
  impl_->analyzed = true;
}

void SparseLU::factorize(const SpMat& a) {
  if (!impl_->analyzed) analyze(a);
  impl_->a = a;
  impl_->lu.factorize(impl_->a);
  if (impl_->lu.info() != Eigen::Success) throw Error(ErrorKind::LinearSolveFailure, "sparse LU factorization failed");
}

Vec SparseLU::solve(const Vec& b) const {
  Vec x = impl_->lu.solve(b);
  if (impl_->lu.info() != Eigen::Success || !x.allFinite())
    throw Error(ErrorKind::LinearSolveFailure, "sparse LU solve failed");
  return x;
}

}  // namespace nps
