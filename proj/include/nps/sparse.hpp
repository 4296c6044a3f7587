#pragma once

// Thin wrappers over Eigen sparse matrices and the UMFPACK LU.

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

namespace nps {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vec = Eigen::VectorXd;

/// Sparse matrix with a fixed pattern whose entries are addressed by slot.
/// Slot s refers to (row, col) = entries[s]; a negative row marks an unused slot.
/// Writes to distinct slots touch distinct memory, so rows can be filled in parallel.
class SlotMatrix {
 public:
  SlotMatrix() = default;
  SlotMatrix(int n, const std::vector<std::pair<int, int>>& entries);

  void set(std::size_t slot, double v) {
    const int p = position_[slot];
    if (p >= 0) mat_.valuePtr()[p] = v;
  }
  void zero();
  const SpMat& matrix() const { return mat_; }
  int size() const { return static_cast<int>(mat_.rows()); }

 private:
  SpMat mat_;
  std::vector<int> position_;
};

/// General sparse LU (UMFPACK). Throws LinearSolveFailure on a singular matrix.
class SparseLU {
 public:
  SparseLU();
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  /// Symbolic analysis; reused by later factorize() calls with the same pattern.
  void analyze(const SpMat& a);
  void factorize(const SpMat& a);
  void compute(const SpMat& a) {
    analyze(a);
    factorize(a);
  }
  Vec solve(const Vec& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nps
