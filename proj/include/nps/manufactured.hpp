#pragma once

#include <array>

#include "nps/sim.hpp"

namespace nps {

/// Smooth exact solution of the forced coupled system on [0,Lx] x [0,Ly].
///   c1  = 1.5 + 0.3 X - 0.2 Y + a1(t) b
///   c2  = 1.2 - 0.2 X + 0.1 X Y + a2(t) b
///   Phi = 0.4 X - 0.3 Y + a3(t) b
///   psi = U(t) sin^2(pi X) sin^2(pi Y),  u = (psi_y, -psi_x),  p = 0
/// with X = x/Lx, Y = y/Ly and b = sin(pi X) sin(pi Y). The traces are time independent.
/// In steady mode the amplitudes are frozen at their t = 0 values.
class ManufacturedSolution {
 public:
  ManufacturedSolution(const Grid& g, const Params& p, bool steady);

  double c(int species, double x, double y, double t) const;
  double phi(double x, double y, double t) const;
  /// Continuous velocity components.
  double ux(double x, double y, double t) const;
  double uy(double x, double y, double t) const;

  /// Source terms at (x, y, t).
  double source_c(int species, double x, double y, double t) const;
  double source_phi(double x, double y, double t) const;
  double source_ux(double x, double y, double t) const;
  double source_uy(double x, double y, double t) const;

  BoundaryData boundary() const;
  /// Sampled exact fields; the velocity is the discrete curl of psi (exactly solenoidal).
  State exact_state(double t) const;
  /// Face samples of the continuous velocity.
  VectorField exact_velocity(double t) const;

  const Grid& grid() const { return g_; }

 private:
  struct Amp {
    double a1, a2, a3, U;
    double da1, da2, da3, dU;
  };
  Amp amplitudes(double t) const;
  // Value, x-derivative, y-derivative and Laplacian of each scalar.
  std::array<double, 4> c_jet(int species, double x, double y, const Amp& a) const;
  std::array<double, 4> phi_jet(double x, double y, const Amp& a) const;

  Grid g_;
  Params p_;
  bool steady_;
};

class ManufacturedForcing : public Forcing {
 public:
  explicit ManufacturedForcing(ManufacturedSolution m) : m_(std::move(m)) {}
  void evaluate(double t, NpSources& np, VectorField& su) const override;
  const ManufacturedSolution& solution() const { return m_; }

 private:
  ManufacturedSolution m_;
};

}  // namespace nps
