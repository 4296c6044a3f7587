#include "nps/manufactured.hpp"

#include <cmath>
#include <numbers>

namespace nps {

using std::numbers::pi;

ManufacturedSolution::ManufacturedSolution(const Grid& g, const Params& p, bool steady)
    : g_(g), p_(p), steady_(steady) {}

ManufacturedSolution::Amp ManufacturedSolution::amplitudes(double t) const {
  if (steady_) return {0.3, -0.2, 0.25, 0.2, 0, 0, 0, 0};
  return {0.3 * std::cos(2 * t),        -0.2 + 0.1 * std::sin(3 * t), 0.25 * std::cos(t), 0.2 + 0.5 * std::sin(2 * t),
          -0.6 * std::sin(2 * t),       0.3 * std::cos(3 * t),        -0.25 * std::sin(t), std::cos(2 * t)};
}

std::array<double, 4> ManufacturedSolution::c_jet(int species, double x, double y, const Amp& a) const {
  const double Lx = g_.Lx, Ly = g_.Ly, kx = pi / Lx, ky = pi / Ly;
  const double X = x / Lx, Y = y / Ly;
  const double b = std::sin(kx * x) * std::sin(ky * y);
  const double bx = kx * std::cos(kx * x) * std::sin(ky * y);
  const double by = ky * std::sin(kx * x) * std::cos(ky * y);
  const double lb = -(kx * kx + ky * ky) * b;
  if (species == 0)
    return {1.5 + 0.3 * X - 0.2 * Y + a.a1 * b, 0.3 / Lx + a.a1 * bx, -0.2 / Ly + a.a1 * by, a.a1 * lb};
  return {1.2 - 0.2 * X + 0.1 * X * Y + a.a2 * b, -0.2 / Lx + 0.1 * Y / Lx + a.a2 * bx, 0.1 * X / Ly + a.a2 * by,
          a.a2 * lb};
}

std::array<double, 4> ManufacturedSolution::phi_jet(double x, double y, const Amp& a) const {
  const double Lx = g_.Lx, Ly = g_.Ly, kx = pi / Lx, ky = pi / Ly;
  const double b = std::sin(kx * x) * std::sin(ky * y);
  const double bx = kx * std::cos(kx * x) * std::sin(ky * y);
  const double by = ky * std::sin(kx * x) * std::cos(ky * y);
  return {0.4 * x / Lx - 0.3 * y / Ly + a.a3 * b, 0.4 / Lx + a.a3 * bx, -0.3 / Ly + a.a3 * by,
          -a.a3 * (kx * kx + ky * ky) * b};
}

double ManufacturedSolution::c(int species, double x, double y, double t) const {
  return c_jet(species, x, y, amplitudes(t))[0];
}

double ManufacturedSolution::phi(double x, double y, double t) const { return phi_jet(x, y, amplitudes(t))[0]; }

double ManufacturedSolution::ux(double x, double y, double t) const {
  const double kx = pi / g_.Lx, ky = pi / g_.Ly;
  const double s = std::sin(kx * x);
  return amplitudes(t).U * ky * s * s * std::sin(2 * ky * y);
}

double ManufacturedSolution::uy(double x, double y, double t) const {
  const double kx = pi / g_.Lx, ky = pi / g_.Ly;
  const double s = std::sin(ky * y);
  return -amplitudes(t).U * kx * s * s * std::sin(2 * kx * x);
}

double ManufacturedSolution::source_c(int species, double x, double y, double t) const {
  const Amp a = amplitudes(t);
  const auto cj = c_jet(species, x, y, a);
  const auto pj = phi_jet(x, y, a);
  const double kx = pi / g_.Lx, ky = pi / g_.Ly;
  const double b = std::sin(kx * x) * std::sin(ky * y);
  const double dt_c = (species == 0 ? a.da1 : a.da2) * b;
  const double z = Params::z(species);
  const double adv = ux(x, y, t) * cj[1] + uy(x, y, t) * cj[2];
  const double diff = cj[3] + z * (cj[1] * pj[1] + cj[2] * pj[2] + cj[0] * pj[3]);
  return dt_c + adv - p_.D(species) * diff;
}

double ManufacturedSolution::source_phi(double x, double y, double t) const {
  const Amp a = amplitudes(t);
  return -p_.eps * phi_jet(x, y, a)[3] - (c_jet(0, x, y, a)[0] - c_jet(1, x, y, a)[0]);
}

double ManufacturedSolution::source_ux(double x, double y, double t) const {
  const Amp a = amplitudes(t);
  const double kx = pi / g_.Lx, ky = pi / g_.Ly;
  const double sx = std::sin(kx * x);
  const double shape = ky * sx * sx * std::sin(2 * ky * y);
  const double lap = ky * (2 * kx * kx * std::cos(2 * kx * x) * std::sin(2 * ky * y) - 4 * ky * ky * sx * sx * std::sin(2 * ky * y));
  const double rho = c_jet(0, x, y, a)[0] - c_jet(1, x, y, a)[0];
  return a.dU * shape - p_.nu * a.U * lap + p_.K * rho * phi_jet(x, y, a)[1];
}

double ManufacturedSolution::source_uy(double x, double y, double t) const {
  const Amp a = amplitudes(t);
  const double kx = pi / g_.Lx, ky = pi / g_.Ly;
  const double sy = std::sin(ky * y);
  const double shape = -kx * sy * sy * std::sin(2 * kx * x);
  const double lap = -kx * (2 * ky * ky * std::cos(2 * ky * y) * std::sin(2 * kx * x) - 4 * kx * kx * sy * sy * std::sin(2 * kx * x));
  const double rho = c_jet(0, x, y, a)[0] - c_jet(1, x, y, a)[0];
  return a.dU * shape - p_.nu * a.U * lap + p_.K * rho * phi_jet(x, y, a)[2];
}

BoundaryData ManufacturedSolution::boundary() const {
  BoundaryData bd;
  bd.gamma1 = BoundaryTrace::from_function(g_, [this](double x, double y) { return c(0, x, y, 0.0); });
  bd.gamma2 = BoundaryTrace::from_function(g_, [this](double x, double y) { return c(1, x, y, 0.0); });
  bd.W = BoundaryTrace::from_function(g_, [this](double x, double y) { return phi(x, y, 0.0); });
  return bd;
}

State ManufacturedSolution::exact_state(double t) const {
  State s;
  s.t = t;
  s.c1 = ScalarField::from_function(g_, [&](double x, double y) { return c(0, x, y, t); });
  s.c2 = ScalarField::from_function(g_, [&](double x, double y) { return c(1, x, y, t); });
  s.phi = ScalarField::from_function(g_, [&](double x, double y) { return phi(x, y, t); });
  s.rho = s.c1 - s.c2;
  const double U = amplitudes(t).U;
  const double Lx = g_.Lx, Ly = g_.Ly;
  s.u = VectorField::from_stream_function(g_, [&](double x, double y) {
    const double a = std::sin(pi * x / Lx), b = std::sin(pi * y / Ly);
    return U * a * a * b * b;
  });
  return s;
}

VectorField ManufacturedSolution::exact_velocity(double t) const {
  return VectorField::from_function(
      g_, [&](double x, double y) { return ux(x, y, t); }, [&](double x, double y) { return uy(x, y, t); });
}

void ManufacturedForcing::evaluate(double t, NpSources& np, VectorField& su) const {
  const Grid& g = m_.grid();
  np.s1 = ScalarField::from_function(g, [&](double x, double y) { return m_.source_c(0, x, y, t); });
  np.s2 = ScalarField::from_function(g, [&](double x, double y) { return m_.source_c(1, x, y, t); });
  np.sphi = ScalarField::from_function(g, [&](double x, double y) { return m_.source_phi(x, y, t); });
  su = VectorField::from_function(
      g, [&](double x, double y) { return m_.source_ux(x, y, t); },
      [&](double x, double y) { return m_.source_uy(x, y, t); });
}

}  // namespace nps
