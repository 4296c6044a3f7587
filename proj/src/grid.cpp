#include "nps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nps/errors.hpp"

namespace nps {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::MaxPrincipleViolation: return "MaxPrincipleViolation";
    case ErrorKind::NonpositiveConcentration: return "NonpositiveConcentration";
    case ErrorKind::RetryWithSmallerDt: return "RetryWithSmallerDt";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::InsufficientWindow: return "InsufficientWindow";
    case ErrorKind::IdenticalStates: return "IdenticalStates";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::GummelDivergence: return "GummelDivergence";
    case ErrorKind::NewtonStall: return "NewtonStall";
    case ErrorKind::Mismatch: return "Mismatch";
  }
  return "Unknown";
}

Grid::Grid(int nx_, int ny_, double Lx_, double Ly_) : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
  if (nx < 8 || ny < 8) throw Error(ErrorKind::InvalidArgument, "grid needs nx, ny >= 8");
  if (!(Lx > 0.0) || !(Ly > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid lengths must be positive");
}

// ---------------------------------------------------------------------------

ScalarField ScalarField::from_function(const Grid& g, const std::function<double(double, double)>& f) {
  ScalarField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out(i, j) = f(g.xc(i), g.yc(j));
  return out;
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  for (std::size_t k = 0; k < values.size(); ++k) values[k] += o.values[k];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  for (std::size_t k = 0; k < values.size(); ++k) values[k] -= o.values[k];
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  for (auto& v : values) v *= s;
  return *this;
}
ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

// ---------------------------------------------------------------------------

VectorField VectorField::from_function(const Grid& g, const std::function<double(double, double)>& fx,
                                       const std::function<double(double, double)>& fy) {
  VectorField out(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) out.ux[g.xface(i, j)] = fx(g.xf(i), g.yc(j));
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.uy[g.yface(i, j)] = fy(g.xc(i), g.yf(j));
  return out;
}

VectorField VectorField::from_stream_function(const Grid& g, const std::function<double(double, double)>& psi) {
  VectorField out(g);
  const double hx = g.hx(), hy = g.hy();
  // ux = d(psi)/dy between the corners above and below the x-face,
  // uy = -d(psi)/dx between the corners left and right of the y-face.
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      out.ux[g.xface(i, j)] = (psi(g.xf(i), g.yf(j + 1)) - psi(g.xf(i), g.yf(j))) / hy;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.uy[g.yface(i, j)] = -(psi(g.xf(i + 1), g.yf(j)) - psi(g.xf(i), g.yf(j))) / hx;
  return out;
}

double VectorField::max_abs() const {
  double m = 0.0;
  for (double v : ux) m = std::max(m, std::abs(v));
  for (double v : uy) m = std::max(m, std::abs(v));
  return m;
}

bool VectorField::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(ux.begin(), ux.end(), finite) && std::all_of(uy.begin(), uy.end(), finite);
}

VectorField& VectorField::operator+=(const VectorField& o) {
  for (std::size_t k = 0; k < ux.size(); ++k) ux[k] += o.ux[k];
  for (std::size_t k = 0; k < uy.size(); ++k) uy[k] += o.uy[k];
  return *this;
}
VectorField& VectorField::operator-=(const VectorField& o) {
  for (std::size_t k = 0; k < ux.size(); ++k) ux[k] -= o.ux[k];
  for (std::size_t k = 0; k < uy.size(); ++k) uy[k] -= o.uy[k];
  return *this;
}
VectorField& VectorField::operator*=(double s) {
  for (auto& v : ux) v *= s;
  for (auto& v : uy) v *= s;
  return *this;
}
VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

// ---------------------------------------------------------------------------

BoundaryTrace BoundaryTrace::constant(const Grid& g, double value) {
  BoundaryTrace t;
  t.left.assign(g.ny, value);
  t.right.assign(g.ny, value);
  t.bottom.assign(g.nx, value);
  t.top.assign(g.nx, value);
  return t;
}

BoundaryTrace BoundaryTrace::from_function(const Grid& g, const std::function<double(double, double)>& f) {
  BoundaryTrace t = constant(g, 0.0);
  for (int j = 0; j < g.ny; ++j) {
    t.left[j] = f(0.0, g.yc(j));
    t.right[j] = f(g.Lx, g.yc(j));
  }
  for (int i = 0; i < g.nx; ++i) {
    t.bottom[i] = f(g.xc(i), 0.0);
    t.top[i] = f(g.xc(i), g.Ly);
  }
  return t;
}

bool BoundaryTrace::matches(const Grid& g) const {
  return left.size() == static_cast<std::size_t>(g.ny) && right.size() == static_cast<std::size_t>(g.ny) &&
         bottom.size() == static_cast<std::size_t>(g.nx) && top.size() == static_cast<std::size_t>(g.nx);
}

double BoundaryTrace::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto* side : {&left, &right, &bottom, &top})
    for (double v : *side) m = std::min(m, v);
  return m;
}

double BoundaryTrace::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto* side : {&left, &right, &bottom, &top})
    for (double v : *side) m = std::max(m, v);
  return m;
}

BoundaryTrace BoundaryTrace::map(const std::function<double(double)>& f) const {
  BoundaryTrace t = *this;
  for (auto* side : {&t.left, &t.right, &t.bottom, &t.top})
    for (double& v : *side) v = f(v);
  return t;
}

BoundaryTrace BoundaryTrace::combine(const BoundaryTrace& other,
                                     const std::function<double(double, double)>& f) const {
  BoundaryTrace t = *this;
  auto zip = [&](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = f(a[k], b[k]);
  };
  zip(t.left, other.left);
  zip(t.right, other.right);
  zip(t.bottom, other.bottom);
  zip(t.top, other.top);
  return t;
}

double BoundaryData::gamma_min() const { return std::min(gamma1.min(), gamma2.min()); }
double BoundaryData::gamma_max() const { return std::max(gamma1.max(), gamma2.max()); }

void BoundaryData::validate(const Grid& g) const {
  if (!gamma1.matches(g) || !gamma2.matches(g) || !W.matches(g))
    throw Error(ErrorKind::InvalidArgument, "boundary traces do not match the grid");
  if (!(gamma_min() > 0.0)) throw Error(ErrorKind::InvalidArgument, "boundary concentrations must be positive");
  if (!std::isfinite(gamma_max()) || !std::isfinite(W.min()) || !std::isfinite(W.max()))
    throw Error(ErrorKind::InvalidArgument, "boundary data must be finite");
}

void Params::validate() const {
  if (!(eps > 0.0 && D1 > 0.0 && D2 > 0.0 && nu > 0.0 && K > 0.0 && delta > 0.0))
    throw Error(ErrorKind::InvalidArgument, "eps, D1, D2, nu, K and delta must be positive");
}

}  // namespace nps
