#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nps {

/// Uniform cell-centred rectangular grid on [0,Lx] x [0,Ly].
///
/// Scalars live at cell centres ((i+1/2)hx, (j+1/2)hy), the x-velocity on
/// vertical faces (i*hx, (j+1/2)hy) and the y-velocity on horizontal faces.
/// Cell index is i + nx*j (x fastest).
struct Grid {
  int nx = 0;
  int ny = 0;
  double Lx = 1.0;
  double Ly = 1.0;

  Grid() = default;
  Grid(int nx_, int ny_, double Lx_ = 1.0, double Ly_ = 1.0);

  double hx() const { return Lx / nx; }
  double hy() const { return Ly / ny; }
  double cell_volume() const { return hx() * hy(); }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t x_faces() const { return static_cast<std::size_t>(nx + 1) * ny; }
  std::size_t y_faces() const { return static_cast<std::size_t>(nx) * (ny + 1); }

  double xc(int i) const { return (i + 0.5) * hx(); }
  double yc(int j) const { return (j + 0.5) * hy(); }
  double xf(int i) const { return i * hx(); }
  double yf(int j) const { return j * hy(); }

  std::size_t cell(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j; }
  std::size_t xface(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx + 1) * j; }
  std::size_t yface(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j; }

  bool operator==(const Grid& o) const { return nx == o.nx && ny == o.ny && Lx == o.Lx && Ly == o.Ly; }
};

/// Cell-centred scalar field.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.cells(), fill) {}

  static ScalarField from_function(const Grid& g, const std::function<double(double, double)>& f);

  double& operator()(int i, int j) { return values[grid.cell(i, j)]; }
  double operator()(int i, int j) const { return values[grid.cell(i, j)]; }
  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
  std::size_t size() const { return values.size(); }
  std::span<const double> span() const { return values; }

  double min() const;
  double max() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// MAC-staggered velocity: ux on (nx+1)*ny x-faces, uy on nx*(ny+1) y-faces.
struct VectorField {
  Grid grid;
  std::vector<double> ux;
  std::vector<double> uy;

  VectorField() = default;
  explicit VectorField(const Grid& g) : grid(g), ux(g.x_faces(), 0.0), uy(g.y_faces(), 0.0) {}

  /// Samples (fx, fy) at the face centres, including boundary faces.
  static VectorField from_function(const Grid& g, const std::function<double(double, double)>& fx,
                                   const std::function<double(double, double)>& fy);
  /// Discrete curl of a stream function sampled at cell corners; exactly divergence-free,
  /// and zero normal velocity on the walls when psi vanishes on the boundary.
  static VectorField from_stream_function(const Grid& g, const std::function<double(double, double)>& psi);

  double max_abs() const;
  bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Dirichlet values on the boundary faces of the four walls.
/// left/right hold ny values (indexed by j), bottom/top hold nx values (indexed by i).
struct BoundaryTrace {
  std::vector<double> left, right, bottom, top;

  BoundaryTrace() = default;
  static BoundaryTrace constant(const Grid& g, double value);
  static BoundaryTrace zero(const Grid& g) { return constant(g, 0.0); }
  /// Samples f at the boundary face centres.
  static BoundaryTrace from_function(const Grid& g, const std::function<double(double, double)>& f);

  bool matches(const Grid& g) const;
  double min() const;
  double max() const;
  /// Applies f pointwise, keeping the layout.
  BoundaryTrace map(const std::function<double(double)>& f) const;
  BoundaryTrace combine(const BoundaryTrace& other, const std::function<double(double, double)>& f) const;
};

/// Dirichlet data for the two concentrations and the potential.
struct BoundaryData {
  BoundaryTrace gamma1;
  BoundaryTrace gamma2;
  BoundaryTrace W;

  const BoundaryTrace& gamma(int species) const { return species == 0 ? gamma1 : gamma2; }
  /// min_i inf gamma_i
  double gamma_min() const;
  /// max_i sup gamma_i
  double gamma_max() const;
  /// Throws InvalidArgument unless the traces match the grid and gamma_i > 0.
  void validate(const Grid& g) const;
};

/// Physical constants of the two-species system. Valences are fixed at +1 / -1.
struct Params {
  double eps = 1.0;
  double D1 = 1.0;
  double D2 = 1.0;
  double nu = 1.0;
  double K = 1.0;
  double delta = 1.0;

  double D(int species) const { return species == 0 ? D1 : D2; }
  static constexpr double z(int species) { return species == 0 ? 1.0 : -1.0; }
  void validate() const;
};

}  // namespace nps
