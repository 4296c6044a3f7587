#pragma once

// Linearized dynamics of the discrete coupled step, volume growth rates and
// the empirical dimension table.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nps/fluid.hpp"
#include "nps/sim.hpp"
#include "nps/transport.hpp"

namespace nps {

/// Perturbation (c1, c2, u) with zero traces and no-slip; phi is the derived potential perturbation.
struct TangentState {
  ScalarField c1, c2;
  VectorField u;
  ScalarField phi;

  TangentState() = default;
  explicit TangentState(const Grid& g) : c1(g), c2(g), u(g), phi(g) {}
  const Grid& grid() const { return c1.grid; }

  TangentState& operator+=(const TangentState& o);
  TangentState& operator*=(double s);
  /// this += a * o
  void axpy(double a, const TangentState& o);
};

TangentState operator+(TangentState a, const TangentState& b);
TangentState operator*(double s, TangentState a);

/// Inner product  <grad a_c1, grad b_c1> + <grad a_c2, grad b_c2> + <grad a_u : grad b_u>
/// with zero traces and no-slip ghosts.
double v0_inner(const TangentState& a, const TangentState& b);
double v0_norm(const TangentState& a);

/// Exact derivative of Stepper::step (without forcing) along a base step base -> next.
class TangentPropagator {
 public:
  TangentPropagator(const Grid& g, const Params& p, const BoundaryData& bd);

  /// Assembles and factorizes the linearization for the step base -> next of length dt.
  void linearize(const State& base, const State& next, double dt);
  /// Maps a perturbation of `base` to the induced perturbation of `next`.
  TangentState apply(const TangentState& ts) const;

 private:
  Grid grid_;
  Params p_;
  NpPoissonSystem np_;
  mutable StokesWorkspace stokes_;
  Vec y_next_;
  VectorField u_base_;
  ScalarField c1_, c2_, phi_;
  double dt_ = 0.0;
  bool ready_ = false;
};

TangentState tangent_step(const TangentState& ts, const State& base, const State& next, double dt, const Params& p,
                          const BoundaryData& bd);

/// Tangent modes with accumulated log normalization factors.
struct TangentBundle {
  std::vector<TangentState> modes;
  std::vector<double> log_growth;
  double elapsed = 0.0;
  int cycles = 0;
  /// Smallest log det(Gram) seen before an orthonormalization (-inf never occurs for a valid bundle).
  double min_log_gram_det = 0.0;

  int size() const { return static_cast<int>(modes.size()); }
  Eigen::MatrixXd gram() const;
};

/// n smooth random modes (zero traces, solenoidal velocity), deterministic in seed.
TangentBundle random_bundle(const Grid& g, int n, std::uint64_t seed);

/// Modified Gram-Schmidt in the v0 inner product. Adds log of each normalization factor to
/// log_growth and returns the factors. Throws RankDeficient naming the collapsed mode.
std::vector<double> orthonormalize(TangentBundle& b);

struct GrowthRates {
  std::vector<double> sigma;         ///< nonincreasing
  std::vector<double> partial_sums;  ///< partial_sums[N-1] = sum_{j <= N} sigma_j
};

GrowthRates volume_growth_rates(const std::vector<double>& log_growth, double elapsed);

struct DimensionRow {
  int N = 0;
  double sum_sigma = 0.0;
  double sigma_N = 0.0;
  bool criterion_met = false;  ///< sum_sigma <= -N
};

struct DimensionTable {
  std::vector<DimensionRow> rows;
  std::optional<int> n_star;  ///< smallest N meeting the criterion; empty when not reached
};

DimensionTable dimension_bound(const GrowthRates& rates, int N_max);
std::string dimension_csv(const DimensionTable& t);

struct TangentOptions {
  int modes = 8;
  double warmup = 0.0;  ///< accumulators reset at the first orthonormalization after this time
  int cadence = 10;     ///< steps between orthonormalizations
  double cond_limit = 1e8;
  std::uint64_t seed = 1;
};

struct TangentRun {
  GrowthRates rates;
  GrowthRates rates_half;  ///< estimate at the middle of the measurement window
  DimensionTable table;
  double min_log_gram_det = 0.0;
  int cycles = 0;
  bool stabilized = false;  ///< partial sums moved by < 5% over the second half
  State final_state;
};

/// Advances the configured base trajectory with fixed dt and a tangent bundle alongside.
TangentRun analyze_tangent(const SimConfig& cfg, const TangentOptions& opt, const State* initial = nullptr);

struct DefectRow {
  double r = 0.0;
  double defect = 0.0;  ///< v0 norm of S(w0 + r xi) - S(w0) - r S' xi
  double scaled = 0.0;  ///< defect / r^2
};

/// Nonlinear-difference check of the tangent flow over [0, horizon] for each r.
std::vector<DefectRow> linearization_defect(const SimConfig& cfg, double horizon, const std::vector<double>& r,
                                            std::uint64_t seed);

}  // namespace nps
