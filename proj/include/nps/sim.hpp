#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "nps/diagnostics.hpp"
#include "nps/fluid.hpp"
#include "nps/transport.hpp"

namespace nps {

/// Extra source terms evaluated at the new time level (manufactured solutions).
class Forcing {
 public:
  virtual ~Forcing() = default;
  virtual void evaluate(double t, NpSources& np, VectorField& su) const = 0;
};

/// Advances States by the coupled backward-Euler step:
///  1. (c1, c2, Phi) from the implicit Nernst-Planck/Poisson system with the old velocity,
///  2. u from the Stokes system forced by the new charge distribution.
/// Holds the factorization workspaces, so reuse one Stepper for a whole run.
class Stepper {
 public:
  Stepper(const Grid& g, const Params& p, const BoundaryData& bd, std::shared_ptr<const Forcing> forcing = nullptr);

  /// One step. Throws RetryWithSmallerDt when Newton fails or the Courant limit is exceeded.
  State step(const State& s, double dt);
  /// step() with up to max_halvings recursive dt bisections on RetryWithSmallerDt.
  State advance(const State& s, double dt, int max_halvings = 8);

  /// dt * max(|u| + max_i D_i |grad Phi|) / min(hx, hy).
  double courant(const State& s, double dt) const;

  double max_courant = std::numeric_limits<double>::infinity();

  const Params& params() const { return p_; }
  const BoundaryData& boundary() const { return bd_; }
  const Forcing* forcing() const { return forcing_.get(); }
  NpPoissonSystem& np_system() { return np_; }
  StokesWorkspace& stokes() { return stokes_; }
  int newton_iterations() const { return newton_iterations_; }

 private:
  Grid grid_;
  Params p_;
  BoundaryData bd_;
  std::shared_ptr<const Forcing> forcing_;
  NpPoissonSystem np_;
  StokesWorkspace stokes_;
  NpSources src_;
  VectorField su_;
  int newton_iterations_ = 0;
};

/// Convenience wrapper building a temporary Stepper.
State coupled_step(const State& s, double dt, const BoundaryData& bd, const Params& p);

enum class InitKind { Constant, Harmonic, Neutral, Boltzmann, Steady, Split, Checkpoint, Manufactured };
enum class DtPolicy { Fixed, Cfl };

struct InitSpec {
  InitKind kind = InitKind::Constant;
  double c1 = 1.0, c2 = 1.0;     ///< constant
  double low = 1.0, high = 1.0;  ///< split: low for x < Lx/2, high otherwise (both species)
  double scale = 1.0;            ///< multiplies both concentrations
  double perturb = 0.0;          ///< amplitude of a smooth zero-trace random perturbation
  int perturb_modes = 4;
  double velocity = 0.0;  ///< amplitude of the initial stream function sin^2 sin^2
  std::string checkpoint;
};

struct TimeSpec {
  double dt = 1e-2;
  double t_end = 1.0;
  DtPolicy policy = DtPolicy::Fixed;
  double safety = 0.9;
  double max_courant = std::numeric_limits<double>::infinity();
  double dt_max = 1e-2;
};

struct OutputSpec {
  double every = 0.0;  ///< 0: every step
  std::string dir;
  double checkpoint_every = 0.0;  ///< 0: final state only (when dir is set)
};

struct SimConfig {
  Grid grid{32, 32};
  Params params;
  BoundaryData bd;
  InitSpec init;
  TimeSpec time;
  OutputSpec output;
  std::uint64_t seed = 0;
  bool manufactured = false;
  bool manufactured_steady = false;
  bool attach_steady = false;

  void validate() const;
};

struct RunOptions {
  bool keep_states = false;
  const State* initial = nullptr;  ///< overrides the configured initial condition
  const SteadyState* steady = nullptr;
};

/// Initial State for a configuration.
State initial_state(const SimConfig& cfg);
/// Forcing for manufactured-solution runs (null otherwise).
std::shared_ptr<const Forcing> make_forcing(const SimConfig& cfg);

/// Integrates to t_end emitting a diagnostics row at t = 0 and every output.every.
/// With output.dir set, writes diagnostics.csv and checkpoints; on failure the last good
/// state is saved as last_good.ckpt before the error propagates.
Trajectory run(const SimConfig& cfg, const RunOptions& opt = {});

struct Checkpoint {
  State state;
  double eps = 0.0;
  bool steady = false;
};

/// Binary checkpoint: "NPSCKPT1", u64 nx, ny, f64 Lx, Ly, t, eps, u8 steady flag,
/// then c1, c2, Phi, ux, uy as little-endian f64 (x fastest).
void checkpoint_save(const std::string& path, const State& s, double eps, bool steady = false);
void checkpoint_save_steady(const std::string& path, const SteadyState& s, double eps);
/// Throws IoError or FormatError (header diagnostics in the message).
Checkpoint checkpoint_load(const std::string& path, const Grid* expected = nullptr);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace nps
