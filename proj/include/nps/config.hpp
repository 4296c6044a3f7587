#pragma once

// YAML configuration files for simulations and experiments.

#include <optional>
#include <string>
#include <vector>

#include "nps/sim.hpp"
#include "nps/tangent.hpp"

namespace nps {

enum class ExperimentKind { Run, SweepEps, Steady, TangentDim, PairDiff, Convergence };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct SweepSpec {
  std::vector<double> eps;
  bool auto_grid = true;     ///< grid per eps so that sqrt(eps) spans >= 4 cells
  double min_debye_cells = 4.0;
  std::optional<double> T;   ///< averaging window start (default: detected end of transient)
  std::optional<double> tau; ///< window length (default: up to t_end)
};

struct PairSpec {
  InitSpec init_b;          ///< initial condition of the second run
  std::uint64_t seed_b = 0;
};

struct ConvergenceSpec {
  std::vector<int> grids = {16, 32, 64};
  double steady_dt = 2.0;
  double steady_t_end = 40.0;
  int temporal_grid = 32;
  std::vector<double> dts = {0.04, 0.02, 0.01, 0.005};
  double temporal_t_end = 0.4;
};

struct DefectSpec {
  bool enabled = false;
  double horizon = 0.5;
  std::vector<double> r = {1e-2, 5e-3, 2.5e-3};
  std::uint64_t seed = 1;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Run;
  SimConfig sim;
  SweepSpec sweep;
  PairSpec pair;
  ConvergenceSpec convergence;
  TangentOptions tangent;
  DefectSpec defect;
  std::string text;    ///< the parsed document, for rebuilding on another grid
  std::string source;

  /// Same document with the grid replaced (boundary data are resampled).
  SimConfig config_for_grid(const Grid& g) const;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses a YAML document. Errors are ConfigError with the offending key and line.
ExperimentSpec parse_experiment(const std::string& yaml_text, const std::string& source = "<string>",
                                const Grid* grid = nullptr);
ExperimentSpec load_experiment(const std::string& path);

}  // namespace nps
