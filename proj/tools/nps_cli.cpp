// Command line driver: nps <subcommand> --config FILE [--out DIR] [--check] [--threads N]

#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "nps/config.hpp"
#include "nps/errors.hpp"
#include "nps/experiments.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kCheck = 4 };

bool is_config_error(nps::ErrorKind k) {
  return k == nps::ErrorKind::ConfigError || k == nps::ErrorKind::InvalidArgument || k == nps::ErrorKind::IoError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-species Nernst-Planck-Stokes electroconvection solver"};
  app.require_subcommand(1);
  std::string config, out;
  bool check = false;
  int threads = 0;

  const std::pair<const char*, nps::ExperimentKind> commands[] = {
      {"run", nps::ExperimentKind::Run},
      {"sweep-eps", nps::ExperimentKind::SweepEps},
      {"steady", nps::ExperimentKind::Steady},
      {"tangent-dim", nps::ExperimentKind::TangentDim},
      {"pair-diff", nps::ExperimentKind::PairDiff},
      {"convergence", nps::ExperimentKind::Convergence},
  };
  for (const auto& [name, kind] : commands) {
    CLI::App* sub = app.add_subcommand(name, std::string("experiment '") + nps::to_string(kind) + "'");
    sub->add_option("--config", config, "YAML configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    sub->add_flag("--check", check, "enforce acceptance thresholds, exit 4 on failure");
    sub->add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  if (threads > 0) omp_set_num_threads(threads);

  nps::ExperimentKind kind{};
  for (const auto& [name, k] : commands)
    if (app.got_subcommand(name)) kind = k;

  nps::ExperimentSpec spec;
  try {
    spec = nps::load_experiment(config);
    spec.kind = kind;
    spec.validate();
  } catch (const nps::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  if (out.empty()) out = spec.sim.output.dir;

  nps::CheckList checks;
  try {
    checks = nps::run_experiment(spec, out);
  } catch (const nps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e.kind()) ? kConfig : kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
  for (const auto& f : checks.failures) std::cerr << (check ? "check failed: " : "warning: ") << f << '\n';
  if (!out.empty()) std::cout << "wrote " << out << '\n';
  return check && !checks.passed() ? kCheck : kOk;
}
