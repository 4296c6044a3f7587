#include "nps/sim.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "nps/elliptic.hpp"
#include "nps/errors.hpp"
#include "nps/manufactured.hpp"
#include "nps/operators.hpp"
#include "nps/steady.hpp"

namespace nps {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

Stepper::Stepper(const Grid& g, const Params& p, const BoundaryData& bd, std::shared_ptr<const Forcing> forcing)
    : grid_(g), p_(p), bd_(bd), forcing_(std::move(forcing)), np_(g, p, bd), stokes_(g, p.nu) {}

double Stepper::courant(const State& s, double dt) const {
  const Grid& g = grid_;
  const double dmax = std::max(p_.D1, p_.D2);
  double speed = 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i)
      speed = std::max(speed, std::abs(s.u.ux[g.xface(i, j)]) +
                                  dmax * std::abs(s.phi(i, j) - s.phi(i - 1, j)) / g.hx());
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      speed = std::max(speed, std::abs(s.u.uy[g.yface(i, j)]) +
                                  dmax * std::abs(s.phi(i, j) - s.phi(i, j - 1)) / g.hy());
  return dt * speed / std::min(g.hx(), g.hy());
}

State Stepper::step(const State& s, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (courant(s, dt) > max_courant) throw Error(ErrorKind::RetryWithSmallerDt, "Courant limit exceeded");
  const double t1 = s.t + dt;
  const NpSources* src = nullptr;
  if (forcing_) {
    forcing_->evaluate(t1, src_, su_);
    src = &src_;
  }
  Vec y = NpPoissonSystem::pack(s.c1, s.c2, s.phi);
  const Vec c_old = NpPoissonSystem::pack_concentrations(s.c1, s.c2);
  newton_iterations_ = np_.solve(y, c_old, s.u, dt, src).iterations;
  State out;
  out.t = t1;
  np_.unpack(y, out.c1, out.c2, out.phi);
  out.rho = out.c1 - out.c2;
  VectorField f = equilibrated_force(out.c1, out.c2, out.phi, p_.K);
  if (forcing_) f += su_;
  out.u = stokes_step(s.u, f, dt, stokes_);
  return out;
}

State Stepper::advance(const State& s, double dt, int max_halvings) {
  try {
    return step(s, dt);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RetryWithSmallerDt || max_halvings <= 0) throw;
  }
  const State mid = advance(s, 0.5 * dt, max_halvings - 1);
  State out = advance(mid, 0.5 * dt, max_halvings - 1);
  out.t = s.t + dt;
  return out;
}

State coupled_step(const State& s, double dt, const BoundaryData& bd, const Params& p) {
  Stepper st(s.grid(), p, bd);
  return st.step(s, dt);
}

// ---------------------------------------------------------------------------

void SimConfig::validate() const {
  params.validate();
  bd.validate(grid);
  if (!(time.dt > 0.0) || !(time.t_end > 0.0)) throw Error(ErrorKind::ConfigError, "time.dt and time.t_end must be positive");
  if (time.policy == DtPolicy::Cfl && (!(time.dt_max > 0.0) || !(time.safety > 0.0) || !std::isfinite(time.max_courant)))
    throw Error(ErrorKind::ConfigError, "cfl policy needs positive dt_max, safety and a finite max_courant");
  if (output.every < 0.0 || output.checkpoint_every < 0.0) throw Error(ErrorKind::ConfigError, "output cadence must be >= 0");
}

namespace {

// Smooth random field vanishing on the boundary, max |xi| = 1.
ScalarField random_bump(const Grid& g, std::mt19937_64& rng, int modes) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(modes * modes));
  for (int m = 1; m <= modes; ++m)
    for (int n = 1; n <= modes; ++n) a[(m - 1) * modes + (n - 1)] = normal(rng) / (m * m + n * n);
  ScalarField xi = ScalarField::from_function(g, [&](double x, double y) {
    double v = 0.0;
    for (int m = 1; m <= modes; ++m)
      for (int n = 1; n <= modes; ++n)
        v += a[(m - 1) * modes + (n - 1)] * std::sin(m * std::numbers::pi * x / g.Lx) *
             std::sin(n * std::numbers::pi * y / g.Ly);
    return v;
  });
  const double mx = std::max(std::abs(xi.min()), std::abs(xi.max()));
  if (mx > 0.0) xi *= 1.0 / mx;
  return xi;
}

}  // namespace

State initial_state(const SimConfig& cfg) {
  const Grid& g = cfg.grid;
  const InitSpec& in = cfg.init;
  if (in.kind == InitKind::Checkpoint) {
    Checkpoint ck = checkpoint_load(in.checkpoint, &g);
    return std::move(ck.state);
  }
  if (in.kind == InitKind::Manufactured) {
    return ManufacturedSolution(g, cfg.params, cfg.manufactured_steady).exact_state(0.0);
  }
  ScalarField c1(g), c2(g);
  switch (in.kind) {
    case InitKind::Constant:
      c1 = ScalarField(g, in.c1);
      c2 = ScalarField(g, in.c2);
      break;
    case InitKind::Harmonic:
      c1 = harmonic_extension(g, cfg.bd.gamma1);
      c2 = harmonic_extension(g, cfg.bd.gamma2);
      break;
    case InitKind::Neutral: {
      c1 = 0.5 * (harmonic_extension(g, cfg.bd.gamma1) + harmonic_extension(g, cfg.bd.gamma2));
      c2 = c1;
      break;
    }
    case InitKind::Boltzmann: {
      const auto Z = equilibrium_constants(cfg.bd, 1e-10);
      if (!Z) throw Error(ErrorKind::ConfigError, "init.kind boltzmann needs equilibrium boundary data");
      SteadyState s = boltzmann_state(g, *Z, cfg.bd.W, cfg.params.eps);
      c1 = s.c1;
      c2 = s.c2;
      break;
    }
    case InitKind::Steady: {
      SteadyState s = solve_steady_np(g, cfg.bd, cfg.params);
      c1 = s.c1;
      c2 = s.c2;
      break;
    }
    case InitKind::Split:
      c1 = ScalarField::from_function(g, [&](double x, double) { return x < 0.5 * g.Lx ? in.low : in.high; });
      c2 = c1;
      break;
    default:
      break;
  }
  c1 *= in.scale;
  c2 *= in.scale;
  std::mt19937_64 rng(cfg.seed);
  if (in.perturb != 0.0) {
    const ScalarField x1 = random_bump(g, rng, in.perturb_modes);
    const ScalarField x2 = random_bump(g, rng, in.perturb_modes);
    for (std::size_t k = 0; k < g.cells(); ++k) {
      c1[k] = std::max(0.0, c1[k] + in.perturb * x1[k]);
      c2[k] = std::max(0.0, c2[k] + in.perturb * x2[k]);
    }
  }
  VectorField u(g);
  if (in.velocity != 0.0) {
    const double U = in.velocity;
    u = VectorField::from_stream_function(g, [&](double x, double y) {
      const double a = std::sin(std::numbers::pi * x / g.Lx), b = std::sin(std::numbers::pi * y / g.Ly);
      return U * a * a * b * b;
    });
  }
  return make_state(std::move(c1), std::move(c2), std::move(u), cfg.bd, cfg.params, 0.0);
}

std::shared_ptr<const Forcing> make_forcing(const SimConfig& cfg) {
  if (!cfg.manufactured) return nullptr;
  return std::make_shared<ManufacturedForcing>(ManufacturedSolution(cfg.grid, cfg.params, cfg.manufactured_steady));
}

namespace {

// Steps per output interval for the fixed policy (every must be a multiple of dt).
long steps_for(double interval, double dt) {
  if (interval <= 0.0) return 1;
  const double r = interval / dt;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9 * r)
    throw Error(ErrorKind::ConfigError, "output intervals must be integer multiples of time.dt");
  return n;
}

}  // namespace

Trajectory run(const SimConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  Trajectory traj;
  State state = opt.initial ? *opt.initial : initial_state(cfg);
  std::optional<SteadyState> steady_own;
  const SteadyState* steady = opt.steady;
  if (!steady && cfg.attach_steady) {
    if (const auto Z = equilibrium_constants(cfg.bd, 1e-10))
      steady_own = boltzmann_state(cfg.grid, *Z, cfg.bd.W, cfg.params.eps);
    else
      steady_own = solve_steady_np(cfg.grid, cfg.bd, cfg.params);
    steady = &*steady_own;
  }
  Stepper stepper(cfg.grid, cfg.params, cfg.bd, make_forcing(cfg));
  if (cfg.time.policy == DtPolicy::Fixed) stepper.max_courant = cfg.time.max_courant;

  const bool write = !cfg.output.dir.empty();
  if (write) std::filesystem::create_directories(cfg.output.dir);
  auto path = [&](const std::string& name) { return (std::filesystem::path(cfg.output.dir) / name).string(); };

  auto record = [&](const State& s) {
    traj.rows.push_back(diagnose(s, cfg.bd, cfg.params, steady));
    if (opt.keep_states) traj.states.push_back(s);
  };
  record(state);

  try {
    if (cfg.time.policy == DtPolicy::Fixed) {
      const double dt = cfg.time.dt;
      const long n0 = std::lround(state.t / dt);
      const long n_end = std::lround(cfg.time.t_end / dt);
      const long out_every = steps_for(cfg.output.every, dt);
      const long ck_every = cfg.output.checkpoint_every > 0.0 ? steps_for(cfg.output.checkpoint_every, dt) : 0;
      for (long n = n0 + 1; n <= n_end; ++n) {
        State next = stepper.advance(state, dt);
        next.t = static_cast<double>(n) * dt;
        state = std::move(next);
        if (n % out_every == 0 || n == n_end) record(state);
        if (write && ck_every > 0 && n % ck_every == 0)
          checkpoint_save(path("state_" + std::to_string(n) + ".ckpt"), state, cfg.params.eps);
      }
    } else {
      // Courant-limited dt, restricted to dt_max * 2^-k so that only a few Stokes factorizations are needed.
      const double every = cfg.output.every;
      double next_out = every > 0.0 ? (std::floor(state.t / every + 1e-9) + 1.0) * every : 0.0;
      const double limit = cfg.time.safety * cfg.time.max_courant;
      while (state.t < cfg.time.t_end * (1.0 - 1e-12)) {
        double dt = cfg.time.dt_max;
        while (stepper.courant(state, dt) > limit && dt > 1e-12) dt *= 0.5;
        const double target = every > 0.0 ? std::min(next_out, cfg.time.t_end) : cfg.time.t_end;
        bool hit = false;
        if (state.t + dt >= target * (1.0 - 1e-12)) {
          dt = target - state.t;
          hit = true;
        }
        State next = stepper.advance(state, dt);
        if (hit) next.t = target;
        state = std::move(next);
        if (every <= 0.0 || hit) record(state);
        if (hit && every > 0.0) next_out += every;
      }
    }
  } catch (const Error&) {
    if (write) {
      checkpoint_save(path("last_good.ckpt"), state, cfg.params.eps);
      write_text_file(path("diagnostics.csv"), diagnostics_csv(traj.rows));
    }
    throw;
  }
  if (write) {
    write_text_file(path("diagnostics.csv"), diagnostics_csv(traj.rows));
    checkpoint_save(path("final.ckpt"), state, cfg.params.eps);
  }
  return traj;
}

// ---------------------------------------------------------------------------

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path);
}

namespace {

constexpr char kMagic[8] = {'N', 'P', 'S', 'C', 'K', 'P', 'T', '1'};

template <class T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& f, const std::string& path, const char* what) {
  T v;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!f) throw Error(ErrorKind::FormatError, path + ": truncated header at field '" + what + "'");
  return v;
}

void put_array(std::ofstream& f, const std::vector<double>& a) {
  f.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
}

void get_array(std::ifstream& f, std::vector<double>& a, const std::string& path, const char* what) {
  f.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
  if (!f) throw Error(ErrorKind::FormatError, path + ": truncated payload in field '" + what + "'");
}

void save_raw(const std::string& path, const Grid& g, double t, double eps, bool steady, const ScalarField& c1,
              const ScalarField& c2, const ScalarField& phi, const VectorField& u) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  f.write(kMagic, sizeof kMagic);
  put<std::uint64_t>(f, static_cast<std::uint64_t>(g.nx));
  put<std::uint64_t>(f, static_cast<std::uint64_t>(g.ny));
  put<double>(f, g.Lx);
  put<double>(f, g.Ly);
  put<double>(f, t);
  put<double>(f, eps);
  put<std::uint8_t>(f, steady ? 1 : 0);
  put_array(f, c1.values);
  put_array(f, c2.values);
  put_array(f, phi.values);
  put_array(f, u.ux);
  put_array(f, u.uy);
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path);
}

}  // namespace

void checkpoint_save(const std::string& path, const State& s, double eps, bool steady) {
  save_raw(path, s.grid(), s.t, eps, steady, s.c1, s.c2, s.phi, s.u);
}

void checkpoint_save_steady(const std::string& path, const SteadyState& s, double eps) {
  const Grid& g = s.phi.grid;
  save_raw(path, g, std::numeric_limits<double>::infinity(), eps, true, s.c1, s.c2, s.phi, VectorField(g));
}

Checkpoint checkpoint_load(const std::string& path, const Grid* expected) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, "cannot open " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorKind::FormatError, path + ": bad magic (expected NPSCKPT1)");
  const auto nx = get<std::uint64_t>(f, path, "nx");
  const auto ny = get<std::uint64_t>(f, path, "ny");
  const double Lx = get<double>(f, path, "Lx");
  const double Ly = get<double>(f, path, "Ly");
  const double t = get<double>(f, path, "time");
  const double eps = get<double>(f, path, "eps");
  const auto flag = get<std::uint8_t>(f, path, "steady");
  if (nx < 8 || ny < 8 || nx > (1u << 16) || ny > (1u << 16) || !(Lx > 0.0) || !(Ly > 0.0))
    throw Error(ErrorKind::FormatError, path + ": implausible grid header nx=" + std::to_string(nx) +
                                            " ny=" + std::to_string(ny));
  if (flag > 1) throw Error(ErrorKind::FormatError, path + ": steady flag must be 0 or 1");
  const Grid g(static_cast<int>(nx), static_cast<int>(ny), Lx, Ly);
  if (expected && !(g == *expected))
    throw Error(ErrorKind::FormatError, path + ": header grid " + std::to_string(nx) + "x" + std::to_string(ny) +
                                            " does not match the configured grid " + std::to_string(expected->nx) +
                                            "x" + std::to_string(expected->ny) + " (or its lengths)");
  Checkpoint ck;
  ck.eps = eps;
  ck.steady = flag == 1;
  State& s = ck.state;
  s.t = t;
  s.c1 = ScalarField(g);
  s.c2 = ScalarField(g);
  s.phi = ScalarField(g);
  s.u = VectorField(g);
  get_array(f, s.c1.values, path, "c1");
  get_array(f, s.c2.values, path, "c2");
  get_array(f, s.phi.values, path, "phi");
  get_array(f, s.u.ux, path, "ux");
  get_array(f, s.u.uy, path, "uy");
  f.peek();
  if (!f.eof()) throw Error(ErrorKind::FormatError, path + ": trailing bytes after payload");
  s.rho = s.c1 - s.c2;
  return ck;
}

}  // namespace nps
