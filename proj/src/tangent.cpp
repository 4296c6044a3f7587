#include "nps/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nps/elliptic.hpp"
#include "nps/errors.hpp"
#include "nps/kernels.hpp"
#include "nps/operators.hpp"

namespace nps {

TangentState& TangentState::operator+=(const TangentState& o) {
  c1 += o.c1;
  c2 += o.c2;
  u += o.u;
  phi += o.phi;
  return *this;
}

TangentState& TangentState::operator*=(double s) {
  c1 *= s;
  c2 *= s;
  u *= s;
  phi *= s;
  return *this;
}

void TangentState::axpy(double a, const TangentState& o) {
  for (std::size_t k = 0; k < c1.size(); ++k) {
    c1[k] += a * o.c1[k];
    c2[k] += a * o.c2[k];
    phi[k] += a * o.phi[k];
  }
  for (std::size_t k = 0; k < u.ux.size(); ++k) u.ux[k] += a * o.u.ux[k];
  for (std::size_t k = 0; k < u.uy.size(); ++k) u.uy[k] += a * o.u.uy[k];
}

TangentState operator+(TangentState a, const TangentState& b) { return a += b; }
TangentState operator*(double s, TangentState a) { return a *= s; }

double v0_inner(const TangentState& a, const TangentState& b) {
  const Grid& g = a.grid();
  const BoundaryTrace zero = BoundaryTrace::zero(g);
  return kernels::gradient_dot(g, a.c1.span(), &zero, b.c1.span(), &zero) +
         kernels::gradient_dot(g, a.c2.span(), &zero, b.c2.span(), &zero) +
         kernels::velocity_gradient_dot(g, a.u, b.u);
}

double v0_norm(const TangentState& a) { return std::sqrt(v0_inner(a, a)); }

// ---------------------------------------------------------------------------

TangentPropagator::TangentPropagator(const Grid& g, const Params& p, const BoundaryData& bd)
    : grid_(g), p_(p), np_(g, p, bd), stokes_(g, p.nu) {}

void TangentPropagator::linearize(const State& base, const State& next, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  y_next_ = NpPoissonSystem::pack(next.c1, next.c2, next.phi);
  const Vec c_old = NpPoissonSystem::pack_concentrations(base.c1, base.c2);
  Vec r;
  np_.assemble(y_next_, c_old, base.u, dt, nullptr, r, true);
  np_.factorize_jacobian();
  u_base_ = base.u;
  c1_ = next.c1;
  c2_ = next.c2;
  phi_ = next.phi;
  dt_ = dt;
  ready_ = true;
}

TangentState TangentPropagator::apply(const TangentState& ts) const {
  if (!ready_) throw Error(ErrorKind::InvalidArgument, "linearize() must be called before apply()");
  const std::size_t n = grid_.cells();
  // J dy' = [dc/dt; 0] - (dR/du) du
  Vec rhs = -np_.velocity_derivative(y_next_, u_base_, ts.u);
  for (std::size_t k = 0; k < n; ++k) {
    rhs[3 * k] += ts.c1[k] / dt_;
    rhs[3 * k + 1] += ts.c2[k] / dt_;
  }
  const Vec dy = np_.lu().solve(rhs);
  TangentState out(grid_);
  np_.unpack(dy, out.c1, out.c2, out.phi);
  const VectorField df = equilibrated_force_derivative(c1_, c2_, phi_, out.c1, out.c2, out.phi, p_.K);
  const Vec v = pack_velocity(ts.u) / dt_ + pack_velocity(df);
  out.u = unpack_velocity(grid_, stokes_.solve(v, dt_));
  return out;
}

TangentState tangent_step(const TangentState& ts, const State& base, const State& next, double dt, const Params& p,
                          const BoundaryData& bd) {
  TangentPropagator prop(base.grid(), p, bd);
  prop.linearize(base, next, dt);
  return prop.apply(ts);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd TangentBundle::gram() const {
  const int n = size();
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) G(i, j) = G(j, i) = v0_inner(modes[i], modes[j]);
  return G;
}

TangentBundle random_bundle(const Grid& g, int n, std::uint64_t seed) {
  if (n < 1 || n > 64) throw Error(ErrorKind::InvalidArgument, "bundle size must be in 1..64");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int K = 6;
  using std::numbers::pi;
  auto series = [&](std::vector<double>& a) {
    a.resize(K * K);
    for (int m = 1; m <= K; ++m)
      for (int q = 1; q <= K; ++q) a[(m - 1) * K + (q - 1)] = normal(rng) / (m * m + q * q);
  };
  auto eval = [&](const std::vector<double>& a, double x, double y) {
    double v = 0.0;
    for (int m = 1; m <= K; ++m)
      for (int q = 1; q <= K; ++q)
        v += a[(m - 1) * K + (q - 1)] * std::sin(m * pi * x / g.Lx) * std::sin(q * pi * y / g.Ly);
    return v;
  };
  TangentBundle b;
  std::vector<double> a1, a2, a3;
  for (int k = 0; k < n; ++k) {
    series(a1);
    series(a2);
    series(a3);
    TangentState t(g);
    t.c1 = ScalarField::from_function(g, [&](double x, double y) { return eval(a1, x, y); });
    t.c2 = ScalarField::from_function(g, [&](double x, double y) { return eval(a2, x, y); });
    t.u = VectorField::from_stream_function(g, [&](double x, double y) { return eval(a3, x, y); });
    b.modes.push_back(std::move(t));
  }
  b.log_growth.assign(n, 0.0);
  return b;
}

std::vector<double> orthonormalize(TangentBundle& b) {
  const int n = b.size();
  std::vector<double> factors(n);
  double log_det = 0.0;
  for (int j = 0; j < n; ++j) {
    TangentState& v = b.modes[j];
    const double before = v0_norm(v);
    for (int i = 0; i < j; ++i) v.axpy(-v0_inner(v, b.modes[i]), b.modes[i]);
    const double r = v0_norm(v);
    if (!(r > 1e-12 * before) || !std::isfinite(r))
      throw Error(ErrorKind::RankDeficient, "tangent mode " + std::to_string(j) + " collapsed");
    v *= 1.0 / r;
    factors[j] = r;
    b.log_growth[j] += std::log(r);
    log_det += 2.0 * std::log(r);
  }
  b.min_log_gram_det = b.cycles == 0 ? log_det : std::min(b.min_log_gram_det, log_det);
  ++b.cycles;
  return factors;
}

GrowthRates volume_growth_rates(const std::vector<double>& log_growth, double elapsed) {
  if (!(elapsed > 0.0)) throw Error(ErrorKind::InvalidArgument, "elapsed time must be positive");
  GrowthRates out;
  out.sigma.reserve(log_growth.size());
  for (double l : log_growth) out.sigma.push_back(l / elapsed);
  std::sort(out.sigma.begin(), out.sigma.end(), std::greater<>());
  double acc = 0.0;
  for (double s : out.sigma) out.partial_sums.push_back(acc += s);
  return out;
}

DimensionTable dimension_bound(const GrowthRates& rates, int N_max) {
  if (N_max < 1 || N_max > 64) throw Error(ErrorKind::InvalidArgument, "N_max must be in 1..64");
  DimensionTable t;
  const int n = std::min<int>(N_max, static_cast<int>(rates.sigma.size()));
  for (int N = 1; N <= n; ++N) {
    DimensionRow r;
    r.N = N;
    r.sum_sigma = rates.partial_sums[N - 1];
    r.sigma_N = rates.sigma[N - 1];
    r.criterion_met = r.sum_sigma <= -static_cast<double>(N);
    if (r.criterion_met && !t.n_star) t.n_star = N;
    t.rows.push_back(r);
  }
  return t;
}

std::string dimension_csv(const DimensionTable& t) {
  std::string out = "N,sum_sigma,sigma_N,criterion_met\n";
  for (const auto& r : t.rows)
    out += std::to_string(r.N) + "," + format_double(r.sum_sigma) + "," + format_double(r.sigma_N) + "," +
           (r.criterion_met ? "1" : "0") + "\n";
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double gram_condition(const TangentBundle& b) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.gram(), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

double max_relative_change(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k)
    m = std::max(m, std::abs(a[k] - b[k]) / std::max(std::abs(b[k]), 1e-300));
  return m;
}

}  // namespace

TangentRun analyze_tangent(const SimConfig& cfg, const TangentOptions& opt, const State* initial) {
  cfg.validate();
  if (opt.cadence < 1) throw Error(ErrorKind::ConfigError, "tangent cadence must be >= 1");
  if (!(opt.warmup >= 0.0) || opt.warmup >= cfg.time.t_end)
    throw Error(ErrorKind::ConfigError, "tangent warm-up must lie in [0, t_end)");
  const Grid& g = cfg.grid;
  State state = initial ? *initial : initial_state(cfg);
  Stepper stepper(g, cfg.params, cfg.bd, make_forcing(cfg));
  TangentPropagator prop(g, cfg.params, cfg.bd);
  TangentBundle b = random_bundle(g, opt.modes, opt.seed);
  orthonormalize(b);

  const double dt = cfg.time.dt;
  const long n0 = std::lround(state.t / dt);
  const long n_end = std::lround(cfg.time.t_end / dt);
  bool measuring = false;
  double t_start = 0.0;
  int since = 0;
  TangentRun out;
  bool have_half = false;

  auto reset = [&](double t) {
    std::fill(b.log_growth.begin(), b.log_growth.end(), 0.0);
    b.cycles = 0;
    t_start = t;
    measuring = true;
  };
  if (opt.warmup <= 0.0) reset(state.t);

  for (long n = n0 + 1; n <= n_end; ++n) {
    State next = stepper.step(state, dt);
    next.t = static_cast<double>(n) * dt;
    prop.linearize(state, next, dt);
    for (auto& m : b.modes) m = prop.apply(m);
    state = std::move(next);
    ++since;
    const bool last = n == n_end;
    if (since >= opt.cadence || last || gram_condition(b) > opt.cond_limit) {
      orthonormalize(b);
      since = 0;
      if (!measuring && state.t >= opt.warmup - 1e-12 * dt) {
        reset(state.t);
      } else if (measuring && !have_half && state.t - t_start >= 0.5 * (cfg.time.t_end - t_start) && !last) {
        out.rates_half = volume_growth_rates(b.log_growth, state.t - t_start);
        have_half = true;
      }
    }
  }
  if (!measuring || !(state.t > t_start))
    throw Error(ErrorKind::ConfigError, "no measurement window after the tangent warm-up");
  out.rates = volume_growth_rates(b.log_growth, state.t - t_start);
  out.table = dimension_bound(out.rates, opt.modes);
  out.min_log_gram_det = b.min_log_gram_det;
  out.cycles = b.cycles;
  out.stabilized = have_half && max_relative_change(out.rates_half.partial_sums, out.rates.partial_sums) < 0.05;
  out.final_state = std::move(state);
  return out;
}

std::vector<DefectRow> linearization_defect(const SimConfig& cfg, double horizon, const std::vector<double>& r,
                                            std::uint64_t seed) {
  cfg.validate();
  const Grid& g = cfg.grid;
  const double dt = cfg.time.dt;
  const long steps = std::lround(horizon / dt);
  if (steps < 1 || std::abs(steps * dt - horizon) > 1e-9 * horizon)
    throw Error(ErrorKind::ConfigError, "horizon must be a positive multiple of time.dt");
  const State w0 = initial_state(cfg);
  TangentState xi = random_bundle(g, 1, seed).modes[0];
  xi *= 1.0 / v0_norm(xi);

  Stepper stepper(g, cfg.params, cfg.bd);
  TangentPropagator prop(g, cfg.params, cfg.bd);
  State base = w0;
  TangentState lin = xi;
  for (long n = 0; n < steps; ++n) {
    State next = stepper.step(base, dt);
    prop.linearize(base, next, dt);
    lin = prop.apply(lin);
    base = std::move(next);
  }

  std::vector<DefectRow> rows;
  for (double rr : r) {
    State s = make_state(w0.c1 + rr * xi.c1, w0.c2 + rr * xi.c2, w0.u + rr * xi.u, cfg.bd, cfg.params, w0.t);
    for (long n = 0; n < steps; ++n) s = stepper.step(s, dt);
    TangentState d(g);
    d.c1 = s.c1 - base.c1;
    d.c2 = s.c2 - base.c2;
    d.u = s.u - base.u;
    d.axpy(-rr, lin);
    DefectRow row;
    row.r = rr;
    row.defect = v0_norm(d);
    row.scaled = row.defect / (rr * rr);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nps
