#include "nps/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nps/errors.hpp"
#include "nps/manufactured.hpp"

namespace nps {

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Run: return "run";
    case ExperimentKind::SweepEps: return "sweep_eps";
    case ExperimentKind::Steady: return "steady";
    case ExperimentKind::TangentDim: return "tangent_dim";
    case ExperimentKind::PairDiff: return "pair_diff";
    case ExperimentKind::Convergence: return "convergence";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (ExperimentKind k : {ExperimentKind::Run, ExperimentKind::SweepEps, ExperimentKind::Steady,
                           ExperimentKind::TangentDim, ExperimentKind::PairDiff, ExperimentKind::Convergence}) {
    std::string name = to_string(k);
    if (s == name) return k;
    for (auto& ch : name)
      if (ch == '_') ch = '-';
    if (s == name) return k;
  }
  throw Error(ErrorKind::ConfigError, "unknown experiment kind '" + s + "'");
}

namespace {

// Message without the "Kind: " prefix, for rewrapping.
std::string bare(const Error& e) {
  const std::string w = e.what();
  const auto p = w.find(": ");
  return p == std::string::npos ? w : w.substr(p + 2);
}

// Node plus its dotted key path, for error messages.
class Reader {
 public:
  Reader(YAML::Node node, std::string path, const std::string* source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {}

  bool defined() const { return node_.IsDefined() && !node_.IsNull(); }
  const YAML::Node& node() const { return node_; }
  const std::string& path() const { return path_; }

  Reader operator[](const std::string& key) const {
    // A missing key yields an invalid node that throws on most queries; replace it.
    const YAML::Node child = node_.IsDefined() && node_.IsMap() ? node_[key] : YAML::Node(YAML::NodeType::Undefined);
    return Reader(child.IsDefined() ? child : YAML::Node(YAML::NodeType::Undefined),
                  path_.empty() ? key : path_ + "." + key, source_);
  }
  bool has(const std::string& key) const { return (*this)[key].defined(); }

  [[noreturn]] void fail(const std::string& msg) const {
    std::string where = *source_;
    if (node_.IsDefined() && node_.Mark().line >= 0) where += ":" + std::to_string(node_.Mark().line + 1);
    throw Error(ErrorKind::ConfigError, where + ": key '" + (path_.empty() ? "<root>" : path_) + "': " + msg);
  }

  void expect_map() const {
    if (!node_.IsMap()) fail("expected a mapping");
  }

  void allow_keys(std::initializer_list<const char*> keys) const {
    if (!defined()) return;
    expect_map();
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!ok.count(k)) Reader(kv.first, path_.empty() ? k : path_ + "." + k, source_).fail("unknown key");
    }
  }

  template <class T>
  T as() const {
    if (!node_.IsScalar()) fail("expected a scalar value");
    try {
      return node_.as<T>();
    } catch (const YAML::Exception&) {
      fail("cannot convert '" + node_.Scalar() + "'");
    }
  }

  template <class T>
  T get(const std::string& key, T def) const {
    const Reader r = (*this)[key];
    return r.defined() ? r.as<T>() : def;
  }

  template <class T>
  T require(const std::string& key) const {
    const Reader r = (*this)[key];
    if (!r.defined()) {
      if (node_.IsDefined()) Reader(node_, r.path(), source_).fail("required key is missing");
      r.fail("required key is missing");
    }
    return r.as<T>();
  }

  template <class T>
  std::vector<T> list(const std::string& key, std::vector<T> def) const {
    const Reader r = (*this)[key];
    if (!r.defined()) return def;
    if (!r.node().IsSequence()) r.fail("expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < r.node().size(); ++i)
      out.push_back(Reader(r.node()[i], r.path() + "[" + std::to_string(i) + "]", source_).as<T>());
    return out;
  }

  const std::string* source() const { return source_; }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string* source_;
};

// Values on one wall: constant, two-point ramp, full table, or piecewise-linear knots.
std::vector<double> parse_wall(const Reader& r, int n, const std::function<double(int)>& arc) {
  const YAML::Node& nd = r.node();
  if (nd.IsScalar()) return std::vector<double>(n, r.as<double>());
  if (nd.IsSequence()) {
    std::vector<double> v;
    for (std::size_t i = 0; i < nd.size(); ++i) v.push_back(Reader(nd[i], r.path(), r.source()).as<double>());
    if (static_cast<int>(v.size()) == n) return v;
    if (v.size() == 2) {
      std::vector<double> out(n);
      for (int k = 0; k < n; ++k) out[k] = v[0] + (v[1] - v[0]) * arc(k);
      return out;
    }
    r.fail("a wall list needs 2 entries (ramp) or one entry per boundary face (" + std::to_string(n) + ")");
  }
  if (nd.IsMap()) {
    r.allow_keys({"knots"});
    const Reader kn = r["knots"];
    if (!kn.defined() || !kn.node().IsSequence() || kn.node().size() < 2) r.fail("knots needs at least two [s, value] pairs");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < kn.node().size(); ++i) {
      const Reader p(kn.node()[i], kn.path() + "[" + std::to_string(i) + "]", r.source());
      if (!p.node().IsSequence() || p.node().size() != 2) p.fail("expected [s, value]");
      pts.emplace_back(Reader(p.node()[0], p.path(), r.source()).as<double>(),
                       Reader(p.node()[1], p.path(), r.source()).as<double>());
      if (i > 0 && !(pts[i].first > pts[i - 1].first)) p.fail("knot positions must increase");
    }
    if (pts.front().first > 0.0 || pts.back().first < 1.0) kn.fail("knots must cover [0, 1]");
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) {
      const double s = arc(k);
      std::size_t i = 1;
      while (i + 1 < pts.size() && pts[i].first < s) ++i;
      const double w = (s - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
      out[k] = pts[i - 1].second + w * (pts[i].second - pts[i - 1].second);
    }
    return out;
  }
  r.fail("expected a number, a list or a knots mapping");
}

BoundaryTrace parse_trace(const Reader& r, const Grid& g) {
  if (!r.defined()) r.fail("required boundary trace is missing");
  if (r.node().IsScalar()) return BoundaryTrace::constant(g, r.as<double>());
  r.allow_keys({"left", "right", "bottom", "top", "default"});
  BoundaryTrace t;
  auto wall = [&](const char* name, int n, const std::function<double(int)>& arc) {
    // YAML::Node assignment rebinds in place, so pick the reader without assigning.
    const std::string key = r.has(name) ? name : "default";
    if (!r.has(key)) r[name].fail("missing wall (or 'default')");
    return parse_wall(r[key], n, arc);
  };
  auto along_y = [&](int j) { return g.yc(j) / g.Ly; };
  auto along_x = [&](int i) { return g.xc(i) / g.Lx; };
  t.left = wall("left", g.ny, along_y);
  t.right = wall("right", g.ny, along_y);
  t.bottom = wall("bottom", g.nx, along_x);
  t.top = wall("top", g.nx, along_x);
  return t;
}

InitSpec parse_init(const Reader& r, InitSpec in) {
  if (!r.defined()) return in;
  r.allow_keys({"kind", "c1", "c2", "low", "high", "scale", "perturb", "perturb_modes", "velocity", "checkpoint"});
  if (r.has("kind")) {
    const std::string k = r["kind"].as<std::string>();
    static const std::pair<const char*, InitKind> kinds[] = {
        {"constant", InitKind::Constant}, {"harmonic", InitKind::Harmonic},   {"neutral", InitKind::Neutral},
        {"boltzmann", InitKind::Boltzmann}, {"steady", InitKind::Steady},     {"split", InitKind::Split},
        {"checkpoint", InitKind::Checkpoint}, {"manufactured", InitKind::Manufactured}};
    bool found = false;
    for (auto [name, kind] : kinds)
      if (k == name) {
        in.kind = kind;
        found = true;
      }
    if (!found) r["kind"].fail("unknown initial condition '" + k + "'");
  }
  in.c1 = r.get("c1", in.c1);
  in.c2 = r.get("c2", in.c2);
  in.low = r.get("low", in.low);
  in.high = r.get("high", in.high);
  in.scale = r.get("scale", in.scale);
  in.perturb = r.get("perturb", in.perturb);
  in.perturb_modes = r.get("perturb_modes", in.perturb_modes);
  in.velocity = r.get("velocity", in.velocity);
  in.checkpoint = r.get("checkpoint", in.checkpoint);
  if (in.kind == InitKind::Checkpoint && in.checkpoint.empty()) r["checkpoint"].fail("init.kind checkpoint needs a path");
  if (in.perturb_modes < 1 || in.perturb_modes > 32) r["perturb_modes"].fail("must be in 1..32");
  if (in.c1 < 0.0 || in.c2 < 0.0 || in.low < 0.0 || in.high < 0.0 || !(in.scale >= 0.0))
    r.fail("initial concentrations must be nonnegative");
  return in;
}

}  // namespace

void ExperimentSpec::validate() const {
  sim.validate();
  if (kind == ExperimentKind::SweepEps) {
    if (sweep.eps.size() < 3) throw Error(ErrorKind::ConfigError, "experiment.eps needs at least 3 values");
    for (std::size_t i = 0; i < sweep.eps.size(); ++i) {
      if (!(sweep.eps[i] > 0.0)) throw Error(ErrorKind::ConfigError, "experiment.eps values must be positive");
      if (i > 0 && !(sweep.eps[i] < sweep.eps[i - 1]))
        throw Error(ErrorKind::ConfigError, "experiment.eps values must be strictly decreasing");
    }
    if (sweep.T && (*sweep.T < 0.0 || *sweep.T >= sim.time.t_end))
      throw Error(ErrorKind::ConfigError, "experiment.window.T must lie in [0, t_end)");
    if (sweep.tau && (!(*sweep.tau > 0.0) || (sweep.T && *sweep.T + *sweep.tau > sim.time.t_end * (1 + 1e-12))))
      throw Error(ErrorKind::ConfigError, "experiment.window.tau must be positive and end within t_end");
  }
  if (kind == ExperimentKind::TangentDim && (tangent.modes < 1 || tangent.modes > 64))
    throw Error(ErrorKind::ConfigError, "experiment.tangent.modes must be in 1..64");
  if (kind == ExperimentKind::Convergence && (convergence.grids.size() < 2 || convergence.dts.size() < 2))
    throw Error(ErrorKind::ConfigError, "experiment.convergence needs at least two grids and two dts");
}

ExperimentSpec parse_experiment(const std::string& yaml_text, const std::string& source, const Grid* grid) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  const Reader r(root, "", &source);
  if (!r.defined()) r.fail("empty configuration");
  r.allow_keys({"grid", "params", "bc", "init", "time", "output", "seed", "manufactured", "diagnostics", "experiment"});

  ExperimentSpec spec;
  SimConfig& c = spec.sim;

  const Reader rg = r["grid"];
  rg.allow_keys({"nx", "ny", "Lx", "Ly"});
  try {
    c.grid = Grid(rg.get("nx", 32), rg.get("ny", 32), rg.get("Lx", 1.0), rg.get("Ly", 1.0));
    if (grid) c.grid = *grid;
  } catch (const Error& e) {
    rg.fail(bare(e));
  }

  const Reader rp = r["params"];
  rp.allow_keys({"eps", "D1", "D2", "nu", "K", "delta"});
  c.params.eps = rp.get("eps", c.params.eps);
  c.params.D1 = rp.get("D1", c.params.D1);
  c.params.D2 = rp.get("D2", c.params.D2);
  c.params.nu = rp.get("nu", c.params.nu);
  c.params.K = rp.get("K", c.params.K);
  c.params.delta = rp.get("delta", c.params.delta);
  try {
    c.params.validate();
  } catch (const Error& e) {
    rp.fail(bare(e));
  }

  const Reader rm = r["manufactured"];
  if (rm.defined()) {
    rm.allow_keys({"enabled", "steady"});
    c.manufactured = rm.get("enabled", true);
    c.manufactured_steady = rm.get("steady", false);
  }

  const Reader rb = r["bc"];
  if (c.manufactured && !rb.defined()) {
    c.bd = ManufacturedSolution(c.grid, c.params, c.manufactured_steady).boundary();
  } else {
    rb.allow_keys({"gamma1", "gamma2", "W", "equilibrium"});
    if (!rb.defined()) rb.fail("boundary data are required");
    c.bd.W = parse_trace(rb["W"], c.grid);
    if (rb.has("equilibrium")) {
      const Reader re = rb["equilibrium"];
      re.allow_keys({"Z1", "Z2"});
      if (rb.has("gamma1") || rb.has("gamma2")) re.fail("give either bc.equilibrium or bc.gamma1/gamma2, not both");
      const double Z1 = re.require<double>("Z1"), Z2 = re.require<double>("Z2");
      if (!(Z1 > 0.0) || !(Z2 > 0.0)) re.fail("Z1 and Z2 must be positive");
      c.bd.gamma1 = c.bd.W.map([Z1](double w) { return std::exp(-w) / Z1; });
      c.bd.gamma2 = c.bd.W.map([Z2](double w) { return std::exp(w) / Z2; });
    } else {
      c.bd.gamma1 = parse_trace(rb["gamma1"], c.grid);
      c.bd.gamma2 = parse_trace(rb["gamma2"], c.grid);
    }
    if (!(c.bd.gamma_min() > 0.0)) rb.fail("boundary concentrations must be positive");
  }

  c.init = parse_init(r["init"], c.init);
  if (c.manufactured && !r["init"].has("kind")) c.init.kind = InitKind::Manufactured;

  const Reader rt = r["time"];
  rt.allow_keys({"dt", "t_end", "policy", "safety", "max_courant", "dt_max"});
  c.time.dt = rt.get("dt", c.time.dt);
  c.time.t_end = rt.get("t_end", c.time.t_end);
  const std::string policy = rt.get<std::string>("policy", "fixed");
  if (policy == "fixed") {
    c.time.policy = DtPolicy::Fixed;
  } else if (policy == "cfl") {
    c.time.policy = DtPolicy::Cfl;
    c.time.max_courant = 0.5;
  } else {
    rt["policy"].fail("expected 'fixed' or 'cfl'");
  }
  c.time.safety = rt.get("safety", c.time.safety);
  c.time.max_courant = rt.get("max_courant", c.time.max_courant);
  c.time.dt_max = rt.get("dt_max", c.time.dt);
  if (!(c.time.dt > 0.0)) rt["dt"].fail("must be positive");
  if (!(c.time.t_end > 0.0)) rt["t_end"].fail("must be positive");

  const Reader ro = r["output"];
  ro.allow_keys({"every", "dir", "checkpoint_every"});
  c.output.every = ro.get("every", c.output.every);
  c.output.dir = ro.get("dir", c.output.dir);
  c.output.checkpoint_every = ro.get("checkpoint_every", c.output.checkpoint_every);

  c.seed = r.get<std::uint64_t>("seed", 0);

  const Reader rd = r["diagnostics"];
  rd.allow_keys({"relative_entropy"});
  c.attach_steady = rd.get("relative_entropy", false);

  const Reader rx = r["experiment"];
  rx.allow_keys({"kind", "eps", "auto_grid", "min_debye_cells", "window", "pair", "convergence", "tangent", "defect"});
  if (rx.has("kind")) {
    try {
      spec.kind = experiment_kind_from_string(rx["kind"].as<std::string>());
    } catch (const Error& e) {
      rx["kind"].fail(bare(e));
    }
  }
  spec.sweep.eps = rx.list<double>("eps", {});
  spec.sweep.auto_grid = rx.get("auto_grid", spec.sweep.auto_grid);
  spec.sweep.min_debye_cells = rx.get("min_debye_cells", spec.sweep.min_debye_cells);
  const Reader rw = rx["window"];
  rw.allow_keys({"T", "tau"});
  if (rw.has("T")) spec.sweep.T = rw["T"].as<double>();
  if (rw.has("tau")) spec.sweep.tau = rw["tau"].as<double>();

  const Reader rpair = rx["pair"];
  rpair.allow_keys({"init", "seed"});
  spec.pair.init_b = parse_init(rpair["init"], c.init);
  spec.pair.seed_b = rpair.get<std::uint64_t>("seed", c.seed);

  const Reader rc = rx["convergence"];
  rc.allow_keys({"grids", "steady_dt", "steady_t_end", "temporal_grid", "dts", "temporal_t_end"});
  spec.convergence.grids = rc.list<int>("grids", spec.convergence.grids);
  spec.convergence.steady_dt = rc.get("steady_dt", spec.convergence.steady_dt);
  spec.convergence.steady_t_end = rc.get("steady_t_end", spec.convergence.steady_t_end);
  spec.convergence.temporal_grid = rc.get("temporal_grid", spec.convergence.temporal_grid);
  spec.convergence.dts = rc.list<double>("dts", spec.convergence.dts);
  spec.convergence.temporal_t_end = rc.get("temporal_t_end", spec.convergence.temporal_t_end);

  const Reader rtan = rx["tangent"];
  rtan.allow_keys({"modes", "warmup", "cadence", "cond_limit", "seed"});
  spec.tangent.modes = rtan.get("modes", spec.tangent.modes);
  spec.tangent.warmup = rtan.get("warmup", spec.tangent.warmup);
  spec.tangent.cadence = rtan.get("cadence", spec.tangent.cadence);
  spec.tangent.cond_limit = rtan.get("cond_limit", spec.tangent.cond_limit);
  spec.tangent.seed = rtan.get<std::uint64_t>("seed", spec.tangent.seed);

  const Reader rdef = rx["defect"];
  rdef.allow_keys({"horizon", "r", "seed"});
  if (rdef.defined()) {
    spec.defect.enabled = true;
    spec.defect.horizon = rdef.get("horizon", spec.defect.horizon);
    spec.defect.r = rdef.list<double>("r", spec.defect.r);
    spec.defect.seed = rdef.get<std::uint64_t>("seed", spec.defect.seed);
  }

  spec.text = yaml_text;
  spec.source = source;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, source + ": " + bare(e));
  }
  return spec;
}

SimConfig ExperimentSpec::config_for_grid(const Grid& g) const {
  if (text.empty()) throw Error(ErrorKind::ConfigError, "experiment has no source document to rebuild from");
  SimConfig c = parse_experiment(text, source, &g).sim;
  c.params = sim.params;
  c.output = sim.output;
  return c;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ConfigError, "cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_experiment(ss.str(), path);
}

}  // namespace nps
