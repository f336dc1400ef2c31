#include "levylab/config.hpp"

#include <fstream>
#include <numbers>
#include <set>

#include "levylab/errors.hpp"
#include "levylab/presets.hpp"

namespace levylab {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() || path == "<root>" ? key : path + "." + key;
}
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

/// Typed access to one JSON object that remembers which keys were read, so
/// finish() can reject the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path(key), "missing required key");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    return v.get<double>();
  }
  std::optional<double> opt_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  double number_or(const std::string& key, double fallback) { return opt_number(key).value_or(fallback); }

  std::int64_t integer(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::optional<std::int64_t> opt_integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return integer(key);
  }
  std::optional<std::uint64_t> opt_unsigned(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& v = raw(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(path(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  std::int64_t positive_int_or(const std::string& key, std::int64_t fallback) {
    const auto v = opt_integer(key);
    if (v && *v < 1) throw ConfigError(path(key), "expected a positive integer");
    return v.value_or(fallback);
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string_or(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  /// A number or a list of numbers.
  std::vector<double> numbers(const std::string& key) {
    const auto& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(path(key), "expected a number or a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(index(path(key), i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::optional<std::vector<double>> opt_numbers(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return numbers(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Runs a library constructor and reports its InputError at the given path.
template <class Fn>
auto at_path(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<Harmonic> parse_harmonics(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty list of harmonics");
  std::vector<Harmonic> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Reader r(j[i], index(path, i));
    Harmonic h;
    h.amplitude = r.number("amplitude");
    h.frequency = r.number("frequency");
    h.phase = r.number_or("phase", 0.0);
    const auto fn = r.string_or("fn", "sin");
    if (fn == "sin") {
      h.fn = Trig::kSin;
    } else if (fn == "cos") {
      h.fn = Trig::kCos;
    } else {
      throw ConfigError(r.path("fn"), "expected \"sin\" or \"cos\"");
    }
    r.finish();
    out.push_back(h);
  }
  return out;
}

TimeProfile parse_profile(const json& j, const std::string& path) {
  if (j.is_number()) return TimeProfile::constant(j.get<double>());
  Reader r(j, path);
  const auto kind = r.string("kind");
  TimeProfile p;
  if (kind == "constant") {
    const double v = r.number("value");
    p = TimeProfile::constant(v);
  } else if (kind == "periodic") {
    const double base = r.number("base_frequency");
    auto h = parse_harmonics(r.raw("harmonics"), r.path("harmonics"));
    p = at_path(path, [&] { return TimeProfile::periodic(base, std::move(h)); });
  } else if (kind == "quasi_periodic") {
    auto h = parse_harmonics(r.raw("harmonics"), r.path("harmonics"));
    p = at_path(path, [&] { return TimeProfile::quasi_periodic(std::move(h)); });
  } else if (kind == "composite") {
    const auto outer_name = r.string("outer");
    OuterFn outer;
    if (outer_name == "identity") {
      outer = OuterFn::kIdentity;
    } else if (outer_name == "sin") {
      outer = OuterFn::kSin;
    } else if (outer_name == "cos") {
      outer = OuterFn::kCos;
    } else {
      throw ConfigError(r.path("outer"), "expected \"identity\", \"sin\" or \"cos\"");
    }
    const double scale = r.number("scale");
    const double shift = r.number("shift");
    auto inner = parse_harmonics(r.raw("inner"), r.path("inner"));
    const auto label = at_path(r.path("class"), [&] { return recurrence_class_from_string(r.string("class")); });
    p = at_path(path, [&] { return TimeProfile::composite(outer, scale, shift, std::move(inner), label); });
  } else if (kind == "ramp") {
    const double lo = r.number("lo"), hi = r.number("hi");
    p = at_path(path, [&] { return TimeProfile::ramp(lo, hi); });
  } else {
    throw ConfigError(r.path("kind"), "unknown profile kind '" + kind + "'");
  }
  r.finish();
  return p;
}

StateMap parse_map(const json& j, const std::string& path) {
  if (j.is_string()) return at_path(path, [&] { return StateMap::from_name(j.get<std::string>()); });
  Reader r(j, path);
  const auto name = r.string("name");
  const double clip = r.number_or("clip", 1.0);
  r.finish();
  return at_path(path, [&] { return StateMap::from_name(name, clip); });
}

Coefficient parse_coefficient(const json& j, const std::string& path) {
  Coefficient c;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      const auto p = index(path, i);
      Reader t(j[i], p);
      CoefficientTerm term;
      term.amplitude = t.number("amplitude");
      term.profile = parse_profile(t.raw("profile"), t.path("profile"));
      term.map = parse_map(t.raw("map"), t.path("map"));
      t.finish();
      c.terms.push_back(term);
    }
    return c;
  }
  Reader r(j, path);
  c = parse_coefficient(r.raw("terms"), r.path("terms"));
  if (r.has("coupling")) {
    c.coupling = at_path(r.path("coupling"), [&] { return mark_coupling_from_string(r.string("coupling")); });
  }
  c.pseudo_spectral = r.boolean_or("pseudo_spectral", false);
  r.finish();
  return c;
}

MarkSampler parse_marks(const json& j, const std::string& path) {
  Reader r(j, path);
  const auto law = r.string("law");
  const bool symmetric = r.boolean_or("symmetric", false);
  MarkSampler m;
  if (law == "uniform_shell") {
    const double lo = r.number("lower"), hi = r.number_or("upper", 1.0);
    m = at_path(path, [&] { return MarkSampler::uniform_shell(lo, hi, symmetric); });
  } else if (law == "point_mass") {
    const double v = r.number("value");
    m = at_path(path, [&] { return MarkSampler::point_mass(v, symmetric); });
  } else if (law == "exponential_tail") {
    const double rate = r.number("rate");
    m = at_path(path, [&] { return MarkSampler::exponential_tail(rate, symmetric); });
  } else {
    throw ConfigError(r.path("law"), "unknown mark law '" + law + "'");
  }
  const auto dim = r.opt_integer("dimension");
  r.finish();
  if (dim) m = at_path(join(path, "dimension"), [&] { return m.with_dimension(static_cast<int>(*dim)); });
  return m;
}

SdeModel parse_preset(Reader& r, const std::string& path) {
  const auto name = r.string("preset");
  const json empty = json::object();
  Reader p(r.has("params") ? r.raw("params") : empty, join(path, "params"));
  SdeModel m;
  if (name == "example61") {
    Example61Options o;
    o.large_rate = p.number_or("large_rate", o.large_rate);
    o.small_rate = p.number_or("small_rate", o.small_rate);
    o.small_lower = p.number_or("small_lower", o.small_lower);
    o.forcing = p.number_or("forcing", o.forcing);
    o.A0 = p.number_or("A0", o.A0);
    o.moment_p = p.number_or("moment_p", o.moment_p);
    o.zero_jumps = p.boolean_or("zero_jumps", o.zero_jumps);
    p.finish();
    m = at_path(path, [&] { return example61(o); });
  } else if (name == "periodic") {
    PeriodicOptions o;
    o.large_rate = p.number_or("large_rate", o.large_rate);
    o.small_rate = p.number_or("small_rate", o.small_rate);
    o.forcing = p.number_or("forcing", o.forcing);
    o.sigma0 = p.number_or("sigma0", o.sigma0);
    o.moment_p = p.number_or("moment_p", o.moment_p);
    p.finish();
    m = at_path(path, [&] { return periodic_example(o); });
  } else if (name == "ou") {
    OuOptions o;
    o.lambda = p.number_or("lambda", o.lambda);
    o.sigma = p.number_or("sigma", o.sigma);
    o.large_rate = p.number_or("large_rate", o.large_rate);
    o.mark_rate = p.number_or("mark_rate", o.mark_rate);
    p.finish();
    m = at_path(path, [&] { return ou_model(o); });
  } else if (name == "linear_forced") {
    const double lambda = p.number_or("lambda", 1.0);
    p.finish();
    m = at_path(path, [&] { return linear_forced(lambda); });
  } else if (name == "example62") {
    Example62Options o;
    o.galerkin.n_modes = static_cast<int>(p.positive_int_or("n_modes", o.galerkin.n_modes));
    o.galerkin.collocation_points =
        static_cast<int>(p.positive_int_or("collocation_points", 2 * o.galerkin.n_modes));
    o.heat.q_scale = p.number_or("q_scale", o.heat.q_scale);
    o.heat.q_exponent = p.number_or("q_exponent", o.heat.q_exponent);
    o.heat.A0 = p.number_or("A0", o.heat.A0);
    o.heat.moment_p = p.number_or("moment_p", o.heat.moment_p);
    o.small_rate = p.number_or("small_rate", o.small_rate);
    o.small_lower = p.number_or("small_lower", o.small_lower);
    o.large_rate = p.number_or("large_rate", o.large_rate);
    p.finish();
    m = at_path(path, [&] { return example62(o); });
  } else {
    throw ConfigError(r.path("preset"), "unknown preset '" + name + "'");
  }
  return m;
}

SdeModel parse_explicit(Reader& r, const std::string& path) {
  SdeModel m;
  m.name = r.string_or("name", "custom");

  Reader sg(r.raw("semigroup"), r.path("semigroup"));
  const double K = sg.number("K");
  const double omega = sg.number("omega");
  std::vector<double> eig;
  if (r.has("galerkin")) {
    Reader g(r.raw("galerkin"), r.path("galerkin"));
    GalerkinSpec spec;
    spec.n_modes = static_cast<int>(g.positive_int_or("n_modes", 1));
    spec.collocation_points = static_cast<int>(g.positive_int_or("collocation_points", spec.n_modes));
    g.finish();
    m.basis = at_path(r.path("galerkin"), [&] { return GalerkinBasis::build(spec); });
    if (sg.has("eigenvalues")) {
      eig = sg.numbers("eigenvalues");
    } else {
      // Dirichlet Laplacian on (0, 1).
      for (int n = 1; n <= spec.n_modes; ++n) eig.push_back(n * n * std::numbers::pi * std::numbers::pi);
    }
  } else {
    eig = sg.numbers("eigenvalues");
  }
  sg.finish();
  m.semigroup = {eig, K, omega};

  Reader w(r.raw("wiener"), r.path("wiener"));
  m.wiener.mode_variances = w.numbers("mode_variances");
  if (w.has("drift")) m.wiener.drift = w.numbers("drift");
  w.finish();

  Reader c(r.raw("coefficients"), r.path("coefficients"));
  auto& co = m.coefficients;
  for (const char* k : {"f", "g", "F", "G"}) {
    if (!c.has(k)) continue;
    Coefficient parsed = parse_coefficient(c.raw(k), c.path(k));
    if (std::string(k) == "f") co.f = parsed;
    if (std::string(k) == "g") co.g = parsed;
    if (std::string(k) == "F") co.F = parsed;
    if (std::string(k) == "G") co.G = parsed;
  }
  co.A0 = c.number("A0");
  co.lipschitz_L = c.number("L");
  co.moment_p = c.number_or("moment_p", 2.1);
  c.finish();

  Reader jr(r.raw("jumps"), r.path("jumps"));
  const double small_rate = jr.number("small_rate");
  const double large_rate = jr.number("large_rate");
  const MarkSampler small = jr.has("small_marks") ? parse_marks(jr.raw("small_marks"), jr.path("small_marks"))
                                                  : MarkSampler::uniform_shell(0.5, 1.0);
  const MarkSampler large = jr.has("large_marks") ? parse_marks(jr.raw("large_marks"), jr.path("large_marks"))
                                                  : MarkSampler::point_mass(1.0);
  jr.finish();
  m.jumps = at_path(r.path("jumps"), [&] { return make_jump_spec(small_rate, small, large_rate, large, co.moment_p); });
  at_path(path, [&] {
    m.validate();
    return 0;
  });
  return m;
}

}  // namespace

std::vector<std::string> preset_names() { return {"example61", "example62", "periodic", "ou", "linear_forced"}; }

SdeModel parse_model(const json& j, const std::string& path) {
  Reader r(j, path);
  SdeModel m = r.has("preset") ? parse_preset(r, path) : parse_explicit(r, path);
  r.finish();
  return m;
}

ExperimentConfig parse_config(const json& j) {
  Reader top(j, "<root>");
  ExperimentConfig cfg;
  if (top.has("model")) cfg.model = parse_model(top.raw("model"), "model");

  if (top.has("run")) {
    Reader r(top.raw("run"), "run");
    auto& run = cfg.run;
    run.t0 = r.opt_number("t0");
    run.t1 = r.opt_number("t1");
    run.step = r.opt_number("step");
    run.obs_step = r.opt_number("obs_step");
    run.tol = r.opt_number("tol");
    if (const auto n = r.opt_unsigned("n_paths")) run.n_paths = static_cast<std::size_t>(*n);
    run.seed = r.opt_unsigned("seed");
    if (const auto t = r.opt_integer("threads")) run.threads = static_cast<int>(*t);
    run.y0 = r.opt_numbers("y0");
    r.finish();
    if (run.step && !(*run.step > 0.0)) throw ConfigError("run.step", "must be positive");
    if (run.tol && !(*run.tol > 0.0)) throw ConfigError("run.tol", "must be positive");
    if (run.obs_step && !(*run.obs_step > 0.0)) throw ConfigError("run.obs_step", "must be positive");
    if (run.n_paths && *run.n_paths < 2) throw ConfigError("run.n_paths", "need at least 2 paths");
    if (run.threads && *run.threads < 1) throw ConfigError("run.threads", "must be >= 1");
    if (run.t0 && run.t1 && !(*run.t1 > *run.t0)) throw ConfigError("run.t1", "must exceed run.t0");
  }

  if (top.has("experiment")) {
    Reader e(top.raw("experiment"), "experiment");
    auto& ex = cfg.experiment;
    ex.kind = e.string_or("kind", "");
    static const std::set<std::string> kinds{"check",     "simulate",  "bounded",  "recurrence",
                                             "stability", "example61", "example62"};
    if (!ex.kind.empty() && !kinds.count(ex.kind)) throw ConfigError("experiment.kind", "unknown experiment '" + ex.kind + "'");
    ex.tau = e.opt_number("tau");
    ex.epsilon = e.number_or("epsilon", ex.epsilon);
    ex.scan_window = e.number_or("scan_window", ex.scan_window);
    ex.tau_step = e.number_or("tau_step", ex.tau_step);
    ex.sup_horizon = e.number_or("sup_horizon", ex.sup_horizon);
    ex.t_step = e.number_or("t_step", ex.t_step);
    ex.min_tau = e.number_or("min_tau", ex.min_tau);
    if (e.has("t_grid")) ex.t_grid = e.numbers("t_grid");
    ex.bootstrap = static_cast<int>(e.positive_int_or("bootstrap", ex.bootstrap));
    ex.observed_components = static_cast<int>(e.positive_int_or("observed_components", ex.observed_components));
    ex.shift_coupling = e.boolean_or("shift_coupling", ex.shift_coupling);
    ex.shift_points = static_cast<int>(e.positive_int_or("shift_points", ex.shift_points));
    ex.y0a = e.opt_numbers("y0a");
    ex.y0b = e.opt_numbers("y0b");
    ex.horizon = e.opt_number("horizon");
    if (const auto c = e.opt_integer("csv_components")) ex.csv_components = static_cast<int>(*c);
    e.finish();
    for (const auto& [key, v] : {std::pair{"epsilon", ex.epsilon}, std::pair{"scan_window", ex.scan_window},
                                 std::pair{"tau_step", ex.tau_step}, std::pair{"sup_horizon", ex.sup_horizon},
                                 std::pair{"t_step", ex.t_step}}) {
      if (!(v > 0.0)) throw ConfigError(std::string("experiment.") + key, "must be positive");
    }
    if (ex.horizon && !(*ex.horizon > 0.0)) throw ConfigError("experiment.horizon", "must be positive");
  }

  if (top.has("output")) {
    Reader o(top.raw("output"), "output");
    cfg.output.directory = o.string_or("directory", cfg.output.directory);
    cfg.output.csv = o.boolean_or("csv", cfg.output.csv);
    o.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace levylab
