#include "levylab/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "levylab/errors.hpp"
#include "levylab/integrator.hpp"
#include "levylab/presets.hpp"
#include "levylab/pullback.hpp"
#include "levylab/recurrence.hpp"
#include "levylab/stability.hpp"

namespace levylab {
namespace {

using ojson = nlohmann::ordered_json;

ojson entry(double v, const std::string& ref) {
  ojson e;
  if (std::isfinite(v)) {
    e["value"] = v;
  } else {
    e["value"] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  }
  e["ref"] = ref;
  return e;
}
ojson entry(bool v, const std::string& ref) { return {{"value", v}, {"ref", ref}}; }
ojson entry(std::size_t v, const std::string& ref) { return {{"value", v}, {"ref", ref}}; }

ojson check_json(const ConditionCheck& c, const std::string& ref) {
  return {{"pass", c.pass}, {"slack", entry(c.slack, ref)}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string curve_csv(const std::string& header, const std::vector<double>& t,
                      const std::vector<const Eigen::VectorXd*>& cols) {
  std::ostringstream os;
  os << header << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << fmt(t[i]);
    for (const auto* c : cols) os << ',' << fmt((*c)[static_cast<Eigen::Index>(i)]);
    os << '\n';
  }
  return os.str();
}

std::vector<double> time_grid(double t0, double t1, double dt) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((t1 - t0) / dt + 1e-9));
  for (long k = 0; k <= n; ++k) out.push_back(t0 + static_cast<double>(k) * dt);
  return out;
}

/// Settings shared by the experiments after applying defaults.
struct Resolved {
  double t0, t1, step, obs_step, tol;
  RunOptions run;
};

Resolved resolve(const RunSection& r, double t1_default, std::size_t paths_default, double obs_default) {
  Resolved out;
  out.t0 = r.t0.value_or(0.0);
  out.t1 = r.t1.value_or(out.t0 + t1_default);
  out.step = r.step.value_or(1e-2);
  out.obs_step = r.obs_step.value_or(obs_default);
  out.tol = r.tol.value_or(1e-3);
  out.run.n_paths = r.n_paths.value_or(paths_default);
  out.run.seed = r.seed.value_or(1);
  out.run.threads = r.threads.value_or(1);
  out.run.step = out.step;
  return out;
}

Eigen::VectorXd state_from(const std::optional<std::vector<double>>& v, std::size_t d, double fill) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  if (!v) {
    y[0] = fill;
    return y;
  }
  if (v->size() == 1) {
    if (d > 1) {
      y[0] = (*v)[0];
    } else {
      y.setConstant((*v)[0]);
    }
    return y;
  }
  if (v->size() != d) throw ConfigError("state", "state vector length must match the model dimension");
  for (std::size_t k = 0; k < d; ++k) y[static_cast<Eigen::Index>(k)] = (*v)[k];
  return y;
}

const char* kRefRadius = "radius of the invariant ball: 2 K A0 s / (omega - 2 K L s), s = sqrt(1 + 2 omega + 2 b)";
const char* kRefMargin = "square-mean contraction rate: omega - 5 (1/omega + 4 + 2 b/omega) K^2 L^2";

// ---------------------------------------------------------------------------

struct Section {
  ojson json;
  std::vector<Artifact> files;
  bool ok = true;
};

Section do_check(const SdeModel& model) {
  Section s;
  const auto report = check_conditions(model);
  s.json["model"] = model_json(model);
  s.json["constants"] = constants_json(model);
  s.json["conditions"] = conditions_json(report);
  s.json["all_pass"] = report.all_pass();
  s.ok = report.all_pass();
  return s;
}

Section do_simulate(const SdeModel& model, const ExperimentConfig& cfg) {
  const auto r = resolve(cfg.run, 10.0, 1, 0.1);
  const auto y0 = state_from(cfg.run.y0, model.dimension(), 0.0);
  const auto noise = make_model_noise(model, r.t0, r.t1, r.step, r.run.seed);
  const auto path = integrate(model, noise, r.t0, r.t1, y0, r.step);
  Section s;
  s.json["model"] = model_json(model);
  s.json["window"] = {entry(r.t0, "start time"), entry(r.t1, "end time")};
  s.json["step"] = entry(r.step, "largest integrator step");
  s.json["seed"] = r.run.seed;
  s.json["points"] = entry(path.size(), "stored path points");
  s.json["small_jumps"] = entry(noise.small_jumps.size(), "small-jump arrivals in the window");
  s.json["large_jumps"] = entry(noise.large_jumps.size(), "large-jump arrivals in the window");
  s.json["terminal_norm"] = entry(path.values.col(path.values.cols() - 1).norm(), "|Y(t1)|");
  s.json["applied_jump_total_norm"] = entry(path.applied_jump_total.norm(), "|sum of applied jump increments|");
  s.files.push_back({"path.csv", path_csv(path, cfg.experiment.csv_components)});
  s.files.push_back({"jumps.csv", realization_jumps_csv(noise)});
  return s;
}

Section do_bounded(const SdeModel& model, const Resolved& r) {
  Section s;
  const auto sol = bounded_solution(model, r.t0, r.t1, r.tol, r.run.seed, r.step);
  const auto obs = time_grid(r.t0, r.t1, r.obs_step);
  const auto moment = bounded_second_moment(model, obs, r.tol, r.run);
  const double r2 = sol.plan.radius * sol.plan.radius;
  bool inside = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < moment.mean.size(); ++k) {
    inside = inside && moment.mean[k] <= r2 + 3.0 * moment.se[k];
    worst = std::max(worst, moment.mean[k]);
  }
  s.json["t_pull"] = entry(sol.plan.t_pull, "pullback horizon: smallest T with 5 K^2 start_bound exp(-margin T) <= tol^2");
  s.json["start_time"] = entry(sol.plan.start_time, "t0 - t_pull");
  s.json["tol"] = entry(sol.plan.tol, "L2 distance to the bounded solution guaranteed at t0");
  s.json["margin"] = entry(sol.plan.margin, kRefMargin);
  s.json["radius"] = entry(sol.plan.radius, kRefRadius);
  s.json["max_second_moment"] = entry(worst, "max over the grid of the ensemble mean of |xi(t)|^2");
  s.json["inside_ball"] = entry(inside, "E|xi(t)|^2 <= r^2 + 3 SE at every grid time");
  s.json["n_paths"] = entry(r.run.n_paths, "ensemble size");
  s.ok = inside;
  s.files.push_back({"path.csv", path_csv(sol.path)});
  const Eigen::VectorXd r2col = Eigen::VectorXd::Constant(moment.mean.size(), r2);
  s.files.push_back({"second_moment.csv", curve_csv("t,second_moment,se,radius_sq", moment.times,
                                                    {&moment.mean, &moment.se, &r2col})});
  return s;
}

/// Accepted tau >= min_tau with the smallest distance, if any.
std::optional<AlmostPeriodCandidate> pick_tau(const RecurrenceReport& rep, double min_tau) {
  std::optional<AlmostPeriodCandidate> best;
  for (const auto& c : rep.accepted) {
    if (c.tau < min_tau) continue;
    if (!best || c.distance < best->distance) best = c;
  }
  return best;
}

ojson scan_json(const RecurrenceReport& rep, const std::string& scope) {
  ojson j;
  j["scope"] = scope;
  j["epsilon"] = entry(rep.epsilon, "accept tau when sup_t |phi(t + tau) - phi(t)| < epsilon");
  j["window"] = entry(rep.window, "scan window (0, L]");
  j["tau_step"] = entry(rep.tau_step, "tau grid spacing");
  j["sup_horizon"] = entry(rep.sup_horizon, "sup over |t| <= sup_horizon stands in for the sup over R");
  j["t_step"] = entry(rep.t_step, "t grid spacing of the sup");
  j["accepted_count"] = entry(rep.accepted.size(), "accepted almost periods");
  j["max_gap"] = entry(rep.max_gap, "largest spacing of accepted taus, edges 0 and L included");
  j["relatively_dense"] = entry(rep.relatively_dense, "accepted set nonempty and max_gap <= L/3");
  ojson taus = ojson::array();
  for (const auto& c : rep.accepted) taus.push_back({{"tau", c.tau}, {"distance", c.distance}});
  j["accepted"] = taus;
  return j;
}

Section do_recurrence(const SdeModel& model, const ExperimentConfig& cfg, const Resolved& r,
                      const RunOptions& shift_run) {
  const auto& ex = cfg.experiment;
  Section s;
  double tau = 0.0;
  if (ex.tau) {
    tau = *ex.tau;
    s.json["tau_source"] = "configured";
  } else {
    const auto profiles = coefficient_profiles(model);
    if (profiles.empty()) throw InputError("no time-dependent coefficient to scan for almost periods");
    // Joint scan first, then the leading profile alone; each widens the
    // window up to eight times before giving up.
    RecurrenceReport rep;
    std::optional<AlmostPeriodCandidate> pick;
    std::string scope;
    auto scan = [&](const std::vector<TimeProfile>& ps) {
      for (double window = ex.scan_window; !pick && window <= 8.0 * ex.scan_window; window *= 2.0) {
        rep = almost_periods(ps, ex.epsilon, window, ex.tau_step, ex.sup_horizon, ex.t_step);
        pick = pick_tau(rep, ex.min_tau);
      }
    };
    scope = "joint";
    scan(profiles);
    if (!pick && profiles.size() > 1) {
      scope = "leading_profile";
      scan(std::vector{profiles.front()});
    }
    s.json["scan"] = scan_json(rep, scope);
    if (!pick) {
      s.json["tau"] = nullptr;
      s.ok = false;
      return s;
    }
    tau = pick->tau;
    s.json["tau_source"] = "scan";
  }
  s.json["tau"] = entry(tau, "shift under test");

  std::vector<double> t_grid = ex.t_grid.empty() ? time_grid(r.t0, r.t1, r.obs_step) : ex.t_grid;
  DistributionalOptions opt;
  opt.tol = r.tol;
  opt.bootstrap = ex.bootstrap;
  opt.observed_components = ex.observed_components;
  const auto dist = distributional_almost_period_test(model, tau, t_grid, r.run, opt);
  ojson d;
  d["n_paths"] = entry(r.run.n_paths, "ensemble size");
  d["max_beta"] = entry(dist.max_beta, "max over the t grid of beta(law xi(t), law xi(t + tau))");
  d["bootstrap_error_at_max"] = entry(dist.err_at_max, "RMS of beta between resamples of the pooled laws");
  d["t_at_max"] = entry(dist.t_grid[dist.argmax], "grid time of the maximum");
  d["pass"] = entry(dist.pass, "max_beta <= 3 bootstrap error");
  s.json["distributional"] = d;
  {
    Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(dist.beta.data(), static_cast<Eigen::Index>(dist.beta.size()));
    Eigen::VectorXd err = Eigen::Map<const Eigen::VectorXd>(dist.boot_err.data(), static_cast<Eigen::Index>(dist.boot_err.size()));
    s.files.push_back({"beta.csv", curve_csv("t,beta,bootstrap_err", dist.t_grid, {&beta, &err})});
  }
  s.ok = dist.pass;

  const auto& sm = model.semigroup;
  const bool compatible = compat_c(sm.K, sm.omega, model.coefficients.lipschitz_L, model.jumps.large_rate) > 0.0;
  if (ex.shift_coupling && compatible) {
    const auto sc = shift_coupling_gap(model, tau, r.t0, r.t1, ex.shift_points, shift_run, r.tol);
    ojson j;
    j["n_paths"] = entry(shift_run.n_paths, "ensemble size");
    j["measured_sup_gap"] = entry(sc.measured_sup_gap, "sup over the window of E|xi^tau(t) - xi(t)|^2, same noise");
    j["se_at_sup"] = entry(sc.se_at_sup, "standard error at the sup");
    const char* names[4] = {"sup_I1", "sup_I2", "sup_I3", "sup_I4"};
    const char* refs[4] = {"sup E|f^tau - f|^2 along xi", "sup E|(g^tau - g) Q^(1/2)|^2 along xi",
                           "sup E of the small-jump integral of |F^tau - F|^2 along xi",
                           "sup E of the large-jump integral of |G^tau - G|^2 along xi"};
    for (int k = 0; k < 4; ++k) j[names[k]] = entry(sc.sup_I[k], refs[k]);
    j["compat_c"] = entry(sc.compat_c, "1 - 8 K^2 L^2 (1 + 2 omega + 2 b) / omega^2");
    j["theoretical_bound"] = entry(sc.theoretical_bound,
                                   "(8K^2/w^2 I1 + 4K^2/w I2 + 4K^2/w I3 + (8K^2/w + 16K^2 b/w^2) I4) / c");
    j["pass"] = entry(sc.pass, "measured_sup_gap <= bound + 3 SE");
    s.json["shift_coupling"] = j;
    s.files.push_back({"shift_gap.csv", curve_csv("t,gap,se", sc.times, {&sc.gap, &sc.gap_se})});
    s.ok = s.ok && sc.pass;
  } else if (ex.shift_coupling) {
    s.json["shift_coupling"] = "skipped: compatibility constant c <= 0";
  }
  return s;
}

Section do_stability(const SdeModel& model, const ExperimentConfig& cfg, const Resolved& r, double horizon) {
  const auto& ex = cfg.experiment;
  const auto d = model.dimension();
  const auto ya = state_from(ex.y0a, d, 1.0);
  const auto yb = state_from(ex.y0b, d, 0.0);
  const auto curve = gap_experiment(model, ya, yb, r.t0, horizon, r.obs_step, r.run);
  const auto c = compute_constants(model);
  const double K = model.semigroup.K;
  const double gap0 = (ya - yb).squaredNorm();
  bool bound_ok = true;
  Eigen::VectorXd bound(curve.mean.size());
  for (Eigen::Index k = 0; k < curve.mean.size(); ++k) {
    bound[k] = 5.0 * K * K * gap0 * std::exp(-c.stability_margin * (curve.times[static_cast<std::size_t>(k)] - r.t0));
    bound_ok = bound_ok && curve.mean[k] <= bound[k] + 3.0 * curve.se[k];
  }
  Section s;
  s.json["n_paths"] = entry(r.run.n_paths, "ensemble size");
  s.json["horizon"] = entry(horizon, "length of the observation window");
  s.json["gap0"] = entry(gap0, "|Y0a - Y0b|^2");
  s.json["margin"] = entry(c.stability_margin, kRefMargin);
  s.json["bound_holds"] = entry(bound_ok, "gap(t) <= 5 K^2 gap0 exp(-margin t) + 3 SE at every grid time");
  bool rate_ok = false;
  try {
    const auto fit = fit_decay_rate(curve);
    rate_ok = fit.rate >= c.stability_margin - 2.0 * fit.rate_se;
    s.json["fitted_rate"] = entry(fit.rate, "minus the least-squares slope of log gap over points above 10 SE");
    s.json["fitted_rate_se"] = entry(fit.rate_se, "standard error of the fitted slope");
    s.json["fit_points"] = entry(fit.n_used, "points used by the fit");
    s.json["fit_r_squared"] = entry(fit.r_squared, "coefficient of determination of the fit");
  } catch (const InsufficientDataError& e) {
    s.json["fitted_rate"] = std::string("unavailable: ") + e.what();
  }
  s.json["rate_dominates_margin"] = entry(rate_ok, "fitted rate >= margin - 2 SE");
  s.files.push_back({"gap.csv", curve_csv("t,gap,se,bound", curve.times, {&curve.mean, &curve.se, &bound})});

  bool ultimate_ok = true;
  if (c.radius_r) {
    const auto ub = ultimate_bound_check(model, r.t0, horizon, r.obs_step, ya, r.run);
    ojson u;
    u["tail_second_moment"] = entry(ub.tail_second_moment, "E|Y(t)|^2 averaged over the final 20% of the horizon");
    u["tail_se"] = entry(ub.tail_se, "standard error of the tail average");
    u["radius"] = entry(ub.radius, kRefRadius);
    u["r_plus_1"] = entry(ub.r_plus_1, "ultimate bound r + 1");
    u["pass"] = entry(ub.pass, "tail + 3 SE < r + 1");
    s.json["ultimate_bound"] = u;
    ultimate_ok = ub.pass;
  }
  s.ok = bound_ok && rate_ok && ultimate_ok;
  return s;
}

void add_section(ExperimentResult& out, const std::string& name, Section s, const std::string& prefix = "") {
  out.summary[name] = std::move(s.json);
  for (auto& f : s.files) out.files.push_back({prefix + f.name, std::move(f.content)});
}

SdeModel require_model(const ExperimentConfig& cfg) {
  if (!cfg.model) throw ConfigError("model", "missing required key");
  return *cfg.model;
}

ExperimentResult run_pipeline(const std::string& kind, const SdeModel& model, const ExperimentConfig& cfg,
                              std::size_t paths, std::size_t shift_paths, std::size_t stability_paths) {
  ExperimentResult out;
  out.summary["experiment"] = kind;
  auto check = do_check(model);
  const bool conditions_ok = check.ok;
  add_section(out, "check", std::move(check));
  if (!conditions_ok) {
    out.exit_code = kExitThreshold;
    return out;
  }
  const auto r = resolve(cfg.run, 4.0, paths, 1.0);
  add_section(out, "bounded", do_bounded(model, r), "bounded_");
  RunOptions shift_run = r.run;
  shift_run.n_paths = cfg.run.n_paths.value_or(shift_paths);
  auto rec = do_recurrence(model, cfg, r, shift_run);
  if (rec.json["tau"].is_null()) out.exit_code = kExitThreshold;
  add_section(out, "recurrence", std::move(rec), "recurrence_");
  Resolved rs = resolve(cfg.run, 4.0, stability_paths, 0.05);
  const double margin = compute_constants(model).stability_margin;
  const double horizon = cfg.experiment.horizon.value_or(std::max(2.0, 5.0 / margin));
  add_section(out, "stability", do_stability(model, cfg, rs, horizon), "stability_");
  return out;
}

}  // namespace

ojson model_json(const SdeModel& m) {
  ojson j;
  j["name"] = m.name;
  j["dimension"] = entry(m.dimension(), "state dimension (Galerkin modes)");
  j["K"] = entry(m.semigroup.K, "semigroup bound |T(t)| <= K exp(-omega t)");
  j["omega"] = entry(m.semigroup.omega, "semigroup decay rate");
  j["L"] = entry(m.coefficients.lipschitz_L, "declared Lipschitz constant of f, g, F, G");
  j["A0"] = entry(m.coefficients.A0, "declared bound of the coefficients at state 0");
  j["b"] = entry(m.jumps.large_rate, "large-jump rate nu(|x| >= 1)");
  j["small_rate"] = entry(m.jumps.small_rate, "small-jump rate nu(delta <= |x| < 1)");
  j["moment_p"] = entry(m.coefficients.moment_p, "moment order p > 2");
  j["trace_Q"] = entry(m.wiener.trace(), "trace of the Wiener covariance");
  ojson profiles = ojson::array();
  const auto& c = m.coefficients;
  for (const auto& [name, k] : {std::pair{"f", &c.f}, std::pair{"g", &c.g}, std::pair{"F", &c.F}, std::pair{"G", &c.G}}) {
    for (const auto& t : k->terms) {
      profiles.push_back(
          {{"coefficient", name}, {"profile", t.profile.describe()}, {"class", to_string(t.profile.recurrence_class())}});
    }
  }
  j["time_profiles"] = profiles;
  return j;
}

ojson constants_json(const SdeModel& model) {
  const auto c = compute_constants(model);
  ojson j;
  j["c_p"] = entry(c.c_p, "[p(p-1)/2 (p/(p-1))^(p-2)]^(p/2)");
  j["d_p"] = entry(c.d_p, "min over alpha in [1, 1e6] of max(D1, D2)");
  j["alpha_kunita"] = entry(c.alpha_kunita, "minimizing alpha for d_p");
  j["theta_2"] = entry(c.theta_2, "4 K^2 L^2 (1 + 2 omega + 2 b) / omega^2");
  j["theta_p"] = entry(c.theta_p, "contraction factor of the fixed-point map in the p-th moment");
  j["theta_limit_2plus"] = entry(c.theta_limit_2plus, "limit of theta_p as p -> 2+: 4 K^2 L^2 (1 + 10 omega + 2 b) / omega^2");
  if (c.radius_r) {
    j["radius_r"] = entry(*c.radius_r, kRefRadius);
  } else {
    j["radius_r"] = nullptr;
  }
  j["compat_c"] = entry(c.compat_c, "1 - 8 K^2 L^2 (1 + 2 omega + 2 b) / omega^2");
  j["compat_alpha"] = entry(c.compat_alpha, "omega - (8 K^2 L^2/omega + 32 K^2 L^2 + 16 K^2 L^2 b/omega)");
  j["stability_margin"] = entry(c.stability_margin, kRefMargin);
  return j;
}

ojson conditions_json(const ConditionReport& r) {
  ojson j;
  j["E1"] = check_json(r.e1, "A0 - max second-moment coefficient bound at state 0");
  j["E1p"] = check_json(r.e1p, "A0 - max p-th moment coefficient bound at state 0");
  j["E2"] = check_json(r.e2, "L - max Lipschitz bound (analytic and probed)");
  j["E2p"] = check_json(r.e2p, "L - max p-th moment Lipschitz bound");
  j["E3"] = check_json(r.e3, "registry profiles are continuous in t");
  j["existence"] = check_json(r.existence, "omega / (2 K sqrt(1 + 2 omega + 2 b)) - L");
  j["cond_L"] = check_json(r.cond_L, "min(omega/(2K sqrt(2+4omega+4b)), omega/(2K sqrt(1+10omega+2b))) - L");
  j["cond_L11"] = check_json(r.cond_L11, "omega / (2 K sqrt(2 + 8 omega + 4 b)) - L");
  j["cond_lmin"] = check_json(r.cond_lmin, "omega / (K sqrt(5 (1 + 4 omega + 2 b))) - L");
  j["theta2_lt_1"] = check_json(r.theta2_lt_1, "1 - theta_2");
  j["thetap_lt_1"] = check_json(r.thetap_lt_1, "1 - theta_p");
  j["small_rate_gate"] = entry(r.small_rate_gate, "largest small-jump rate with Lip(F)^2 rate E|factor|^2 <= L^2");
  j["small_rate_moment"] = check_json(r.small_rate_moment, "small_rate_gate - small-jump rate");
  j["lipschitz"] = {{"f", entry(r.lip_f, "analytic")}, {"g", entry(r.lip_g, "analytic, weighted by sqrt(max q)")},
                    {"F", entry(r.lip_F, "analytic, weighted by the small-jump L2 mass")},
                    {"G", entry(r.lip_G, "analytic, weighted by the large-jump L2 mass")}};
  j["probe"] = {{"f", entry(r.probe_f, "largest probed difference quotient")},
                {"g", entry(r.probe_g, "largest probed difference quotient")},
                {"F", entry(r.probe_F, "largest probed difference quotient")},
                {"G", entry(r.probe_G, "largest probed difference quotient")}};
  return j;
}

ExperimentResult run_experiment(const std::string& kind, const ExperimentConfig& cfg) {
  if (!cfg.experiment.kind.empty() && cfg.experiment.kind != kind) {
    throw ConfigError("experiment.kind", "config is for '" + cfg.experiment.kind + "' but '" + kind + "' was requested");
  }
  ExperimentResult out;
  if (kind == "check") {
    auto s = do_check(require_model(cfg));
    out.summary["experiment"] = kind;
    out.exit_code = s.ok ? kExitOk : kExitThreshold;
    for (auto& [k, v] : s.json.items()) out.summary[k] = v;
    return out;
  }
  if (kind == "simulate") {
    out.summary["experiment"] = kind;
    add_section(out, "simulation", do_simulate(require_model(cfg), cfg));
    return out;
  }
  if (kind == "bounded") {
    out.summary["experiment"] = kind;
    const auto model = require_model(cfg);
    add_section(out, "model", {model_json(model), {}, true});
    add_section(out, "bounded", do_bounded(model, resolve(cfg.run, 10.0, 200, 0.1)), "bounded_");
    return out;
  }
  if (kind == "recurrence") {
    out.summary["experiment"] = kind;
    const auto model = require_model(cfg);
    const auto r = resolve(cfg.run, 4.0, 400, 1.0);
    RunOptions shift_run = r.run;
    shift_run.n_paths = cfg.run.n_paths.value_or(100);
    add_section(out, "model", {model_json(model), {}, true});
    auto s = do_recurrence(model, cfg, r, shift_run);
    if (s.json["tau"].is_null()) out.exit_code = kExitThreshold;
    add_section(out, "recurrence", std::move(s));
    return out;
  }
  if (kind == "stability") {
    out.summary["experiment"] = kind;
    const auto model = require_model(cfg);
    const auto r = resolve(cfg.run, 10.0, 300, 0.05);
    const double horizon = cfg.experiment.horizon.value_or(r.t1 - r.t0);
    add_section(out, "model", {model_json(model), {}, true});
    add_section(out, "stability", do_stability(model, cfg, r, horizon));
    return out;
  }
  if (kind == "example61") {
    return run_pipeline(kind, cfg.model.value_or(example61()), cfg, 400, 100, 300);
  }
  if (kind == "example62") {
    return run_pipeline(kind, cfg.model.value_or(example62()), cfg, 200, 50, 100);
  }
  throw ConfigError("experiment", "unknown experiment '" + kind + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InputError*>(&e)) return kExitConfig;
  if (dynamic_cast<const ThresholdViolation*>(&e) || dynamic_cast<const InfeasibleError*>(&e) ||
      dynamic_cast<const WidenHorizonError*>(&e) || dynamic_cast<const InsufficientDataError*>(&e)) {
    return kExitThreshold;
  }
  if (dynamic_cast<const NumericalBlowup*>(&e)) return kExitBlowup;
  return 1;
}

std::string dump_summary(const ojson& summary) { return summary.dump(2) + "\n"; }

void write_result(const ExperimentResult& result, const std::string& directory, bool csv) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(directory) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(directory) / name).string());
    out << content;
  };
  write("summary.json", dump_summary(result.summary));
  if (csv) {
    for (const auto& f : result.files) write(f.name, f.content);
  }
}

}  // namespace levylab
