#include "levylab/pullback.hpp"

#include <algorithm>
#include <cmath>

#include "levylab/errors.hpp"

namespace levylab {

double pullback_horizon(double K, double rate, double start_bound, double tol) {
  if (!(rate > 0.0)) throw ThresholdViolation("pullback needs a positive stability margin: condition (lmin) fails");
  if (!(tol > 0.0)) throw InputError("pullback tolerance must be positive");
  if (!(start_bound >= 0.0)) throw InputError("start bound must be >= 0");
  if (start_bound == 0.0) return 0.0;
  return std::max(0.0, std::log(5.0 * K * K * start_bound / (tol * tol)) / rate);
}

PullbackPlan plan_pullback(const SdeModel& model, double t0, double tol, double start_norm) {
  const double K = model.semigroup.K;
  const double omega = model.semigroup.omega;
  const double L = model.coefficients.lipschitz_L;
  const double b = model.jumps.large_rate;
  PullbackPlan plan;
  plan.margin = stability_margin(K, omega, L, b);
  plan.radius = compute_radius(K, omega, L, model.coefficients.A0, b);
  plan.start_bound = (start_norm + plan.radius) * (start_norm + plan.radius);
  plan.tol = tol;
  plan.t_pull = pullback_horizon(K, plan.margin, plan.start_bound, tol);
  plan.start_time = t0 - plan.t_pull;
  return plan;
}

BoundedSolution bounded_solution(const SdeModel& model, double t0, double t1, double tol, std::uint64_t seed,
                                 double step, const Eigen::VectorXd* start) {
  if (!(t1 >= t0)) throw InputError("window must satisfy t0 <= t1");
  const double start_norm = start ? start->norm() : 0.0;
  const auto plan = plan_pullback(model, t0, tol, start_norm);
  const double extra[1] = {t0};
  const auto noise = make_model_noise(model, plan.start_time, std::max(t1, plan.start_time + step), step, seed, extra);
  return bounded_solution_on(model, noise, plan, t0, t1, step, start);
}

BoundedSolution bounded_solution_on(const SdeModel& model, const NoiseRealization& noise, const PullbackPlan& plan,
                                    double t0, double t1, double step, const Eigen::VectorXd* start) {
  if (!(t1 >= t0)) throw InputError("window must satisfy t0 <= t1");
  const auto d = static_cast<Eigen::Index>(model.dimension());
  const Eigen::VectorXd y0 = start ? *start : Eigen::VectorXd::Zero(d);
  BoundedSolution out;
  out.plan = plan;
  const double s = plan.start_time;
  const double end = std::max(t1, s + step);

  std::vector<double> times;
  std::vector<std::uint8_t> flags;
  std::vector<Eigen::VectorXd> vals, lefts;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  const double tol_t = 1e-9 * std::max(1.0, std::abs(t0));
  integrate_visit(model, noise, s, end, y0, step,
                  [&](std::size_t, double t, const Eigen::VectorXd& v, const Eigen::VectorXd& l, std::uint8_t f) {
                    if (t < t0 - tol_t || t > t1 + tol_t) return;
                    // The restriction starts at t0 with no jump recorded there.
                    const bool first = times.empty();
                    times.push_back(t);
                    flags.push_back(first ? std::uint8_t{kNoJump} : f);
                    vals.push_back(v);
                    lefts.push_back(first ? v : l);
                    if (!first && f) total += v - l;
                  });
  auto& p = out.path;
  p.times = std::move(times);
  p.jump_flags = std::move(flags);
  p.values.resize(d, static_cast<Eigen::Index>(vals.size()));
  p.left_limits.resize(d, static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    p.values.col(static_cast<Eigen::Index>(i)) = vals[i];
    p.left_limits.col(static_cast<Eigen::Index>(i)) = lefts[i];
  }
  p.applied_jump_total = total;
  return out;
}

Eigen::MatrixXd bounded_observed(const SdeModel& model, const PullbackPlan& plan, double t1,
                                 std::span<const double> obs_times, double step, std::uint64_t seed,
                                 const Eigen::VectorXd* start) {
  const auto d = static_cast<Eigen::Index>(model.dimension());
  const Eigen::VectorXd y0 = start ? *start : Eigen::VectorXd::Zero(d);
  const double end = std::max(t1, plan.start_time + step);
  const auto noise = make_model_noise(model, plan.start_time, end, step, seed, obs_times);
  return integrate_observed(model, noise, plan.start_time, end, y0, step, obs_times);
}

MeanCurve forgetting_check(const SdeModel& model, double t0, std::span<const double> obs_times,
                           const Eigen::VectorXd& y0a, const Eigen::VectorXd& y0b, const RunOptions& run) {
  if (obs_times.empty()) throw InputError("forgetting check needs observation times");
  const double t1 = std::max(obs_times.back(), t0 + run.step);
  auto samples = run_paths(run.n_paths, run.threads, [&](std::size_t i) {
    const auto noise = make_model_noise(model, t0, t1, run.step, derive_seed(run.seed, i), obs_times);
    const Eigen::MatrixXd a = integrate_observed(model, noise, t0, t1, y0a, run.step, obs_times);
    const Eigen::MatrixXd b = integrate_observed(model, noise, t0, t1, y0b, run.step, obs_times);
    return Eigen::VectorXd((a - b).colwise().squaredNorm().transpose());
  });
  return mean_curve(samples, std::vector<double>(obs_times.begin(), obs_times.end()));
}

MeanCurve bounded_second_moment(const SdeModel& model, std::span<const double> obs_times, double tol,
                                const RunOptions& run) {
  if (obs_times.empty()) throw InputError("bounded second moment needs observation times");
  const auto plan = plan_pullback(model, obs_times.front(), tol);
  auto samples = run_paths(run.n_paths, run.threads, [&](std::size_t i) {
    const Eigen::MatrixXd v = bounded_observed(model, plan, obs_times.back(), obs_times, run.step,
                                               derive_seed(run.seed, i));
    return Eigen::VectorXd(v.colwise().squaredNorm().transpose());
  });
  return mean_curve(samples, std::vector<double>(obs_times.begin(), obs_times.end()));
}

}  // namespace levylab
