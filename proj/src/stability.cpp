#include "levylab/stability.hpp"

#include <cmath>

#include "levylab/errors.hpp"
#include "levylab/integrator.hpp"

namespace levylab {
namespace {

std::vector<double> obs_grid(double t0, double horizon, double obs_step) {
  if (!(horizon > 0.0) || !(obs_step > 0.0)) throw InputError("horizon and observation step must be positive");
  const auto n = static_cast<std::size_t>(std::floor(horizon / obs_step + 1e-9));
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = t0 + static_cast<double>(k) * obs_step;
  return t;
}

}  // namespace

MeanCurve gap_experiment(const SdeModel& model, const Eigen::VectorXd& y0a, const Eigen::VectorXd& y0b, double t0,
                         double horizon, double obs_step, const RunOptions& run) {
  const auto times = obs_grid(t0, horizon, obs_step);
  auto samples = run_paths(run.n_paths, run.threads, [&](std::size_t i) {
    const auto noise = make_model_noise(model, t0, times.back(), run.step, derive_seed(run.seed, i), times);
    const Eigen::MatrixXd a = integrate_observed(model, noise, t0, times.back(), y0a, run.step, times);
    const Eigen::MatrixXd b = integrate_observed(model, noise, t0, times.back(), y0b, run.step, times);
    return Eigen::VectorXd((a - b).colwise().squaredNorm().transpose());
  });
  return mean_curve(samples, times);
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, std::span<const double> se) {
  if (times.size() != values.size() || (!se.empty() && se.size() != values.size())) {
    throw InputError("decay fit needs equally sized inputs");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double s = se.empty() ? 0.0 : se[i];
    if (values[i] > 0.0 && values[i] > 10.0 * s) {
      x.push_back(times[i]);
      y.push_back(std::log(values[i]));
    }
  }
  if (x.size() < 5) throw InsufficientDataError("decay fit needs at least 5 usable points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("decay fit needs distinct times");
  DecayFit fit;
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + slope * x[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.rate_se = std::sqrt(sse / (n - 2.0) / sxx);
  fit.n_used = x.size();
  return fit;
}

DecayFit fit_decay_rate(const MeanCurve& curve) {
  return fit_decay_rate(curve.times, {curve.mean.data(), static_cast<std::size_t>(curve.mean.size())},
                        {curve.se.data(), static_cast<std::size_t>(curve.se.size())});
}

UltimateBoundReport ultimate_bound_check(const SdeModel& model, double t0, double horizon, double obs_step,
                                         const Eigen::VectorXd& y0, const RunOptions& run) {
  const auto& sm = model.semigroup;
  UltimateBoundReport rep;
  rep.radius = compute_radius(sm.K, sm.omega, model.coefficients.lipschitz_L, model.coefficients.A0,
                              model.jumps.large_rate);
  rep.r_plus_1 = rep.radius + 1.0;
  const auto times = obs_grid(t0, horizon, obs_step);
  const double tail_start = t0 + 0.8 * horizon;
  auto samples = run_paths(run.n_paths, run.threads, [&](std::size_t i) {
    const auto noise = make_model_noise(model, t0, times.back(), run.step, derive_seed(run.seed, i), times);
    const Eigen::MatrixXd v = integrate_observed(model, noise, t0, times.back(), y0, run.step, times);
    double s = 0.0;
    int cnt = 0;
    for (std::size_t j = 0; j < times.size(); ++j) {
      if (times[j] >= tail_start - 1e-12) {
        s += v.col(static_cast<Eigen::Index>(j)).squaredNorm();
        ++cnt;
      }
    }
    return Eigen::VectorXd::Constant(1, s / cnt).eval();
  });
  const auto c = mean_curve(samples, {tail_start});
  rep.tail_second_moment = c.mean[0];
  rep.tail_se = c.se[0];
  rep.pass = rep.tail_second_moment + 3.0 * rep.tail_se < rep.r_plus_1;
  return rep;
}

}  // namespace levylab
