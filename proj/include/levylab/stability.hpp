#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "levylab/ensemble.hpp"
#include "levylab/model.hpp"

namespace levylab {

/// Same-noise coupled E|Y_a(t) - Y_b(t)|^2 on t0 + k * obs_step, k = 0..horizon/obs_step.
MeanCurve gap_experiment(const SdeModel& model, const Eigen::VectorXd& y0a, const Eigen::VectorXd& y0b, double t0,
                         double horizon, double obs_step, const RunOptions& run);

struct DecayFit {
  double rate = 0.0;  ///< minus the slope of log(curve) against t
  double rate_se = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_used = 0;
};

/// Least squares of log(value) on t over points with value > 10 se (all
/// positive points when se is zero). Throws InsufficientDataError below 5 points.
DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> values, std::span<const double> se);
DecayFit fit_decay_rate(const MeanCurve& curve);

struct UltimateBoundReport {
  double tail_second_moment = 0.0;
  double tail_se = 0.0;
  double radius = 0.0;
  double r_plus_1 = 0.0;
  bool pass = false;  ///< tail + 3 se < r + 1
};

/// E|Y(t)|^2 from Y(t0) = y0, averaged over the last 20% of [t0, t0 + horizon]
/// (per path first, then across paths).
UltimateBoundReport ultimate_bound_check(const SdeModel& model, double t0, double horizon, double obs_step,
                                         const Eigen::VectorXd& y0, const RunOptions& run);

}  // namespace levylab
