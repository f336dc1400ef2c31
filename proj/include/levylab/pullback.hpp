#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "levylab/ensemble.hpp"
#include "levylab/integrator.hpp"
#include "levylab/model.hpp"

namespace levylab {

/// Smallest T >= 0 with 5 K^2 start_bound exp(-rate T) <= tol^2.
double pullback_horizon(double K, double rate, double start_bound, double tol);

struct PullbackPlan {
  double t_pull = 0.0;
  double start_time = 0.0;  ///< t0 - t_pull
  double margin = 0.0;
  double radius = 0.0;
  double start_bound = 0.0;  ///< (|Y_start| + r)^2 bound on E|Y_start - xi(t0)|^2
  double tol = 0.0;
};

/// Horizon for a far-past start of norm `start_norm` (0 is the centre of B[0, r]).
/// Throws ThresholdViolation when the stability margin is not positive.
PullbackPlan plan_pullback(const SdeModel& model, double t0, double tol, double start_norm = 0.0);

struct BoundedSolution {
  SamplePath path;
  PullbackPlan plan;
};

/// Integrates from t0 - T_pull (state `start`, default 0) on one contiguous
/// noise realization and returns the restriction to [t0, t1].
BoundedSolution bounded_solution(const SdeModel& model, double t0, double t1, double tol, std::uint64_t seed,
                                 double step, const Eigen::VectorXd* start = nullptr);

/// Same, on a given realization that covers [plan.start_time, t1] and has
/// plan.start_time and t0 as knots.
BoundedSolution bounded_solution_on(const SdeModel& model, const NoiseRealization& noise, const PullbackPlan& plan,
                                    double t0, double t1, double step, const Eigen::VectorXd* start = nullptr);

/// Bounded solution observed at `obs_times` (within [t0, t1]), one column each.
Eigen::MatrixXd bounded_observed(const SdeModel& model, const PullbackPlan& plan, double t1,
                                 std::span<const double> obs_times, double step, std::uint64_t seed,
                                 const Eigen::VectorXd* start = nullptr);

/// Same-noise coupling of two starts at t0: ensemble mean of |Y_a - Y_b|^2 at
/// obs_times (path i uses derive_seed(seed, i)).
MeanCurve forgetting_check(const SdeModel& model, double t0, std::span<const double> obs_times,
                           const Eigen::VectorXd& y0a, const Eigen::VectorXd& y0b, const RunOptions& run);

/// Ensemble E|xi(t)|^2 of the bounded solution at obs_times.
MeanCurve bounded_second_moment(const SdeModel& model, std::span<const double> obs_times, double tol,
                                const RunOptions& run);

}  // namespace levylab
