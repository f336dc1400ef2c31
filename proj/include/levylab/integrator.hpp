#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "levylab/model.hpp"
#include "levylab/noise.hpp"

namespace levylab {

enum JumpFlag : std::uint8_t { kNoJump = 0, kSmallJump = 1, kLargeJump = 2 };

/// Cadlag trajectory. values(:, i) is the post-jump state at times[i] and
/// left_limits(:, i) the state just before; they differ only at jump indices.
struct SamplePath {
  std::vector<double> times;
  Eigen::MatrixXd values;
  Eigen::MatrixXd left_limits;
  std::vector<std::uint8_t> jump_flags;
  /// Sum of all applied F/G increments, accumulated in application order.
  Eigen::VectorXd applied_jump_total;

  std::size_t size() const { return times.size(); }
};

/// Called once at t0 and after every step; `knot` indexes noise.knot_times.
using PathVisitor = std::function<void(std::size_t knot, double t, const Eigen::VectorXd& value,
                                       const Eigen::VectorXd& left_limit, std::uint8_t flags)>;

/// Exponential integrator on the knots of `noise`. Over a jump-free step of
/// length h from (t, Y):
///   Y <- e^{-Lambda h} Y + phi1(Lambda h) h D(t + h/2, Y) + e^{-Lambda h} g(t, Y) dW
/// with phi1(z) = (1 - e^{-z}) / z and D = f + g (.) a + small-jump compensator.
/// At a jump time the F (small) or G (large) increment is added to the left limit.
/// Steps use every m-th base knot (m = floor(max_step / base_step)) plus all
/// jump, extra and endpoint knots, so refinement reuses the same Brownian path.
void integrate_visit(const SdeModel& model, const NoiseRealization& noise, double t0, double t1,
                     const Eigen::VectorXd& y0, double max_step, const PathVisitor& visit);

SamplePath integrate(const SdeModel& model, const NoiseRealization& noise, double t0, double t1,
                     const Eigen::VectorXd& y0, double max_step);

/// States at the requested (non-decreasing) knot times, one column each.
Eigen::MatrixXd integrate_observed(const SdeModel& model, const NoiseRealization& noise, double t0,
                                   double t1, const Eigen::VectorXd& y0, double max_step,
                                   std::span<const double> obs_times);

/// Realization of the model's noise on [t0, t1] with base knots every `step`.
NoiseRealization make_model_noise(const SdeModel& model, double t0, double t1, double step,
                                  std::uint64_t seed, std::span<const double> extra_times = {});

/// CSV: time, jump_flag, first `components` state entries (all when <= 0).
std::string path_csv(const SamplePath& path, int components = 0);

// ---------------------------------------------------------------------------
// Heat equation on (0,1) with Dirichlet conditions
// ---------------------------------------------------------------------------

struct HeatModelOptions {
  double q_scale = 0.1;     ///< q_n = q_scale * n^-q_exponent
  double q_exponent = 2.0;
  double A0 = 1.0;
  double moment_p = 2.1;
};

/// max{2/5, sqrt(max q), (1/3) nu(B1)^{1/p}, (1/3) b^{1/p}}
double heat_lipschitz_formula(double max_q, double small_rate, double large_rate, double p);

/// Galerkin truncation of
///   du = u_xx + (1/5)(cos t + sin sqrt2 t) sin u + u sin(1/(2 + cos t + cos sqrt2 t)) dW
///        + cos u / (3 (sin sqrt2 t + 2)) dZ
/// with eigenvalues n^2 pi^2, K = 1, omega = pi^2 and L from the max formula.
/// Marks of `jumps` are spread over the N modes.
SdeModel build_heat_model(const GalerkinSpec& galerkin, const HeatModelOptions& options,
                          const JumpMeasureSpec& jumps);

}  // namespace levylab
