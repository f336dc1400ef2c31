#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "levylab/ensemble.hpp"
#include "levylab/model.hpp"
#include "levylab/profile.hpp"

namespace levylab {

using ScalarFunction = std::function<double(double)>;

// ---------------------------------------------------------------------------
// Bebutov distance
// ---------------------------------------------------------------------------

/// Fixed point eps = max_{|t| <= 1/eps} |phi(t) - psi(t)| over the grid
/// t = k * grid_step, |t| <= horizon, found by bisection. Returns 0 when the
/// functions agree on the grid; throws WidenHorizonError when the fixed point
/// lies below 1/horizon.
double bebutov_distance(const ScalarFunction& phi, const ScalarFunction& psi, double horizon, double grid_step);
double bebutov_distance(const TimeProfile& phi, const TimeProfile& psi, double horizon, double grid_step);

// ---------------------------------------------------------------------------
// Almost periods
// ---------------------------------------------------------------------------

struct AlmostPeriodCandidate {
  double tau = 0.0;
  double distance = 0.0;
};

struct RecurrenceReport {
  double epsilon = 0.0;
  double window = 0.0;       ///< scan window (0, L]
  double tau_step = 0.0;
  double sup_horizon = 0.0;  ///< sup over |t| <= sup_horizon stands in for the sup over R
  double t_step = 0.0;
  std::vector<AlmostPeriodCandidate> accepted;
  /// Largest spacing between consecutive accepted taus, counting the edges 0 and L.
  double max_gap = 0.0;
  /// Accepted set nonempty and max_gap <= L / 3.
  bool relatively_dense = false;
};

/// Accepts tau = k * tau_step in (0, L] with
/// max_f sup_{|t| <= sup_horizon} |f(t + tau) - f(t)| < epsilon (joint over all functions).
RecurrenceReport almost_periods(const std::vector<ScalarFunction>& functions, double epsilon, double window,
                                double tau_step, double sup_horizon, double t_step);
RecurrenceReport almost_periods(const std::vector<TimeProfile>& profiles, double epsilon, double window,
                                double tau_step, double sup_horizon, double t_step);

// ---------------------------------------------------------------------------
// Bounded-Lipschitz distance
// ---------------------------------------------------------------------------

/// Uniformly weighted sample cloud; one column per sample, one row per observable.
struct EmpiricalLaw {
  Eigen::MatrixXd samples;
};

inline constexpr std::size_t kBlSubsample = 400;

/// Exact bounded-Lipschitz distance between two 1-D empirical laws: the
/// linear program over f on the union support with |f_i - f_j| <= s |x_i - x_j|,
/// |f_i| <= m, s + m <= 1. Laws larger than `subsample` are reduced to
/// rank-stratified subsamples first.
double bl_distance_1d(std::span<const double> mu, std::span<const double> nu,
                      std::size_t subsample = kBlSubsample);
/// Coordinate-wise 1-D distances aggregated by max.
double bl_distance(const EmpiricalLaw& mu, const EmpiricalLaw& nu, std::size_t subsample = kBlSubsample);

/// Rank-stratified subsample: sorted values at ranks floor((i + 1/2) n / k).
std::vector<double> stratified_subsample(std::span<const double> x, std::size_t k);

// ---------------------------------------------------------------------------
// Solution-level recurrence tests
// ---------------------------------------------------------------------------

struct DistributionalOptions {
  double tol = 1e-3;              ///< pullback tolerance
  int observed_components = 1;    ///< first modes used as observables
  int bootstrap = 20;
  std::size_t subsample = kBlSubsample;
};

struct DistributionalReport {
  double tau = 0.0;
  std::vector<double> t_grid;
  std::vector<double> beta;
  std::vector<double> boot_err;  ///< RMS of beta between resamples of the pooled laws
  double max_beta = 0.0;
  double err_at_max = 0.0;
  std::size_t argmax = 0;
  bool pass = false;  ///< max_beta <= 3 * err_at_max
};

DistributionalReport distributional_almost_period_test(const SdeModel& model, double tau,
                                                       std::span<const double> t_grid, const RunOptions& run,
                                                       const DistributionalOptions& options = {});

/// Bootstrap noise scale of beta for two samples: RMS of beta between two
/// size-n resamples of the pooled sample.
double bl_bootstrap_error(std::span<const double> a, std::span<const double> b, int resamples, std::uint64_t seed,
                          std::size_t subsample = kBlSubsample);

struct ShiftCouplingReport {
  double tau = 0.0;
  std::vector<double> times;  ///< gap observation times in [t0, t1]
  Eigen::VectorXd gap;        ///< E|xi^tau(t) - xi(t)|^2
  Eigen::VectorXd gap_se;
  double measured_sup_gap = 0.0;
  double se_at_sup = 0.0;
  double sup_I[4] = {0.0, 0.0, 0.0, 0.0};
  double compat_c = 0.0;
  double theoretical_bound = 0.0;
  bool pass = false;  ///< measured_sup_gap <= bound + 3 se
};

/// Bounded solutions of the model and of its tau-shift against the same noise.
/// The coefficient differences I_1..I_4 are evaluated along the unshifted
/// solution at n_obs points of [t0 - T_pull / 2, t1].
ShiftCouplingReport shift_coupling_gap(const SdeModel& model, double tau, double t0, double t1, int n_obs,
                                       const RunOptions& run, double tol = 1e-3);

}  // namespace levylab
