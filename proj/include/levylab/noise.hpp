#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "levylab/rng.hpp"

namespace levylab {

// ---------------------------------------------------------------------------
// Mark registry
// ---------------------------------------------------------------------------

enum class RadialLaw { kUniformShell, kPointMass, kExponentialTail };

/// Closed registry of jump-mark laws. A mark is a vector x in R^m with
/// |x| = r drawn from a radial law; for m = 1 the sign is + unless
/// `symmetric`, for m > 1 the direction is uniform on the unit sphere.
///
///   uniform shell     r ~ U[lower, upper)
///   point mass        r = value (sign kept when m = 1 and not symmetric)
///   exponential tail  r = 1 + Exp(rate), so r >= 1
class MarkSampler {
 public:
  MarkSampler() = default;

  static MarkSampler uniform_shell(double lower, double upper = 1.0, bool symmetric = false);
  static MarkSampler point_mass(double value, bool symmetric = false);
  static MarkSampler exponential_tail(double rate, bool symmetric = false);

  /// Same radial law spread isotropically over an m-dimensional subspace.
  MarkSampler with_dimension(int m) const;

  void sample(Rng& rng, std::span<double> out) const;
  std::vector<double> sample(Rng& rng) const;

  /// E|x|^k, analytic.
  double moment(double k) const;
  /// E x, analytic (zero for symmetric or isotropic laws).
  std::vector<double> mean() const;
  /// Per-coordinate second moments E x_i^2.
  std::vector<double> coordinate_second_moments() const;

  /// Support of |x|: [inf_norm, sup_norm] (sup may be +inf).
  double inf_norm() const;
  double sup_norm() const;

  RadialLaw law() const { return law_; }
  int dimension() const { return dimension_; }
  bool symmetric() const { return symmetric_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double value() const { return value_; }
  double rate() const { return rate_; }
  /// True when the law is one-dimensional with a density (quadrature applies).
  bool has_scalar_density() const;
  std::string describe() const;

 private:
  double sample_radius(Rng& rng) const;

  RadialLaw law_ = RadialLaw::kPointMass;
  double lower_ = 0.0;
  double upper_ = 1.0;
  double value_ = 0.0;
  double rate_ = 1.0;
  int dimension_ = 1;
  bool symmetric_ = false;
};

// ---------------------------------------------------------------------------
// Noise specification
// ---------------------------------------------------------------------------

struct WienerSpec {
  std::vector<double> mode_variances;  ///< q_n >= 0
  std::vector<double> drift;           ///< a in the Levy-Ito decomposition; empty means 0

  std::size_t dimension() const { return mode_variances.size(); }
  double trace() const;
  double max_variance() const;
  void validate() const;
};

struct JumpMeasureSpec {
  double small_rate = 0.0;  ///< nu({delta <= |x| < 1})
  MarkSampler small_marks = MarkSampler::uniform_shell(0.5);
  double truncation_delta = 0.5;
  double large_rate = 0.0;  ///< b = nu({|x| >= 1})
  MarkSampler large_marks = MarkSampler::point_mass(1.0);
  double mark_moment_2_small = 0.0;
  double mark_moment_2_large = 0.0;
  double mark_moment_p_small = 0.0;
  double mark_moment_p_large = 0.0;

  void validate() const;
};

/// Builds a jump spec and fills the stored moments from the registry laws.
JumpMeasureSpec make_jump_spec(double small_rate, const MarkSampler& small_marks,
                               double large_rate, const MarkSampler& large_marks,
                               double moment_p);

// ---------------------------------------------------------------------------
// Realizations
// ---------------------------------------------------------------------------

struct JumpEvent {
  double time = 0.0;
  std::vector<double> mark;
};

enum KnotFlag : std::uint8_t {
  kKnotBase = 1,
  kKnotSmallJump = 2,
  kKnotLargeJump = 4,
  kKnotExtra = 8,
  kKnotEndpoint = 16,
};

/// A frozen draw of the two-sided noise on a window. Wiener increments live on
/// knots = (base grid k*base_step) U (jump times) U (extra times) U endpoints;
/// the integrator steps on a subset of these knots so every Wiener increment it
/// uses is a sum of stored knot increments.
struct NoiseRealization {
  double t0 = 0.0;
  double t1 = 0.0;
  double base_step = 0.0;
  std::uint64_t seed = 0;
  std::size_t dimension = 0;

  std::vector<double> knot_times;
  std::vector<std::uint8_t> knot_flags;
  std::vector<std::int64_t> knot_base_index;  ///< k for base knots, else INT64_MIN
  /// Cumulative Wiener path W(knot) - W(t0), column per knot (dimension x n_knots).
  Eigen::MatrixXd wiener_path;

  std::vector<JumpEvent> small_jumps;
  std::vector<JumpEvent> large_jumps;

  std::size_t knot_count() const { return knot_times.size(); }
  /// Index of the knot at time t (within 1e-9 relative); throws if absent.
  std::size_t knot_index(double t) const;
};

/// Independent Gaussian increments with variance q_n * |dt| per mode on each
/// interval of `grid`. Intervals at t >= 0 draw from a forward stream in
/// increasing order, those at t <= 0 from an independent backward stream in
/// decreasing order, so W(t) = -W2(-t) for negative time.
Eigen::MatrixXd sample_wiener_increments(const WienerSpec& spec, std::span<const double> grid,
                                         std::uint64_t seed);

/// Poisson point sets of small and large jumps on (t0, t1), two-sided in the
/// same way as the Wiener part.
std::pair<std::vector<JumpEvent>, std::vector<JumpEvent>> sample_jumps(const JumpMeasureSpec& spec,
                                                                       double t0, double t1,
                                                                       std::uint64_t seed);

NoiseRealization make_realization(const WienerSpec& wiener, const JumpMeasureSpec& jumps,
                                  double t0, double t1, double base_step, std::uint64_t seed,
                                  std::span<const double> extra_times = {});

using MarkFunction = std::function<Eigen::VectorXd(std::span<const double>)>;

/// Node count used by the Monte Carlo fallback of small_jump_compensator.
inline constexpr int kCompensatorMonteCarloNodes = 4096;

/// -lambda_s * E_mark[F(mark)] for a jump coefficient already bound to (t, Y).
/// One-dimensional laws with a density use fixed Gauss-Legendre nodes, point
/// masses are exact, and isotropic vector marks use a seeded Monte Carlo
/// average over kCompensatorMonteCarloNodes draws.
Eigen::VectorXd small_jump_compensator(const JumpMeasureSpec& spec, const MarkFunction& F,
                                       std::size_t dimension);

/// Debug dump: time, kind, mark components.
std::string realization_jumps_csv(const NoiseRealization& noise);

}  // namespace levylab
