#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "levylab/noise.hpp"
#include "levylab/profile.hpp"

namespace levylab {

// ---------------------------------------------------------------------------
// Semigroup and Galerkin basis
// ---------------------------------------------------------------------------

/// Diagonal semigroup exp(-lambda_n t) with the bound |T(t)| <= K exp(-omega t).
struct SemigroupSpec {
  std::vector<double> eigenvalues;
  double K = 1.0;
  double omega = 1.0;

  std::size_t dimension() const { return eigenvalues.size(); }
  /// Throws InputError unless K >= 1, omega > 0 and omega <= min lambda_n.
  void validate() const;
};

struct GalerkinSpec {
  int n_modes = 1;
  int collocation_points = 1;  ///< M >= n_modes interior nodes xi_j = j/(M+1)
};

/// Dirichlet sine basis sqrt(2) sin(k pi xi) sampled at the collocation nodes.
/// synthesis (M x N) maps modes to nodal values; analysis (N x M) is
/// synthesis^T / (M+1), an exact left inverse for N <= M.
struct GalerkinBasis {
  GalerkinSpec spec;
  Eigen::VectorXd nodes;
  Eigen::MatrixXd synthesis;
  Eigen::MatrixXd analysis;

  static GalerkinBasis build(const GalerkinSpec& spec);
  /// Analysis * synthesis, the discrete Gram matrix.
  Eigen::MatrixXd gram() const;
};

// ---------------------------------------------------------------------------
// Coefficient registry
// ---------------------------------------------------------------------------

enum class StateMapKind { kConstant, kLinear, kSine, kCosine, kClippedIdentity };

/// Globally Lipschitz scalar map applied to each state component (or to each
/// collocation value for pseudo-spectral terms).
struct StateMap {
  StateMapKind kind = StateMapKind::kLinear;
  double clip = 1.0;  ///< only for kClippedIdentity

  double operator()(double y) const;
  double lipschitz() const;
  double at_zero() const;
  std::string name() const;
  static StateMap from_name(const std::string& name, double clip = 1.0);
};

/// amplitude * profile(t) * map(y)
struct CoefficientTerm {
  double amplitude = 0.0;
  TimeProfile profile;
  StateMap map;
};

/// How a jump coefficient uses the mark x.
///   none    F(t,y,x) = v(t,y)
///   scalar  F(t,y,x) = v(t,y) * x_0
///   modal   F(t,y,x) = v(t,y) (.) x, x zero-padded to the state dimension
enum class MarkCoupling { kNone, kScalar, kModal };

std::string to_string(MarkCoupling c);
MarkCoupling mark_coupling_from_string(const std::string& s);

struct Coefficient {
  std::vector<CoefficientTerm> terms;
  MarkCoupling coupling = MarkCoupling::kNone;
  /// Evaluate on collocation nodes and project back (only with a basis).
  bool pseudo_spectral = false;

  bool empty() const;
  /// sum |amplitude| * sup|profile| * Lip(map): Lipschitz bound of v in y.
  double state_lipschitz() const;
  /// sum |amplitude| * sup|profile| * |map(0)|: per-component bound of v(t, 0).
  double zero_state_bound() const;
  /// Coefficient shifted in time by tau.
  Coefficient shifted(double tau) const;
};

struct CoefficientSet {
  Coefficient f;  ///< drift nonlinearity
  Coefficient g;  ///< mode-wise diagonal multiplier of dW
  Coefficient F;  ///< small jumps, compensated
  Coefficient G;  ///< large jumps
  double A0 = 0.0;
  double lipschitz_L = 0.0;
  double moment_p = 2.1;
};

struct SdeModel {
  std::string name;
  SemigroupSpec semigroup;
  CoefficientSet coefficients;
  WienerSpec wiener;
  JumpMeasureSpec jumps;
  std::optional<GalerkinBasis> basis;

  std::size_t dimension() const { return semigroup.dimension(); }
  void validate() const;
  /// All four coefficients shifted in time by tau.
  SdeModel shifted(double tau) const;

  void eval_f(double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) const;
  void eval_g(double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) const;
  /// Mark-free part v(t, y) of a jump coefficient.
  void eval_jump_base(const Coefficient& c, double t, const Eigen::VectorXd& y,
                      Eigen::VectorXd& out) const;
  /// Full jump increment c(t, y, mark).
  void eval_jump(const Coefficient& c, double t, const Eigen::VectorXd& y,
                 std::span<const double> mark, Eigen::VectorXd& out) const;
  /// E_mark of the mark factor for a coupling (vector of per-component factors).
  Eigen::VectorXd mean_mark_factor(MarkCoupling coupling, const MarkSampler& marks) const;

  /// Bounds entering the E1 and E2 conditions: rate * E|factor|^q for the jump parts.
  double jump_factor_moment(MarkCoupling coupling, const MarkSampler& marks, double q) const;
  /// rate * E|v (.) factor|^2 for a fixed mark-free part v (exact under the coupling).
  double jump_l2_integral(MarkCoupling coupling, const MarkSampler& marks, double rate,
                          const Eigen::VectorXd& v) const;
  /// Norm of v(t, 0) per unit of zero_state_bound().
  double zero_state_norm(const Coefficient& c) const;
};

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

double compute_cp(double p);

struct KunitaConstant {
  double d_p = 0.0;
  double alpha = 1.0;
};

/// Kunita-type D1, D2 and their shared denominator at (p, alpha).
struct KunitaTerms {
  double D1 = 0.0;
  double D2 = 0.0;
  double denominator = 1.0;
};
KunitaTerms kunita_terms(double p, double alpha);

/// min over alpha in [1, 1e6] of max(D1, D2) with denominator >= 1e-6.
KunitaConstant compute_dp(double p);

double compute_theta(double p, double K, double omega, double L, double b);
double theta_2(double K, double omega, double L, double b);
double theta_limit_2plus(double K, double omega, double L, double b);
double compute_radius(double K, double omega, double L, double A0, double b);
double stability_margin(double K, double omega, double L, double b);
double compat_c(double K, double omega, double L, double b);
double compat_alpha(double K, double omega, double L, double b);
double compat_gap_bound(double K, double omega, double L, double b, double sup_I1, double sup_I2,
                        double sup_I3, double sup_I4);

/// Lipschitz thresholds on L.
double threshold_existence(double K, double omega, double b);
double threshold_L(double K, double omega, double b);
double threshold_L11(double K, double omega, double b);
double threshold_lmin(double K, double omega, double b);

struct ModelConstants {
  double c_p = 0.0;
  double d_p = 0.0;
  double alpha_kunita = 1.0;
  double theta_2 = 0.0;
  double theta_p = 0.0;
  double theta_limit_2plus = 0.0;
  std::optional<double> radius_r;
  double compat_c = 0.0;
  double compat_alpha = 0.0;
  double stability_margin = 0.0;
};

ModelConstants compute_constants(double K, double omega, double L, double A0, double b, double p);
ModelConstants compute_constants(const SdeModel& model);

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

struct ConditionCheck {
  double slack = 0.0;
  bool pass = false;
};

struct ConditionReport {
  ConditionCheck e1, e1p, e2, e2p, e3;
  ConditionCheck existence, cond_L, cond_L11, cond_lmin, theta2_lt_1, thetap_lt_1;
  /// Largest small-jump rate for which the F part of E2 holds with the
  /// declared L (infinite when F does not depend on the state).
  double small_rate_gate = 0.0;
  ConditionCheck small_rate_moment;
  /// Largest ratio |c(Y1) - c(Y2)| / |Y1 - Y2| seen by the randomized probe,
  /// per coefficient f, g, F, G (already weighted as in E2).
  double probe_f = 0.0, probe_g = 0.0, probe_F = 0.0, probe_G = 0.0;
  /// Analytic Lipschitz bounds per coefficient (as in E2).
  double lip_f = 0.0, lip_g = 0.0, lip_F = 0.0, lip_G = 0.0;

  bool all_pass() const;
};

inline constexpr int kLipschitzProbePairs = 10000;
inline constexpr double kNonStrictTolerance = 1e-12;

ConditionReport check_conditions(const SdeModel& model);

}  // namespace levylab
