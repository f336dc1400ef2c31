#include "levylab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "levylab/errors.hpp"

namespace levylab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ConditionCheck non_strict(double slack) { return {slack, slack >= -kNonStrictTolerance}; }
ConditionCheck strict(double slack) { return {slack, slack > 0.0}; }

void check_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be finite and >= 0");
}

}  // namespace

// ---------------------------------------------------------------------------
// Semigroup and basis
// ---------------------------------------------------------------------------

void SemigroupSpec::validate() const {
  if (eigenvalues.empty()) throw InputError("semigroup needs at least one eigenvalue");
  if (!(K >= 1.0) || !std::isfinite(K)) throw InputError("semigroup constant K must be >= 1");
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InputError("semigroup rate omega must be > 0");
  for (double l : eigenvalues) {
    if (!(l > 0.0) || !std::isfinite(l)) throw InputError("eigenvalues must be positive decay rates");
    if (omega > l * (1.0 + 1e-14)) throw InputError("omega exceeds the smallest decay rate");
  }
}

GalerkinBasis GalerkinBasis::build(const GalerkinSpec& spec) {
  if (spec.n_modes < 1) throw InputError("Galerkin basis needs at least one mode");
  if (spec.collocation_points < spec.n_modes) throw InputError("collocation points must be >= number of modes");
  GalerkinBasis b;
  b.spec = spec;
  const int M = spec.collocation_points;
  const int N = spec.n_modes;
  b.nodes.resize(M);
  b.synthesis.resize(M, N);
  for (int j = 0; j < M; ++j) {
    b.nodes[j] = static_cast<double>(j + 1) / (M + 1);
    for (int k = 0; k < N; ++k) {
      b.synthesis(j, k) = std::sqrt(2.0) * std::sin((k + 1) * std::numbers::pi * b.nodes[j]);
    }
  }
  b.analysis = b.synthesis.transpose() / static_cast<double>(M + 1);
  return b;
}

Eigen::MatrixXd GalerkinBasis::gram() const { return analysis * synthesis; }

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

double StateMap::operator()(double y) const {
  switch (kind) {
    case StateMapKind::kConstant: return 1.0;
    case StateMapKind::kLinear: return y;
    case StateMapKind::kSine: return std::sin(y);
    case StateMapKind::kCosine: return std::cos(y);
    case StateMapKind::kClippedIdentity: return std::clamp(y, -clip, clip);
  }
  return 0.0;
}

double StateMap::lipschitz() const { return kind == StateMapKind::kConstant ? 0.0 : 1.0; }

double StateMap::at_zero() const { return (*this)(0.0); }

std::string StateMap::name() const {
  switch (kind) {
    case StateMapKind::kConstant: return "constant";
    case StateMapKind::kLinear: return "linear";
    case StateMapKind::kSine: return "sine";
    case StateMapKind::kCosine: return "cosine";
    case StateMapKind::kClippedIdentity: return "clipped";
  }
  return "?";
}

StateMap StateMap::from_name(const std::string& name, double clip) {
  StateMap m;
  m.clip = clip;
  if (name == "constant") m.kind = StateMapKind::kConstant;
  else if (name == "linear") m.kind = StateMapKind::kLinear;
  else if (name == "sine") m.kind = StateMapKind::kSine;
  else if (name == "cosine") m.kind = StateMapKind::kCosine;
  else if (name == "clipped") {
    if (!(clip > 0.0)) throw InputError("clipped state map needs clip > 0");
    m.kind = StateMapKind::kClippedIdentity;
  } else {
    throw InputError("unknown state map '" + name + "'");
  }
  return m;
}

std::string to_string(MarkCoupling c) {
  switch (c) {
    case MarkCoupling::kNone: return "none";
    case MarkCoupling::kScalar: return "scalar";
    case MarkCoupling::kModal: return "modal";
  }
  return "?";
}

MarkCoupling mark_coupling_from_string(const std::string& s) {
  if (s == "none") return MarkCoupling::kNone;
  if (s == "scalar") return MarkCoupling::kScalar;
  if (s == "modal") return MarkCoupling::kModal;
  throw InputError("unknown mark coupling '" + s + "'");
}

bool Coefficient::empty() const {
  return std::all_of(terms.begin(), terms.end(),
                     [](const CoefficientTerm& t) { return t.amplitude == 0.0 || t.profile.is_zero(); });
}

double Coefficient::state_lipschitz() const {
  double s = 0.0;
  for (const auto& t : terms) s += std::abs(t.amplitude) * t.profile.sup_bound() * t.map.lipschitz();
  return s;
}

double Coefficient::zero_state_bound() const {
  double s = 0.0;
  for (const auto& t : terms) s += std::abs(t.amplitude) * t.profile.sup_bound() * std::abs(t.map.at_zero());
  return s;
}

Coefficient Coefficient::shifted(double tau) const {
  Coefficient c = *this;
  for (auto& t : c.terms) t.profile = t.profile.shifted(tau);
  return c;
}

// ---------------------------------------------------------------------------
// Model evaluation
// ---------------------------------------------------------------------------

void SdeModel::validate() const {
  semigroup.validate();
  wiener.validate();
  jumps.validate();
  const auto d = dimension();
  if (wiener.dimension() != d) throw InputError("Wiener dimension must equal the state dimension");
  if (basis && static_cast<std::size_t>(basis->spec.n_modes) != d) {
    throw InputError("Galerkin mode count must equal the state dimension");
  }
  check_nonneg(coefficients.A0, "A0");
  check_nonneg(coefficients.lipschitz_L, "Lipschitz constant L");
  if (!(coefficients.moment_p > 2.0) || !std::isfinite(coefficients.moment_p)) {
    throw InputError("moment exponent p must be > 2");
  }
  for (const Coefficient* c : {&coefficients.f, &coefficients.g, &coefficients.F, &coefficients.G}) {
    for (const auto& t : c->terms) {
      if (!std::isfinite(t.amplitude)) throw InputError("coefficient amplitudes must be finite");
      if (!std::isfinite(t.profile.sup_bound())) throw InputError("coefficient profiles must be bounded");
    }
  }
}

SdeModel SdeModel::shifted(double tau) const {
  SdeModel m = *this;
  m.coefficients.f = coefficients.f.shifted(tau);
  m.coefficients.g = coefficients.g.shifted(tau);
  m.coefficients.F = coefficients.F.shifted(tau);
  m.coefficients.G = coefficients.G.shifted(tau);
  return m;
}

namespace {

void apply_terms(const Coefficient& c, double t, const Eigen::VectorXd& y, Eigen::VectorXd& out,
                 const GalerkinBasis* basis) {
  out.setZero(y.size());
  if (basis != nullptr && c.pseudo_spectral) {
    const Eigen::VectorXd u = basis->synthesis * y;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(u.size());
    for (const auto& term : c.terms) {
      const double a = term.amplitude * term.profile(t);
      if (a == 0.0) continue;
      for (Eigen::Index j = 0; j < u.size(); ++j) w[j] += a * term.map(u[j]);
    }
    out.noalias() = basis->analysis * w;
    return;
  }
  for (const auto& term : c.terms) {
    const double a = term.amplitude * term.profile(t);
    if (a == 0.0) continue;
    for (Eigen::Index i = 0; i < y.size(); ++i) out[i] += a * term.map(y[i]);
  }
}

}  // namespace

void SdeModel::eval_f(double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
  apply_terms(coefficients.f, t, y, out, basis ? &*basis : nullptr);
}

void SdeModel::eval_g(double t, const Eigen::VectorXd& y, Eigen::VectorXd& out) const {
  apply_terms(coefficients.g, t, y, out, nullptr);
}

void SdeModel::eval_jump_base(const Coefficient& c, double t, const Eigen::VectorXd& y,
                              Eigen::VectorXd& out) const {
  apply_terms(c, t, y, out, basis ? &*basis : nullptr);
}

void SdeModel::eval_jump(const Coefficient& c, double t, const Eigen::VectorXd& y,
                         std::span<const double> mark, Eigen::VectorXd& out) const {
  eval_jump_base(c, t, y, out);
  switch (c.coupling) {
    case MarkCoupling::kNone: break;
    case MarkCoupling::kScalar: out *= mark.empty() ? 0.0 : mark[0]; break;
    case MarkCoupling::kModal:
      for (Eigen::Index k = 0; k < out.size(); ++k) {
        out[k] *= static_cast<std::size_t>(k) < mark.size() ? mark[static_cast<std::size_t>(k)] : 0.0;
      }
      break;
  }
}

Eigen::VectorXd SdeModel::mean_mark_factor(MarkCoupling coupling, const MarkSampler& marks) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  Eigen::VectorXd m = Eigen::VectorXd::Ones(d);
  if (coupling == MarkCoupling::kNone) return m;
  const auto mean = marks.mean();
  if (coupling == MarkCoupling::kScalar) return m * mean[0];
  m.setZero();
  for (Eigen::Index k = 0; k < d && static_cast<std::size_t>(k) < mean.size(); ++k) {
    m[k] = mean[static_cast<std::size_t>(k)];
  }
  return m;
}

double SdeModel::jump_factor_moment(MarkCoupling coupling, const MarkSampler& marks, double q) const {
  if (coupling == MarkCoupling::kNone) return 1.0;
  if (q == 2.0) {
    const auto m2 = marks.coordinate_second_moments();
    if (coupling == MarkCoupling::kScalar) return m2[0];
    return *std::max_element(m2.begin(), m2.end());
  }
  // |x_0| <= |x| and |v (.) x| <= |v| |x|, so E|x|^q bounds both couplings.
  return marks.moment(q);
}

double SdeModel::jump_l2_integral(MarkCoupling coupling, const MarkSampler& marks, double rate,
                                  const Eigen::VectorXd& v) const {
  if (rate == 0.0) return 0.0;
  if (coupling == MarkCoupling::kNone) return rate * v.squaredNorm();
  const auto m2 = marks.coordinate_second_moments();
  if (coupling == MarkCoupling::kScalar) return rate * m2[0] * v.squaredNorm();
  double s = 0.0;
  for (Eigen::Index k = 0; k < v.size() && static_cast<std::size_t>(k) < m2.size(); ++k) {
    s += m2[static_cast<std::size_t>(k)] * v[k] * v[k];
  }
  return rate * s;
}

double SdeModel::zero_state_norm(const Coefficient& c) const {
  if (basis && c.pseudo_spectral) return 1.0;
  return std::sqrt(static_cast<double>(dimension()));
}

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

double compute_cp(double p) {
  if (!(p > 0.0)) throw InputError("c_p needs p > 0");
  if (p == 1.0) throw InputError("c_p is undefined at p = 1");
  const double inner = p * (p - 1.0) / 2.0 * std::pow(p / (p - 1.0), p - 2.0);
  return std::pow(inner, p / 2.0);
}

KunitaTerms kunita_terms(double p, double alpha) {
  const double ratio = std::pow(p / (p - 1.0), p);
  KunitaTerms k;
  k.denominator = 1.0 - (p - 1.0) * (p - 2.0) * std::pow(2.0, p - 4.0) * ratio * std::pow(alpha, 2.0 - p);
  k.D1 = std::pow(2.0, p - 3.0) * ratio * std::pow(alpha, 2.0 - p / 2.0) / k.denominator;
  k.D2 = p * (p - 1.0) * std::pow(2.0, p - 4.0) * ratio / k.denominator;
  return k;
}

KunitaConstant compute_dp(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw InputError("d_p needs p >= 2");
  constexpr int kGrid = 2001;
  constexpr double kMinDenominator = 1e-6;
  const double log_hi = std::log(1e6);
  auto objective = [&](double log_alpha) {
    const auto k = kunita_terms(p, std::exp(log_alpha));
    if (k.denominator < kMinDenominator) return kInf;
    return std::max(k.D1, k.D2);
  };
  int best = -1;
  double best_val = kInf;
  for (int i = 0; i < kGrid; ++i) {
    const double v = objective(log_hi * i / (kGrid - 1));
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best < 0) throw InfeasibleError("no admissible Kunita alpha on [1, 1e6]");
  KunitaConstant out{best_val, std::exp(log_hi * best / (kGrid - 1))};

  // Golden-section refinement between the neighbouring grid points.
  double a = log_hi * std::max(0, best - 1) / (kGrid - 1);
  double b = log_hi * std::min(kGrid - 1, best + 1) / (kGrid - 1);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = objective(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = objective(xm);
  if (fm < out.d_p) out = {fm, std::exp(xm)};
  return out;
}

double compute_theta(double p, double K, double omega, double L, double b) {
  if (!(p > 2.0)) throw InputError("theta_p needs p > 2");
  if (!(omega > 0.0)) throw InputError("theta_p needs omega > 0");
  check_nonneg(K, "K");
  check_nonneg(L, "L");
  check_nonneg(b, "b");
  if (L == 0.0) return 0.0;
  const double cp = compute_cp(p);
  const double dp = compute_dp(p).d_p;
  const double wp = omega * p;
  const double jump_term = (1.0 + std::pow(2.0 * b, p - 1.0)) * std::pow(2.0 * (p - 1.0) / wp, p - 1.0);
  const double bdg_term = (cp + (1.0 + std::pow(2.0, p - 1.0)) * dp) * std::pow((p - 2.0) / wp, p / 2.0 - 1.0);
  const double brace = (jump_term + bdg_term) * 2.0 / wp + (1.0 + std::pow(2.0, p - 1.0)) * dp / wp;
  return std::pow(4.0, p - 1.0) * std::pow(K, p) * std::pow(L, p) * brace;
}

double theta_2(double K, double omega, double L, double b) {
  return 4.0 * K * K * L * L / (omega * omega) * (1.0 + 2.0 * omega + 2.0 * b);
}

double theta_limit_2plus(double K, double omega, double L, double b) {
  return 4.0 * K * K * L * L / (omega * omega) * (1.0 + 10.0 * omega + 2.0 * b);
}

double threshold_existence(double K, double omega, double b) {
  return omega / (2.0 * K * std::sqrt(1.0 + 2.0 * omega + 2.0 * b));
}

double threshold_L(double K, double omega, double b) {
  return std::min(omega / (2.0 * K * std::sqrt(2.0 + 4.0 * omega + 4.0 * b)),
                  omega / (2.0 * K * std::sqrt(1.0 + 10.0 * omega + 2.0 * b)));
}

double threshold_L11(double K, double omega, double b) {
  return omega / (2.0 * K * std::sqrt(2.0 + 8.0 * omega + 4.0 * b));
}

double threshold_lmin(double K, double omega, double b) {
  return omega / (K * std::sqrt(5.0 * (1.0 + 4.0 * omega + 2.0 * b)));
}

double compute_radius(double K, double omega, double L, double A0, double b) {
  const double s = std::sqrt(1.0 + 2.0 * omega + 2.0 * b);
  const double den = omega - 2.0 * K * L * s;
  if (!(den > 0.0)) {
    throw ThresholdViolation("radius undefined: existence condition L < omega/(2K sqrt(1+2omega+2b)) fails");
  }
  return 2.0 * K * A0 * s / den;
}

double stability_margin(double K, double omega, double L, double b) {
  return omega - 5.0 * (1.0 / omega + 4.0 + 2.0 * b / omega) * K * K * L * L;
}

double compat_c(double K, double omega, double L, double b) {
  return 1.0 - 8.0 * K * K * L * L / (omega * omega) * (1.0 + 2.0 * omega + 2.0 * b);
}

double compat_alpha(double K, double omega, double L, double b) {
  const double kl = K * K * L * L;
  return omega - (8.0 * kl / omega + 32.0 * kl + 16.0 * kl * b / omega);
}

double compat_gap_bound(double K, double omega, double L, double b, double sup_I1, double sup_I2,
                        double sup_I3, double sup_I4) {
  const double c = compat_c(K, omega, L, b);
  if (!(c > 0.0)) throw ThresholdViolation("compatibility constant c <= 0: condition (L) fails");
  const double k2 = K * K;
  const double rhs = 8.0 * k2 / (omega * omega) * sup_I1 + 4.0 * k2 / omega * sup_I2 +
                     4.0 * k2 / omega * sup_I3 +
                     (8.0 * k2 / omega + 16.0 * k2 * b / (omega * omega)) * sup_I4;
  return rhs / c;
}

ModelConstants compute_constants(double K, double omega, double L, double A0, double b, double p) {
  ModelConstants c;
  c.c_p = compute_cp(p);
  const auto kd = compute_dp(p);
  c.d_p = kd.d_p;
  c.alpha_kunita = kd.alpha;
  c.theta_2 = theta_2(K, omega, L, b);
  c.theta_p = compute_theta(p, K, omega, L, b);
  c.theta_limit_2plus = theta_limit_2plus(K, omega, L, b);
  try {
    c.radius_r = compute_radius(K, omega, L, A0, b);
  } catch (const ThresholdViolation&) {
    c.radius_r.reset();
  }
  c.compat_c = compat_c(K, omega, L, b);
  c.compat_alpha = compat_alpha(K, omega, L, b);
  c.stability_margin = stability_margin(K, omega, L, b);
  return c;
}

ModelConstants compute_constants(const SdeModel& model) {
  return compute_constants(model.semigroup.K, model.semigroup.omega, model.coefficients.lipschitz_L,
                           model.coefficients.A0, model.jumps.large_rate, model.coefficients.moment_p);
}

// ---------------------------------------------------------------------------
// Conditions
// ---------------------------------------------------------------------------

bool ConditionReport::all_pass() const {
  for (const ConditionCheck* c : {&e1, &e1p, &e2, &e2p, &e3, &existence, &cond_L, &cond_L11,
                                  &cond_lmin, &theta2_lt_1, &thetap_lt_1}) {
    if (!c->pass) return false;
  }
  return true;
}

ConditionReport check_conditions(const SdeModel& model) {
  model.validate();
  const auto& co = model.coefficients;
  const auto& js = model.jumps;
  const double K = model.semigroup.K;
  const double omega = model.semigroup.omega;
  const double L = co.lipschitz_L;
  const double A0 = co.A0;
  const double b = js.large_rate;
  const double p = co.moment_p;
  ConditionReport r;

  auto jump_weight = [&](const Coefficient& c, const MarkSampler& marks, double rate, double q) {
    if (rate == 0.0) return 0.0;
    return std::pow(rate * model.jump_factor_moment(c.coupling, marks, q), 1.0 / q);
  };
  const double sq_trace = std::sqrt(model.wiener.trace());
  const double sq_maxq = std::sqrt(model.wiener.max_variance());

  // E1 and E1p: growth at state 0
  const double f0 = co.f.zero_state_bound() * model.zero_state_norm(co.f);
  const double g0 = co.g.zero_state_bound() * sq_trace;
  const double F0 = co.F.zero_state_bound() * model.zero_state_norm(co.F);
  const double G0 = co.G.zero_state_bound() * model.zero_state_norm(co.G);
  const double e1_max = std::max({f0, g0, F0 * jump_weight(co.F, js.small_marks, js.small_rate, 2.0),
                                  G0 * jump_weight(co.G, js.large_marks, b, 2.0)});
  const double e1p_max = std::max({f0, g0, F0 * jump_weight(co.F, js.small_marks, js.small_rate, p),
                                   G0 * jump_weight(co.G, js.large_marks, b, p)});
  r.e1 = non_strict(A0 - e1_max);
  r.e1p = non_strict(A0 - e1p_max);

  // E2 and E2p: analytic Lipschitz bounds
  r.lip_f = co.f.state_lipschitz();
  r.lip_g = co.g.state_lipschitz() * sq_maxq;
  r.lip_F = co.F.state_lipschitz() * jump_weight(co.F, js.small_marks, js.small_rate, 2.0);
  r.lip_G = co.G.state_lipschitz() * jump_weight(co.G, js.large_marks, b, 2.0);
  const double lip_Fp = co.F.state_lipschitz() * jump_weight(co.F, js.small_marks, js.small_rate, p);
  const double lip_Gp = co.G.state_lipschitz() * jump_weight(co.G, js.large_marks, b, p);

  // E2: randomized probe with exact mark integrals.
  {
    Rng rng(0x5EED5EEDULL);
    std::uniform_real_distribution<double> ut(-1000.0, 1000.0);
    std::uniform_int_distribution<int> scale_pick(-2, 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto d = static_cast<Eigen::Index>(model.dimension());
    Eigen::VectorXd y1(d), y2(d), a(d), c(d);
    for (int i = 0; i < kLipschitzProbePairs; ++i) {
      const double t = ut(rng);
      const double s1 = std::pow(10.0, scale_pick(rng));
      const double s2 = std::pow(10.0, scale_pick(rng) - 1);
      for (Eigen::Index k = 0; k < d; ++k) {
        y1[k] = s1 * normal(rng);
        y2[k] = y1[k] + s2 * normal(rng);
      }
      const double dy = (y1 - y2).norm();
      if (dy == 0.0) continue;
      model.eval_f(t, y1, a);
      model.eval_f(t, y2, c);
      r.probe_f = std::max(r.probe_f, (a - c).norm() / dy);
      model.eval_g(t, y1, a);
      model.eval_g(t, y2, c);
      double hs = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        hs += model.wiener.mode_variances[static_cast<std::size_t>(k)] * (a[k] - c[k]) * (a[k] - c[k]);
      }
      r.probe_g = std::max(r.probe_g, std::sqrt(hs) / dy);
      model.eval_jump_base(co.F, t, y1, a);
      model.eval_jump_base(co.F, t, y2, c);
      r.probe_F = std::max(r.probe_F, std::sqrt(model.jump_l2_integral(co.F.coupling, js.small_marks, js.small_rate, a - c)) / dy);
      model.eval_jump_base(co.G, t, y1, a);
      model.eval_jump_base(co.G, t, y2, c);
      r.probe_G = std::max(r.probe_G, std::sqrt(model.jump_l2_integral(co.G.coupling, js.large_marks, b, a - c)) / dy);
    }
  }
  const double e2_max = std::max({r.lip_f, r.lip_g, r.lip_F, r.lip_G, r.probe_f, r.probe_g, r.probe_F, r.probe_G});
  r.e2 = non_strict(L - e2_max);
  r.e2p = non_strict(L - std::max({r.lip_f, r.lip_g, lip_Fp, lip_Gp}));
  r.e3 = {1.0, true};

  const double per_rate = co.F.state_lipschitz() * co.F.state_lipschitz() *
                          model.jump_factor_moment(co.F.coupling, js.small_marks, 2.0);
  r.small_rate_gate = per_rate > 0.0 ? L * L / per_rate : kInf;
  r.small_rate_moment = strict(r.small_rate_gate - js.small_rate);

  r.existence = strict(threshold_existence(K, omega, b) - L);
  r.cond_L = strict(threshold_L(K, omega, b) - L);
  r.cond_L11 = strict(threshold_L11(K, omega, b) - L);
  r.cond_lmin = strict(threshold_lmin(K, omega, b) - L);
  r.theta2_lt_1 = strict(1.0 - theta_2(K, omega, L, b));
  r.thetap_lt_1 = strict(1.0 - compute_theta(p, K, omega, L, b));
  return r;
}

}  // namespace levylab
