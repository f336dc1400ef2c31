#include "levylab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levylab/errors.hpp"

namespace levylab {
namespace {

constexpr std::uint8_t kStepFlags = kKnotSmallJump | kKnotLargeJump | kKnotExtra | kKnotEndpoint;

double phi1(double z) { return z == 0.0 ? 1.0 : -std::expm1(-z) / z; }

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const auto r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

void integrate_visit(const SdeModel& model, const NoiseRealization& noise, double t0, double t1,
                     const Eigen::VectorXd& y0, double max_step, const PathVisitor& visit) {
  const auto d = static_cast<Eigen::Index>(model.dimension());
  if (y0.size() != d) throw InputError("initial state dimension mismatch");
  if (!y0.allFinite()) throw InputError("initial state must be finite");
  if (!(max_step > 0.0)) throw InputError("max_step must be positive");
  if (!(t1 >= t0)) throw InputError("integration window must satisfy t0 <= t1");
  if (noise.dimension != model.dimension()) throw InputError("noise dimension mismatch");
  if (noise.base_step > max_step * (1.0 + 1e-12)) throw InputError("noise base step exceeds max_step");
  const std::size_t i0 = noise.knot_index(t0);
  const std::size_t i1 = noise.knot_index(t1);
  const auto stride = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(max_step / noise.base_step * (1.0 + 1e-12))));

  const auto& lambda = model.semigroup.eigenvalues;
  const auto& co = model.coefficients;
  const bool has_drift_a = !model.wiener.drift.empty();
  const bool has_comp = model.jumps.small_rate > 0.0 && !co.F.empty();
  const bool has_g = !co.g.empty();
  Eigen::VectorXd comp_factor;
  if (has_comp) comp_factor = -model.jumps.small_rate * model.mean_mark_factor(co.F.coupling, model.jumps.small_marks);

  Eigen::VectorXd y = y0;
  Eigen::VectorXd left = y0;
  Eigen::VectorXd fv(d), gv(d), cv(d), jv(d);
  Eigen::VectorXd decay(d), weight(d);
  double cached_h = -1.0;

  // Jumps strictly after t0 are applied; skip the rest.
  const double t_start = noise.knot_times[i0];
  auto first_after = [&](const std::vector<JumpEvent>& ev) {
    return static_cast<std::size_t>(
        std::upper_bound(ev.begin(), ev.end(), t_start, [](double t, const JumpEvent& e) { return t < e.time; }) -
        ev.begin());
  };
  std::size_t si = first_after(noise.small_jumps);
  std::size_t li = first_after(noise.large_jumps);

  visit(i0, t_start, y, y, kNoJump);
  std::size_t prev = i0;
  for (std::size_t i = i0 + 1; i <= i1; ++i) {
    const std::uint8_t kf = noise.knot_flags[i];
    const bool base_hit = (kf & kKnotBase) && floor_mod(noise.knot_base_index[i], stride) == 0;
    if (!(i == i1 || (kf & kStepFlags) || base_hit)) continue;

    const double t = noise.knot_times[prev];
    const double tn = noise.knot_times[i];
    const double h = tn - t;
    if (h > 0.0) {
      if (h != cached_h) {
        for (Eigen::Index k = 0; k < d; ++k) {
          const double z = lambda[static_cast<std::size_t>(k)] * h;
          decay[k] = std::exp(-z);
          weight[k] = phi1(z) * h;
        }
        cached_h = h;
      }
      const double tm = t + 0.5 * h;
      model.eval_f(tm, y, fv);
      if (has_g) {
        model.eval_g(t, y, gv);
      } else {
        gv.setZero();
      }
      if (has_drift_a) {
        for (Eigen::Index k = 0; k < d; ++k) fv[k] += gv[k] * model.wiener.drift[static_cast<std::size_t>(k)];
      }
      if (has_comp) {
        model.eval_jump_base(co.F, tm, y, cv);
        fv += cv.cwiseProduct(comp_factor);
      }
      for (Eigen::Index k = 0; k < d; ++k) {
        const double dw = noise.wiener_path(k, static_cast<Eigen::Index>(i)) -
                          noise.wiener_path(k, static_cast<Eigen::Index>(prev));
        y[k] = decay[k] * (y[k] + gv[k] * dw) + weight[k] * fv[k];
      }
      if (!y.allFinite()) throw NumericalBlowup("non-finite state after a diffusion step", tn);
    }
    left = y;
    std::uint8_t flags = kNoJump;
    while (si < noise.small_jumps.size() && noise.small_jumps[si].time <= tn) {
      model.eval_jump(co.F, tn, y, noise.small_jumps[si].mark, jv);
      y += jv;
      flags |= kSmallJump;
      ++si;
    }
    while (li < noise.large_jumps.size() && noise.large_jumps[li].time <= tn) {
      // Several jumps at one knot act sequentially on the running state.
      model.eval_jump(co.G, tn, y, noise.large_jumps[li].mark, jv);
      y += jv;
      flags |= kLargeJump;
      ++li;
    }
    if (flags && !y.allFinite()) throw NumericalBlowup("non-finite state after a jump", tn);
    visit(i, tn, y, left, flags);
    prev = i;
  }
}

SamplePath integrate(const SdeModel& model, const NoiseRealization& noise, double t0, double t1,
                     const Eigen::VectorXd& y0, double max_step) {
  const auto d = static_cast<Eigen::Index>(model.dimension());
  std::vector<double> times;
  std::vector<std::uint8_t> flags;
  std::vector<Eigen::VectorXd> vals;
  std::vector<Eigen::VectorXd> lefts;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  integrate_visit(model, noise, t0, t1, y0, max_step,
                  [&](std::size_t, double t, const Eigen::VectorXd& v, const Eigen::VectorXd& l, std::uint8_t f) {
                    times.push_back(t);
                    flags.push_back(f);
                    vals.push_back(v);
                    lefts.push_back(l);
                    if (f) total += v - l;
                  });
  SamplePath path;
  path.times = std::move(times);
  path.jump_flags = std::move(flags);
  path.values.resize(d, static_cast<Eigen::Index>(vals.size()));
  path.left_limits.resize(d, static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    path.values.col(static_cast<Eigen::Index>(i)) = vals[i];
    path.left_limits.col(static_cast<Eigen::Index>(i)) = lefts[i];
  }
  path.applied_jump_total = total;
  return path;
}

Eigen::MatrixXd integrate_observed(const SdeModel& model, const NoiseRealization& noise, double t0,
                                   double t1, const Eigen::VectorXd& y0, double max_step,
                                   std::span<const double> obs_times) {
  std::vector<std::size_t> want(obs_times.size());
  for (std::size_t j = 0; j < obs_times.size(); ++j) {
    if (obs_times[j] < t0 - 1e-9 * std::max(1.0, std::abs(t0)) || obs_times[j] > t1 + 1e-9 * std::max(1.0, std::abs(t1))) {
      throw InputError("observation time outside the integration window");
    }
    want[j] = noise.knot_index(obs_times[j]);
    if (j > 0 && want[j] < want[j - 1]) throw InputError("observation times must be non-decreasing");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(model.dimension()), static_cast<Eigen::Index>(want.size()));
  std::size_t next = 0;
  integrate_visit(model, noise, t0, t1, y0, max_step,
                  [&](std::size_t knot, double, const Eigen::VectorXd& v, const Eigen::VectorXd&, std::uint8_t) {
                    while (next < want.size() && want[next] == knot) {
                      out.col(static_cast<Eigen::Index>(next)) = v;
                      ++next;
                    }
                  });
  if (next != want.size()) throw InputError("observation time is not a stepping knot of the noise realization");
  return out;
}

NoiseRealization make_model_noise(const SdeModel& model, double t0, double t1, double step,
                                  std::uint64_t seed, std::span<const double> extra_times) {
  return make_realization(model.wiener, model.jumps, t0, t1, step, seed, extra_times);
}

std::string path_csv(const SamplePath& path, int components) {
  std::ostringstream os;
  os.precision(17);
  const auto d = path.values.rows();
  const auto m = components <= 0 ? d : std::min<Eigen::Index>(d, components);
  os << "time,jump_flag";
  for (Eigen::Index k = 0; k < m; ++k) os << ",y" << k;
  os << '\n';
  for (std::size_t i = 0; i < path.size(); ++i) {
    os << path.times[i] << ',' << static_cast<int>(path.jump_flags[i]);
    for (Eigen::Index k = 0; k < m; ++k) os << ',' << path.values(k, static_cast<Eigen::Index>(i));
    os << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Heat model
// ---------------------------------------------------------------------------

double heat_lipschitz_formula(double max_q, double small_rate, double large_rate, double p) {
  return std::max({2.0 / 5.0, std::sqrt(max_q), std::pow(small_rate, 1.0 / p) / 3.0,
                   std::pow(large_rate, 1.0 / p) / 3.0});
}

SdeModel build_heat_model(const GalerkinSpec& galerkin, const HeatModelOptions& options,
                          const JumpMeasureSpec& jumps) {
  if (galerkin.n_modes < 1) throw InputError("heat model needs N >= 1");
  const int n = galerkin.n_modes;
  const double sqrt2 = std::numbers::sqrt2;
  SdeModel m;
  m.name = "heat";
  m.basis = GalerkinBasis::build(galerkin);
  m.semigroup.K = 1.0;
  m.semigroup.omega = std::numbers::pi * std::numbers::pi;
  for (int k = 1; k <= n; ++k) {
    m.semigroup.eigenvalues.push_back(k * k * std::numbers::pi * std::numbers::pi);
    m.wiener.mode_variances.push_back(options.q_scale * std::pow(static_cast<double>(k), -options.q_exponent));
  }

  m.jumps = make_jump_spec(jumps.small_rate, jumps.small_marks.with_dimension(n), jumps.large_rate,
                           jumps.large_marks.with_dimension(n), options.moment_p);

  auto& co = m.coefficients;
  co.f.terms.push_back({0.2,
                        TimeProfile::quasi_periodic({{1.0, 1.0, 0.0, Trig::kCos}, {1.0, sqrt2, 0.0, Trig::kSin}}),
                        StateMap::from_name("sine")});
  co.f.pseudo_spectral = true;
  co.g.terms.push_back({1.0,
                        TimeProfile::composite(OuterFn::kSin, 1.0, 2.0,
                                               {{1.0, 1.0, 0.0, Trig::kCos}, {1.0, sqrt2, 0.0, Trig::kCos}},
                                               RecurrenceClass::kLevitan),
                        StateMap::from_name("linear")});
  Coefficient h;
  h.terms.push_back({1.0,
                     TimeProfile::composite(OuterFn::kIdentity, 1.0 / 3.0, 2.0, {{1.0, sqrt2, 0.0, Trig::kSin}},
                                            RecurrenceClass::kPeriodic),
                     StateMap::from_name("cosine")});
  h.pseudo_spectral = true;
  h.coupling = MarkCoupling::kModal;
  co.F = h;
  co.G = h;
  co.A0 = options.A0;
  co.moment_p = options.moment_p;
  co.lipschitz_L = heat_lipschitz_formula(m.wiener.max_variance(), m.jumps.small_rate, m.jumps.large_rate,
                                          options.moment_p);
  m.validate();
  return m;
}

}  // namespace levylab
