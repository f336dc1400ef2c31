#include "levylab/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "levylab/errors.hpp"
#include "levylab/pullback.hpp"

namespace levylab {
namespace {

constexpr std::uint64_t kBootstrapStream = 0xB007ULL;

}  // namespace

// ---------------------------------------------------------------------------
// Bebutov
// ---------------------------------------------------------------------------

double bebutov_distance(const ScalarFunction& phi, const ScalarFunction& psi, double horizon, double grid_step) {
  if (!(horizon > 0.0) || !(grid_step > 0.0)) throw InputError("Bebutov distance needs positive horizon and grid step");
  const auto n = static_cast<std::size_t>(std::floor(horizon / grid_step + 1e-9));
  // Prefix maxima of rho over |t| <= k * grid_step.
  std::vector<double> radius(n + 1), prefix(n + 1);
  double running = std::abs(phi(0.0) - psi(0.0));
  radius[0] = 0.0;
  prefix[0] = running;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = static_cast<double>(k) * grid_step;
    running = std::max({running, std::abs(phi(t) - psi(t)), std::abs(phi(-t) - psi(-t))});
    radius[k] = t;
    prefix[k] = running;
  }
  const double reach = radius[n];
  if (prefix[n] <= 1e-12) return 0.0;
  if (prefix[n] < 1.0 / reach) {
    throw WidenHorizonError("Bebutov fixed point lies beyond the horizon; widen it");
  }
  auto M = [&](double T) {
    const auto it = std::upper_bound(radius.begin(), radius.end(), T);
    return prefix[static_cast<std::size_t>(it - radius.begin()) - 1];
  };
  // h(eps) = M(1/eps) - eps is non-increasing; h(lo) >= 0 > h(hi) after widening hi.
  double lo = 1.0 / reach;
  double hi = std::max(prefix[n], lo) * 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (M(1.0 / mid) - mid >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double bebutov_distance(const TimeProfile& phi, const TimeProfile& psi, double horizon, double grid_step) {
  return bebutov_distance([&](double t) { return phi(t); }, [&](double t) { return psi(t); }, horizon, grid_step);
}

// ---------------------------------------------------------------------------
// Almost periods
// ---------------------------------------------------------------------------

RecurrenceReport almost_periods(const std::vector<ScalarFunction>& functions, double epsilon, double window,
                                double tau_step, double sup_horizon, double t_step) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(window > 0.0) || !(tau_step > 0.0) || !(sup_horizon > 0.0) || !(t_step > 0.0)) {
    throw InputError("almost-period scan needs positive window, tau_step, sup_horizon and t_step");
  }
  if (functions.empty()) throw InputError("almost-period scan needs at least one function");
  RecurrenceReport rep;
  rep.epsilon = epsilon;
  rep.window = window;
  rep.tau_step = tau_step;
  rep.sup_horizon = sup_horizon;
  rep.t_step = t_step;

  const auto nt = static_cast<std::size_t>(std::floor(2.0 * sup_horizon / t_step + 1e-9)) + 1;
  std::vector<double> ts(nt);
  for (std::size_t j = 0; j < nt; ++j) ts[j] = -sup_horizon + static_cast<double>(j) * t_step;
  // Visit t in a scattered order so rejections are found early.
  std::vector<std::size_t> order(nt);
  {
    std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(0.6180339887 * static_cast<double>(nt)));
    while (std::gcd(stride, nt) != 1) ++stride;
    for (std::size_t j = 0; j < nt; ++j) order[j] = (j * stride) % nt;
  }
  std::vector<std::vector<double>> base(functions.size(), std::vector<double>(nt));
  for (std::size_t f = 0; f < functions.size(); ++f) {
    for (std::size_t j = 0; j < nt; ++j) base[f][j] = functions[f](ts[j]);
  }

  const auto ntau = static_cast<std::size_t>(std::floor(window / tau_step + 1e-9));
  for (std::size_t k = 1; k <= ntau; ++k) {
    const double tau = static_cast<double>(k) * tau_step;
    double dist = 0.0;
    for (std::size_t j : order) {
      for (std::size_t f = 0; f < functions.size() && dist < epsilon; ++f) {
        dist = std::max(dist, std::abs(functions[f](ts[j] + tau) - base[f][j]));
      }
      if (dist >= epsilon) break;
    }
    if (dist < epsilon) rep.accepted.push_back({tau, dist});
  }
  if (rep.accepted.empty()) {
    rep.max_gap = window;
  } else {
    double prev = 0.0;
    for (const auto& c : rep.accepted) {
      rep.max_gap = std::max(rep.max_gap, c.tau - prev);
      prev = c.tau;
    }
    rep.max_gap = std::max(rep.max_gap, window - prev);
  }
  rep.relatively_dense = !rep.accepted.empty() && rep.max_gap <= window / 3.0;
  return rep;
}

RecurrenceReport almost_periods(const std::vector<TimeProfile>& profiles, double epsilon, double window,
                                double tau_step, double sup_horizon, double t_step) {
  std::vector<ScalarFunction> fs;
  fs.reserve(profiles.size());
  for (const auto& p : profiles) fs.emplace_back([p](double t) { return p(t); });
  return almost_periods(fs, epsilon, window, tau_step, sup_horizon, t_step);
}

// ---------------------------------------------------------------------------
// Bounded-Lipschitz distance
// ---------------------------------------------------------------------------

std::vector<double> stratified_subsample(std::span<const double> x, std::size_t k) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  if (k == 0 || sorted.size() <= k) return sorted;
  std::vector<double> out(k);
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto idx = static_cast<std::size_t>(std::floor((static_cast<double>(i) + 0.5) * n / static_cast<double>(k)));
    out[i] = sorted[std::min(idx, sorted.size() - 1)];
  }
  return out;
}

namespace {

struct Knot {
  double x;
  double y;
};

/// max sum_i w_i f_i subject to |f_{i+1} - f_i| <= s * gap_i and |f_i| <= m,
/// by dynamic programming on concave piecewise-linear value functions.
double chain_value(const std::vector<double>& w, const std::vector<double>& gap, double s, double m) {
  if (m <= 0.0) return 0.0;
  std::vector<Knot> cur{{-m, -w[0] * m}, {m, w[0] * m}};
  std::vector<Knot> next;
  cur.reserve(4 * w.size() + 4);
  next.reserve(4 * w.size() + 4);
  for (std::size_t k = 1; k < w.size(); ++k) {
    const double r = s * gap[k - 1];
    if (r > 0.0) {
      std::size_t j = 0;
      for (std::size_t i = 1; i < cur.size(); ++i) {
        if (cur[i].y > cur[j].y) j = i;
      }
      next.clear();
      for (std::size_t i = 0; i <= j; ++i) next.push_back({cur[i].x - r, cur[i].y});
      for (std::size_t i = j; i < cur.size(); ++i) next.push_back({cur[i].x + r, cur[i].y});
      // Clip the domain back to [-m, m].
      cur.clear();
      auto interp = [&](std::size_t i, double x) {
        const Knot& a = next[i];
        const Knot& b = next[i + 1];
        if (b.x == a.x) return std::max(a.y, b.y);
        return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
      };
      std::size_t i = 0;
      while (i + 1 < next.size() && next[i + 1].x <= -m) ++i;
      cur.push_back({-m, interp(i, -m)});
      for (std::size_t q = i + 1; q < next.size() && next[q].x < m; ++q) cur.push_back(next[q]);
      std::size_t e = next.size() - 1;
      while (e > 0 && next[e - 1].x >= m) --e;
      cur.push_back({m, interp(e - 1, m)});
    }
    for (auto& p : cur) p.y += w[k] * p.x;
    // Drop breakpoints that no longer bend the function.
    next.clear();
    for (const auto& p : cur) {
      if (!next.empty() && p.x - next.back().x <= 1e-15 * m) {
        next.back().y = std::max(next.back().y, p.y);
        continue;
      }
      if (next.size() >= 2) {
        const Knot& a = next[next.size() - 2];
        const Knot& b = next.back();
        const double s1 = (b.y - a.y) / (b.x - a.x);
        const double s2 = (p.y - b.y) / (p.x - b.x);
        if (std::abs(s1 - s2) <= 1e-13 * (1.0 + std::abs(s1) + std::abs(s2))) next.pop_back();
      }
      next.push_back(p);
    }
    cur.swap(next);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : cur) best = std::max(best, p.y);
  return best;
}

}  // namespace

double bl_distance_1d(std::span<const double> mu, std::span<const double> nu, std::size_t subsample) {
  if (mu.empty() || nu.empty()) throw InputError("bounded-Lipschitz distance needs nonempty laws");
  for (double v : mu) {
    if (!std::isfinite(v)) throw InputError("empirical law entries must be finite");
  }
  for (double v : nu) {
    if (!std::isfinite(v)) throw InputError("empirical law entries must be finite");
  }
  const auto a = stratified_subsample(mu, subsample);
  const auto b = stratified_subsample(nu, subsample);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(a.size() + b.size());
  for (double v : a) pts.emplace_back(v, 1.0 / static_cast<double>(a.size()));
  for (double v : b) pts.emplace_back(v, -1.0 / static_cast<double>(b.size()));
  std::sort(pts.begin(), pts.end());
  std::vector<double> xs, w;
  for (const auto& [x, wt] : pts) {
    if (!xs.empty() && xs.back() == x) {
      w.back() += wt;
    } else {
      xs.push_back(x);
      w.push_back(wt);
    }
  }
  if (xs.size() == 1) return 0.0;
  std::vector<double> gap(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) gap[i] = xs[i + 1] - xs[i];

  // The optimum is concave in the slope budget s with m = 1 - s.
  auto value = [&](double s) { return chain_value(w, gap, s, 1.0 - s); };
  double lo = 0.0, hi = 1.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  while (hi - lo > 1e-13) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = value(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = value(x2);
    }
  }
  return std::max({f1, f2, value(0.5 * (lo + hi)), 0.0});
}

double bl_distance(const EmpiricalLaw& mu, const EmpiricalLaw& nu, std::size_t subsample) {
  if (mu.samples.cols() == 0 || nu.samples.cols() == 0) throw InputError("bounded-Lipschitz distance needs nonempty laws");
  if (mu.samples.rows() != nu.samples.rows()) throw InputError("empirical laws differ in observation dimension");
  double best = 0.0;
  for (Eigen::Index r = 0; r < mu.samples.rows(); ++r) {
    const Eigen::VectorXd a = mu.samples.row(r).transpose();
    const Eigen::VectorXd b = nu.samples.row(r).transpose();
    best = std::max(best, bl_distance_1d({a.data(), static_cast<std::size_t>(a.size())},
                                         {b.data(), static_cast<std::size_t>(b.size())}, subsample));
  }
  return best;
}

double bl_bootstrap_error(std::span<const double> a, std::span<const double> b, int resamples, std::uint64_t seed,
                          std::size_t subsample) {
  if (resamples < 1) throw InputError("bootstrap needs at least one resample");
  std::vector<double> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<double> x(a.size()), y(b.size());
  double ss = 0.0;
  for (int r = 0; r < resamples; ++r) {
    for (auto& v : x) v = pool[pick(rng)];
    for (auto& v : y) v = pool[pick(rng)];
    const double beta = bl_distance_1d(x, y, subsample);
    ss += beta * beta;
  }
  return std::sqrt(ss / resamples);
}

// ---------------------------------------------------------------------------
// Distributional almost periods
// ---------------------------------------------------------------------------

namespace {

std::vector<double> merged_times(std::vector<double> t) {
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double v : t) {
    if (out.empty() || v - out.back() > 1e-9 * std::max(1.0, std::abs(v))) out.push_back(v);
  }
  return out;
}

std::size_t locate(const std::vector<double>& times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9 * std::max(1.0, std::abs(t)));
  return static_cast<std::size_t>(it - times.begin());
}

}  // namespace

DistributionalReport distributional_almost_period_test(const SdeModel& model, double tau,
                                                       std::span<const double> t_grid, const RunOptions& run,
                                                       const DistributionalOptions& options) {
  if (t_grid.empty()) throw InputError("distributional test needs a time grid");
  const auto d = static_cast<int>(model.dimension());
  const int m = std::clamp(options.observed_components, 1, d);
  std::vector<double> all(t_grid.begin(), t_grid.end());
  for (double t : t_grid) all.push_back(t + tau);
  const auto times = merged_times(all);
  const auto plan = plan_pullback(model, times.front(), options.tol);

  auto obs = run_paths(run.n_paths, run.threads, [&](std::size_t i) {
    const Eigen::MatrixXd v = bounded_observed(model, plan, times.back(), times, run.step, derive_seed(run.seed, i));
    return Eigen::MatrixXd(v.topRows(m));
  });

  DistributionalReport rep;
  rep.tau = tau;
  rep.t_grid.assign(t_grid.begin(), t_grid.end());
  const auto n = static_cast<Eigen::Index>(run.n_paths);
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const auto ia = static_cast<Eigen::Index>(locate(times, t_grid[g]));
    const auto ib = static_cast<Eigen::Index>(locate(times, t_grid[g] + tau));
    double beta = 0.0, err = 0.0;
    for (int c = 0; c < m; ++c) {
      std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
      for (Eigen::Index p = 0; p < n; ++p) {
        a[static_cast<std::size_t>(p)] = obs[static_cast<std::size_t>(p)](c, ia);
        b[static_cast<std::size_t>(p)] = obs[static_cast<std::size_t>(p)](c, ib);
      }
      const double bc = bl_distance_1d(a, b, options.subsample);
      if (bc >= beta) {
        beta = bc;
        err = bl_bootstrap_error(a, b, options.bootstrap,
                                 derive_seed(run.seed ^ kBootstrapStream, g * 1024 + static_cast<std::size_t>(c)),
                                 options.subsample);
      }
    }
    rep.beta.push_back(beta);
    rep.boot_err.push_back(err);
    if (g == 0 || beta > rep.max_beta) {
      rep.max_beta = beta;
      rep.err_at_max = err;
      rep.argmax = g;
    }
  }
  rep.pass = rep.max_beta <= 3.0 * rep.err_at_max;
  return rep;
}

// ---------------------------------------------------------------------------
// Shift coupling
// ---------------------------------------------------------------------------

ShiftCouplingReport shift_coupling_gap(const SdeModel& model, double tau, double t0, double t1, int n_obs,
                                       const RunOptions& run, double tol) {
  if (!(t1 > t0) || n_obs < 2) throw InputError("shift coupling needs t0 < t1 and n_obs >= 2");
  const auto& sm = model.semigroup;
  const double L = model.coefficients.lipschitz_L;
  const double b = model.jumps.large_rate;
  if (!(compat_c(sm.K, sm.omega, L, b) > 0.0)) throw ThresholdViolation("shift coupling needs condition (L)");
  const SdeModel shifted = model.shifted(tau);
  const auto probe_plan = plan_pullback(model, t0, tol);
  const double pre = t0 - 0.5 * probe_plan.t_pull;
  const auto plan = plan_pullback(model, pre, tol);

  const double dt = (t1 - t0) / (n_obs - 1);
  std::vector<double> times;
  for (double t = t1; t >= pre - 1e-12; t -= dt) times.push_back(t);
  std::reverse(times.begin(), times.end());
  times = merged_times(times);
  std::size_t first_gap = 0;
  while (first_gap < times.size() && times[first_gap] < t0 - 1e-9 * std::max(1.0, std::abs(t0))) ++first_gap;
  const std::size_t n_gap = times.size() - first_gap;
  const auto nt = static_cast<Eigen::Index>(times.size());

  struct PathResult {
    Eigen::VectorXd gap;
    Eigen::MatrixXd I;  // 4 x nt
  };
  const auto d = static_cast<Eigen::Index>(model.dimension());
  auto results = run_paths(run.n_paths, run.threads, [&](std::size_t i) {
    const auto noise = make_model_noise(model, plan.start_time, t1, run.step, derive_seed(run.seed, i), times);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const Eigen::MatrixXd xi = integrate_observed(model, noise, plan.start_time, t1, zero, run.step, times);
    const Eigen::MatrixXd xs = integrate_observed(shifted, noise, plan.start_time, t1, zero, run.step, times);
    PathResult r;
    r.gap = (xs - xi).rightCols(static_cast<Eigen::Index>(n_gap)).colwise().squaredNorm().transpose();
    r.I.resize(4, nt);
    Eigen::VectorXd a(d), c(d);
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double t = times[static_cast<std::size_t>(j)];
      const Eigen::VectorXd y = xi.col(j);
      shifted.eval_f(t, y, a);
      model.eval_f(t, y, c);
      r.I(0, j) = (a - c).squaredNorm();
      shifted.eval_g(t, y, a);
      model.eval_g(t, y, c);
      double hs = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        hs += model.wiener.mode_variances[static_cast<std::size_t>(k)] * (a[k] - c[k]) * (a[k] - c[k]);
      }
      r.I(1, j) = hs;
      shifted.eval_jump_base(shifted.coefficients.F, t, y, a);
      model.eval_jump_base(model.coefficients.F, t, y, c);
      r.I(2, j) = model.jump_l2_integral(model.coefficients.F.coupling, model.jumps.small_marks,
                                         model.jumps.small_rate, a - c);
      shifted.eval_jump_base(shifted.coefficients.G, t, y, a);
      model.eval_jump_base(model.coefficients.G, t, y, c);
      r.I(3, j) = model.jump_l2_integral(model.coefficients.G.coupling, model.jumps.large_marks, b, a - c);
    }
    return r;
  });

  ShiftCouplingReport rep;
  rep.tau = tau;
  rep.times.assign(times.begin() + static_cast<std::ptrdiff_t>(first_gap), times.end());
  std::vector<Eigen::VectorXd> gaps;
  gaps.reserve(results.size());
  Eigen::MatrixXd Isum = Eigen::MatrixXd::Zero(4, nt);
  for (auto& r : results) {
    gaps.push_back(std::move(r.gap));
    Isum += r.I;
  }
  const auto curve = mean_curve(gaps, rep.times);
  rep.gap = curve.mean;
  rep.gap_se = curve.se;
  Eigen::Index arg = 0;
  rep.measured_sup_gap = rep.gap.size() ? rep.gap.maxCoeff(&arg) : 0.0;
  rep.se_at_sup = rep.gap_se.size() ? rep.gap_se[arg] : 0.0;
  Isum /= static_cast<double>(std::max<std::size_t>(1, results.size()));
  for (int k = 0; k < 4; ++k) rep.sup_I[k] = Isum.row(k).maxCoeff();
  rep.compat_c = compat_c(sm.K, sm.omega, L, b);
  rep.theoretical_bound = compat_gap_bound(sm.K, sm.omega, L, b, rep.sup_I[0], rep.sup_I[1], rep.sup_I[2], rep.sup_I[3]);
  rep.pass = rep.measured_sup_gap <= rep.theoretical_bound + 3.0 * rep.se_at_sup;
  return rep;
}

}  // namespace levylab
