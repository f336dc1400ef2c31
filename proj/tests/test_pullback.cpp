#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "levylab/errors.hpp"
#include "levylab/presets.hpp"
#include "levylab/pullback.hpp"

using namespace levylab;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

// Bounded solution of y' = -lambda y + sin t: the convolution of e^{-lambda s} with sin.
double sine_convolution(double lambda, double t) {
  return (lambda * std::sin(t) - std::cos(t)) / (lambda * lambda + 1.0);
}

std::vector<double> grid(double t0, double t1, double dt) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((t1 - t0) / dt));
  for (int k = 0; k <= n; ++k) out.push_back(t0 + k * dt);
  return out;
}

}  // namespace

TEST_CASE("pullback horizon") {
  CHECK(pullback_horizon(1.0, 1.0, 0.0, 1e-2) == 0.0);
  CHECK(pullback_horizon(1.0, 1.0, 1.0, 1e-2) == doctest::Approx(std::log(5e4)).epsilon(1e-14));
  CHECK(std::abs(pullback_horizon(1.0, 1.0, 1.0, 1e-2) - 10.82) < 5e-3);
  for (double rate : {0.5, 1.0, 3.7}) {
    const double a = pullback_horizon(1.3, rate, 2.0, 1e-3);
    const double b = pullback_horizon(1.3, rate, 2.0, 5e-4);
    CHECK(b - a == doctest::Approx(2.0 * std::log(2.0) / rate).epsilon(1e-12));
  }
  CHECK_THROWS_AS(pullback_horizon(1.0, 0.0, 1.0, 1e-2), ThresholdViolation);
  CHECK_THROWS_AS(pullback_horizon(1.0, -1.0, 1.0, 1e-2), ThresholdViolation);
  CHECK_THROWS_AS(pullback_horizon(1.0, 1.0, 1.0, 0.0), InputError);
}

TEST_CASE("plan uses the stability margin and the radius") {
  const auto m = example61();
  const auto plan = plan_pullback(m, 2.0, 1e-3);
  CHECK(plan.margin == doctest::Approx(stability_margin(1.0, 4.0, 0.25, 1.0)));
  CHECK(plan.radius == doctest::Approx(compute_radius(1.0, 4.0, 0.25, 1.0, 1.0)));
  CHECK(plan.start_bound == doctest::Approx(plan.radius * plan.radius));
  CHECK(plan.start_time == doctest::Approx(2.0 - plan.t_pull));
  Example61Options o;
  o.large_rate = 20.0;
  CHECK_THROWS_AS(plan_pullback(example61(o), 0.0, 1e-3), ThresholdViolation);
}

TEST_CASE("bounded solution of a forced linear equation") {
  for (double lambda : {1.0, 2.5}) {
    const auto m = linear_forced(lambda);
    const auto sol = bounded_solution(m, 0.0, 10.0, 1e-4, 1, 1e-2);
    CHECK(sol.plan.t_pull > 0.0);
    CHECK(sol.path.times.front() == doctest::Approx(0.0));
    CHECK(sol.path.times.back() == doctest::Approx(10.0));
    double err = 0.0;
    for (std::size_t i = 0; i < sol.path.size(); ++i) {
      err = std::max(err, std::abs(sol.path.values(0, static_cast<Eigen::Index>(i)) -
                                   sine_convolution(lambda, sol.path.times[i])));
    }
    CHECK(err < 1e-4);
  }
}

TEST_CASE("zero coefficients give the zero path") {
  SdeModel m;
  m.semigroup = {{1.0}, 1.0, 1.0};
  m.wiener.mode_variances = {1.0};
  m.jumps = make_jump_spec(1.0, MarkSampler::uniform_shell(0.5, 1.0), 1.0, MarkSampler::point_mass(1.0), 2.1);
  m.coefficients.A0 = 1.0;
  m.validate();
  const auto sol = bounded_solution(m, 0.0, 3.0, 1e-3, 4, 1e-2);
  CHECK(sol.path.values.cwiseAbs().maxCoeff() == 0.0);
  // Multiplicative noise keeps 0 as the bounded solution.
  const auto sol61 = bounded_solution(example61(), 0.0, 3.0, 1e-3, 4, 1e-2);
  CHECK(sol61.path.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bounded solution restricts a single path") {
  const auto m = periodic_example();
  const auto sol = bounded_solution(m, 1.0, 4.0, 1e-3, 8, 1e-2);
  CHECK(sol.path.jump_flags.front() == kNoJump);
  CHECK(sol.path.left_limits.col(0) == sol.path.values.col(0));
  Eigen::VectorXd total = Eigen::VectorXd::Zero(1);
  for (std::size_t i = 1; i < sol.path.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    if (sol.path.jump_flags[i]) total += sol.path.values.col(c) - sol.path.left_limits.col(c);
  }
  CHECK(total[0] == sol.path.applied_jump_total[0]);
  const auto again = bounded_solution(m, 1.0, 4.0, 1e-3, 8, 1e-2);
  CHECK(again.path.values == sol.path.values);
}

TEST_CASE("pullback independence under shared noise") {
  Example61Options o;
  o.forcing = 1.0;
  o.A0 = 2.0;
  const auto m = example61(o);
  const double tol = 1e-3;
  const double t0 = 0.0, t1 = 5.0, step = 1e-2;
  const auto plan0 = plan_pullback(m, t0, tol, 0.0);
  const Eigen::VectorXd start = vec1(plan0.radius);
  const auto plan = plan_pullback(m, t0, tol, start.norm());
  const int n = 40;
  std::vector<double> sq;
  for (int i = 0; i < n; ++i) {
    const double extra[1] = {t0};
    const auto noise = make_model_noise(m, plan.start_time, t1, step, derive_seed(99, i), extra);
    const auto a = bounded_solution_on(m, noise, plan, t0, t1, step);
    const auto b = bounded_solution_on(m, noise, plan, t0, t1, step, &start);
    REQUIRE(a.path.size() == b.path.size());
    const Eigen::VectorXd gap = (a.path.values - b.path.values).colwise().squaredNorm();
    if (sq.empty()) sq.assign(static_cast<std::size_t>(gap.size()), 0.0);
    for (Eigen::Index k = 0; k < gap.size(); ++k) sq[static_cast<std::size_t>(k)] += gap[k] / n;
  }
  CHECK(std::sqrt(*std::max_element(sq.begin(), sq.end())) <= tol);
}

TEST_CASE("forgetting: identical starts have zero gap") {
  RunOptions run;
  run.n_paths = 20;
  const auto obs = grid(0.0, 3.0, 0.5);
  const auto c = forgetting_check(example61(), 0.0, obs, vec1(0.4), vec1(0.4), run);
  CHECK(c.mean.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forgetting: linear flow decays at twice the rate") {
  const double lambda = 2.0;
  RunOptions run;
  run.n_paths = 3;
  const auto obs = grid(0.0, 4.0, 0.25);
  const auto c = forgetting_check(linear_forced(lambda), 0.0, obs, vec1(1.0), vec1(-0.5), run);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const double exact = 2.25 * std::exp(-2.0 * lambda * obs[k]);
    CHECK(c.mean[static_cast<Eigen::Index>(k)] == doctest::Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("forgetting: gap stays under the contraction bound") {
  const auto m = example61();
  RunOptions run;
  run.n_paths = 400;
  run.seed = 17;
  const auto obs = grid(0.0, 2.0, 0.1);
  const auto c = forgetting_check(m, 0.0, obs, vec1(1.0), vec1(-1.0), run);
  const double margin = stability_margin(1.0, 4.0, 0.25, 1.0);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    CHECK(c.mean[i] <= 5.0 * 4.0 * std::exp(-margin * obs[k]) + 3.0 * c.se[i]);
  }
}

TEST_CASE("bounded solution second moment stays inside the radius") {
  const auto m = periodic_example();
  const auto r = compute_radius(m.semigroup.K, m.semigroup.omega, m.coefficients.lipschitz_L, m.coefficients.A0,
                                m.jumps.large_rate);
  RunOptions run;
  run.n_paths = 200;
  run.seed = 5;
  const auto obs = grid(0.0, 6.0, 0.5);
  const auto c = bounded_second_moment(m, obs, 1e-2, run);
  for (Eigen::Index k = 0; k < c.mean.size(); ++k) CHECK(c.mean[k] <= r * r + 3.0 * c.se[k]);
  CHECK(c.mean.maxCoeff() > 0.0);
}
