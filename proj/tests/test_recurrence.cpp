#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "doctest.h"
#include "levylab/errors.hpp"
#include "levylab/presets.hpp"
#include "levylab/recurrence.hpp"

using namespace levylab;

namespace {

constexpr double kPi = std::numbers::pi;

Harmonic sine(double freq, double amp = 1.0, double phase = 0.0) { return {amp, freq, phase, Trig::kSin}; }

// Direct form of the metric: sup over k of min(max_{|t| <= k} |phi - psi|, 1/k).
double bebutov_sup_min(const ScalarFunction& phi, const ScalarFunction& psi, double horizon, double dt) {
  double best = 0.0, running = std::abs(phi(0.0) - psi(0.0));
  for (double k = dt; k <= horizon + 1e-12; k += dt) {
    running = std::max({running, std::abs(phi(k) - psi(k)), std::abs(phi(-k) - psi(-k))});
    best = std::max(best, std::min(running, 1.0 / k));
  }
  return best;
}

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double mean = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) v = z(rng);
  return out;
}

std::vector<double> grid(double t0, double t1, double dt) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((t1 - t0) / dt));
  for (int k = 0; k <= n; ++k) out.push_back(t0 + k * dt);
  return out;
}

}  // namespace

TEST_CASE("Bebutov distance: trivial cases") {
  const auto s = TimeProfile::periodic(1.0, {sine(1.0)});
  CHECK(bebutov_distance(s, s, 50.0, 0.01) == 0.0);
  CHECK(bebutov_distance(s, s.shifted(2.0 * kPi), 50.0, 0.01) == 0.0);
  const auto c0 = TimeProfile::constant(0.0), c3 = TimeProfile::constant(0.3);
  const double d = bebutov_distance(c0, c3, 50.0, 0.01);
  CHECK(d == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(bebutov_sup_min([](double) { return 0.0; }, [](double) { return 0.3; }, 50.0, 1e-3) ==
        doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("Bebutov distance agrees with the sup-min form") {
  const std::vector<std::pair<ScalarFunction, ScalarFunction>> pairs{
      {[](double t) { return std::sin(t); }, [](double t) { return std::sin(t + 0.5); }},
      {[](double t) { return std::sin(t); }, [](double t) { return std::sin(1.1 * t); }},
      {[](double t) { return std::sin(t); }, [](double t) { return std::sin(1.01 * t); }},
      {[](double t) { return 0.05 * std::cos(t); }, [](double) { return 0.0; }},
  };
  for (const auto& [phi, psi] : pairs) {
    const double fixed = bebutov_distance(phi, psi, 200.0, 1e-3);
    const double direct = bebutov_sup_min(phi, psi, 200.0, 1e-3);
    CHECK(std::abs(fixed - direct) < 2e-3);
  }
}

TEST_CASE("Bebutov distance asks for a wider horizon") {
  CHECK_THROWS_AS(bebutov_distance([](double t) { return std::sin(t); },
                                   [](double t) { return std::sin(t) + 1e-6; }, 100.0, 0.01),
                  WidenHorizonError);
  CHECK_THROWS_AS(bebutov_distance([](double) { return 0.0; }, [](double) { return 1.0; }, 0.0, 0.01), InputError);
}

TEST_CASE("Bebutov distance: symmetry and triangle inequality") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_profile = [&] {
    return TimeProfile::quasi_periodic({sine(1.0 + 0.5 * u(rng), u(rng), u(rng)), sine(std::sqrt(2.0), u(rng), u(rng))});
  };
  const double step = 0.01;
  for (int i = 0; i < 20; ++i) {
    const auto a = random_profile(), b = random_profile(), c = random_profile();
    const double lip = std::max({a.lipschitz_bound(), b.lipschitz_bound(), c.lipschitz_bound()});
    const double ab = bebutov_distance(a, b, 100.0, step);
    const double ba = bebutov_distance(b, a, 100.0, step);
    const double bc = bebutov_distance(b, c, 100.0, step);
    const double ac = bebutov_distance(a, c, 100.0, step);
    CHECK(ab == ba);
    CHECK(ac <= ab + bc + 2.0 * step * lip);
  }
}

TEST_CASE("almost periods of a periodic profile are its exact periods") {
  const double tau_step = 2.0 * kPi / 64.0;
  const auto rep = almost_periods(std::vector{TimeProfile::periodic(1.0, {sine(1.0)})}, 0.05, 8.0 * kPi, tau_step, 30.0, 0.01);
  REQUIRE(rep.accepted.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(rep.accepted[k].tau == doctest::Approx(2.0 * kPi * (k + 1)).epsilon(1e-12));
    CHECK(rep.accepted[k].distance < 1e-9);
  }
  CHECK(rep.max_gap == doctest::Approx(2.0 * kPi));
  CHECK(rep.relatively_dense);
}

TEST_CASE("quasi-periodic sum has relatively dense almost periods") {
  const auto q = TimeProfile::quasi_periodic({sine(1.0), sine(std::numbers::sqrt2)});
  const auto rep = almost_periods(std::vector{q}, 0.1, 200.0, 0.01, 100.0, 0.05);
  REQUIRE(!rep.accepted.empty());
  CHECK(std::isfinite(rep.max_gap));
  CHECK(rep.max_gap < 200.0);
  for (const auto& c : rep.accepted) CHECK(c.distance < 0.1);
  // Larger epsilon accepts a superset.
  const auto wide = almost_periods(std::vector{q}, 0.2, 200.0, 0.01, 100.0, 0.05);
  for (const auto& c : rep.accepted) {
    CHECK(std::any_of(wide.accepted.begin(), wide.accepted.end(),
                      [&](const AlmostPeriodCandidate& w) { return std::abs(w.tau - c.tau) < 1e-9; }));
  }
  CHECK(wide.accepted.size() > rep.accepted.size());
}

TEST_CASE("a ramp has no almost periods") {
  const auto rep = almost_periods(std::vector{TimeProfile::ramp(-100.0, 100.0)}, 0.05, 20.0, 0.1, 50.0, 0.05);
  CHECK(rep.accepted.empty());
  CHECK_FALSE(rep.relatively_dense);
  CHECK(rep.max_gap == 20.0);
}

TEST_CASE("bounded-Lipschitz distance: point masses") {
  for (double a : {1e-3, 0.1, 0.5, 1.0, 2.0, 7.0, 100.0}) {
    const std::vector<double> x{0.25}, y{0.25 + a};
    CHECK(std::abs(bl_distance_1d(x, y) - 2.0 * a / (2.0 + a)) < 1e-8);
  }
}

TEST_CASE("bounded-Lipschitz distance: reference linear-program values") {
  // Optima of the full pairwise LP, solved independently with an LP solver.
  CHECK(std::abs(bl_distance_1d(std::vector<double>{0.0, 0.3, 1.7}, std::vector<double>{0.5, 2.5}) -
                 0.3928571428571427) < 1e-8);
  CHECK(std::abs(bl_distance_1d(std::vector<double>{-1.0, -0.2, 0.4, 0.4, 3.0},
                                std::vector<double>{0.1, 0.15, 2.0, 5.0}) -
                 0.46413043478260885) < 1e-8);
  CHECK(std::abs(bl_distance_1d(std::vector<double>{0.0, 0.0, 0.0, 10.0}, std::vector<double>{10.0, 10.0, 10.0, 0.0}) -
                 0.8333333333333334) < 1e-8);
  std::vector<double> mu, nu;
  for (int i = 1; i <= 20; ++i) mu.push_back(2.0 * std::sin(i));
  for (int i = 1; i <= 15; ++i) nu.push_back(std::cos(1.3 * i) + 0.5);
  CHECK(std::abs(bl_distance_1d(mu, nu) - 0.33793108072845046) < 1e-8);
}

TEST_CASE("bounded-Lipschitz distance: metric axioms") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> size(1, 30);
  std::normal_distribution<double> z(0.0, 1.5);
  auto sample = [&] {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = z(rng);
    return v;
  };
  for (int i = 0; i < 100; ++i) {
    const auto a = sample(), b = sample(), c = sample();
    const double ab = bl_distance_1d(a, b), ba = bl_distance_1d(b, a);
    const double bc = bl_distance_1d(b, c), ac = bl_distance_1d(a, c);
    CHECK(bl_distance_1d(a, a) == doctest::Approx(0.0));
    CHECK(ab >= 0.0);
    CHECK(ab <= 2.0);
    CHECK(std::abs(ab - ba) < 1e-8);
    CHECK(ac <= ab + bc + 1e-8);
  }
  CHECK_THROWS_AS(bl_distance_1d(std::vector<double>{}, std::vector<double>{1.0}), InputError);
}

TEST_CASE("bounded-Lipschitz distance: multi-dimensional laws use the coordinate maximum") {
  EmpiricalLaw a{Eigen::MatrixXd(2, 3)}, b{Eigen::MatrixXd(2, 2)};
  a.samples << 0.0, 0.3, 1.7, 0.0, 0.0, 0.0;
  b.samples << 0.5, 2.5, 1.0, 1.0;
  CHECK(bl_distance(a, b) == doctest::Approx(std::max(0.3928571428571427, 2.0 / 3.0)).epsilon(1e-10));
  EmpiricalLaw c{Eigen::MatrixXd(3, 2)};
  CHECK_THROWS_AS(bl_distance(a, c), InputError);
}

TEST_CASE("stratified subsample keeps evenly spaced ranks") {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>((i * 7919) % 1000);
  const auto s = stratified_subsample(x, 10);
  REQUIRE(s.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(s[i] == static_cast<double>(100 * i + 50));
  CHECK(stratified_subsample(x, 2000).size() == 1000);
}

TEST_CASE("empirical laws of a Gaussian converge") {
  boost::math::normal_distribution<double> gauss;
  std::vector<double> reference(400);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    reference[i] = boost::math::quantile(gauss, (i + 0.5) / static_cast<double>(reference.size()));
  }
  std::vector<double> mean_dist;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    double acc = 0.0;
    for (std::uint64_t rep = 0; rep < 5; ++rep) acc += bl_distance_1d(normal_sample(n, 1000 + rep), reference);
    mean_dist.push_back(acc / 5.0);
  }
  CHECK(mean_dist[0] > mean_dist[1]);
  CHECK(mean_dist[1] > mean_dist[2]);
}

TEST_CASE("bootstrap error scale") {
  const auto a = normal_sample(300, 1), b = normal_sample(300, 2);
  const double err = bl_bootstrap_error(a, b, 20, 5);
  CHECK(err > 0.0);
  CHECK(bl_distance_1d(a, b) <= 3.0 * err);
  const auto shifted = normal_sample(300, 3, 1.0);
  CHECK(bl_distance_1d(a, shifted) > 3.0 * bl_bootstrap_error(a, shifted, 20, 5));
}

TEST_CASE("distributional test: stationary and periodic laws") {
  RunOptions run;
  run.n_paths = 300;
  run.seed = 3;
  const auto t_grid = grid(0.0, 2.0, 1.0);
  const auto ou = distributional_almost_period_test(ou_model(), 0.7, t_grid, run);
  CHECK(ou.beta.size() == t_grid.size());
  CHECK(ou.pass);

  const auto m = periodic_example();
  const auto period = distributional_almost_period_test(m, 2.0 * kPi, t_grid, run);
  CHECK(period.pass);
  const auto half = distributional_almost_period_test(m, kPi, t_grid, run);
  CHECK_FALSE(half.pass);
  CHECK(half.max_beta > period.max_beta);
}

TEST_CASE("shift coupling: trivial shifts") {
  RunOptions run;
  run.n_paths = 20;
  run.seed = 8;
  Example61Options o;
  o.forcing = 1.0;
  o.A0 = 2.0;
  const auto zero = shift_coupling_gap(example61(o), 0.0, 0.0, 4.0, 9, run);
  CHECK(zero.measured_sup_gap == 0.0);
  CHECK(zero.theoretical_bound == 0.0);
  CHECK(zero.pass);
  CHECK(zero.compat_c == doctest::Approx(21.0 / 32.0));

  const auto period = shift_coupling_gap(periodic_example(), 2.0 * kPi, 0.0, 4.0, 9, run);
  CHECK(period.measured_sup_gap < 1e-12);
  CHECK(period.theoretical_bound < 1e-12);
  CHECK(period.pass);

  const auto off = shift_coupling_gap(periodic_example(), 1.0, 0.0, 4.0, 9, run);
  CHECK(off.measured_sup_gap > 1e-3);
  CHECK(off.measured_sup_gap <= off.theoretical_bound + 3.0 * off.se_at_sup);
}
