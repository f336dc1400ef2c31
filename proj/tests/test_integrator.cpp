#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "levylab/ensemble.hpp"
#include "levylab/errors.hpp"
#include "levylab/integrator.hpp"
#include "levylab/presets.hpp"

using namespace levylab;

namespace {

SdeModel scalar_model(double lambda) {
  SdeModel m;
  m.name = "scalar";
  m.semigroup = {{lambda}, 1.0, lambda};
  m.wiener.mode_variances = {0.0};
  m.jumps = make_jump_spec(0.0, MarkSampler::uniform_shell(0.5, 1.0), 0.0, MarkSampler::point_mass(1.0), 2.1);
  m.coefficients.A0 = 1.0;
  return m;
}

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("zero noise linear decay") {
  const auto m = scalar_model(1.0);
  const auto noise = make_model_noise(m, 0.0, 1.0, 1e-4, 3);
  const auto path = integrate(m, noise, 0.0, 1.0, vec1(1.0), 1e-4);
  CHECK(path.times.front() == 0.0);
  CHECK(path.times.back() == doctest::Approx(1.0).epsilon(1e-14));
  double err = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    err = std::max(err, std::abs(path.values(0, static_cast<Eigen::Index>(i)) - std::exp(-path.times[i])));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("input validation") {
  const auto m = scalar_model(1.0);
  const auto noise = make_model_noise(m, 0.0, 1.0, 1e-2, 3);
  CHECK_THROWS_AS(integrate(m, noise, 0.0, 1.0, vec1(NAN), 1e-2), InputError);
  CHECK_THROWS_AS(integrate(m, noise, 0.0, 1.0, Eigen::VectorXd::Zero(2), 1e-2), InputError);
  CHECK_THROWS_AS(integrate(m, noise, 0.0, 1.0, vec1(1.0), 0.0), InputError);
  CHECK_THROWS_AS(integrate(m, noise, 0.0, 1.0, vec1(1.0), 1e-3), InputError);
  CHECK_THROWS_AS(integrate(m, noise, 0.0, 2.0, vec1(1.0), 1e-2), InputError);
}

TEST_CASE("non-finite state reports the blowup time") {
  auto m = scalar_model(1.0);
  m.coefficients.f.terms.push_back({1000.0, TimeProfile::constant(1.0), StateMap::from_name("linear")});
  const auto noise = make_model_noise(m, 0.0, 50.0, 1e-2, 3);
  try {
    integrate(m, noise, 0.0, 50.0, vec1(1.0), 1e-2);
    FAIL("expected a blowup");
  } catch (const NumericalBlowup& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() < 50.0);
  }
}

TEST_CASE("cadlag bookkeeping") {
  Example61Options o;
  o.small_rate = 1.5;
  o.large_rate = 2.0;
  const auto m = example61(o);
  const auto noise = make_model_noise(m, -3.0, 7.0, 1e-2, 11);
  const auto path = integrate(m, noise, -3.0, 7.0, vec1(0.7), 5e-2);

  for (std::size_t i = 1; i < path.size(); ++i) CHECK(path.times[i] > path.times[i - 1]);

  // Recompute every increment from the left limit and the stored marks.
  std::size_t si = 0, li = 0, jump_knots = 0;
  while (si < noise.small_jumps.size() && noise.small_jumps[si].time <= -3.0) ++si;
  while (li < noise.large_jumps.size() && noise.large_jumps[li].time <= -3.0) ++li;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(1), inc;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const double t = path.times[i];
    Eigen::VectorXd y = path.left_limits.col(col);
    std::uint8_t expected_flags = kNoJump;
    for (; si < noise.small_jumps.size() && noise.small_jumps[si].time <= t; ++si) {
      m.eval_jump(m.coefficients.F, t, y, noise.small_jumps[si].mark, inc);
      y += inc;
      expected_flags |= kSmallJump;
    }
    for (; li < noise.large_jumps.size() && noise.large_jumps[li].time <= t; ++li) {
      m.eval_jump(m.coefficients.G, t, y, noise.large_jumps[li].mark, inc);
      y += inc;
      expected_flags |= kLargeJump;
    }
    CHECK(path.jump_flags[i] == expected_flags);
    if (expected_flags == kNoJump) {
      CHECK(path.values(0, col) == path.left_limits(0, col));
    } else {
      ++jump_knots;
      CHECK(path.values(0, col) == y[0]);
      total += path.values.col(col) - path.left_limits.col(col);
    }
  }
  CHECK(si == noise.small_jumps.size());
  CHECK(li == noise.large_jumps.size());
  CHECK(jump_knots > 10);
  CHECK(path.applied_jump_total[0] == total[0]);
}

TEST_CASE("paths are reproducible") {
  const auto m = example61();
  const auto noise = make_model_noise(m, 0.0, 5.0, 1e-2, 21);
  const auto a = integrate(m, noise, 0.0, 5.0, vec1(0.3), 1e-2);
  const auto b = integrate(m, noise, 0.0, 5.0, vec1(0.3), 1e-2);
  CHECK(a.times == b.times);
  CHECK(a.values == b.values);
  CHECK(a.left_limits == b.left_limits);
  CHECK(a.jump_flags == b.jump_flags);
  const auto other = integrate(m, make_model_noise(m, 0.0, 5.0, 1e-2, 22), 0.0, 5.0, vec1(0.3), 1e-2);
  CHECK(other.values.col(other.values.cols() - 1) != a.values.col(a.values.cols() - 1));
}

TEST_CASE("observed integration matches the full path") {
  const auto m = example61();
  const auto noise = make_model_noise(m, 0.0, 4.0, 1e-2, 5, std::vector<double>{1.2345});
  const auto path = integrate(m, noise, 0.0, 4.0, vec1(0.3), 1e-2);
  const std::vector<double> obs{0.0, 1.0, 1.2345, 4.0};
  const auto seen = integrate_observed(m, noise, 0.0, 4.0, vec1(0.3), 1e-2, obs);
  for (std::size_t j = 0; j < obs.size(); ++j) {
    const auto it = std::lower_bound(path.times.begin(), path.times.end(), obs[j] - 1e-9);
    REQUIRE(it != path.times.end());
    CHECK(seen(0, static_cast<Eigen::Index>(j)) == path.values(0, it - path.times.begin()));
  }
  const std::vector<double> unordered{2.0, 1.0};
  CHECK_THROWS_AS(integrate_observed(m, noise, 0.0, 4.0, vec1(0.3), 1e-2, unordered), InputError);
}

TEST_CASE("step refinement is first order") {
  // State-dependent drift frozen over a step gives a first-order scheme.
  auto m = scalar_model(1.0);
  m.coefficients.f.terms.push_back(
      {0.5, TimeProfile::periodic(1.0, {{1.0, 1.0, 0.0, Trig::kCos}}), StateMap::from_name("linear")});
  m.coefficients.G.terms.push_back({0.3, TimeProfile::constant(1.0), StateMap::from_name("linear")});
  m.jumps = make_jump_spec(0.0, MarkSampler::uniform_shell(0.5, 1.0), 1.0, MarkSampler::point_mass(1.0), 2.1);
  const double base = 0.0025;
  const auto noise = make_model_noise(m, 0.0, 3.0, base, 9);
  REQUIRE(!noise.large_jumps.empty());
  std::vector<double> terminal;
  for (double h : {0.04, 0.02, 0.01, 0.005, 0.0025}) {
    terminal.push_back(integrate(m, noise, 0.0, 3.0, vec1(1.0), h).values(0, Eigen::last));
  }
  for (std::size_t k = 0; k + 2 < terminal.size(); ++k) {
    const double ratio = std::abs(terminal[k] - terminal[k + 1]) / std::abs(terminal[k + 1] - terminal[k + 2]);
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
  }
}

TEST_CASE("heat model: single mode decays at pi^2") {
  Example62Options o;
  o.galerkin = {1, 1};
  auto m = example62(o);
  CHECK(m.semigroup.K == 1.0);
  CHECK(m.semigroup.omega == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-15));
  CHECK(m.semigroup.eigenvalues[0] == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-15));
  m.coefficients.f.terms.clear();
  m.coefficients.g.terms.clear();
  m.coefficients.F.terms.clear();
  m.coefficients.G.terms.clear();
  m.jumps.small_rate = 0.0;
  m.jumps.large_rate = 0.0;
  const auto noise = make_model_noise(m, 0.0, 1.0, 1e-5, 1);
  const auto path = integrate(m, noise, 0.0, 1.0, vec1(1.0), 1e-5);
  const double exact = std::exp(-std::numbers::pi * std::numbers::pi);
  CHECK(std::abs(path.values(0, Eigen::last) - exact) / exact < 1e-6);
}

TEST_CASE("heat model eigenvalues and basis") {
  const auto m = example62();
  REQUIRE(m.dimension() == 8);
  for (std::size_t n = 1; n <= 8; ++n) {
    CHECK(m.semigroup.eigenvalues[n - 1] == doctest::Approx(n * n * std::numbers::pi * std::numbers::pi));
  }
  REQUIRE(m.basis.has_value());
  const auto& b = *m.basis;
  for (int j = 0; j < 16; ++j) {
    const double xi = (j + 1) / 17.0;
    for (int k = 0; k < 8; ++k) {
      CHECK(b.synthesis(j, k) == doctest::Approx(std::sqrt(2.0) * std::sin((k + 1) * std::numbers::pi * xi)));
    }
  }
}

TEST_CASE("heat model: pseudo-spectral drift matches nodal evaluation") {
  const auto m = example62();
  const auto& b = *m.basis;
  Eigen::VectorXd y(8);
  for (int k = 0; k < 8; ++k) y[k] = 0.3 / (k + 1);
  const double t = 0.7;
  Eigen::VectorXd out;
  m.eval_f(t, y, out);
  const Eigen::VectorXd nodal = b.synthesis * y;
  Eigen::VectorXd applied(nodal.size());
  const double prof = 0.2 * (std::cos(t) + std::sin(std::numbers::sqrt2 * t));
  for (Eigen::Index j = 0; j < nodal.size(); ++j) applied[j] = prof * std::sin(nodal[j]);
  const Eigen::VectorXd expected = b.synthesis.transpose() * applied / 17.0;
  CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("OU with jumps: stationary moments") {
  const OuOptions o;  // lambda 1, sigma 0.5, rate 1, marks 1 + Exp(2)
  const auto m = ou_model(o);
  const double mu = 1.0 + 1.0 / o.mark_rate;
  const double m2 = 1.0 + 2.0 / o.mark_rate + 2.0 / (o.mark_rate * o.mark_rate);
  const double mean = o.large_rate * mu / o.lambda;
  const double second = (o.sigma * o.sigma + o.large_rate * (2.0 * mean * mu + m2)) / (2.0 * o.lambda);

  const std::size_t n = 2000;
  const auto finals = run_paths(n, 1, [&](std::size_t i) {
    const auto noise = make_model_noise(m, 0.0, 12.0, 1e-2, derive_seed(77, i));
    return integrate_observed(m, noise, 0.0, 12.0, vec1(0.0), 1e-2, std::vector<double>{12.0})(0, 0);
  });
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (double y : finals) {
    s1 += y;
    s2 += y * y;
    s4 += y * y * y * y;
  }
  const double e1 = s1 / n, e2 = s2 / n;
  const double se1 = std::sqrt((e2 - e1 * e1) / n);
  const double se2 = std::sqrt((s4 / n - e2 * e2) / n);
  CHECK(std::abs(e1 - mean) < 5.0 * se1);
  CHECK(std::abs(e2 - second) < 5.0 * se2);
}

TEST_CASE("path CSV") {
  const auto m = example62();
  const auto noise = make_model_noise(m, 0.0, 0.05, 1e-2, 1);
  const auto path = integrate(m, noise, 0.0, 0.05, Eigen::VectorXd::Zero(8), 1e-2);
  const auto csv = path_csv(path, 3);
  CHECK(csv.rfind("time,jump_flag,y0,y1,y2\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == path.size() + 1);
}
