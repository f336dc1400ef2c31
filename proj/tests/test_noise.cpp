#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "levylab/errors.hpp"
#include "levylab/noise.hpp"

using namespace levylab;

namespace {

double sample_variance(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / (n - 1.0);
}

JumpMeasureSpec simple_jumps(double small_rate, double large_rate) {
  return make_jump_spec(small_rate, MarkSampler::uniform_shell(0.25, 1.0), large_rate,
                        MarkSampler::exponential_tail(2.0), 2.5);
}

}  // namespace

TEST_CASE("Wiener increments: degenerate cases") {
  WienerSpec spec{{1.0, 0.0}, {}};
  const std::vector<double> grid{0.0, 0.5, 0.5, 1.0};
  const auto inc = sample_wiener_increments(spec, grid, 7);
  CHECK(inc(0, 1) == 0.0);
  CHECK(inc(1, 0) == 0.0);
  CHECK(inc(1, 2) == 0.0);
  WienerSpec zero{{0.0, 0.0, 0.0}, {}};
  CHECK(sample_wiener_increments(zero, grid, 3).isZero(0.0));
  const std::vector<double> bad{0.0, 1.0, 0.5};
  CHECK_THROWS_AS(sample_wiener_increments(spec, bad, 1), InputError);
}

TEST_CASE("Wiener increments: variance q * dt on both sides of zero") {
  WienerSpec spec{{1.0}, {}};
  const int n = 100000;
  for (double start : {0.0, -50000.0, 1000.0}) {
    std::vector<double> grid(n + 1);
    for (int i = 0; i <= n; ++i) grid[i] = start + 0.5 * i;
    const auto inc = sample_wiener_increments(spec, grid, 11);
    std::vector<double> x(inc.row(0).data(), inc.row(0).data() + n);
    const double se = 0.5 * std::sqrt(2.0 / n);
    CHECK(std::abs(sample_variance(x) - 0.5) < 5.0 * se);
  }
}

TEST_CASE("Wiener increments over a straddling interval combine both streams") {
  WienerSpec spec{{2.0}, {}};
  const int n = 20000;
  std::vector<double> x;
  for (int i = 0; i < n; ++i) {
    const std::vector<double> grid{-0.3, 0.7};
    x.push_back(sample_wiener_increments(spec, grid, derive_seed(99, i))(0, 0));
  }
  const double se = 2.0 * std::sqrt(2.0 / n);
  CHECK(std::abs(sample_variance(x) - 2.0) < 5.0 * se);
}

TEST_CASE("jump sampling: counts, support, ordering") {
  const auto spec = simple_jumps(3.0, 0.0);
  auto [small, large] = sample_jumps(spec, -5.0, 5.0, 17);
  CHECK(large.empty());
  for (std::size_t i = 0; i < small.size(); ++i) {
    CHECK(small[i].time > -5.0);
    CHECK(small[i].time < 5.0);
    if (i > 0) CHECK(small[i].time > small[i - 1].time);
    CHECK(std::abs(small[i].mark[0]) >= 0.25);
    CHECK(std::abs(small[i].mark[0]) < 1.0);
  }

  const auto b1 = simple_jumps(0.0, 1.0);
  const int reps = 10000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    auto [s, l] = sample_jumps(b1, -4.0, 6.0, derive_seed(5, r));
    sum += static_cast<double>(l.size());
    for (const auto& e : l) REQUIRE(e.mark[0] >= 1.0);
  }
  const double se = std::sqrt(10.0 / reps);
  CHECK(std::abs(sum / reps - 10.0) < 5.0 * se);
  CHECK_THROWS_AS(sample_jumps(b1, 1.0, 1.0, 1), InputError);
}

TEST_CASE("mark registry moments match sampling") {
  Rng rng(3);
  const int n = 100000;
  for (const auto& m : {MarkSampler::uniform_shell(0.5, 1.0), MarkSampler::exponential_tail(2.0),
                        MarkSampler::uniform_shell(0.2, 1.0, true).with_dimension(3)}) {
    std::vector<double> r2(n);
    for (int i = 0; i < n; ++i) {
      const auto x = m.sample(rng);
      double s = 0.0;
      for (double v : x) s += v * v;
      r2[i] = s;
    }
    const double mean = std::accumulate(r2.begin(), r2.end(), 0.0) / n;
    const double se = std::sqrt(sample_variance(r2) / n);
    CHECK(std::abs(mean - m.moment(2.0)) < 5.0 * se);
  }
  // r = 1 + Exp(2): E r = 3/2, E r^2 = 1 + 2/2 + 2/4.
  CHECK(MarkSampler::exponential_tail(2.0).moment(1.0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(MarkSampler::exponential_tail(2.0).moment(2.0) == doctest::Approx(2.5).epsilon(1e-12));
  // Uniform on [a, 1): E r^2 = (1 - a^3) / (3 (1 - a)).
  CHECK(MarkSampler::uniform_shell(0.5).moment(2.0) == doctest::Approx((1.0 - 0.125) / 1.5).epsilon(1e-14));
  CHECK(MarkSampler::point_mass(-0.7).mean()[0] == -0.7);
  CHECK(MarkSampler::point_mass(0.7, true).mean()[0] == 0.0);
}

TEST_CASE("jump spec validation") {
  CHECK_THROWS_AS(make_jump_spec(1.0, MarkSampler::point_mass(1.0), 0.0, MarkSampler::point_mass(1.0), 2.5),
                  InputError);
  CHECK_THROWS_AS(make_jump_spec(0.0, MarkSampler::uniform_shell(0.5), 1.0, MarkSampler::point_mass(0.5), 2.5),
                  InputError);
  CHECK_THROWS_AS(make_jump_spec(1.0, MarkSampler::exponential_tail(1.0), 0.0, MarkSampler::point_mass(1.0), 2.5),
                  InputError);
}

TEST_CASE("small-jump compensator") {
  const auto none = make_jump_spec(0.0, MarkSampler::uniform_shell(0.3), 0.0, MarkSampler::point_mass(1.0), 2.5);
  const MarkFunction ident = [](std::span<const double> x) { return Eigen::VectorXd::Constant(1, x[0]); };
  CHECK(small_jump_compensator(none, ident, 1).isZero(0.0));

  const double lam = 1.3, delta = 0.3;
  const auto spec = make_jump_spec(lam, MarkSampler::uniform_shell(delta), 0.0, MarkSampler::point_mass(1.0), 2.5);
  CHECK(small_jump_compensator(spec, ident, 1)[0] == doctest::Approx(-lam * (1.0 + delta) / 2.0).epsilon(1e-10));

  const double y = 0.8;
  const MarkFunction fifth = [y](std::span<const double>) { return Eigen::VectorXd::Constant(1, y / 5.0); };
  CHECK(small_jump_compensator(spec, fifth, 1)[0] == doctest::Approx(-lam * y / 5.0).epsilon(1e-14));

  const auto vec = make_jump_spec(2.0, MarkSampler::uniform_shell(0.5).with_dimension(3), 0.0,
                                  MarkSampler::point_mass(1.0), 2.5);
  const MarkFunction norm2 = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return Eigen::VectorXd::Constant(1, s);
  };
  const double exact = -2.0 * vec.small_marks.moment(2.0);
  // Monte Carlo with kCompensatorMonteCarloNodes draws of a variable bounded in [1/4, 1).
  CHECK(std::abs(small_jump_compensator(vec, norm2, 1)[0] - exact) < 5.0 * 2.0 * 0.25 / std::sqrt(kCompensatorMonteCarloNodes));
}

TEST_CASE("realizations are reproducible and merge knots") {
  WienerSpec w{{1.0, 0.5}, {}};
  const auto jumps = simple_jumps(2.0, 1.0);
  const std::vector<double> extra{-1.2345, 0.0, 3.0};
  const auto a = make_realization(w, jumps, -5.0, 5.0, 0.01, 42, extra);
  const auto b = make_realization(w, jumps, -5.0, 5.0, 0.01, 42, extra);
  CHECK(a.knot_times == b.knot_times);
  CHECK(a.knot_flags == b.knot_flags);
  CHECK(a.wiener_path == b.wiener_path);
  REQUIRE(a.small_jumps.size() == b.small_jumps.size());
  for (std::size_t i = 0; i < a.small_jumps.size(); ++i) {
    CHECK(a.small_jumps[i].time == b.small_jumps[i].time);
    CHECK(a.small_jumps[i].mark == b.small_jumps[i].mark);
  }
  for (std::size_t i = 1; i < a.knot_times.size(); ++i) CHECK(a.knot_times[i] > a.knot_times[i - 1]);
  CHECK(a.knot_times.front() == -5.0);
  CHECK(a.knot_times.back() == 5.0);
  CHECK((a.knot_flags[a.knot_index(3.0)] & kKnotExtra) != 0);
  CHECK((a.knot_flags[a.knot_index(3.0)] & kKnotBase) != 0);
  CHECK((a.knot_flags[a.knot_index(-1.2345)] & kKnotExtra) != 0);
  for (const auto& e : a.large_jumps) CHECK((a.knot_flags[a.knot_index(e.time)] & kKnotLargeJump) != 0);
  CHECK_THROWS_AS(a.knot_index(0.005), InputError);
  const auto c = make_realization(w, jumps, -5.0, 5.0, 0.01, 43, extra);
  CHECK(c.wiener_path != a.wiener_path);
  const auto csv = realization_jumps_csv(a);
  CHECK(csv.rfind("time,kind,mark", 0) == 0);
}

TEST_CASE("paths from derived seeds are uncorrelated") {
  WienerSpec w{{1.0}, {}};
  const auto jumps = simple_jumps(0.0, 0.0);
  const int pairs = 1000;
  std::vector<double> x(pairs), y(pairs);
  for (int i = 0; i < pairs; ++i) {
    const auto a = make_realization(w, jumps, 0.0, 1.0, 0.1, derive_seed(2024, 2 * i));
    const auto b = make_realization(w, jumps, 0.0, 1.0, 0.1, derive_seed(2024, 2 * i + 1));
    x[i] = a.wiener_path(0, a.wiener_path.cols() - 1);
    y[i] = b.wiener_path(0, b.wiener_path.cols() - 1);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / pairs;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / pairs;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < pairs; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 5.0 / std::sqrt(pairs));
}
