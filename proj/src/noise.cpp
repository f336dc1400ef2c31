#include "levylab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "levylab/errors.hpp"

namespace levylab {
namespace {

constexpr std::uint64_t kWienerForward = 101;
constexpr std::uint64_t kWienerBackward = 102;
constexpr std::uint64_t kSmallForward = 201;
constexpr std::uint64_t kSmallBackward = 202;
constexpr std::uint64_t kLargeForward = 203;
constexpr std::uint64_t kLargeBackward = 204;
constexpr std::uint64_t kRealizationWiener = 1;
constexpr std::uint64_t kRealizationJumps = 2;
constexpr std::uint64_t kCompensatorSeed = 0xC0FFEEULL;

constexpr auto kNoBase = std::numeric_limits<std::int64_t>::min();

double knot_tolerance(double t) { return 1e-12 * std::max(1.0, std::abs(t)); }

// Poisson points on the open segment (a, b) of a one-sided stream, sorted.
std::vector<JumpEvent> poisson_segment(double rate, const MarkSampler& marks, double a, double b,
                                       Rng& rng) {
  std::vector<JumpEvent> out;
  const double len = b - a;
  if (rate <= 0.0 || len <= 0.0) return out;
  std::poisson_distribution<long> count_dist(rate * len);
  const long count = count_dist(rng);
  std::uniform_real_distribution<double> uniform(a, b);
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    double t = uniform(rng);
    while (t <= a || t >= b) t = uniform(rng);
    out.push_back({t, {}});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.time < y.time; });
  for (auto& e : out) e.mark = marks.sample(rng);
  return out;
}

std::vector<JumpEvent> two_sided_points(double rate, const MarkSampler& marks, double t0, double t1,
                                        Rng& forward, Rng& backward) {
  std::vector<JumpEvent> out;
  // Forward stream covers the part of the window in [0, inf).
  const double fa = std::max(t0, 0.0);
  if (t1 > fa) out = poisson_segment(rate, marks, fa, t1, forward);
  // Backward stream lives on s = -t in [0, inf) and is mirrored.
  const double ba = std::max(-t1, 0.0);
  const double bb = -t0;
  if (bb > ba) {
    auto mirrored = poisson_segment(rate, marks, ba, bb, backward);
    for (auto& e : mirrored) e.time = -e.time;
    out.insert(out.end(), mirrored.begin(), mirrored.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.time < y.time; });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// MarkSampler
// ---------------------------------------------------------------------------

MarkSampler MarkSampler::uniform_shell(double lower, double upper, bool symmetric) {
  if (!(lower >= 0.0 && lower < upper)) throw InputError("uniform shell needs 0 <= lower < upper");
  MarkSampler m;
  m.law_ = RadialLaw::kUniformShell;
  m.lower_ = lower;
  m.upper_ = upper;
  m.symmetric_ = symmetric;
  return m;
}

MarkSampler MarkSampler::point_mass(double value, bool symmetric) {
  if (!std::isfinite(value)) throw InputError("point mass mark must be finite");
  MarkSampler m;
  m.law_ = RadialLaw::kPointMass;
  m.value_ = value;
  m.symmetric_ = symmetric;
  return m;
}

MarkSampler MarkSampler::exponential_tail(double rate, bool symmetric) {
  if (!(rate > 0.0)) throw InputError("exponential tail needs a positive rate");
  MarkSampler m;
  m.law_ = RadialLaw::kExponentialTail;
  m.rate_ = rate;
  m.symmetric_ = symmetric;
  return m;
}

MarkSampler MarkSampler::with_dimension(int m) const {
  if (m < 1) throw InputError("mark dimension must be >= 1");
  MarkSampler out = *this;
  out.dimension_ = m;
  return out;
}

double MarkSampler::sample_radius(Rng& rng) const {
  switch (law_) {
    case RadialLaw::kUniformShell: {
      std::uniform_real_distribution<double> u(lower_, upper_);
      return u(rng);
    }
    case RadialLaw::kPointMass: return value_;
    case RadialLaw::kExponentialTail: {
      std::exponential_distribution<double> e(rate_);
      return 1.0 + e(rng);
    }
  }
  return 0.0;
}

void MarkSampler::sample(Rng& rng, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(dimension_)) throw InputError("mark buffer size mismatch");
  const double r = sample_radius(rng);
  if (dimension_ == 1) {
    double sign = 1.0;
    if (symmetric_) {
      std::bernoulli_distribution coin(0.5);
      sign = coin(rng) ? 1.0 : -1.0;
    }
    out[0] = sign * r;
    return;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& x : out) {
      x = normal(rng);
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double scale = std::abs(r) / std::sqrt(norm2);
  for (auto& x : out) x *= scale;
}

std::vector<double> MarkSampler::sample(Rng& rng) const {
  std::vector<double> out(static_cast<std::size_t>(dimension_));
  sample(rng, out);
  return out;
}

double MarkSampler::moment(double k) const {
  if (k == 0.0) return 1.0;
  switch (law_) {
    case RadialLaw::kUniformShell:
      return (std::pow(upper_, k + 1.0) - std::pow(lower_, k + 1.0)) /
             ((k + 1.0) * (upper_ - lower_));
    case RadialLaw::kPointMass: return std::pow(std::abs(value_), k);
    case RadialLaw::kExponentialTail:
      // E r^k = e^rate * rate^-k * Gamma(k + 1, rate) for r = 1 + Exp(rate).
      return std::exp(rate_) * std::pow(rate_, -k) * boost::math::tgamma(k + 1.0, rate_);
  }
  return 0.0;
}

std::vector<double> MarkSampler::mean() const {
  std::vector<double> m(static_cast<std::size_t>(dimension_), 0.0);
  if (dimension_ == 1 && !symmetric_) {
    m[0] = law_ == RadialLaw::kPointMass ? value_ : moment(1.0);
  }
  return m;
}

std::vector<double> MarkSampler::coordinate_second_moments() const {
  return std::vector<double>(static_cast<std::size_t>(dimension_), moment(2.0) / dimension_);
}

double MarkSampler::inf_norm() const {
  switch (law_) {
    case RadialLaw::kUniformShell: return lower_;
    case RadialLaw::kPointMass: return std::abs(value_);
    case RadialLaw::kExponentialTail: return 1.0;
  }
  return 0.0;
}

double MarkSampler::sup_norm() const {
  switch (law_) {
    case RadialLaw::kUniformShell: return upper_;
    case RadialLaw::kPointMass: return std::abs(value_);
    case RadialLaw::kExponentialTail: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

bool MarkSampler::has_scalar_density() const {
  return dimension_ == 1 && law_ != RadialLaw::kPointMass;
}

std::string MarkSampler::describe() const {
  std::ostringstream os;
  switch (law_) {
    case RadialLaw::kUniformShell: os << "uniform_shell[" << lower_ << "," << upper_ << ")"; break;
    case RadialLaw::kPointMass: os << "point_mass(" << value_ << ")"; break;
    case RadialLaw::kExponentialTail: os << "exponential_tail(rate=" << rate_ << ")"; break;
  }
  if (symmetric_) os << " symmetric";
  if (dimension_ > 1) os << " rank " << dimension_;
  return os.str();
}

// ---------------------------------------------------------------------------
// Specs
// ---------------------------------------------------------------------------

double WienerSpec::trace() const {
  return std::accumulate(mode_variances.begin(), mode_variances.end(), 0.0);
}

double WienerSpec::max_variance() const {
  return mode_variances.empty() ? 0.0 : *std::max_element(mode_variances.begin(), mode_variances.end());
}

void WienerSpec::validate() const {
  for (double q : mode_variances) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw InputError("Wiener mode variances must be finite and >= 0");
  }
  if (!drift.empty() && drift.size() != mode_variances.size()) {
    throw InputError("Wiener drift dimension must match the number of modes");
  }
}

void JumpMeasureSpec::validate() const {
  if (!(small_rate >= 0.0) || !std::isfinite(small_rate)) throw InputError("small jump rate must be finite and >= 0");
  if (!(large_rate >= 0.0) || !std::isfinite(large_rate)) throw InputError("large jump rate b must be finite and >= 0");
  if (!(truncation_delta > 0.0 && truncation_delta < 1.0)) throw InputError("truncation delta must lie in (0, 1)");
  if (small_rate > 0.0) {
    if (small_marks.law() == RadialLaw::kExponentialTail) throw InputError("small marks cannot have an exponential tail");
    if (small_marks.inf_norm() < truncation_delta - 1e-15) throw InputError("small marks must satisfy |x| >= delta");
    const bool open_top = small_marks.law() == RadialLaw::kUniformShell;
    if (open_top ? small_marks.sup_norm() > 1.0 : small_marks.sup_norm() >= 1.0) {
      throw InputError("small marks must satisfy |x| < 1");
    }
  }
  if (large_rate > 0.0 && large_marks.inf_norm() < 1.0) throw InputError("large marks must satisfy |x| >= 1");
}

JumpMeasureSpec make_jump_spec(double small_rate, const MarkSampler& small_marks, double large_rate,
                               const MarkSampler& large_marks, double moment_p) {
  JumpMeasureSpec spec;
  spec.small_rate = small_rate;
  spec.small_marks = small_marks;
  spec.truncation_delta = small_marks.inf_norm() > 0.0 ? small_marks.inf_norm() : 0.5;
  spec.large_rate = large_rate;
  spec.large_marks = large_marks;
  spec.mark_moment_2_small = small_marks.moment(2.0);
  spec.mark_moment_2_large = large_marks.moment(2.0);
  spec.mark_moment_p_small = small_marks.moment(moment_p);
  spec.mark_moment_p_large = large_marks.moment(moment_p);
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

Eigen::MatrixXd sample_wiener_increments(const WienerSpec& spec, std::span<const double> grid,
                                         std::uint64_t seed) {
  spec.validate();
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] >= grid[i - 1])) throw InputError("time grid must be non-decreasing");
  }
  const auto d = static_cast<Eigen::Index>(spec.dimension());
  const auto n = grid.size() < 2 ? Eigen::Index{0} : static_cast<Eigen::Index>(grid.size() - 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, n);
  Eigen::VectorXd sd(d);
  for (Eigen::Index k = 0; k < d; ++k) sd[k] = std::sqrt(spec.mode_variances[static_cast<std::size_t>(k)]);

  Rng forward(derive_seed(seed, kWienerForward));
  Rng backward(derive_seed(seed, kWienerBackward));
  std::normal_distribution<double> nf(0.0, 1.0);
  std::normal_distribution<double> nb(0.0, 1.0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = grid[static_cast<std::size_t>(i)];
    const double b = grid[static_cast<std::size_t>(i) + 1];
    const double len = b - std::max(a, 0.0);
    if (b > 0.0 && len > 0.0) {
      const double s = std::sqrt(len);
      for (Eigen::Index k = 0; k < d; ++k) out(k, i) += sd[k] * s * nf(forward);
    }
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double a = grid[static_cast<std::size_t>(i)];
    const double b = grid[static_cast<std::size_t>(i) + 1];
    const double len = std::min(b, 0.0) - a;
    if (a < 0.0 && len > 0.0) {
      const double s = std::sqrt(len);
      for (Eigen::Index k = 0; k < d; ++k) out(k, i) += sd[k] * s * nb(backward);
    }
  }
  return out;
}

std::pair<std::vector<JumpEvent>, std::vector<JumpEvent>> sample_jumps(const JumpMeasureSpec& spec,
                                                                       double t0, double t1,
                                                                       std::uint64_t seed) {
  if (!(t1 > t0)) throw InputError("jump window must be nonempty");
  spec.validate();
  Rng sf(derive_seed(seed, kSmallForward));
  Rng sb(derive_seed(seed, kSmallBackward));
  Rng lf(derive_seed(seed, kLargeForward));
  Rng lb(derive_seed(seed, kLargeBackward));
  return {two_sided_points(spec.small_rate, spec.small_marks, t0, t1, sf, sb),
          two_sided_points(spec.large_rate, spec.large_marks, t0, t1, lf, lb)};
}

std::size_t NoiseRealization::knot_index(double t) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  auto it = std::lower_bound(knot_times.begin(), knot_times.end(), t - tol);
  if (it == knot_times.end() || std::abs(*it - t) > tol) {
    throw InputError("time " + std::to_string(t) + " is not a knot of the noise realization");
  }
  return static_cast<std::size_t>(it - knot_times.begin());
}

NoiseRealization make_realization(const WienerSpec& wiener, const JumpMeasureSpec& jumps, double t0,
                                  double t1, double base_step, std::uint64_t seed,
                                  std::span<const double> extra_times) {
  if (!(t1 > t0)) throw InputError("realization window must be nonempty");
  if (!(base_step > 0.0)) throw InputError("base step must be positive");
  wiener.validate();

  NoiseRealization out;
  out.t0 = t0;
  out.t1 = t1;
  out.base_step = base_step;
  out.seed = seed;
  out.dimension = wiener.dimension();

  auto [small, large] = sample_jumps(jumps, t0, t1, derive_seed(seed, kRealizationJumps));

  struct Candidate {
    double time;
    std::uint8_t flag;
    std::int64_t base;
  };
  std::vector<Candidate> cands;
  const auto k_lo = static_cast<std::int64_t>(std::ceil(t0 / base_step));
  const auto k_hi = static_cast<std::int64_t>(std::floor(t1 / base_step));
  cands.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, k_hi - k_lo + 1)) + small.size() +
                large.size() + extra_times.size() + 2);
  cands.push_back({t0, kKnotEndpoint, kNoBase});
  cands.push_back({t1, kKnotEndpoint, kNoBase});
  for (auto k = k_lo; k <= k_hi; ++k) {
    const double t = static_cast<double>(k) * base_step;
    if (t >= t0 && t <= t1) cands.push_back({t, kKnotBase, k});
  }
  for (const auto& e : small) cands.push_back({e.time, kKnotSmallJump, kNoBase});
  for (const auto& e : large) cands.push_back({e.time, kKnotLargeJump, kNoBase});
  for (double t : extra_times) {
    if (t < t0 - knot_tolerance(t0) || t > t1 + knot_tolerance(t1)) {
      throw InputError("extra knot time outside the realization window");
    }
    cands.push_back({std::clamp(t, t0, t1), kKnotExtra, kNoBase});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.time < b.time; });

  for (const auto& c : cands) {
    if (!out.knot_times.empty() && c.time - out.knot_times.back() <= knot_tolerance(c.time)) {
      out.knot_flags.back() |= c.flag;
      if (c.base != kNoBase) out.knot_base_index.back() = c.base;
      continue;
    }
    out.knot_times.push_back(c.time);
    out.knot_flags.push_back(c.flag);
    out.knot_base_index.push_back(c.base);
  }
  // Jumps that were merged into a neighbouring knot adopt its time exactly.
  auto snap = [&](std::vector<JumpEvent>& events) {
    for (auto& e : events) {
      auto it = std::upper_bound(out.knot_times.begin(), out.knot_times.end(), e.time + knot_tolerance(e.time));
      e.time = *(it - 1);
    }
  };
  snap(small);
  snap(large);
  out.small_jumps = std::move(small);
  out.large_jumps = std::move(large);

  const Eigen::MatrixXd inc =
      sample_wiener_increments(wiener, out.knot_times, derive_seed(seed, kRealizationWiener));
  const auto d = static_cast<Eigen::Index>(out.dimension);
  out.wiener_path.resize(d, static_cast<Eigen::Index>(out.knot_times.size()));
  out.wiener_path.col(0).setZero();
  for (Eigen::Index i = 0; i < inc.cols(); ++i) out.wiener_path.col(i + 1) = out.wiener_path.col(i) + inc.col(i);
  return out;
}

// ---------------------------------------------------------------------------
// Compensator
// ---------------------------------------------------------------------------

Eigen::VectorXd small_jump_compensator(const JumpMeasureSpec& spec, const MarkFunction& F,
                                       std::size_t dimension) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension));
  if (spec.small_rate == 0.0) return acc;
  const MarkSampler& marks = spec.small_marks;

  if (marks.law() == RadialLaw::kPointMass && marks.dimension() == 1) {
    const double v = marks.value();
    if (marks.symmetric()) {
      const double plus[1] = {std::abs(v)};
      const double minus[1] = {-std::abs(v)};
      acc = 0.5 * (F(plus) + F(minus));
    } else {
      const double x[1] = {v};
      acc = F(x);
    }
  } else if (marks.has_scalar_density()) {
    // Only the uniform shell has a density among admissible small-mark laws.
    using Rule = boost::math::quadrature::gauss<double, 32>;
    const double a = marks.lower();
    const double b = marks.upper();
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    auto node = [&](double r, double w) {
      // Uniform density 1/(b-a) times the half-width Jacobian.
      const double weight = w * half / (b - a);
      if (marks.symmetric()) {
        const double plus[1] = {r};
        const double minus[1] = {-r};
        acc += 0.5 * weight * (F(plus) + F(minus));
      } else {
        const double x[1] = {r};
        acc += weight * F(x);
      }
    };
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        node(mid, weights[i]);
      } else {
        node(mid + half * abscissa[i], weights[i]);
        node(mid - half * abscissa[i], weights[i]);
      }
    }
  } else {
    Rng rng(kCompensatorSeed);
    std::vector<double> x(static_cast<std::size_t>(marks.dimension()));
    for (int i = 0; i < kCompensatorMonteCarloNodes; ++i) {
      marks.sample(rng, x);
      acc += F(x);
    }
    acc /= static_cast<double>(kCompensatorMonteCarloNodes);
  }
  return -spec.small_rate * acc;
}

std::string realization_jumps_csv(const NoiseRealization& noise) {
  std::ostringstream os;
  os.precision(17);
  os << "time,kind,mark\n";
  auto dump = [&](const std::vector<JumpEvent>& events, const char* kind) {
    for (const auto& e : events) {
      os << e.time << ',' << kind;
      for (double x : e.mark) os << ',' << x;
      os << '\n';
    }
  };
  dump(noise.small_jumps, "small");
  dump(noise.large_jumps, "large");
  return os.str();
}

}  // namespace levylab
