#include "levylab/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace levylab {
namespace {

Harmonic sin_h(double freq, double amp = 1.0) { return {amp, freq, 0.0, Trig::kSin}; }
Harmonic cos_h(double freq, double amp = 1.0) { return {amp, freq, 0.0, Trig::kCos}; }

StateMap linear() { return StateMap::from_name("linear"); }
StateMap constant() { return StateMap::from_name("constant"); }

}  // namespace

SdeModel example61(const Example61Options& o) {
  SdeModel m;
  m.name = "example61";
  m.semigroup = {{4.0}, 1.0, 4.0};
  m.wiener.mode_variances = {1.0};
  m.jumps = make_jump_spec(o.small_rate, MarkSampler::uniform_shell(o.small_lower, 1.0), o.large_rate,
                           MarkSampler::point_mass(1.0), o.moment_p);
  auto& c = m.coefficients;
  const auto drift_profile = TimeProfile::quasi_periodic({sin_h(1.0), cos_h(std::sqrt(3.0))});
  c.f.terms.push_back({1.0 / 8.0, drift_profile, linear()});
  if (o.forcing != 0.0) c.f.terms.push_back({o.forcing, drift_profile, constant()});
  c.g.terms.push_back({0.2,
                       TimeProfile::composite(OuterFn::kCos, 1.0, 2.0, {sin_h(1.0), sin_h(std::numbers::sqrt2)},
                                              RecurrenceClass::kLevitan),
                       linear()});
  if (!o.zero_jumps) {
    c.F.terms.push_back({0.2, TimeProfile::constant(1.0), linear()});
    c.G.terms.push_back({0.25,
                         TimeProfile::composite(OuterFn::kSin, 1.0, 3.0, {cos_h(1.0), cos_h(std::numbers::pi)},
                                                RecurrenceClass::kAlmostAutomorphic),
                         linear()});
  }
  c.A0 = o.A0;
  c.lipschitz_L = 0.25;
  c.moment_p = o.moment_p;
  m.validate();
  return m;
}

SdeModel periodic_example(const PeriodicOptions& o) {
  SdeModel m;
  m.name = "periodic";
  m.semigroup = {{4.0}, 1.0, 4.0};
  m.wiener.mode_variances = {1.0};
  m.jumps = make_jump_spec(o.small_rate, MarkSampler::uniform_shell(0.5, 1.0), o.large_rate,
                           MarkSampler::point_mass(1.0), o.moment_p);
  auto& c = m.coefficients;
  c.f.terms.push_back({1.0 / 8.0, TimeProfile::periodic(1.0, {sin_h(1.0), cos_h(1.0)}), linear()});
  if (o.forcing != 0.0) {
    c.f.terms.push_back({o.forcing, TimeProfile::periodic(1.0, {sin_h(1.0), cos_h(2.0, 0.5)}), constant()});
  }
  c.g.terms.push_back({0.2,
                       TimeProfile::composite(OuterFn::kCos, 1.0, 3.0, {sin_h(1.0), sin_h(2.0)},
                                              RecurrenceClass::kPeriodic),
                       linear()});
  if (o.sigma0 != 0.0) c.g.terms.push_back({o.sigma0, TimeProfile::constant(1.0), constant()});
  c.F.terms.push_back({0.2 * 0.75, TimeProfile::constant(1.0), linear()});
  c.F.terms.push_back({0.2 * 0.25, TimeProfile::periodic(1.0, {cos_h(1.0)}), linear()});
  c.G.terms.push_back({0.25,
                       TimeProfile::composite(OuterFn::kSin, 1.0, 3.0, {cos_h(1.0), cos_h(2.0)},
                                              RecurrenceClass::kPeriodic),
                       linear()});
  c.A0 = std::max({1.0, 1.5 * std::abs(o.forcing), std::abs(o.sigma0)});
  c.lipschitz_L = 0.25;
  c.moment_p = o.moment_p;
  m.validate();
  return m;
}

SdeModel ou_model(const OuOptions& o) {
  SdeModel m;
  m.name = "ou";
  m.semigroup = {{o.lambda}, 1.0, o.lambda};
  m.wiener.mode_variances = {1.0};
  const auto marks = MarkSampler::exponential_tail(o.mark_rate);
  m.jumps = make_jump_spec(0.0, MarkSampler::uniform_shell(0.5, 1.0), o.large_rate, marks, 2.1);
  auto& c = m.coefficients;
  if (o.sigma != 0.0) c.g.terms.push_back({o.sigma, TimeProfile::constant(1.0), constant()});
  c.G.terms.push_back({1.0, TimeProfile::constant(1.0), constant()});
  c.G.coupling = MarkCoupling::kScalar;
  c.A0 = std::max({std::abs(o.sigma), std::sqrt(o.large_rate * marks.moment(2.0)),
                   std::pow(o.large_rate * marks.moment(2.1), 1.0 / 2.1)});
  c.lipschitz_L = 0.0;
  c.moment_p = 2.1;
  m.validate();
  return m;
}

SdeModel linear_forced(double lambda) {
  SdeModel m;
  m.name = "linear_forced";
  m.semigroup = {{lambda}, 1.0, lambda};
  m.wiener.mode_variances = {0.0};
  m.jumps = make_jump_spec(0.0, MarkSampler::uniform_shell(0.5, 1.0), 0.0, MarkSampler::point_mass(1.0), 2.1);
  m.coefficients.f.terms.push_back({1.0, TimeProfile::periodic(1.0, {sin_h(1.0)}), constant()});
  m.coefficients.A0 = 1.0;
  m.coefficients.lipschitz_L = 0.0;
  m.validate();
  return m;
}

SdeModel example62(const Example62Options& o) {
  const int n = o.galerkin.n_modes;
  const auto spec = make_jump_spec(o.small_rate, MarkSampler::uniform_shell(o.small_lower, 1.0).with_dimension(n),
                                   o.large_rate, MarkSampler::point_mass(1.0).with_dimension(n), o.heat.moment_p);
  auto m = build_heat_model(o.galerkin, o.heat, spec);
  m.name = "example62";
  return m;
}

std::vector<TimeProfile> coefficient_profiles(const SdeModel& model) {
  std::vector<TimeProfile> out;
  const auto& c = model.coefficients;
  for (const Coefficient* k : {&c.f, &c.g, &c.F, &c.G}) {
    for (const auto& t : k->terms) {
      if (t.profile.kind() != ProfileKind::kConstant) out.push_back(t.profile);
    }
  }
  return out;
}

}  // namespace levylab
