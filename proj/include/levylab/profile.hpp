#pragma once

#include <string>
#include <vector>

namespace levylab {

enum class Trig { kSin, kCos };

/// amplitude * trig(frequency * t + phase)
struct Harmonic {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;
  Trig fn = Trig::kSin;
};

enum class ProfileKind { kConstant, kPeriodic, kQuasiPeriodic, kComposite, kRamp };

enum class OuterFn { kIdentity, kSin, kCos };

/// Recurrence class carried as registry metadata. Nothing here is inferred
/// from data; the hierarchy is periodic => quasi-periodic => almost periodic
/// => almost automorphic => Levitan.
enum class RecurrenceClass {
  kStationary,
  kPeriodic,
  kQuasiPeriodic,
  kAlmostPeriodic,
  kAlmostAutomorphic,
  kLevitan,
  kNonRecurrent,
};

std::string to_string(RecurrenceClass c);
RecurrenceClass recurrence_class_from_string(const std::string& s);

/// A bounded scalar function of time drawn from a closed registry of Poisson
/// stable shapes:
///   constant       c
///   periodic       sum of harmonics whose frequencies are integer multiples
///                  of a base frequency
///   quasi-periodic sum of harmonics with arbitrary frequencies
///   composite      outer(scale / (shift + inner(t))) with inner a harmonic sum
///                  and shift >= sup|inner|; shift == sup|inner| gives the
///                  unbounded-argument (Levitan) case
///   ramp           clamp(t, lo, hi); not recurrent, kept for negative tests
/// Every profile is defined on all of R and has a known sup bound and
/// Lipschitz-in-time bound (infinite for touching composites).
class TimeProfile {
 public:
  TimeProfile() = default;

  static TimeProfile constant(double value);
  static TimeProfile periodic(double base_frequency, std::vector<Harmonic> harmonics);
  static TimeProfile quasi_periodic(std::vector<Harmonic> harmonics);
  static TimeProfile composite(OuterFn outer, double scale, double shift,
                               std::vector<Harmonic> inner, RecurrenceClass label);
  static TimeProfile ramp(double lo, double hi);

  double operator()(double t) const;

  /// phi^tau(t) = phi(t + tau)
  TimeProfile shifted(double tau) const;

  double sup_bound() const;
  double lipschitz_bound() const;

  ProfileKind kind() const { return kind_; }
  RecurrenceClass recurrence_class() const { return label_; }
  double offset() const { return offset_; }
  double value() const { return value_; }
  double base_frequency() const { return base_frequency_; }
  const std::vector<Harmonic>& harmonics() const { return harmonics_; }
  OuterFn outer() const { return outer_; }
  double scale() const { return scale_; }
  double shift() const { return shift_; }
  double ramp_lo() const { return lo_; }
  double ramp_hi() const { return hi_; }

  /// True when the profile is identically zero.
  bool is_zero() const;
  std::string describe() const;

 private:
  double inner_sum(double s) const;
  double inner_sup() const;

  ProfileKind kind_ = ProfileKind::kConstant;
  RecurrenceClass label_ = RecurrenceClass::kStationary;
  double value_ = 0.0;
  double base_frequency_ = 0.0;
  std::vector<Harmonic> harmonics_;
  OuterFn outer_ = OuterFn::kIdentity;
  double scale_ = 1.0;
  double shift_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double offset_ = 0.0;
};

}  // namespace levylab
