#include "levylab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "levylab/errors.hpp"

namespace levylab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_trig(Trig fn, double x) { return fn == Trig::kSin ? std::sin(x) : std::cos(x); }

double harmonic_sum(const std::vector<Harmonic>& hs, double s) {
  double acc = 0.0;
  for (const auto& h : hs) acc += h.amplitude * eval_trig(h.fn, h.frequency * s + h.phase);
  return acc;
}

double abs_sum(const std::vector<Harmonic>& hs) {
  double acc = 0.0;
  for (const auto& h : hs) acc += std::abs(h.amplitude);
  return acc;
}

double derivative_bound(const std::vector<Harmonic>& hs) {
  double acc = 0.0;
  for (const auto& h : hs) acc += std::abs(h.amplitude * h.frequency);
  return acc;
}

// True when [a, b] contains offset + k*period for some integer k.
bool contains_lattice_point(double a, double b, double offset, double period) {
  const double k = std::ceil((a - offset) / period);
  return offset + k * period <= b;
}

// sup |outer(x)| for x in [a, b].
double outer_sup_on(OuterFn outer, double a, double b) {
  switch (outer) {
    case OuterFn::kIdentity:
      return std::max(std::abs(a), std::abs(b));
    case OuterFn::kSin:
      if (contains_lattice_point(a, b, std::numbers::pi / 2, std::numbers::pi)) return 1.0;
      return std::max(std::abs(std::sin(a)), std::abs(std::sin(b)));
    case OuterFn::kCos:
      if (contains_lattice_point(a, b, 0.0, std::numbers::pi)) return 1.0;
      return std::max(std::abs(std::cos(a)), std::abs(std::cos(b)));
  }
  return kInf;
}

double apply_outer(OuterFn outer, double x) {
  switch (outer) {
    case OuterFn::kIdentity: return x;
    case OuterFn::kSin: return std::sin(x);
    case OuterFn::kCos: return std::cos(x);
  }
  return x;
}

}  // namespace

std::string to_string(RecurrenceClass c) {
  switch (c) {
    case RecurrenceClass::kStationary: return "stationary";
    case RecurrenceClass::kPeriodic: return "periodic";
    case RecurrenceClass::kQuasiPeriodic: return "quasi_periodic";
    case RecurrenceClass::kAlmostPeriodic: return "almost_periodic";
    case RecurrenceClass::kAlmostAutomorphic: return "almost_automorphic";
    case RecurrenceClass::kLevitan: return "levitan";
    case RecurrenceClass::kNonRecurrent: return "non_recurrent";
  }
  return "unknown";
}

RecurrenceClass recurrence_class_from_string(const std::string& s) {
  for (auto c : {RecurrenceClass::kStationary, RecurrenceClass::kPeriodic,
                 RecurrenceClass::kQuasiPeriodic, RecurrenceClass::kAlmostPeriodic,
                 RecurrenceClass::kAlmostAutomorphic, RecurrenceClass::kLevitan,
                 RecurrenceClass::kNonRecurrent}) {
    if (to_string(c) == s) return c;
  }
  throw InputError("unknown recurrence class '" + s + "'");
}

TimeProfile TimeProfile::constant(double value) {
  TimeProfile p;
  p.kind_ = ProfileKind::kConstant;
  p.label_ = RecurrenceClass::kStationary;
  p.value_ = value;
  return p;
}

TimeProfile TimeProfile::periodic(double base_frequency, std::vector<Harmonic> harmonics) {
  if (!(base_frequency > 0.0)) throw InputError("periodic profile needs a positive base frequency");
  for (const auto& h : harmonics) {
    const double k = h.frequency / base_frequency;
    if (std::abs(k - std::round(k)) > 1e-9) {
      throw InputError("periodic profile frequency is not an integer multiple of the base");
    }
  }
  TimeProfile p;
  p.kind_ = ProfileKind::kPeriodic;
  p.label_ = RecurrenceClass::kPeriodic;
  p.base_frequency_ = base_frequency;
  p.harmonics_ = std::move(harmonics);
  return p;
}

TimeProfile TimeProfile::quasi_periodic(std::vector<Harmonic> harmonics) {
  TimeProfile p;
  p.kind_ = ProfileKind::kQuasiPeriodic;
  p.label_ = RecurrenceClass::kQuasiPeriodic;
  p.harmonics_ = std::move(harmonics);
  return p;
}

TimeProfile TimeProfile::composite(OuterFn outer, double scale, double shift,
                                   std::vector<Harmonic> inner, RecurrenceClass label) {
  const double m = abs_sum(inner);
  if (shift < m - 1e-12) {
    throw InputError("composite profile: shift must dominate sup|inner| so the denominator never vanishes");
  }
  if (outer == OuterFn::kIdentity && shift <= m) {
    throw InputError("composite profile with identity outer map would be unbounded");
  }
  TimeProfile p;
  p.kind_ = ProfileKind::kComposite;
  p.label_ = label;
  p.outer_ = outer;
  p.scale_ = scale;
  p.shift_ = shift;
  p.harmonics_ = std::move(inner);
  return p;
}

TimeProfile TimeProfile::ramp(double lo, double hi) {
  if (!(lo < hi)) throw InputError("ramp profile needs lo < hi");
  TimeProfile p;
  p.kind_ = ProfileKind::kRamp;
  p.label_ = RecurrenceClass::kNonRecurrent;
  p.lo_ = lo;
  p.hi_ = hi;
  return p;
}

double TimeProfile::inner_sum(double s) const { return harmonic_sum(harmonics_, s); }

double TimeProfile::inner_sup() const { return abs_sum(harmonics_); }

double TimeProfile::operator()(double t) const {
  const double s = t + offset_;
  switch (kind_) {
    case ProfileKind::kConstant: return value_;
    case ProfileKind::kPeriodic:
    case ProfileKind::kQuasiPeriodic: return inner_sum(s);
    case ProfileKind::kComposite: {
      const double denom = shift_ + inner_sum(s);
      // The touching case only reaches zero in the limit; guard the rounding.
      const double safe = std::max(denom, std::numeric_limits<double>::min());
      return apply_outer(outer_, scale_ / safe);
    }
    case ProfileKind::kRamp: return std::clamp(s, lo_, hi_);
  }
  return 0.0;
}

TimeProfile TimeProfile::shifted(double tau) const {
  TimeProfile p = *this;
  p.offset_ += tau;
  return p;
}

double TimeProfile::sup_bound() const {
  switch (kind_) {
    case ProfileKind::kConstant: return std::abs(value_);
    case ProfileKind::kPeriodic:
    case ProfileKind::kQuasiPeriodic: return inner_sup();
    case ProfileKind::kComposite: {
      const double m = inner_sup();
      const double a = scale_ / (shift_ + m);
      if (shift_ - m <= 0.0) {
        // Argument sweeps [a, +inf) (or (-inf, a] for negative scale).
        return outer_ == OuterFn::kIdentity ? kInf : 1.0;
      }
      const double b = scale_ / (shift_ - m);
      return outer_sup_on(outer_, std::min(a, b), std::max(a, b));
    }
    case ProfileKind::kRamp: return std::max(std::abs(lo_), std::abs(hi_));
  }
  return kInf;
}

double TimeProfile::lipschitz_bound() const {
  switch (kind_) {
    case ProfileKind::kConstant: return 0.0;
    case ProfileKind::kPeriodic:
    case ProfileKind::kQuasiPeriodic: return derivative_bound(harmonics_);
    case ProfileKind::kComposite: {
      const double gap = shift_ - inner_sup();
      if (gap <= 0.0) return kInf;
      return std::abs(scale_) * derivative_bound(harmonics_) / (gap * gap);
    }
    case ProfileKind::kRamp: return 1.0;
  }
  return kInf;
}

bool TimeProfile::is_zero() const {
  switch (kind_) {
    case ProfileKind::kConstant: return value_ == 0.0;
    case ProfileKind::kPeriodic:
    case ProfileKind::kQuasiPeriodic: return inner_sup() == 0.0;
    case ProfileKind::kComposite: return scale_ == 0.0 && outer_ != OuterFn::kCos;
    case ProfileKind::kRamp: return false;
  }
  return false;
}

std::string TimeProfile::describe() const {
  std::ostringstream os;
  os.precision(6);
  auto harmonics_text = [&]() {
    std::ostringstream h;
    h.precision(6);
    for (std::size_t i = 0; i < harmonics_.size(); ++i) {
      const auto& x = harmonics_[i];
      if (i) h << " + ";
      h << x.amplitude << "*" << (x.fn == Trig::kSin ? "sin" : "cos") << "(" << x.frequency
        << "t";
      if (x.phase != 0.0) h << "+" << x.phase;
      h << ")";
    }
    return h.str();
  };
  switch (kind_) {
    case ProfileKind::kConstant: os << value_; break;
    case ProfileKind::kPeriodic:
    case ProfileKind::kQuasiPeriodic: os << harmonics_text(); break;
    case ProfileKind::kComposite: {
      const char* name = outer_ == OuterFn::kIdentity ? "" : (outer_ == OuterFn::kSin ? "sin" : "cos");
      os << name << "(" << scale_ << "/(" << shift_ << " + " << harmonics_text() << "))";
      break;
    }
    case ProfileKind::kRamp: os << "clamp(t," << lo_ << "," << hi_ << ")"; break;
  }
  if (offset_ != 0.0) os << " shifted by " << offset_;
  return os.str();
}

}  // namespace levylab
