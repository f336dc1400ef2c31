#pragma once

#include <stdexcept>
#include <string>

namespace levylab {

/// Malformed arguments: non-monotone grids, empty laws, wrong dimensions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A theorem hypothesis or threshold needed by the operation does not hold.
class ThresholdViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The integrator produced a non-finite state.
class NumericalBlowup : public std::runtime_error {
 public:
  NumericalBlowup(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// No admissible parameter on the search grid.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Bebutov fixed point lies below 1/horizon.
class WidenHorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema violation in an experiment configuration; carries the JSON key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key_path, const std::string& what)
      : std::runtime_error(key_path + ": " + what), key_path_(key_path) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace levylab
