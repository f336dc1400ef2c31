#pragma once

#include <string>
#include <vector>

#include "levylab/integrator.hpp"
#include "levylab/model.hpp"

namespace levylab {

/// Scalar jump-diffusion
///   dy = (-4y + (1/8) y (sin t + cos sqrt3 t)) dt + (1/5) y cos(1/(2 + sin t + sin sqrt2 t)) dW
///        + (1/5) y dN~_small + (1/4) y sin(1/(3 + cos t + cos pi t)) dN_large
/// with K = 1, omega = 4, L = 1/4. `forcing` adds forcing * (sin t + cos sqrt3 t)
/// to the drift (0 gives the equation as written, whose bounded solution is 0).
struct Example61Options {
  double large_rate = 1.0;  ///< b
  double small_rate = 1.0;  ///< nu(-1, 1)
  double small_lower = 0.5; ///< small marks uniform on [small_lower, 1)
  double forcing = 0.0;
  double A0 = 1.0;
  double moment_p = 2.1;
  bool zero_jumps = false;  ///< drop F and G
};
SdeModel example61(const Example61Options& options = {});

/// The example61 structure with every profile 2 pi-periodic:
///   f = (1/8) y (sin t + cos t) + forcing (sin t + cos(2t)/2)
///   g = (1/5) y cos(1/(3 + sin t + sin 2t)) + sigma0
///   F = (1/5) y (3/4 + cos(t)/4),  G = (1/4) y sin(1/(3 + cos t + cos 2t))
struct PeriodicOptions {
  double large_rate = 1.0;
  double small_rate = 1.0;
  double forcing = 1.0;
  double sigma0 = 0.5;
  double moment_p = 2.1;
};
SdeModel periodic_example(const PeriodicOptions& options = {});

/// dy = -lambda y dt + sigma dW + dJ, J compound Poisson with rate b and
/// marks 1 + Exp(mark_rate).
struct OuOptions {
  double lambda = 1.0;
  double sigma = 0.5;
  double large_rate = 1.0;
  double mark_rate = 2.0;
};
SdeModel ou_model(const OuOptions& options = {});

/// dy = -lambda y dt + sin(t) dt, no noise.
SdeModel linear_forced(double lambda);

struct Example62Options {
  GalerkinSpec galerkin{8, 16};
  HeatModelOptions heat{};
  double small_rate = 0.5;
  double small_lower = 0.5;
  double large_rate = 0.5;
};
SdeModel example62(const Example62Options& options = {});

/// Time profiles of the four coefficients (f, g, F, G), leading term first.
std::vector<TimeProfile> coefficient_profiles(const SdeModel& model);

}  // namespace levylab
