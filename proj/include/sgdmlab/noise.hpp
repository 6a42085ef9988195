#pragma once

#include <cstdint>
#include <string>

#include "sgdmlab/objectives.hpp"
#include "sgdmlab/rng.hpp"

namespace sgdmlab {

enum class NoiseKind {
  None,
  GaussianIsotropic,
  BoundedSphere,
  // Student-t with 3 degrees of freedom; has no finite certificate and is
  // only constructible through heavy_tail_model() for negative testing.
  HeavyTail,
};

std::string to_string(NoiseKind kind);

// Additive gradient noise theta with a sub-Gaussian certificate sigma:
// E[exp(||theta||^2 / sigma^2)] <= e.
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  Eigen::Index dim = 1;
  double sigma_certificate = 0.0;
  // per-coordinate standard deviation (Gaussian) or sphere radius (BoundedSphere)
  double scale = 0.0;

  bool operator==(const NoiseModel&) const = default;
};

// Largest raw scale whose certificate is exactly `sigma`.
//   GaussianIsotropic: scale^2 = sigma^2 (1 - exp(-2/dim)) / 2
//   BoundedSphere:     scale = sigma
//   None:              scale = 0 (any sigma accepted)
// Throws ConfigError for sigma <= 0 with a noisy kind, and for HeavyTail.
NoiseModel calibrate(NoiseKind kind, Eigen::Index dim, double sigma_certificate);

// Uncertified Student-t(3) noise with per-coordinate scale `scale`.
NoiseModel heavy_tail_model(Eigen::Index dim, double scale);

// Closed-form E[exp(||theta||^2 / sigma^2)] for the calibrated kinds.
double certificate_mgf(const NoiseModel& model);

void sample_into(const NoiseModel& model, CounterStream& rng, Vector& out);
Vector sample(const NoiseModel& model, CounterStream& rng);

struct StochasticGradient {
  Vector g;      // grad f(x) - theta
  Vector theta;  // realized noise
};

StochasticGradient stochastic_grad(const Objective& obj, const NoiseModel& model, const Vector& x,
                                   CounterStream& rng);

struct VarianceReport {
  std::int64_t n_samples = 0;
  double estimate = 0.0;      // Monte Carlo E||theta||^2
  double ci_halfwidth = 0.0;  // 3 standard errors
  double bound = 0.0;         // sigma^2
  bool pass = false;
};

// Bounded-variance diagnostic: E||theta||^2 <= sigma^2 follows from the
// certificate by Jensen's inequality.
VarianceReport variance_diagnostic(const NoiseModel& model, std::int64_t n_samples,
                                   CounterStream& rng);

}  // namespace sgdmlab
