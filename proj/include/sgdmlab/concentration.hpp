#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgdmlab/noise.hpp"
#include "sgdmlab/stats.hpp"

namespace sgdmlab {

// Scaled MGF of Gamma = <theta, phi> with c = ||phi||, Delta = ||theta||:
//   E[exp(lambda Gamma / (c sigma))] <= exp(3 lambda^2 / 4).
struct MgfCheckConfig {
  std::vector<double> lambdas;
  std::int64_t n_samples = 0;
  NoiseModel noise;
  Vector phi;
  std::uint64_t seed = 0;
};

struct MgfPoint {
  double lambda = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  // exp(3 lambda^2 / 4)
  // closed form for Gaussian noise (exp(lambda^2 scale^2 / (2 sigma^2))), NaN otherwise
  double oracle = 0.0;
  bool skipped = false;  // c = 0 or sigma = 0: Gamma vanishes identically
  bool pass = false;
};

// Per-sample streams are keyed on (seed, sample index); results do not
// depend on the number of workers.
std::vector<MgfPoint> mgf_check(const MgfCheckConfig& cfg);

struct TailPoint {
  double omega = 0.0;
  double threshold = 0.0;  // (1 + omega) sum c_l sigma^2
  double bound = 0.0;      // min(1, exp(-omega))
  std::int64_t exceedances = 0;
  std::int64_t n_runs = 0;
  double frequency = 0.0;
  Interval ci;  // Clopper-Pearson 99%
  bool pass = false;
};

// Tail of sum_l c_l ||theta_l||^2 over independent draws theta_l. A run
// exceeds when the sum is strictly above the threshold.
std::vector<TailPoint> weighted_square_tail_check(std::span<const double> c_seq,
                                                  const NoiseModel& noise,
                                                  std::span<const double> omegas,
                                                  std::int64_t n_runs, std::uint64_t seed);

}  // namespace sgdmlab
