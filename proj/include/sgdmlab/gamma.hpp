#pragma once

#include <cstdint>

#include "sgdmlab/sgdm.hpp"

namespace sgdmlab {

// Certified enclosure value <= true <= value + tail_bound.
struct Bracket {
  double value = 0.0;
  double tail_bound = 0.0;
  std::int64_t terms = 0;  // partial-sum length K*

  double lower() const noexcept { return value; }
  double upper() const noexcept { return value + tail_bound; }
  bool contains(double x) const noexcept { return x >= lower() && x <= upper(); }
};

// Two-sided bounds on sum_{k > K} scale / (k ln^p(k+2)) for p > 1, from
//   1/((x+2) ln^p(x+2)) <= 1/(x ln^p(x+2)) <= (1 + 2/K) / ((x+2) ln^p(x+2))
// integrated over [K+1, inf) and [K, inf) respectively.
struct TailBounds {
  double lower = 0.0;
  double upper = 0.0;
};
TailBounds a_tail_bounds(const Schedule& sched, std::int64_t K);

// gamma_1 = sum_{k>=1} a_k. The partial sum is extended until the bracket
// width is at most tol * value. Throws ConfigError for divergent schedules
// or if the tolerance cannot be reached.
Bracket gamma1(const Schedule& sched, double tol);

// gamma_2 = prod_{k>=1} (1 + sigma^2 a_k), computed as exp(sum log1p(...))
// with the tail bracketed through the gamma_1 tail. sigma = 0 gives (1, 0).
Bracket gamma2(const Schedule& sched, double sigma, double tol);

}  // namespace sgdmlab
