#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "sgdmlab/rng.hpp"

namespace sgdmlab {

inline void fill_standard_normal(CounterStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal(rng);
}

// Uniform direction on the unit sphere.
inline void fill_unit_sphere(CounterStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
  double norm = 0.0;
  do {
    fill_standard_normal(rng, out);
    norm = out.norm();
  } while (norm == 0.0);
  out /= norm;
}

// Uniform point in the ball of the given radius around `center`.
inline Eigen::VectorXd sample_ball(CounterStream& rng, const Eigen::VectorXd& center,
                                   double radius) {
  Eigen::VectorXd dir(center.size());
  fill_unit_sphere(rng, dir);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(center.size()));
  return center + r * dir;
}

}  // namespace sgdmlab
