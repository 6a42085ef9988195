#include "sgdmlab/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "sgdmlab/errors.hpp"
#include "sgdmlab/sampling.hpp"
#include "sgdmlab/stats.hpp"

namespace sgdmlab {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::GaussianIsotropic:
      return "gaussian";
    case NoiseKind::BoundedSphere:
      return "sphere";
    case NoiseKind::HeavyTail:
      return "heavy-tail";
  }
  return "unknown";
}

NoiseModel calibrate(NoiseKind kind, Eigen::Index dim, double sigma_certificate) {
  if (dim < 1) throw ConfigError("noise: dimension must be positive");
  if (!std::isfinite(sigma_certificate) || sigma_certificate < 0.0) {
    throw ConfigError("noise: sigma must be finite and nonnegative");
  }
  NoiseModel model{kind, dim, sigma_certificate, 0.0};
  switch (kind) {
    case NoiseKind::None:
      return model;
    case NoiseKind::GaussianIsotropic: {
      if (sigma_certificate <= 0.0) throw ConfigError("noise: gaussian requires sigma > 0");
      // (1 - 2 s^2 / sigma^2)^(-d/2) = e  <=>  s^2 = sigma^2 (1 - e^{-2/d}) / 2
      const double d = static_cast<double>(dim);
      model.scale = sigma_certificate * std::sqrt(-std::expm1(-2.0 / d) / 2.0);
      return model;
    }
    case NoiseKind::BoundedSphere:
      if (sigma_certificate <= 0.0) throw ConfigError("noise: sphere requires sigma > 0");
      model.scale = sigma_certificate;
      return model;
    case NoiseKind::HeavyTail:
      throw ConfigError("noise: heavy-tail noise has no finite sub-Gaussian certificate");
  }
  throw ConfigError("noise: unknown kind");
}

NoiseModel heavy_tail_model(Eigen::Index dim, double scale) {
  if (dim < 1 || !(scale >= 0.0)) throw ConfigError("noise: invalid heavy-tail parameters");
  return NoiseModel{NoiseKind::HeavyTail, dim, 0.0, scale};
}

double certificate_mgf(const NoiseModel& model) {
  const double s = model.scale;
  const double sigma = model.sigma_certificate;
  switch (model.kind) {
    case NoiseKind::None:
      return 1.0;
    case NoiseKind::GaussianIsotropic:
      return std::pow(1.0 - 2.0 * s * s / (sigma * sigma), -0.5 * static_cast<double>(model.dim));
    case NoiseKind::BoundedSphere:
      return std::exp(s * s / (sigma * sigma));
    case NoiseKind::HeavyTail:
      return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void sample_into(const NoiseModel& model, CounterStream& rng, Vector& out) {
  out.resize(model.dim);
  switch (model.kind) {
    case NoiseKind::None:
      out.setZero();
      return;
    case NoiseKind::GaussianIsotropic:
      fill_standard_normal(rng, out);
      out *= model.scale;
      return;
    case NoiseKind::BoundedSphere:
      fill_unit_sphere(rng, out);
      out *= model.scale;
      return;
    case NoiseKind::HeavyTail: {
      std::student_t_distribution<double> t3(3.0);
      for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = model.scale * t3(rng);
      return;
    }
  }
}

Vector sample(const NoiseModel& model, CounterStream& rng) {
  Vector out(model.dim);
  sample_into(model, rng, out);
  return out;
}

StochasticGradient stochastic_grad(const Objective& obj, const NoiseModel& model, const Vector& x,
                                   CounterStream& rng) {
  if (model.dim != obj.dim() || x.size() != obj.dim()) {
    throw std::invalid_argument("stochastic_grad: dimension mismatch");
  }
  StochasticGradient sg;
  sg.theta.resize(obj.dim());
  sample_into(model, rng, sg.theta);
  sg.g = obj.grad(x) - sg.theta;
  return sg;
}

VarianceReport variance_diagnostic(const NoiseModel& model, std::int64_t n_samples,
                                   CounterStream& rng) {
  if (n_samples < 100) throw std::invalid_argument("variance_diagnostic: need at least 100 samples");
  RunningMoments moments;
  Vector theta(model.dim);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    sample_into(model, rng, theta);
    moments.push(theta.squaredNorm());
  }
  VarianceReport report;
  report.n_samples = n_samples;
  report.estimate = moments.mean();
  report.ci_halfwidth = 3.0 * moments.standard_error();
  report.bound = model.sigma_certificate * model.sigma_certificate;
  report.pass = report.estimate - report.ci_halfwidth <= report.bound;
  return report;
}

}  // namespace sgdmlab
