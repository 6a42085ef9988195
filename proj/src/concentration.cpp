#include "sgdmlab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <tbb/parallel_for.h>

#include "sgdmlab/rng.hpp"

namespace sgdmlab {

std::vector<MgfPoint> mgf_check(const MgfCheckConfig& cfg) {
  if (cfg.n_samples < 2) throw std::invalid_argument("mgf_check: need at least 2 samples");
  if (cfg.phi.size() != cfg.noise.dim) throw std::invalid_argument("mgf_check: phi dimension mismatch");
  const double c = cfg.phi.norm();
  const double sigma = cfg.noise.sigma_certificate;
  const bool skip = c == 0.0 || sigma == 0.0 || cfg.noise.kind == NoiseKind::None;

  std::vector<double> z;
  if (!skip) {
    z.resize(static_cast<std::size_t>(cfg.n_samples));
    const Vector u = cfg.phi / (c * sigma);
    tbb::parallel_for(std::int64_t{0}, cfg.n_samples, [&](std::int64_t i) {
      CounterStream rng(derive_key(cfg.seed, static_cast<std::uint64_t>(i)));
      z[static_cast<std::size_t>(i)] = sample(cfg.noise, rng).dot(u);
    });
  }

  std::vector<MgfPoint> out;
  for (double lambda : cfg.lambdas) {
    MgfPoint p;
    p.lambda = lambda;
    p.bound = std::exp(0.75 * lambda * lambda);
    p.skipped = skip;
    p.oracle = std::numeric_limits<double>::quiet_NaN();
    if (skip) {
      p.estimate = 1.0;
      p.pass = true;
      out.push_back(p);
      continue;
    }
    if (cfg.noise.kind == NoiseKind::GaussianIsotropic) {
      const double s = cfg.noise.scale / sigma;
      p.oracle = std::exp(0.5 * lambda * lambda * s * s);
    }
    RunningMoments m;
    for (double v : z) m.push(std::exp(lambda * v));
    p.estimate = m.mean();
    p.std_error = m.standard_error();
    const double rel = p.estimate > 0.0 ? p.std_error / p.estimate : 0.0;
    p.pass = p.estimate <= p.bound * (1.0 + 3.0 * rel);
    out.push_back(p);
  }
  return out;
}

std::vector<TailPoint> weighted_square_tail_check(std::span<const double> c_seq,
                                                  const NoiseModel& noise,
                                                  std::span<const double> omegas,
                                                  std::int64_t n_runs, std::uint64_t seed) {
  if (c_seq.empty()) throw std::invalid_argument("weighted_square_tail_check: empty c sequence");
  if (n_runs < 1) throw std::invalid_argument("weighted_square_tail_check: n_runs must be positive");
  for (double c : c_seq) {
    if (!(c > 0.0)) throw std::invalid_argument("weighted_square_tail_check: c_l must be positive");
  }

  std::vector<double> sums(static_cast<std::size_t>(n_runs));
  tbb::parallel_for(std::int64_t{0}, n_runs, [&](std::int64_t r) {
    const std::uint64_t run_key = derive_key(seed, static_cast<std::uint64_t>(r));
    Vector theta(noise.dim);
    double s = 0.0;
    for (std::size_t l = 0; l < c_seq.size(); ++l) {
      CounterStream rng(derive_key(run_key, l));
      sample_into(noise, rng, theta);
      s += c_seq[l] * theta.squaredNorm();
    }
    sums[static_cast<std::size_t>(r)] = s;
  });

  double c_total = 0.0;
  for (double c : c_seq) c_total += c;
  const double s2 = noise.sigma_certificate * noise.sigma_certificate;

  std::vector<TailPoint> out;
  for (double omega : omegas) {
    TailPoint p;
    p.omega = omega;
    p.threshold = (1.0 + omega) * c_total * s2;
    p.bound = std::min(1.0, std::exp(-omega));
    p.n_runs = n_runs;
    p.exceedances = std::count_if(sums.begin(), sums.end(), [&](double s) { return s > p.threshold; });
    p.frequency = static_cast<double>(p.exceedances) / static_cast<double>(n_runs);
    p.ci = clopper_pearson(p.exceedances, n_runs, 0.99);
    p.pass = p.ci.lo <= p.bound;
    out.push_back(p);
  }
  return out;
}

}  // namespace sgdmlab
