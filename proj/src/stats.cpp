#include "sgdmlab/stats.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "sgdmlab/rng.hpp"

namespace sgdmlab {

Interval clopper_pearson(std::int64_t successes, std::int64_t trials, double confidence) {
  if (trials <= 0 || successes < 0 || successes > trials) {
    throw std::invalid_argument("clopper_pearson: need 0 <= successes <= trials, trials > 0");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("clopper_pearson: confidence must lie in (0, 1)");
  }
  const double alpha = 1.0 - confidence;
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  Interval ci;
  ci.lo = successes == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  ci.hi = successes == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return ci;
}

double bootstrap_mean_upper(std::span<const double> values, double confidence, int resamples,
                            std::uint64_t seed) {
  if (values.empty() || resamples < 1) {
    throw std::invalid_argument("bootstrap_mean_upper: empty sample or no resamples");
  }
  const auto n = static_cast<std::uint64_t>(values.size());
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    CounterStream rng(derive_key(seed, static_cast<std::uint64_t>(r)));
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) sum += values[static_cast<std::size_t>(rng() % n)];
    means[static_cast<std::size_t>(r)] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const auto idx = static_cast<std::size_t>(
      std::clamp(std::ceil(confidence * resamples) - 1.0, 0.0, static_cast<double>(resamples - 1)));
  return means[idx];
}

}  // namespace sgdmlab
