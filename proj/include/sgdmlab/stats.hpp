#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace sgdmlab {

// Welford accumulator for mean and variance.
class RunningMoments {
 public:
  void push(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::int64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Two-sided Clopper-Pearson interval for a binomial proportion.
Interval clopper_pearson(std::int64_t successes, std::int64_t trials, double confidence = 0.99);

// One-sided percentile-bootstrap upper confidence bound for the mean of
// `values`; resampling streams are keyed on `seed`.
double bootstrap_mean_upper(std::span<const double> values, double confidence, int resamples,
                            std::uint64_t seed);

}  // namespace sgdmlab
