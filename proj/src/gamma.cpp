#include "sgdmlab/gamma.hpp"

#include <cmath>
#include <stdexcept>

#include "sgdmlab/errors.hpp"

namespace sgdmlab {

namespace {

constexpr std::int64_t kInitialTerms = 1024;
constexpr std::int64_t kMaxTerms = std::int64_t{1} << 33;

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_tol(double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("gamma: tol must lie in (0, 1)");
}

}  // namespace

TailBounds a_tail_bounds(const Schedule& sched, std::int64_t K) {
  if (K < 1) throw std::invalid_argument("a_tail_bounds: K must be >= 1");
  const double p = sched.log_power();
  const double c = sched.a_scale();
  const auto Kd = static_cast<double>(K);
  // integral of 1/(u ln^p u) from U to infinity is ln^{1-p}(U) / (p - 1)
  const auto primitive = [p](double u) { return std::pow(std::log(u), 1.0 - p) / (p - 1.0); };
  TailBounds t;
  t.lower = c * primitive(Kd + 3.0);
  t.upper = c * (1.0 + 2.0 / Kd) * primitive(Kd + 2.0);
  return t;
}

Bracket gamma1(const Schedule& sched, double tol) {
  check_tol(tol);
  sched.validate();
  CompensatedSum partial;
  std::int64_t k = 0;
  for (std::int64_t K = kInitialTerms; K <= kMaxTerms; K *= 2) {
    for (; k < K; ++k) partial.add(sched.a_coeff(k + 1));
    const TailBounds tail = a_tail_bounds(sched, K);
    Bracket b{partial.value() + tail.lower, tail.upper - tail.lower, K};
    if (b.tail_bound <= tol * b.value) return b;
  }
  throw ConfigError("gamma1: tolerance not reachable within 2^33 terms");
}

Bracket gamma2(const Schedule& sched, double sigma, double tol) {
  check_tol(tol);
  sched.validate();
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gamma2: sigma must be >= 0");
  if (sigma == 0.0) return Bracket{1.0, 0.0, 0};
  const double s2 = sigma * sigma;
  CompensatedSum log_partial;
  std::int64_t k = 0;
  for (std::int64_t K = kInitialTerms; K <= kMaxTerms; K *= 2) {
    for (; k < K; ++k) log_partial.add(std::log1p(s2 * sched.a_coeff(k + 1)));
    const TailBounds tail = a_tail_bounds(sched, K);
    // x - x^2/2 <= log(1 + x) <= x, and sum_{k>K} a_k^2 <= a_{K+1} * tail
    const double log_lo = s2 * tail.lower - 0.5 * s2 * s2 * sched.a_coeff(K + 1) * tail.upper;
    const double log_hi = s2 * tail.upper;
    const double lo = std::exp(log_partial.value() + log_lo);
    const double hi = std::exp(log_partial.value() + log_hi);
    Bracket b{lo, hi - lo, K};
    if (b.tail_bound <= tol * b.value) return b;
  }
  throw ConfigError("gamma2: tolerance not reachable within 2^33 terms");
}

}  // namespace sgdmlab
