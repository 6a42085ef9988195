#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgdmlab/lyapunov.hpp"
#include "sgdmlab/sgdm.hpp"
#include "sgdmlab/stats.hpp"

namespace sgdmlab {

enum class RuleKind { IterateDelta, ValueDelta, FixedK, FirstEnvelopeViolation };

std::string to_string(RuleKind kind);
RuleKind rule_kind_from_string(const std::string& name);

// Since x_1 = x_0 by construction, the delta rules start testing at k = 2.
inline constexpr std::int64_t kDeltaRuleStart = 2;

struct StoppingRule {
  RuleKind kind = RuleKind::FixedK;
  double epsilon = 0.0;    // IterateDelta, ValueDelta
  std::int64_t k_max = 1;  // cap; FixedK stops exactly here
  Envelope envelope;       // FirstEnvelopeViolation

  static StoppingRule iterate_delta(double epsilon, std::int64_t k_max);
  static StoppingRule value_delta(double epsilon, std::int64_t k_max);
  static StoppingRule fixed_k(std::int64_t k);
  static StoppingRule first_violation(Envelope envelope, std::int64_t k_max);

  void validate() const;
  std::string describe() const;
};

// Online evaluation: observe() is fed x_k and f(x_k) - f* for k = 0, 1, ...
// and never sees anything past the current index, so the resulting tau is a
// stopping time.
class RuleEvaluator {
 public:
  explicit RuleEvaluator(const StoppingRule& rule);

  // Returns true once the rule has stopped (at this or an earlier k).
  bool observe(std::int64_t k, const Vector& x_k, double fgap_k);

  bool stopped() const noexcept { return stopped_; }
  std::int64_t tau() const noexcept { return tau_; }
  double fgap_at_tau() const noexcept { return fgap_tau_; }

 private:
  const StoppingRule* rule_;
  std::int64_t next_k_ = 0;
  bool stopped_ = false;
  std::int64_t tau_ = 0;
  double fgap_tau_ = 0.0;
  Vector x_last_;
  double fgap_last_ = 0.0;
};

// Requires traj.K >= rule.k_max and a fully stored prefix.
std::int64_t evaluate_rule(const StoppingRule& rule, const Trajectory& traj);

// First k in 1..k0 with f(x_k) - f* > U(k), else k0 + 1.
std::int64_t adversarial_tau(const Trajectory& traj, const Envelope& envelope, std::int64_t k0);
std::vector<std::int64_t> adversarial_tau(std::span<const Trajectory> ensemble,
                                          const Envelope& envelope, std::int64_t k0);

// Same construction from a precomputed first violation index (0 = none).
constexpr std::int64_t adversarial_tau_from_violation(std::int64_t first_violation,
                                                      std::int64_t k0) noexcept {
  return first_violation >= 1 && first_violation <= k0 ? first_violation : k0 + 1;
}

struct CoverageResult {
  std::int64_t covered = 0;
  std::int64_t R = 0;
  double frequency = 0.0;
  Interval ci;  // Clopper-Pearson 99%
};

CoverageResult coverage_from_indicators(std::span<const std::uint8_t> covered);

// Fraction of trajectories with f(x_tau) - f* <= U(tau).
CoverageResult coverage(std::span<const Trajectory> ensemble, const Envelope& envelope,
                        std::span<const std::int64_t> taus);
CoverageResult coverage(std::span<const Trajectory> ensemble, const Envelope& envelope,
                        const StoppingRule& rule);

// Fraction of trajectories with f(x_k) - f* <= U(k) for every k in 1..K.
CoverageResult sup_coverage(std::span<const Trajectory> ensemble, const Envelope& envelope,
                            std::int64_t K);

// lower CI end >= 1 - 2 beta
bool coverage_pass(const CoverageResult& c, double beta);

// Unit-constant union-bound envelope
//   (1/sqrt k) (1/eta + eta ln(pi^2 k^2 / (6 beta)) ln k).
double baseline_envelope(double eta, double beta, std::int64_t k);

}  // namespace sgdmlab
