#include "sgdmlab/stopping.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sgdmlab/errors.hpp"

namespace sgdmlab {

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::IterateDelta: return "iterate_delta";
    case RuleKind::ValueDelta: return "value_delta";
    case RuleKind::FixedK: return "fixed_k";
    case RuleKind::FirstEnvelopeViolation: return "first_envelope_violation";
  }
  return "unknown";
}

RuleKind rule_kind_from_string(const std::string& name) {
  for (auto k : {RuleKind::IterateDelta, RuleKind::ValueDelta, RuleKind::FixedK,
                 RuleKind::FirstEnvelopeViolation}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown stopping rule '" + name + "'");
}

StoppingRule StoppingRule::iterate_delta(double epsilon, std::int64_t k_max) {
  StoppingRule r{RuleKind::IterateDelta, epsilon, k_max, {}};
  r.validate();
  return r;
}

StoppingRule StoppingRule::value_delta(double epsilon, std::int64_t k_max) {
  StoppingRule r{RuleKind::ValueDelta, epsilon, k_max, {}};
  r.validate();
  return r;
}

StoppingRule StoppingRule::fixed_k(std::int64_t k) {
  StoppingRule r{RuleKind::FixedK, 0.0, k, {}};
  r.validate();
  return r;
}

StoppingRule StoppingRule::first_violation(Envelope envelope, std::int64_t k_max) {
  StoppingRule r{RuleKind::FirstEnvelopeViolation, 0.0, k_max, std::move(envelope)};
  r.validate();
  return r;
}

void StoppingRule::validate() const {
  std::vector<std::string> errs;
  if (k_max < 1) errs.push_back("stopping rule: k_max must be >= 1");
  if ((kind == RuleKind::IterateDelta || kind == RuleKind::ValueDelta) && !(epsilon > 0.0)) {
    errs.push_back("stopping rule: epsilon must be positive");
  }
  if (kind == RuleKind::FirstEnvelopeViolation && !envelope) {
    errs.push_back("stopping rule: first_envelope_violation needs an envelope");
  }
  if (!errs.empty()) throw ConfigError(errs);
}

std::string StoppingRule::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  if (kind == RuleKind::IterateDelta || kind == RuleKind::ValueDelta) os << "(eps=" << epsilon << ")";
  os << "[k_max=" << k_max << "]";
  return os.str();
}

RuleEvaluator::RuleEvaluator(const StoppingRule& rule) : rule_(&rule) {}

bool RuleEvaluator::observe(std::int64_t k, const Vector& x_k, double fgap_k) {
  if (stopped_) return true;
  if (k != next_k_) throw std::invalid_argument("RuleEvaluator: indices must be observed in order");
  ++next_k_;

  bool trigger = false;
  if (k >= 1) {
    switch (rule_->kind) {
      case RuleKind::IterateDelta:
        trigger = k >= kDeltaRuleStart && (x_k - x_last_).norm() <= rule_->epsilon;
        break;
      case RuleKind::ValueDelta:
        trigger = k >= kDeltaRuleStart && std::abs(fgap_k - fgap_last_) <= rule_->epsilon;
        break;
      case RuleKind::FixedK:
        break;
      case RuleKind::FirstEnvelopeViolation:
        trigger = fgap_k > rule_->envelope(k);
        break;
    }
    if (k >= rule_->k_max) trigger = true;
  }
  x_last_ = x_k;
  fgap_last_ = fgap_k;
  if (trigger) {
    stopped_ = true;
    tau_ = k;
    fgap_tau_ = fgap_k;
  }
  return stopped_;
}

std::int64_t evaluate_rule(const StoppingRule& rule, const Trajectory& traj) {
  rule.validate();
  if (traj.K < rule.k_max) throw std::invalid_argument("evaluate_rule: trajectory shorter than k_max");
  if (traj.windowed) throw std::invalid_argument("evaluate_rule: trajectory is windowed");
  RuleEvaluator ev(rule);
  for (std::int64_t k = 0; k <= rule.k_max; ++k) {
    if (ev.observe(k, traj.x(k), traj.fgap(k))) break;
  }
  return ev.tau();
}

std::int64_t adversarial_tau(const Trajectory& traj, const Envelope& envelope, std::int64_t k0) {
  if (k0 < 0) throw std::invalid_argument("adversarial_tau: k0 must be >= 0");
  if (traj.K < k0 + 1) throw std::invalid_argument("adversarial_tau: trajectory shorter than k0+1");
  for (std::int64_t k = 1; k <= k0; ++k) {
    if (traj.fgap(k) > envelope(k)) return k;
  }
  return k0 + 1;
}

std::vector<std::int64_t> adversarial_tau(std::span<const Trajectory> ensemble,
                                          const Envelope& envelope, std::int64_t k0) {
  std::vector<std::int64_t> out;
  out.reserve(ensemble.size());
  for (const auto& t : ensemble) out.push_back(adversarial_tau(t, envelope, k0));
  return out;
}

CoverageResult coverage_from_indicators(std::span<const std::uint8_t> covered) {
  CoverageResult c;
  c.R = static_cast<std::int64_t>(covered.size());
  if (c.R == 0) throw std::invalid_argument("coverage: empty ensemble");
  for (auto v : covered) c.covered += v ? 1 : 0;
  c.frequency = static_cast<double>(c.covered) / static_cast<double>(c.R);
  c.ci = clopper_pearson(c.covered, c.R, 0.99);
  return c;
}

CoverageResult coverage(std::span<const Trajectory> ensemble, const Envelope& envelope,
                        std::span<const std::int64_t> taus) {
  if (taus.size() != ensemble.size()) throw std::invalid_argument("coverage: one tau per trajectory");
  std::vector<std::uint8_t> ind(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    ind[i] = ensemble[i].fgap(taus[i]) <= envelope(taus[i]);
  }
  return coverage_from_indicators(ind);
}

CoverageResult coverage(std::span<const Trajectory> ensemble, const Envelope& envelope,
                        const StoppingRule& rule) {
  std::vector<std::int64_t> taus;
  taus.reserve(ensemble.size());
  for (const auto& t : ensemble) taus.push_back(evaluate_rule(rule, t));
  return coverage(ensemble, envelope, taus);
}

CoverageResult sup_coverage(std::span<const Trajectory> ensemble, const Envelope& envelope,
                            std::int64_t K) {
  std::vector<std::uint8_t> ind(ensemble.size(), 1);
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    if (ensemble[i].K < K) throw std::invalid_argument("sup_coverage: trajectory shorter than K");
    for (std::int64_t k = 1; k <= K; ++k) {
      if (ensemble[i].fgap(k) > envelope(k)) {
        ind[i] = 0;
        break;
      }
    }
  }
  return coverage_from_indicators(ind);
}

bool coverage_pass(const CoverageResult& c, double beta) { return c.ci.lo >= 1.0 - 2.0 * beta; }

double baseline_envelope(double eta, double beta, std::int64_t k) {
  if (!(eta > 0.0)) throw std::invalid_argument("baseline_envelope: eta must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("baseline_envelope: beta must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("baseline_envelope: k must be >= 1");
  const double kd = static_cast<double>(k);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return (1.0 / eta + eta * std::log(pi2 * kd * kd / (6.0 * beta)) * std::log(kd)) / std::sqrt(kd);
}

}  // namespace sgdmlab
