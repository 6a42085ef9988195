#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgdmlab/config.hpp"
#include "sgdmlab/lyapunov.hpp"
#include "sgdmlab/stopping.hpp"

namespace sgdmlab {

// Worker count from SGDMLAB_WORKERS, if set to a positive integer.
std::optional<int> workers_from_env();

// Runs `body` with exactly `workers` TBB threads (more than the hardware
// provides if asked), or with the default pool when `workers` is empty.
void run_with_workers(std::optional<int> workers, const std::function<void()>& body);

struct EnsembleOptions {
  bool pathwise = false;  // per-step lemma / decomposition / sandwich checks
  double residual_tol = 1e-9;
  bool martingale = false;  // sup_k log N^t(k)
  double sigma = 0.0;
  double gamma2 = 1.0;
  double t = 1.0;
  // first f(x_k) - f* > U(k) over k = 1..K per envelope, plus the online
  // adversarial stopping time with k0 = K - 1
  std::vector<Envelope> envelopes;
  std::vector<StoppingRule> rules;
  std::int64_t keep_traces = 0;  // trajectories 0..keep_traces-1 keep per-step rows
};

// Rows k = 0..K of one trajectory; residuals are NaN at k = 0.
struct TraceTable {
  std::vector<double> fgap, E, S, M, residual_lemma, residual_decomp;
};

struct PathwiseStats {
  std::int64_t steps = 0;
  std::int64_t lemma_violations = 0;
  std::int64_t mid_violations = 0;
  std::int64_t decomp_violations = 0;
  std::int64_t p1_violations = 0;
  std::int64_t sandwich_violations = 0;
  // minima of residual / (1 + |E(k)| + |E(k-1)|)
  double min_lemma = 0.0;
  double min_mid = 0.0;
  double min_decomp = 0.0;
  double min_p1 = 0.0;
  double min_sandwich = 0.0;

  void merge(const PathwiseStats& o);
  std::int64_t violations() const noexcept {
    return lemma_violations + mid_violations + decomp_violations + p1_violations + sandwich_violations;
  }
};

struct TrajectorySummary {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::int64_t divergence_step = 0;
  std::string divergence_what;
  std::int64_t steps = 0;

  double E0 = 0.0;
  double fgap_K = 0.0;
  double sup_E = 0.0;
  double sup_S = 0.0;
  double sup_logN = 0.0;
  PathwiseStats pathwise;

  std::vector<std::int64_t> first_violation;  // per envelope, 0 = none
  std::vector<std::int64_t> adversarial_tau;  // per envelope
  std::vector<double> adversarial_fgap;       // f(x_tau) - f* at that tau
  std::vector<std::int64_t> rule_tau;         // per rule
  std::vector<double> rule_fgap;

  std::optional<TraceTable> trace;
};

TrajectorySummary run_one(const Setup& setup, std::int64_t K, std::int64_t index, std::uint64_t seed,
                          const EnsembleOptions& opts, const std::vector<StoppingRule>& adversarial);

// Trajectory i uses trajectory_seed(base_seed, i); output order and content
// are independent of the worker count.
std::vector<TrajectorySummary> run_ensemble(const Setup& setup, std::int64_t K, std::int64_t R,
                                            std::uint64_t base_seed, const EnsembleOptions& opts);

}  // namespace sgdmlab
