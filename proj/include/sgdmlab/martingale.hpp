#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sgdmlab/gamma.hpp"
#include "sgdmlab/lyapunov.hpp"
#include "sgdmlab/stats.hpp"

namespace sgdmlab {

// S(k) = sum_{l<=k} a_l ||theta_l||^2,  M(k) = E(k) - S(k), k = 0..K.
struct MartingaleTrace {
  std::vector<double> E;
  std::vector<double> S;
  std::vector<double> M;
  std::vector<double> logN;  // filled by fill_log_N
  double t = 0.0;
};

MartingaleTrace compute_S_M(const Trajectory& traj, const Schedule& sched, const Objective& obj);

// Streaming form of S, M and
//   log N^t(k) = T(k) t M(k) - sigma^2 gamma2 t sum_{l<=k} a_l S(l-1),
// where T(k) = gamma2 / prod_{l<=k} (1 + a_l sigma^2) stands in for the
// infinite tail product prod_{l>k} (1 + a_l sigma^2).
class LogNTracker {
 public:
  LogNTracker(const Schedule& sched, double sigma, double gamma2, double t, double E0);

  // Records step k (called for k = 1, 2, ... in order).
  void push(std::int64_t k, double theta_sq, double E_k);

  std::int64_t k() const noexcept { return k_; }
  double S() const noexcept { return S_; }
  double M() const noexcept { return E_ - S_; }
  double E() const noexcept { return E_; }
  double weighted_S() const noexcept { return weighted_; }  // sum_{l<=k} a_l S(l-1)
  double log_tail_product() const noexcept { return log_tail_; }
  double logN() const noexcept;

 private:
  const Schedule* sched_;
  double s2_;
  double gamma2_;
  double t_;
  std::int64_t k_ = 0;
  double E_ = 0.0;
  double S_ = 0.0;
  double weighted_ = 0.0;
  double log_tail_ = 0.0;
};

// 0 < t <= B / gamma2 is required; throws std::invalid_argument otherwise.
void check_t_range(double t, double gamma2, double B = 1.0);

double log_N_t(const MartingaleTrace& trace, const Schedule& sched, double sigma, double gamma2,
               std::int64_t k, double t, double B = 1.0);

// Fills trace.logN for k = 0..K.
void fill_log_N(MartingaleTrace& trace, const Schedule& sched, double sigma, double gamma2,
                double t, double B = 1.0);

struct SupermartingaleResult {
  std::int64_t k = 0;
  std::int64_t n_branches = 0;
  double log_N_prev = 0.0;  // log N^t(k-1)
  // E[N^t(k) | F_{k-1}] / N^t(k-1) - 1 and its standard error
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
  // one-sided 99% percentile-bootstrap upper bound of the same quantity
  double bootstrap_upper99 = 0.0;
  bool deterministic = false;
  bool pass = false;
};

struct SupermartingaleSetup {
  const Objective* objective = nullptr;
  const NoiseModel* noise = nullptr;
  const Schedule* schedule = nullptr;
  Vector x0;
  double sigma = 0.0;
  double gamma2 = 1.0;
  double B = 1.0;
};

// Runs the prefix x_0..x_k under prefix_seed, then n_branches independent
// draws of theta_k, and estimates the conditional increment of N^t. Zero
// noise uses a single deterministic branch.
SupermartingaleResult check_supermartingale(const SupermartingaleSetup& setup,
                                            std::uint64_t prefix_seed, std::int64_t k, double t,
                                            std::int64_t n_branches);

struct VilleResult {
  double t = 0.0;
  double alpha = 0.0;
  double bound = 0.0;  // min(1, exp(-alpha t + gamma2 t E0))
  std::int64_t exceedances = 0;
  std::int64_t R = 0;
  double empirical_rate = 0.0;
  Interval ci;  // Clopper-Pearson 99%
  bool pass = false;
};

// alpha giving exp(-alpha t + gamma2 t E0) = target.
double ville_alpha_for_bound(double target, double t, double gamma2, double E0);

// sup_logN[i] = sup_{k<=K} log N^t(k) of trajectory i.
VilleResult ville_monitor(std::span<const double> sup_logN, double t, double alpha, double gamma2,
                          double E0);
VilleResult ville_monitor(std::span<const MartingaleTrace> traces, double t, double alpha,
                          double gamma2, double E0);

// Level of sup_k E(k) exceeded with probability at most 2 beta:
//   gamma2/B (B E0 + ln 1/beta) + (1 + ln 1/beta) sigma^2 (1 + sigma^2 gamma1 gamma2) gamma1
double gronwall_threshold(const EnvelopeParams& p, double beta);

// Level of sup_k S(k) exceeded with probability at most beta:
//   (1 + ln 1/beta) sigma^2 gamma1
double s_tail_threshold(const EnvelopeParams& p, double beta);

}  // namespace sgdmlab
