#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgdmlab/noise.hpp"
#include "sgdmlab/objectives.hpp"

namespace sgdmlab {

enum class ScheduleKind { TheoremMain, PropositionEps };

std::string to_string(ScheduleKind kind);

// Step-size schedule of the momentum recurrence. All logarithms are natural.
//   TheoremMain:    eta_k = 1 / (16 L^2 ln^2(k+2))
//   PropositionEps: eta_k = 1 / (16 L^2 C0' ln^{1+eps}(k+2))
// so that a_k = 16 eta_k / k = 1 / (L^2 c k ln^p(k+2)) with (c, p) = (1, 2)
// or (C0', 1 + eps).
struct Schedule {
  ScheduleKind kind = ScheduleKind::TheoremMain;
  double L = 1.0;
  double epsilon = 0.0;     // PropositionEps only
  double c0_prime = 100.0;  // PropositionEps only

  static Schedule theorem_main(double L);
  static Schedule proposition_eps(double L, double epsilon, double c0_prime = 100.0);

  // Throws ConfigError if the schedule is outside its admissible range.
  void validate() const;

  double eta(std::int64_t k) const;
  // 16 eta_k / k, defined for k >= 1.
  double a_coeff(std::int64_t k) const;

  // p in a_k = scale / (k ln^p(k+2)).
  double log_power() const noexcept { return kind == ScheduleKind::TheoremMain ? 2.0 : 1.0 + epsilon; }
  // 1 / (L^2 c) in the same expression.
  double a_scale() const noexcept;

  std::string describe() const;
};

// x_{k-1}, x_k at iteration counter k.
struct IterState {
  std::int64_t k = 1;
  Vector x_prev;
  Vector x_curr;

  static IterState start(const Vector& x0) { return IterState{1, x0, x0}; }
};

// x_{k+1} = x_k + k/(k+2) (x_k - x_{k-1}) - 2 sqrt(eta_k) / ((k+2) sqrt(k)) g
IterState sgdm_step(const IterState& state, const Schedule& sched, const Vector& g);

// Iterates beyond this norm abort the run.
inline constexpr double kDivergenceNorm = 1e12;

// Streaming driver. After advance() the window (x_{k-1}, x_k, x_{k+1}) of the
// step just taken is exposed together with g_k, theta_k and grad f(x_k).
// Before the first advance k() is 0 and x_curr() = x_1 = x_0.
class SgdmStepper {
 public:
  SgdmStepper(const Objective& obj, const NoiseModel& noise, const Schedule& sched,
              const Vector& x0, std::uint64_t seed);

  // Step k() + 1 with theta drawn from step_stream(seed, k() + 1).
  void advance();
  // Step k() + 1 with the given noise realization.
  void advance_with(const Vector& theta);

  std::int64_t k() const noexcept { return k_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const Schedule& schedule() const noexcept { return *sched_; }
  const Objective& objective() const noexcept { return *obj_; }

  const Vector& x_prev() const noexcept { return x_prev_; }
  const Vector& x_curr() const noexcept { return x_curr_; }
  const Vector& x_next() const noexcept { return x_next_; }
  const Vector& g() const noexcept { return g_; }
  const Vector& theta() const noexcept { return theta_; }
  const Vector& grad_curr() const noexcept { return grad_curr_; }
  double fgap_prev() const noexcept { return fgap_prev_; }
  double fgap_curr() const noexcept { return fgap_curr_; }
  double fgap_next() const noexcept { return fgap_next_; }

 private:
  void shift();
  void step(std::int64_t k);

  const Objective* obj_;
  const NoiseModel* noise_;
  const Schedule* sched_;
  std::uint64_t seed_;
  std::int64_t k_ = 0;
  bool has_next_ = false;

  Vector x_prev_, x_curr_, x_next_;
  Vector g_, theta_, grad_curr_, grad_next_;
  double fgap_prev_ = 0.0, fgap_curr_ = 0.0, fgap_next_ = 0.0;
};

// Realized path of one run. Index conventions follow the recurrence:
// x(k) for k = 0..K+1 with x(1) = x(0); g(k), theta(k) for k = 1..K;
// fgap(k) = f(x_k) - f* for k = 0..K.
struct Trajectory {
  Schedule schedule;
  std::string objective_id;
  std::string noise_id;
  std::uint64_t seed = 0;
  std::int64_t K = 0;

  // Windowed trajectories keep only the last iterates (see kWindowedThreshold);
  // accessors throw std::out_of_range for evicted indices.
  bool windowed = false;
  std::int64_t first_x = 0;  // index of xs.front()
  std::int64_t first_g = 1;  // index of gs.front()

  std::vector<Vector> xs;
  std::vector<Vector> gs;
  std::vector<Vector> thetas;
  std::vector<double> f_gaps;

  const Vector& x(std::int64_t k) const;
  const Vector& g(std::int64_t k) const;
  const Vector& theta(std::int64_t k) const;
  double fgap(std::int64_t k) const;
};

// Runs with K * dim above this many scalars store a window only.
inline constexpr std::int64_t kWindowedThreshold = 100'000'000;

// Deterministic in (obj, noise, sched, x0, K, seed). Throws DivergenceError
// carrying the step index if an iterate leaves the admissible region.
Trajectory run_trajectory(const Objective& obj, const NoiseModel& noise, const Schedule& sched,
                          const Vector& x0, std::int64_t K, std::uint64_t seed);

}  // namespace sgdmlab
