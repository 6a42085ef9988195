#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sgdmlab/gamma.hpp"
#include "sgdmlab/objectives.hpp"
#include "sgdmlab/sgdm.hpp"

namespace sgdmlab {

// ||a||^2, compensated when the dimension exceeds 1000.
double squared_norm(const Vector& v);

// E(k) = ||x_{k+1} + (k+1)(x_{k+1} - x_k) - x*||^2 + 4 sqrt((k+1) eta_k) (f(x_k) - f*)
double energy(const Schedule& sched, std::int64_t k, const Vector& x_k, const Vector& x_next,
              const Vector& xstar, double fgap_k);

// Everything one step k >= 1 of the recurrence touches.
struct StepWindow {
  std::int64_t k;
  const Vector& x_prev;  // x_{k-1}
  const Vector& x_curr;  // x_k
  const Vector& x_next;  // x_{k+1}
  const Vector& g;       // g(x_k, xi_k)
  const Vector& theta;   // grad f(x_k) - g
  const Vector& grad;    // grad f(x_k)
  double fgap_prev;      // f(x_{k-1}) - f*
  double fgap_curr;      // f(x_k) - f*
};

StepWindow window_of(const SgdmStepper& stepper);

// Both sides of the per-step inequalities at step k.
//   lemma:  E(k) - E(k-1) <= 4 eta/k ||g||^2 - (2/L) sqrt(eta/k) ||grad||^2
//                            - 2 sqrt(eta/k) gap_k + 4 sqrt(eta/k) <theta, phi_k>
//   mid:    <= 8 eta/k ||theta||^2 + 8 eta/k ||grad||^2 - (2/L) sqrt(eta/k) ||grad||^2
//              + 4 sqrt(eta/k) <theta, phi_k>
//   decomp: <= a_k ||theta||^2 + sqrt(a_k) <theta, phi_k> (+ kappa_k)
struct StepCheck {
  std::int64_t k = 0;
  double E_prev = 0.0;  // E(k-1)
  double E_curr = 0.0;  // E(k)
  double rhs_lemma = 0.0;
  double rhs_mid = 0.0;
  double rhs_decomp = 0.0;
  double phi_sq = 0.0;       // ||phi_k||^2
  double phi_next_sq = 0.0;  // ||phi_{k+1}||^2
  double sandwich = 0.0;     // 4 sqrt((k+1) eta_k) (f(x_k) - f*)
  double theta_sq = 0.0;

  double dE() const noexcept { return E_curr - E_prev; }
  double scale() const noexcept;  // 1 + |E(k)| + |E(k-1)|
  double residual_lemma() const noexcept { return rhs_lemma - dE(); }
  double residual_mid() const noexcept { return rhs_mid - dE(); }
  double residual_decomp() const noexcept { return rhs_decomp - dE(); }
  double residual_p1() const noexcept { return E_curr - phi_next_sq; }
  double residual_sandwich() const noexcept { return E_curr - sandwich; }
};

StepCheck check_step(const StepWindow& w, const Schedule& sched, const Vector& xstar,
                     double kappa = 0.0);

// Each link of the lemma's derivation evaluated separately:
//   dE <= diff_bound <= expanded ~= substituted <= rhs_lemma
// and the recurrence identity
//   2(x_{k+1}-x_k) + k(x_{k+1}-2x_k+x_{k-1}) = -2 sqrt(eta/k) g.
struct DeepCheck {
  double dE = 0.0;
  double diff_bound = 0.0;   // same eta_k in both energies
  double expanded = 0.0;     // polarization + sqrt(k+1) - sqrt(k) <= 1/(2 sqrt k)
  double substituted = 0.0;  // after the recurrence identity
  double rhs_lemma = 0.0;
  double identity_defect = 0.0;  // norm of the identity residual
  double identity_scale = 0.0;   // norm of its terms
};

DeepCheck deep_check(const StepWindow& w, const Schedule& sched, const Vector& xstar);

// Trajectory-level operations. k indexes steps as in Trajectory.
double lyapunov_E(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                  std::int64_t k);
Vector phi(const Trajectory& traj, const Objective& obj, std::int64_t k);
double check_descent_lemma(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                           std::int64_t k);

struct DecompositionResidual {
  double residual = 0.0;      // RHS(a_k form) - dE
  double residual_mid = 0.0;  // RHS(8 eta/k form) - dE
};
DecompositionResidual check_decomposition(const Trajectory& traj, const Schedule& sched,
                                          const Objective& obj, std::int64_t k,
                                          double kappa = 0.0);
DeepCheck deep_check(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                     std::int64_t k);

// Per-trajectory residual traces, E(k) for k = 0..K and per-step data for k = 1..K.
struct LyapunovTrace {
  std::vector<double> E;
  std::vector<Vector> phi;  // phi_1..phi_K
  std::vector<double> a;    // a_1..a_K
  std::vector<double> rhs_lemma;
  std::vector<double> rhs_decomp;
  std::vector<double> descent_residual;
  std::vector<double> decomp_residual;
  std::vector<double> tol;  // 1e-9 * (1 + |E(k)| + |E(k-1)|)
};

// `kappa`, when non-empty, holds kappa_1..kappa_K added to the decomposition RHS.
LyapunovTrace lyapunov_trace(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                             std::span<const double> kappa = {});

// CSV columns: k, E, dE, rhs_lemma, rhs_decomp, residual_lemma, residual_decomp
void write_lyapunov_csv(const LyapunovTrace& trace, std::ostream& out);

// Riemann zeta for real s > 1: partial sum plus Euler-Maclaurin tail.
double riemann_zeta(double s);

// Constants of the high-probability envelope.
struct EnvelopeParams {
  Schedule schedule;
  double sigma = 0.0;
  double E0 = 0.0;
  double B = 1.0;
  Bracket gamma1;
  Bracket gamma2;
  // assembled from the upper ends of the gamma brackets
  double C1 = 0.0;
  double C2 = 0.0;
  // PropositionEps only: zeta(1+eps), h(eps) = exp(sigma^2 zeta) zeta^2 and the
  // smallest C0 with C0 h (1 + ln 1/beta) >= sqrt(C0') (C1 + C2 ln 1/beta).
  double zeta = 0.0;
  double h_sigma = 0.0;
  double C0 = 0.0;
};

// Throws ConfigError for divergent schedules.
EnvelopeParams envelope_constants(const Schedule& sched, double sigma, double E0, double tol);

// TheoremMain:    (C1 + C2 ln(1/beta)) ln(k+2) / sqrt(k+1)
// PropositionEps: C0 h (1 + ln(1/beta)) ln^{(1+eps)/2}(k+2) / sqrt(k+1)
// beta must lie in (0, 0.5).
double envelope_U(const EnvelopeParams& params, double beta, std::int64_t k);

using Envelope = std::function<double(std::int64_t)>;
Envelope make_envelope(const EnvelopeParams& params, double beta);

}  // namespace sgdmlab
