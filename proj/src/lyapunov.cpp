#include "sgdmlab/lyapunov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "sgdmlab/csv.hpp"
#include "sgdmlab/errors.hpp"

namespace sgdmlab {

double squared_norm(const Vector& v) {
  if (v.size() <= 1000) return v.squaredNorm();
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double y = v[i] * v[i] - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double energy(const Schedule& sched, std::int64_t k, const Vector& x_k, const Vector& x_next,
              const Vector& xstar, double fgap_k) {
  const auto kp1 = static_cast<double>(k + 1);
  const Vector w = x_next + kp1 * (x_next - x_k) - xstar;
  return squared_norm(w) + 4.0 * std::sqrt(kp1 * sched.eta(k)) * fgap_k;
}

StepWindow window_of(const SgdmStepper& s) {
  return StepWindow{s.k(),     s.x_prev(), s.x_curr(),    s.x_next(),   s.g(),
                    s.theta(), s.grad_curr(), s.fgap_prev(), s.fgap_curr()};
}

double StepCheck::scale() const noexcept { return 1.0 + std::abs(E_curr) + std::abs(E_prev); }

StepCheck check_step(const StepWindow& w, const Schedule& sched, const Vector& xstar,
                     double kappa) {
  if (w.k < 1) throw std::invalid_argument("check_step: k must be >= 1");
  const auto kd = static_cast<double>(w.k);
  const double eta = sched.eta(w.k);
  const double r = std::sqrt(eta / kd);
  const double a = 16.0 * eta / kd;

  StepCheck c;
  c.k = w.k;
  c.E_prev = energy(sched, w.k - 1, w.x_prev, w.x_curr, xstar, w.fgap_prev);
  c.E_curr = energy(sched, w.k, w.x_curr, w.x_next, xstar, w.fgap_curr);

  const Vector phi_k = kd * (w.x_curr - w.x_prev) + (w.x_curr - xstar);
  c.phi_sq = squared_norm(phi_k);
  c.phi_next_sq = squared_norm((kd + 1.0) * (w.x_next - w.x_curr) + (w.x_next - xstar));
  c.sandwich = 4.0 * std::sqrt((kd + 1.0) * eta) * w.fgap_curr;

  const double g_sq = squared_norm(w.g);
  const double grad_sq = squared_norm(w.grad);
  c.theta_sq = squared_norm(w.theta);
  const double inner = w.theta.dot(phi_k);
  const double grad_term = (2.0 / sched.L) * r * grad_sq;

  c.rhs_lemma = 4.0 * eta / kd * g_sq - grad_term - 2.0 * r * w.fgap_curr + 4.0 * r * inner;
  c.rhs_mid = 8.0 * eta / kd * (c.theta_sq + grad_sq) - grad_term + 4.0 * r * inner;
  c.rhs_decomp = a * c.theta_sq + std::sqrt(a) * inner + kappa;
  return c;
}

DeepCheck deep_check(const StepWindow& w, const Schedule& sched, const Vector& xstar) {
  if (w.k < 1) throw std::invalid_argument("deep_check: k must be >= 1");
  const auto kd = static_cast<double>(w.k);
  const double eta = sched.eta(w.k);
  const double r = std::sqrt(eta / kd);
  const double f_diff = 4.0 * std::sqrt(kd * eta) * (w.fgap_curr - w.fgap_prev);

  DeepCheck d;
  const StepCheck c = check_step(w, sched, xstar);
  d.dE = c.dE();
  d.rhs_lemma = c.rhs_lemma;

  const Vector head = w.x_next + (kd + 1.0) * (w.x_next - w.x_curr) - xstar;
  const Vector prev = w.x_curr + kd * (w.x_curr - w.x_prev) - xstar;
  d.diff_bound = squared_norm(head) + 4.0 * std::sqrt((kd + 1.0) * eta) * w.fgap_curr -
                 squared_norm(prev) - 4.0 * std::sqrt(kd * eta) * w.fgap_prev;

  const Vector v = 2.0 * (w.x_next - w.x_curr) + kd * (w.x_next - 2.0 * w.x_curr + w.x_prev);
  d.expanded = 2.0 * v.dot(head) - squared_norm(v) + f_diff + 2.0 * r * w.fgap_curr;

  const Vector anchor = w.x_curr + (kd + 2.0) * (w.x_next - w.x_curr) - xstar;
  d.substituted = -4.0 * r * w.g.dot(anchor) - 4.0 * r * r * squared_norm(w.g) + f_diff +
                  2.0 * r * w.fgap_curr;

  const Vector scaled_g = 2.0 * r * w.g;
  d.identity_defect = (v + scaled_g).norm();
  d.identity_scale = v.norm() + scaled_g.norm();
  return d;
}

namespace {

void check_step_index(const Trajectory& traj, std::int64_t k) {
  if (k < 1 || k > traj.K) {
    throw std::invalid_argument("step index " + std::to_string(k) + " outside [1, " +
                                std::to_string(traj.K) + "]");
  }
}

// Materializes the window of step k from stored data.
struct StoredWindow {
  Vector grad;
  StepWindow view;

  StoredWindow(const Trajectory& traj, const Objective& obj, std::int64_t k)
      : grad(obj.grad(traj.x(k))),
        view{k,          traj.x(k - 1), traj.x(k),         traj.x(k + 1), traj.g(k),
             traj.theta(k), grad,       traj.fgap(k - 1), traj.fgap(k)} {}
};

}  // namespace

double lyapunov_E(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                  std::int64_t k) {
  if (k < 0 || k > traj.K) {
    throw std::invalid_argument("lyapunov_E: k outside [0, " + std::to_string(traj.K) + "]");
  }
  return energy(sched, k, traj.x(k), traj.x(k + 1), obj.minimizer(), traj.fgap(k));
}

Vector phi(const Trajectory& traj, const Objective& obj, std::int64_t k) {
  if (k < 1 || k > traj.K + 1) throw std::invalid_argument("phi: k must lie in [1, K+1]");
  const auto kd = static_cast<double>(k);
  return kd * (traj.x(k) - traj.x(k - 1)) + (traj.x(k) - obj.minimizer());
}

double check_descent_lemma(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                           std::int64_t k) {
  check_step_index(traj, k);
  const StoredWindow w(traj, obj, k);
  return check_step(w.view, sched, obj.minimizer()).residual_lemma();
}

DecompositionResidual check_decomposition(const Trajectory& traj, const Schedule& sched,
                                          const Objective& obj, std::int64_t k, double kappa) {
  check_step_index(traj, k);
  const StoredWindow w(traj, obj, k);
  const StepCheck c = check_step(w.view, sched, obj.minimizer(), kappa);
  return {c.residual_decomp(), c.residual_mid()};
}

DeepCheck deep_check(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                     std::int64_t k) {
  check_step_index(traj, k);
  const StoredWindow w(traj, obj, k);
  return deep_check(w.view, sched, obj.minimizer());
}

LyapunovTrace lyapunov_trace(const Trajectory& traj, const Schedule& sched, const Objective& obj,
                             std::span<const double> kappa) {
  if (traj.windowed) throw std::invalid_argument("lyapunov_trace: trajectory is windowed");
  if (!kappa.empty() && static_cast<std::int64_t>(kappa.size()) != traj.K) {
    throw std::invalid_argument("lyapunov_trace: kappa must have K entries");
  }
  LyapunovTrace t;
  const auto K = static_cast<std::size_t>(traj.K);
  t.E.reserve(K + 1);
  t.phi.reserve(K);
  t.a.reserve(K);
  for (std::int64_t k = 1; k <= traj.K; ++k) {
    const StoredWindow w(traj, obj, k);
    const double kap = kappa.empty() ? 0.0 : kappa[static_cast<std::size_t>(k - 1)];
    const StepCheck c = check_step(w.view, sched, obj.minimizer(), kap);
    if (k == 1) t.E.push_back(c.E_prev);
    t.E.push_back(c.E_curr);
    t.phi.push_back(phi(traj, obj, k));
    t.a.push_back(sched.a_coeff(k));
    t.rhs_lemma.push_back(c.rhs_lemma);
    t.rhs_decomp.push_back(c.rhs_decomp);
    t.descent_residual.push_back(c.residual_lemma());
    t.decomp_residual.push_back(c.residual_decomp());
    t.tol.push_back(1e-9 * c.scale());
  }
  return t;
}

void write_lyapunov_csv(const LyapunovTrace& trace, std::ostream& out) {
  CsvWriter csv(out, {"k", "E", "dE", "rhs_lemma", "rhs_decomp", "residual_lemma", "residual_decomp"});
  for (std::size_t i = 0; i < trace.rhs_lemma.size(); ++i) {
    const double dE = trace.E[i + 1] - trace.E[i];
    csv.row(static_cast<std::int64_t>(i + 1), trace.E[i + 1], dE, trace.rhs_lemma[i],
            trace.rhs_decomp[i], trace.descent_residual[i], trace.decomp_residual[i]);
  }
}

double riemann_zeta(double s) {
  if (!(s > 1.0) || !std::isfinite(s)) throw std::invalid_argument("riemann_zeta: s must be > 1");
  // B_2, B_4, ..., B_18
  static constexpr std::array<double, 9> kBernoulli = {
      1.0 / 6.0,   -1.0 / 30.0,     1.0 / 42.0,  -1.0 / 30.0,      5.0 / 66.0,
      -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0};
  constexpr int N = 16;
  double sum = 0.0;
  for (int n = N - 1; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
  const double Nd = N;
  double tail = std::pow(Nd, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(Nd, -s);
  double rising = s;       // s (s+1) ... (s+2j-2)
  double factorial = 2.0;  // (2j)!
  for (std::size_t j = 1; j <= kBernoulli.size(); ++j) {
    const auto jj = static_cast<double>(j);
    tail += kBernoulli[j - 1] / factorial * rising * std::pow(Nd, -s - 2.0 * jj + 1.0);
    rising *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
    factorial *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
  }
  return sum + tail;
}

EnvelopeParams envelope_constants(const Schedule& sched, double sigma, double E0, double tol) {
  if (!(tol > 1e-12 && tol < 1e-3)) {
    throw std::invalid_argument("envelope_constants: tol must lie in (1e-12, 1e-3)");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("envelope: sigma must be >= 0");
  if (!(E0 >= 0.0) || !std::isfinite(E0)) throw ConfigError("envelope: E0 must be >= 0");
  sched.validate();

  EnvelopeParams p;
  p.schedule = sched;
  p.sigma = sigma;
  p.E0 = E0;
  p.B = 1.0;
  p.gamma1 = gamma1(sched, tol);
  p.gamma2 = gamma2(sched, sigma, tol);

  const double L = sched.L;
  const double s2 = sigma * sigma;
  const double g1 = p.gamma1.upper();
  const double g2 = p.gamma2.upper();
  const double noise_term = L * s2 * (1.0 + s2 * g1 * g2) * g1;
  p.C1 = L * g2 * E0 + noise_term;
  p.C2 = L * g2 + noise_term;

  if (sched.kind == ScheduleKind::PropositionEps) {
    p.zeta = riemann_zeta(1.0 + sched.epsilon);
    p.h_sigma = std::exp(s2 * p.zeta) * p.zeta * p.zeta;
    p.C0 = std::sqrt(sched.c0_prime) * std::max(p.C1, p.C2) / p.h_sigma;
  }
  return p;
}

double envelope_U(const EnvelopeParams& params, double beta, std::int64_t k) {
  if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("envelope_U: beta must lie in (0, 0.5)");
  if (k < 0) throw std::invalid_argument("envelope_U: k must be nonnegative");
  const auto kd = static_cast<double>(k);
  const double log_inv_beta = std::log(1.0 / beta);
  const double lg = std::log(kd + 2.0);
  if (params.schedule.kind == ScheduleKind::TheoremMain) {
    return (params.C1 + params.C2 * log_inv_beta) * lg / std::sqrt(kd + 1.0);
  }
  const double power = 0.5 * (1.0 + params.schedule.epsilon);
  return params.C0 * params.h_sigma * (1.0 + log_inv_beta) * std::pow(lg, power) /
         std::sqrt(kd + 1.0);
}

Envelope make_envelope(const EnvelopeParams& params, double beta) {
  envelope_U(params, beta, 0);  // validates beta
  return [params, beta](std::int64_t k) { return envelope_U(params, beta, k); };
}

}  // namespace sgdmlab
