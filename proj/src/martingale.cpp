#include "sgdmlab/martingale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <tbb/parallel_for.h>

#include "sgdmlab/rng.hpp"

namespace sgdmlab {

MartingaleTrace compute_S_M(const Trajectory& traj, const Schedule& sched, const Objective& obj) {
  if (traj.windowed) throw std::invalid_argument("compute_S_M: trajectory is windowed");
  MartingaleTrace m;
  const auto n = static_cast<std::size_t>(traj.K + 1);
  m.E.resize(n);
  m.S.resize(n);
  m.M.resize(n);
  double S = 0.0;
  for (std::int64_t k = 0; k <= traj.K; ++k) {
    if (k >= 1) S += sched.a_coeff(k) * traj.theta(k).squaredNorm();
    const auto i = static_cast<std::size_t>(k);
    m.E[i] = lyapunov_E(traj, sched, obj, k);
    m.S[i] = S;
    m.M[i] = m.E[i] - S;
  }
  return m;
}

LogNTracker::LogNTracker(const Schedule& sched, double sigma, double gamma2, double t, double E0)
    : sched_(&sched), s2_(sigma * sigma), gamma2_(gamma2), t_(t), E_(E0), log_tail_(std::log(gamma2)) {}

void LogNTracker::push(std::int64_t k, double theta_sq, double E_k) {
  if (k != k_ + 1) throw std::invalid_argument("LogNTracker: steps must be pushed in order");
  const double a = sched_->a_coeff(k);
  weighted_ += a * S_;
  S_ += a * theta_sq;
  log_tail_ -= std::log1p(a * s2_);
  E_ = E_k;
  k_ = k;
}

double LogNTracker::logN() const noexcept {
  return std::exp(log_tail_) * t_ * M() - s2_ * gamma2_ * t_ * weighted_;
}

void check_t_range(double t, double gamma2, double B) {
  if (!(t > 0.0) || t > (B / gamma2) * (1.0 + 1e-12)) {
    throw std::invalid_argument("t must lie in (0, B/gamma2]");
  }
}

double log_N_t(const MartingaleTrace& trace, const Schedule& sched, double sigma, double gamma2,
               std::int64_t k, double t, double B) {
  check_t_range(t, gamma2, B);
  if (k < 0 || k >= static_cast<std::int64_t>(trace.E.size())) {
    throw std::invalid_argument("log_N_t: k out of range");
  }
  LogNTracker tracker(sched, sigma, gamma2, t, trace.E[0]);
  for (std::int64_t l = 1; l <= k; ++l) {
    const auto i = static_cast<std::size_t>(l);
    const double a = sched.a_coeff(l);
    // recover a_l ||theta_l||^2 from the S increments
    const double theta_sq = a > 0.0 ? (trace.S[i] - trace.S[i - 1]) / a : 0.0;
    tracker.push(l, theta_sq, trace.E[i]);
  }
  return tracker.logN();
}

void fill_log_N(MartingaleTrace& trace, const Schedule& sched, double sigma, double gamma2,
                double t, double B) {
  check_t_range(t, gamma2, B);
  trace.t = t;
  trace.logN.assign(trace.E.size(), 0.0);
  LogNTracker tracker(sched, sigma, gamma2, t, trace.E[0]);
  trace.logN[0] = tracker.logN();
  for (std::size_t i = 1; i < trace.E.size(); ++i) {
    const auto l = static_cast<std::int64_t>(i);
    const double a = sched.a_coeff(l);
    tracker.push(l, (trace.S[i] - trace.S[i - 1]) / a, trace.E[i]);
    trace.logN[i] = tracker.logN();
  }
}

SupermartingaleResult check_supermartingale(const SupermartingaleSetup& setup,
                                            std::uint64_t prefix_seed, std::int64_t k, double t,
                                            std::int64_t n_branches) {
  if (!setup.objective || !setup.noise || !setup.schedule) {
    throw std::invalid_argument("check_supermartingale: incomplete setup");
  }
  if (k < 1) throw std::invalid_argument("check_supermartingale: k must be >= 1");
  check_t_range(t, setup.gamma2, setup.B);
  const Objective& obj = *setup.objective;
  const Schedule& sched = *setup.schedule;
  const bool deterministic = setup.noise->kind == NoiseKind::None;
  if (!deterministic && n_branches < 1000) {
    throw std::invalid_argument("check_supermartingale: need at least 1000 branches");
  }

  SgdmStepper prefix(obj, *setup.noise, sched, setup.x0, prefix_seed);
  const Vector& xstar = obj.minimizer();
  const double E0 = energy(sched, 0, setup.x0, setup.x0, xstar, prefix.fgap_curr());
  LogNTracker tracker(sched, setup.sigma, setup.gamma2, t, E0);
  for (std::int64_t l = 1; l < k; ++l) {
    prefix.advance();
    tracker.push(l, prefix.theta().squaredNorm(),
                 energy(sched, l, prefix.x_curr(), prefix.x_next(), xstar, prefix.fgap_curr()));
  }

  SupermartingaleResult r;
  r.k = k;
  r.deterministic = deterministic;
  r.n_branches = deterministic ? 1 : n_branches;
  r.log_N_prev = tracker.logN();

  std::vector<double> diffs(static_cast<std::size_t>(r.n_branches));
  tbb::parallel_for(std::int64_t{0}, r.n_branches, [&](std::int64_t b) {
    SgdmStepper branch = prefix;
    LogNTracker branch_tracker = tracker;
    CounterStream rng(branch_seed(prefix_seed, static_cast<std::uint64_t>(b)));
    const Vector theta = sample(*setup.noise, rng);
    branch.advance_with(theta);
    branch_tracker.push(k, theta.squaredNorm(),
                        energy(sched, k, branch.x_curr(), branch.x_next(), xstar, branch.fgap_curr()));
    diffs[static_cast<std::size_t>(b)] = branch_tracker.logN() - r.log_N_prev;
  });

  // ratios N(k)/N(k-1) = exp(d), shifted by the largest exponent
  const double shift = std::max(0.0, *std::max_element(diffs.begin(), diffs.end()));
  const double scale = std::exp(shift);
  RunningMoments moments;
  std::vector<double> ratios(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    ratios[i] = std::exp(diffs[i] - shift);
    moments.push(ratios[i]);
  }
  r.estimate = scale * moments.mean() - 1.0;
  r.ci_halfwidth = scale * moments.standard_error();
  if (deterministic) {
    r.bootstrap_upper99 = r.estimate;
    r.pass = diffs[0] <= 1e-12 * (1.0 + std::abs(r.log_N_prev));
  } else {
    r.bootstrap_upper99 =
        scale * bootstrap_mean_upper(ratios, 0.99, 200, derive_key(prefix_seed, 0x626f6f74ULL)) - 1.0;
    r.pass = r.estimate <= 3.0 * r.ci_halfwidth;
  }
  return r;
}

double ville_alpha_for_bound(double target, double t, double gamma2, double E0) {
  if (!(target > 0.0 && target <= 1.0)) throw std::invalid_argument("ville: target must lie in (0, 1]");
  return gamma2 * E0 + std::log(1.0 / target) / t;
}

VilleResult ville_monitor(std::span<const double> sup_logN, double t, double alpha, double gamma2,
                          double E0) {
  if (sup_logN.empty()) throw std::invalid_argument("ville_monitor: empty ensemble");
  if (!(alpha > 0.0)) throw std::invalid_argument("ville_monitor: alpha must be positive");
  check_t_range(t, gamma2);
  VilleResult v;
  v.t = t;
  v.alpha = alpha;
  v.bound = std::min(1.0, std::exp(-alpha * t + gamma2 * t * E0));
  v.R = static_cast<std::int64_t>(sup_logN.size());
  const double level = alpha * t;
  v.exceedances = std::count_if(sup_logN.begin(), sup_logN.end(), [&](double s) { return s >= level; });
  v.empirical_rate = static_cast<double>(v.exceedances) / static_cast<double>(v.R);
  v.ci = clopper_pearson(v.exceedances, v.R, 0.99);
  v.pass = v.ci.lo <= v.bound;
  return v;
}

VilleResult ville_monitor(std::span<const MartingaleTrace> traces, double t, double alpha,
                          double gamma2, double E0) {
  std::vector<double> sups;
  sups.reserve(traces.size());
  for (const auto& tr : traces) {
    if (tr.logN.empty()) throw std::invalid_argument("ville_monitor: trace without logN");
    sups.push_back(*std::max_element(tr.logN.begin(), tr.logN.end()));
  }
  return ville_monitor(sups, t, alpha, gamma2, E0);
}

double gronwall_threshold(const EnvelopeParams& p, double beta) {
  const double lb = std::log(1.0 / beta);
  const double g1 = p.gamma1.upper();
  const double g2 = p.gamma2.upper();
  const double s2 = p.sigma * p.sigma;
  return g2 / p.B * (p.B * p.E0 + lb) + (1.0 + lb) * s2 * (1.0 + s2 * g1 * g2) * g1;
}

double s_tail_threshold(const EnvelopeParams& p, double beta) {
  return (1.0 + std::log(1.0 / beta)) * p.sigma * p.sigma * p.gamma1.upper();
}

}  // namespace sgdmlab
