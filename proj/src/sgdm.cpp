#include "sgdmlab/sgdm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sgdmlab/errors.hpp"
#include "sgdmlab/rng.hpp"

namespace sgdmlab {

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::TheoremMain ? "theorem-main" : "proposition-eps";
}

Schedule Schedule::theorem_main(double L) {
  Schedule s{ScheduleKind::TheoremMain, L, 0.0, 100.0};
  s.validate();
  return s;
}

Schedule Schedule::proposition_eps(double L, double epsilon, double c0_prime) {
  Schedule s{ScheduleKind::PropositionEps, L, epsilon, c0_prime};
  s.validate();
  return s;
}

void Schedule::validate() const {
  std::vector<std::string> errors;
  if (!(L > 0.0) || !std::isfinite(L)) errors.emplace_back("schedule: L must be positive and finite");
  if (kind == ScheduleKind::PropositionEps) {
    if (!(epsilon > 0.0)) {
      errors.emplace_back("schedule: epsilon must be > 0 (sum of a_k diverges otherwise)");
    } else if (!(epsilon < 0.5)) {
      errors.emplace_back("schedule: epsilon must be < 0.5");
    }
    if (!(c0_prime >= 100.0) || !std::isfinite(c0_prime)) {
      errors.emplace_back("schedule: c0_prime must be >= 100");
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

double Schedule::a_scale() const noexcept {
  const double c = kind == ScheduleKind::TheoremMain ? 1.0 : c0_prime;
  return 1.0 / (L * L * c);
}

double Schedule::eta(std::int64_t k) const {
  if (k < 0) throw std::invalid_argument("eta: k must be nonnegative");
  const double lg = std::log(static_cast<double>(k) + 2.0);
  if (kind == ScheduleKind::TheoremMain) return 1.0 / (16.0 * L * L * lg * lg);
  return 1.0 / (16.0 * L * L * c0_prime * std::pow(lg, 1.0 + epsilon));
}

double Schedule::a_coeff(std::int64_t k) const {
  if (k < 1) throw std::invalid_argument("a_coeff: k must be >= 1");
  return 16.0 * eta(k) / static_cast<double>(k);
}

std::string Schedule::describe() const {
  std::ostringstream os;
  os << to_string(kind) << "(L=" << L;
  if (kind == ScheduleKind::PropositionEps) os << ", epsilon=" << epsilon << ", c0_prime=" << c0_prime;
  os << ")";
  return os.str();
}

IterState sgdm_step(const IterState& state, const Schedule& sched, const Vector& g) {
  if (state.k < 1) throw std::invalid_argument("sgdm_step: recurrence starts at k = 1");
  if (g.size() != state.x_curr.size() || state.x_prev.size() != state.x_curr.size()) {
    throw std::invalid_argument("sgdm_step: dimension mismatch");
  }
  const auto k = static_cast<double>(state.k);
  const double momentum = k / (k + 2.0);
  const double step = 2.0 * std::sqrt(sched.eta(state.k)) / ((k + 2.0) * std::sqrt(k));
  IterState next;
  next.k = state.k + 1;
  next.x_prev = state.x_curr;
  next.x_curr = state.x_curr + momentum * (state.x_curr - state.x_prev) - step * g;
  return next;
}

SgdmStepper::SgdmStepper(const Objective& obj, const NoiseModel& noise, const Schedule& sched,
                         const Vector& x0, std::uint64_t seed)
    : obj_(&obj), noise_(&noise), sched_(&sched), seed_(seed) {
  if (x0.size() != obj.dim() || noise.dim != obj.dim()) {
    throw std::invalid_argument("SgdmStepper: dimension mismatch");
  }
  const auto n = obj.dim();
  x_prev_ = x0;
  x_curr_ = x0;
  x_next_.resize(n);
  g_.resize(n);
  theta_.resize(n);
  grad_curr_.resize(n);
  grad_next_.resize(n);
  obj.grad_into(x_curr_, grad_next_);
  fgap_prev_ = fgap_curr_ = fgap_next_ = obj.gap(x0);
  // the first step consumes grad_next_ as grad f(x_1)
  has_next_ = false;
}

void SgdmStepper::shift() {
  if (!has_next_) {
    grad_curr_.swap(grad_next_);
    return;
  }
  x_prev_.swap(x_curr_);
  x_curr_.swap(x_next_);
  grad_curr_.swap(grad_next_);
  fgap_prev_ = fgap_curr_;
  fgap_curr_ = fgap_next_;
}

void SgdmStepper::advance() {
  const std::int64_t k = k_ + 1;
  CounterStream rng = step_stream(seed_, static_cast<std::uint64_t>(k));
  shift();
  sample_into(*noise_, rng, theta_);
  step(k);
}

void SgdmStepper::advance_with(const Vector& theta) {
  if (theta.size() != obj_->dim()) throw std::invalid_argument("advance_with: dimension mismatch");
  shift();
  theta_ = theta;
  step(k_ + 1);
}

void SgdmStepper::step(std::int64_t k) {
  const auto kd = static_cast<double>(k);
  const double momentum = kd / (kd + 2.0);
  const double coef = 2.0 * std::sqrt(sched_->eta(k)) / ((kd + 2.0) * std::sqrt(kd));
  g_ = grad_curr_ - theta_;
  x_next_ = x_curr_ + momentum * (x_curr_ - x_prev_) - coef * g_;
  if (!x_next_.allFinite()) throw DivergenceError(k + 1, "non-finite iterate");
  if (x_next_.norm() > kDivergenceNorm) throw DivergenceError(k + 1, "iterate norm exceeds 1e12");
  obj_->grad_into(x_next_, grad_next_);
  fgap_next_ = obj_->gap(x_next_);
  k_ = k;
  has_next_ = true;
}

const Vector& Trajectory::x(std::int64_t k) const {
  const std::int64_t i = k - first_x;
  if (i < 0 || i >= static_cast<std::int64_t>(xs.size())) {
    throw std::out_of_range("trajectory: iterate " + std::to_string(k) + " not stored");
  }
  return xs[static_cast<std::size_t>(i)];
}

const Vector& Trajectory::g(std::int64_t k) const {
  const std::int64_t i = k - first_g;
  if (i < 0 || i >= static_cast<std::int64_t>(gs.size())) {
    throw std::out_of_range("trajectory: gradient " + std::to_string(k) + " not stored");
  }
  return gs[static_cast<std::size_t>(i)];
}

const Vector& Trajectory::theta(std::int64_t k) const {
  const std::int64_t i = k - first_g;
  if (i < 0 || i >= static_cast<std::int64_t>(thetas.size())) {
    throw std::out_of_range("trajectory: noise " + std::to_string(k) + " not stored");
  }
  return thetas[static_cast<std::size_t>(i)];
}

double Trajectory::fgap(std::int64_t k) const {
  if (k < 0 || k >= static_cast<std::int64_t>(f_gaps.size())) {
    throw std::out_of_range("trajectory: f-gap " + std::to_string(k) + " not stored");
  }
  return f_gaps[static_cast<std::size_t>(k)];
}

Trajectory run_trajectory(const Objective& obj, const NoiseModel& noise, const Schedule& sched,
                          const Vector& x0, std::int64_t K, std::uint64_t seed) {
  if (K < 1) throw std::invalid_argument("run_trajectory: K must be >= 1");
  SgdmStepper stepper(obj, noise, sched, x0, seed);

  Trajectory traj;
  traj.schedule = sched;
  traj.objective_id = obj.describe();
  traj.noise_id = to_string(noise.kind) + "(sigma=" + std::to_string(noise.sigma_certificate) + ")";
  traj.seed = seed;
  traj.K = K;
  traj.windowed = K * obj.dim() > kWindowedThreshold;

  const auto reserve = static_cast<std::size_t>(traj.windowed ? 3 : K + 2);
  traj.xs.reserve(reserve);
  traj.f_gaps.reserve(static_cast<std::size_t>(K + 1));
  traj.xs.push_back(x0);
  traj.xs.push_back(x0);
  traj.f_gaps.push_back(stepper.fgap_curr());
  traj.f_gaps.push_back(stepper.fgap_curr());
  if (!traj.windowed) {
    traj.gs.reserve(static_cast<std::size_t>(K));
    traj.thetas.reserve(static_cast<std::size_t>(K));
  }

  for (std::int64_t k = 1; k <= K; ++k) {
    stepper.advance();
    if (traj.windowed) {
      if (traj.xs.size() == 3) {
        traj.xs.erase(traj.xs.begin());
        ++traj.first_x;
      }
      traj.gs.assign(1, stepper.g());
      traj.thetas.assign(1, stepper.theta());
      traj.first_g = k;
    } else {
      traj.gs.push_back(stepper.g());
      traj.thetas.push_back(stepper.theta());
    }
    traj.xs.push_back(stepper.x_next());
    if (k < K) traj.f_gaps.push_back(stepper.fgap_next());
  }
  return traj;
}

}  // namespace sgdmlab
