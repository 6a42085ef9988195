#include "sgdmlab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sgdmlab/errors.hpp"
#include "sgdmlab/rng.hpp"
#include "sgdmlab/sampling.hpp"

namespace sgdmlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double huber(double t, double delta) {
  const double a = std::abs(t);
  return a <= delta ? 0.5 * t * t / delta : a - 0.5 * delta;
}

double huber_slope(double t, double delta) {
  if (t > delta) return 1.0;
  if (t < -delta) return -1.0;
  return t / delta;
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::Quadratic:
      return "quadratic";
    case ObjectiveKind::LeastSquares:
      return "least-squares";
    case ObjectiveKind::HuberizedAbs:
      return "huberized-abs";
  }
  return "unknown";
}

Objective Objective::quadratic(Vector diag, Vector center) {
  if (diag.size() == 0) throw ConfigError("quadratic: dimension must be positive");
  if (diag.size() != center.size()) throw ConfigError("quadratic: diag and center sizes differ");
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) {
    throw ConfigError("quadratic: diagonal entries must be positive and finite");
  }
  Objective obj;
  obj.smoothness_ = diag.maxCoeff();
  obj.minimizer_ = center;
  obj.min_value_ = 0.0;
  obj.params_ = QuadraticParams{std::move(diag), std::move(center)};
  return obj;
}

Objective Objective::quadratic(Vector diag) {
  Vector center = Vector::Zero(diag.size());
  return quadratic(std::move(diag), std::move(center));
}

Objective Objective::least_squares(Matrix A, Vector b) {
  if (A.rows() != b.size()) throw ConfigError("least-squares: A rows and b size differ");
  if (A.cols() == 0 || A.rows() < A.cols()) {
    throw ConfigError("least-squares: A must have at least as many rows as columns");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  if (qr.rank() < A.cols()) throw ConfigError("least-squares: A is not of full column rank");

  const Matrix gram = A.transpose() * A;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw ConfigError("least-squares: normal equations singular");
  Vector x = llt.solve(A.transpose() * b);
  // one step of iterative refinement on the normal equations
  x += llt.solve(A.transpose() * (b - A * x));

  Objective obj;
  obj.smoothness_ = power_iteration(gram);
  obj.minimizer_ = x;
  obj.min_value_ = 0.5 * (A * x - b).squaredNorm();
  obj.params_ = LeastSquaresParams{std::move(A), std::move(b)};
  return obj;
}

Objective Objective::huberized_abs(Eigen::Index dim, double delta) {
  return huberized_abs(Vector::Zero(dim), delta);
}

Objective Objective::huberized_abs(Vector center, double delta) {
  if (center.size() == 0) throw ConfigError("huberized-abs: dimension must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConfigError("huberized-abs: delta must be positive");
  }
  Objective obj;
  obj.smoothness_ = 1.0 / delta;
  obj.minimizer_ = center;
  obj.min_value_ = 0.0;
  obj.params_ = HuberParams{delta, std::move(center)};
  return obj;
}

ObjectiveKind Objective::kind() const noexcept {
  return std::visit(overloaded{
                        [](const QuadraticParams&) { return ObjectiveKind::Quadratic; },
                        [](const LeastSquaresParams&) { return ObjectiveKind::LeastSquares; },
                        [](const HuberParams&) { return ObjectiveKind::HuberizedAbs; },
                    },
                    params_);
}

std::string Objective::describe() const {
  std::ostringstream os;
  os << to_string(kind()) << "(dim=" << dim() << ", L=" << smoothness_ << ")";
  return os.str();
}

void Objective::check_dim(const Vector& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("objective: expected a vector of dimension " +
                                std::to_string(dim()) + ", got " + std::to_string(x.size()));
  }
}

double Objective::eval(const Vector& x) const {
  check_dim(x);
  return std::visit(overloaded{
                        [&](const QuadraticParams& p) {
                          return 0.5 * (p.diag.array() * (x - p.center).array().square()).sum();
                        },
                        [&](const LeastSquaresParams& p) { return 0.5 * (p.A * x - p.b).squaredNorm(); },
                        [&](const HuberParams& p) {
                          double s = 0.0;
                          for (Eigen::Index i = 0; i < x.size(); ++i) s += huber(x[i] - p.center[i], p.delta);
                          return s;
                        },
                    },
                    params_);
}

double Objective::gap(const Vector& x) const {
  check_dim(x);
  if (const auto* p = std::get_if<LeastSquaresParams>(&params_)) {
    // f(x) - f* = 1/2 ||A (x - x*)||^2 because A^T (A x* - b) = 0.
    return 0.5 * (p->A * (x - minimizer_)).squaredNorm();
  }
  return eval(x) - min_value_;
}

Vector Objective::grad(const Vector& x) const {
  check_dim(x);
  Vector out(dim());
  grad_into(x, out);
  return out;
}

void Objective::grad_into(const Vector& x, Vector& out) const {
  check_dim(x);
  std::visit(overloaded{
                 [&](const QuadraticParams& p) { out = p.diag.cwiseProduct(x - p.center); },
                 [&](const LeastSquaresParams& p) { out.noalias() = p.A.transpose() * (p.A * x - p.b); },
                 [&](const HuberParams& p) {
                   for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = huber_slope(x[i] - p.center[i], p.delta);
                 },
             },
             params_);
}

double power_iteration(const Matrix& spd, double rel_tol, int max_iter) {
  const Eigen::Index n = spd.rows();
  if (n == 0 || spd.cols() != n) throw std::invalid_argument("power_iteration: square matrix required");
  if (n == 1) return spd(0, 0);
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  // break symmetry in case the all-ones vector is orthogonal to the top eigenvector
  for (Eigen::Index i = 0; i < n; ++i) v[i] += 1e-3 * static_cast<double>(i + 1);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = spd * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) {
      return std::max(next, v.dot(spd * v));
    }
    lambda = next;
  }
  return lambda;
}

RegularityReport verify_regularity(const Objective& obj, std::int64_t n_pairs,
                                   std::uint64_t rng_seed) {
  if (n_pairs < 1) throw std::invalid_argument("verify_regularity: n_pairs must be >= 1");
  RegularityReport report;
  report.n_pairs = n_pairs;
  report.min_convexity_residual = std::numeric_limits<double>::infinity();
  const double L = obj.smoothness();
  for (std::int64_t i = 0; i < n_pairs; ++i) {
    CounterStream rng(derive_key(rng_seed, static_cast<std::uint64_t>(i)));
    const Vector x = sample_ball(rng, obj.minimizer(), 10.0);
    const Vector y = sample_ball(rng, obj.minimizer(), 10.0);
    const Vector gx = obj.grad(x);
    const Vector gy = obj.grad(y);
    const double dist = (x - y).norm();
    if (dist > 0.0) {
      report.max_smoothness_ratio =
          std::max(report.max_smoothness_ratio, (gx - gy).norm() / (L * dist));
    }
    const double fx = obj.eval(x);
    const double residual = (obj.eval(y) - fx - gx.dot(y - x)) / (1.0 + std::abs(fx));
    report.min_convexity_residual = std::min(report.min_convexity_residual, residual);
  }
  report.pass = report.max_smoothness_ratio <= 1.0 + 1e-9 && report.min_convexity_residual >= -1e-9;
  return report;
}

}  // namespace sgdmlab
