#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace sgdmlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ObjectiveKind { Quadratic, LeastSquares, HuberizedAbs };

std::string to_string(ObjectiveKind kind);

// f(x) = 1/2 <x - c, D (x - c)> with D diagonal.
struct QuadraticParams {
  Vector diag;
  Vector center;
};

// f(x) = 1/2 ||A x - b||^2, A of full column rank.
struct LeastSquaresParams {
  Matrix A;
  Vector b;
};

// f(x) = sum_i huber_delta(x_i - c_i).
struct HuberParams {
  double delta = 1.0;
  Vector center;
};

// Convex, L-smooth test function with analytically known minimizer and
// minimum value. Immutable after construction.
class Objective {
 public:
  static Objective quadratic(Vector diag, Vector center);
  static Objective quadratic(Vector diag);  // centered at the origin
  static Objective least_squares(Matrix A, Vector b);
  static Objective huberized_abs(Eigen::Index dim, double delta = 1.0);
  static Objective huberized_abs(Vector center, double delta = 1.0);

  ObjectiveKind kind() const noexcept;
  Eigen::Index dim() const noexcept { return minimizer_.size(); }
  double smoothness() const noexcept { return smoothness_; }
  const Vector& minimizer() const noexcept { return minimizer_; }
  double min_value() const noexcept { return min_value_; }
  std::string describe() const;

  double eval(const Vector& x) const;
  Vector grad(const Vector& x) const;
  // Allocation-free gradient; `out` must already have size dim().
  void grad_into(const Vector& x, Vector& out) const;

  // f(x) - f*, computed without cancellation where the kind allows it.
  double gap(const Vector& x) const;

  const std::variant<QuadraticParams, LeastSquaresParams, HuberParams>& params() const noexcept {
    return params_;
  }

 private:
  Objective() = default;

  void check_dim(const Vector& x) const;

  std::variant<QuadraticParams, LeastSquaresParams, HuberParams> params_;
  double smoothness_ = 0.0;
  Vector minimizer_;
  double min_value_ = 0.0;
};

// Largest eigenvalue of a symmetric positive semidefinite matrix by power
// iteration, to the given relative accuracy.
double power_iteration(const Matrix& spd, double rel_tol = 1e-10, int max_iter = 100000);

struct RegularityReport {
  std::int64_t n_pairs = 0;
  // max ||grad f(x) - grad f(y)|| / (L ||x - y||)
  double max_smoothness_ratio = 0.0;
  // min over pairs of (f(y) - f(x) - <grad f(x), y - x>) / (1 + |f(x)|)
  double min_convexity_residual = 0.0;
  bool pass = false;
};

// Samples pairs uniformly in the radius-10 ball around the minimizer and
// checks the Lipschitz-gradient and first-order convexity inequalities.
RegularityReport verify_regularity(const Objective& obj, std::int64_t n_pairs,
                                   std::uint64_t rng_seed);

}  // namespace sgdmlab
