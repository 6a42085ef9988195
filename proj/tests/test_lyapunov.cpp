#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/zeta.hpp>

#include "sgdmlab/csv.hpp"
#include "sgdmlab/lyapunov.hpp"
#include "support/oracles.hpp"

using namespace sgdmlab;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

struct Case {
  Objective obj;
  NoiseModel noise;
  Vector x0;
};

std::vector<Case> cases() {
  Matrix A(6, 5);
  for (Eigen::Index i = 0; i < 6; ++i)
    for (Eigen::Index j = 0; j < 5; ++j) A(i, j) = std::sin(1.0 + 3.0 * i + j) + (i == j ? 2.0 : 0.0);
  Vector b(6);
  b << 1, -1, 2, 0, 0.5, 3;
  std::vector<Case> out;
  for (auto kind : {NoiseKind::None, NoiseKind::GaussianIsotropic, NoiseKind::BoundedSphere}) {
    out.push_back({Objective::quadratic(scalar(1.0)), calibrate(kind, 1, kind == NoiseKind::None ? 0.0 : 1.0), scalar(2.0)});
    out.push_back({Objective::least_squares(A, b), calibrate(kind, 5, kind == NoiseKind::None ? 0.0 : 1.0),
                   Vector::Constant(5, 1.0)});
    out.push_back({Objective::huberized_abs(3), calibrate(kind, 3, kind == NoiseKind::None ? 0.0 : 1.0),
                   Vector::Constant(3, 5.0)});
  }
  return out;
}

// Both sides of the lemma evaluated directly from stored data in long double.
long double lemma_rhs_minus_lhs(const Trajectory& t, const Schedule& s, const Objective& f, std::int64_t k) {
  using ld = long double;
  auto sq = [](const Vector& v) {
    ld acc = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += static_cast<ld>(v[i]) * v[i];
    return acc;
  };
  auto dot = [](const Vector& a, const Vector& b) {
    ld acc = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) acc += static_cast<ld>(a[i]) * b[i];
    return acc;
  };
  const Vector& xs = f.minimizer();
  auto E = [&](std::int64_t j) {
    const Vector w = t.x(j + 1) + static_cast<double>(j + 1) * (t.x(j + 1) - t.x(j)) - xs;
    return sq(w) + 4.0L * std::sqrt(static_cast<ld>(j + 1) * s.eta(j)) * t.fgap(j);
  };
  const ld kd = static_cast<ld>(k);
  const ld eta = s.eta(k);
  const ld r = std::sqrt(eta / kd);
  const Vector grad = f.grad(t.x(k));
  const Vector ph = static_cast<double>(k) * (t.x(k) - t.x(k - 1)) + (t.x(k) - xs);
  const ld rhs = 4.0L * eta / kd * sq(t.g(k)) - (2.0L / s.L) * r * sq(grad) - 2.0L * r * t.fgap(k) +
                 4.0L * r * dot(t.theta(k), ph);
  return rhs - (E(k) - E(k - 1));
}

}  // namespace

TEST(Lyapunov, InitialEnergyExample) {
  const auto f = Objective::quadratic(scalar(1.0));
  const auto s = Schedule::theorem_main(1.0);
  const auto t = run_trajectory(f, calibrate(NoiseKind::None, 1, 0.0), s, scalar(2.0), 3, 1);
  EXPECT_NEAR(lyapunov_E(t, s, f, 0), 4.0 + 2.0 / std::log(2.0), 1e-14);
  EXPECT_NEAR(lyapunov_E(t, s, f, 0), 6.885390, 1e-6);
  const auto z = run_trajectory(f, calibrate(NoiseKind::None, 1, 0.0), s, scalar(0.0), 3, 1);
  EXPECT_EQ(lyapunov_E(z, s, f, 0), 0.0);
  EXPECT_THROW(lyapunov_E(t, s, f, 4), std::invalid_argument);
  EXPECT_THROW(lyapunov_E(t, s, f, -1), std::invalid_argument);
}

TEST(Lyapunov, PhiExamples) {
  const auto f = Objective::quadratic(scalar(1.0));
  const auto s = Schedule::theorem_main(1.0);
  const auto t = run_trajectory(f, calibrate(NoiseKind::None, 1, 0.0), s, scalar(2.0), 3, 1);
  EXPECT_EQ(phi(t, f, 1)[0], 2.0);
  const auto z = run_trajectory(f, calibrate(NoiseKind::None, 1, 0.0), s, scalar(0.0), 3, 1);
  EXPECT_EQ(phi(z, f, 2)[0], 0.0);
  EXPECT_THROW(phi(t, f, 0), std::invalid_argument);
}

TEST(Lyapunov, PathwiseInequalitiesAcrossGrid) {
  for (const auto& c : cases()) {
    const auto s = Schedule::theorem_main(c.obj.smoothness());
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto t = run_trajectory(c.obj, c.noise, s, c.x0, 2000, seed);
      const auto tr = lyapunov_trace(t, s, c.obj);
      ASSERT_EQ(tr.E.size(), 2001u);
      for (std::int64_t k = 1; k <= t.K; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        ASSERT_GE(tr.descent_residual[i], -tr.tol[i]) << c.obj.describe() << " k=" << k;
        ASSERT_GE(tr.decomp_residual[i], -tr.tol[i]) << c.obj.describe() << " k=" << k;
        const auto mid = check_decomposition(t, s, c.obj, k).residual_mid;
        ASSERT_GE(mid, -tr.tol[i]);
        // P1 and the sandwich, against E(k)
        const double Ek = tr.E[static_cast<std::size_t>(k)];
        ASSERT_LE(phi(t, c.obj, k + 1).squaredNorm(), Ek + tr.tol[i]);
        ASSERT_LE(4.0 * std::sqrt((k + 1) * s.eta(k)) * t.fgap(k), Ek + tr.tol[i]);
        ASSERT_GE(Ek, 0.0);
      }
    }
  }
}

TEST(Lyapunov, ResidualMatchesDirectEvaluation) {
  for (const auto& c : cases()) {
    const auto s = Schedule::theorem_main(c.obj.smoothness());
    const auto t = run_trajectory(c.obj, c.noise, s, c.x0, 300, 3);
    for (std::int64_t k = 1; k <= 300; ++k) {
      const double lib = check_descent_lemma(t, s, c.obj, k);
      const double ref = static_cast<double>(lemma_rhs_minus_lhs(t, s, c.obj, k));
      const double scale = 1.0 + std::abs(lyapunov_E(t, s, c.obj, k)) + std::abs(lyapunov_E(t, s, c.obj, k - 1));
      ASSERT_NEAR(lib, ref, 1e-12 * scale) << c.obj.describe() << " k=" << k;
    }
  }
}

TEST(Lyapunov, ZeroNoiseResidualsAndDecay) {
  const auto s = Schedule::theorem_main(1.0);
  const auto f = Objective::quadratic(scalar(1.0));
  const auto t = run_trajectory(f, calibrate(NoiseKind::None, 1, 0.0), s, scalar(2.0), 5000, 1);
  const auto tr = lyapunov_trace(t, s, f);
  for (std::size_t i = 0; i < tr.rhs_decomp.size(); ++i) {
    EXPECT_EQ(tr.rhs_decomp[i], 0.0);
    EXPECT_GE(tr.descent_residual[i], -1e-12 * (1.0 + std::abs(tr.E[i]) + std::abs(tr.E[i + 1])));
    EXPECT_LE(tr.E[i + 1] - tr.E[i], tr.tol[i]);
  }
}

TEST(Lyapunov, StartAtMinimizer) {
  const auto s = Schedule::theorem_main(1.0);
  const auto f = Objective::huberized_abs(2);
  const auto t = run_trajectory(f, calibrate(NoiseKind::None, 2, 0.0), s, Vector::Zero(2), 20, 1);
  for (std::int64_t k = 1; k <= 20; ++k) EXPECT_GE(check_descent_lemma(t, s, f, k), 0.0);
  EXPECT_THROW(check_descent_lemma(t, s, f, 0), std::invalid_argument);
  EXPECT_THROW(check_descent_lemma(t, s, f, 21), std::invalid_argument);
}

TEST(Lyapunov, InjectedZeroNoiseStep) {
  const auto s = Schedule::theorem_main(1.0);
  const auto f = Objective::quadratic(Vector::Constant(2, 1.0));
  const auto noise = calibrate(NoiseKind::GaussianIsotropic, 2, 1.0);
  SgdmStepper st(f, noise, s, Vector::Constant(2, 2.0), 4);
  for (int i = 0; i < 7; ++i) st.advance();
  st.advance_with(Vector::Zero(2));
  const auto c = check_step(window_of(st), s, f.minimizer());
  EXPECT_EQ(c.rhs_decomp, 0.0);
  EXPECT_LE(c.dE(), 1e-9 * c.scale());
  EXPECT_EQ(check_step(window_of(st), s, f.minimizer(), 0.25).rhs_decomp, 0.25);
}

TEST(Lyapunov, DeepCheckChain) {
  for (const auto& c : cases()) {
    const auto s = Schedule::theorem_main(c.obj.smoothness());
    const auto t = run_trajectory(c.obj, c.noise, s, c.x0, 500, 8);
    for (std::int64_t k = 1; k <= 500; ++k) {
      const auto d = deep_check(t, s, c.obj, k);
      const double tol = 1e-9 * (1.0 + std::abs(lyapunov_E(t, s, c.obj, k)) + std::abs(lyapunov_E(t, s, c.obj, k - 1)));
      ASSERT_LE(d.dE, d.diff_bound + tol);
      ASSERT_LE(d.diff_bound, d.expanded + tol);
      ASSERT_NEAR(d.expanded, d.substituted, tol);
      ASSERT_LE(d.substituted, d.rhs_lemma + tol);
      ASSERT_LE(d.identity_defect, 1e-12 * (1.0 + d.identity_scale));
    }
  }
}

TEST(Lyapunov, CsvExport) {
  const auto s = Schedule::theorem_main(1.0);
  const auto f = Objective::quadratic(scalar(1.0));
  const auto t = run_trajectory(f, calibrate(NoiseKind::GaussianIsotropic, 1, 1.0), s, scalar(2.0), 10, 1);
  const auto tr = lyapunov_trace(t, s, f);
  std::stringstream ss;
  write_lyapunov_csv(tr, ss);
  const auto table = read_csv(ss);
  EXPECT_EQ(table.header,
            (std::vector<std::string>{"k", "E", "dE", "rhs_lemma", "rhs_decomp", "residual_lemma", "residual_decomp"}));
  ASSERT_EQ(table.rows.size(), 10u);
  EXPECT_EQ(parse_double(table.rows[3][table.column("E")]), tr.E[4]);
  EXPECT_EQ(parse_double(table.rows[3][table.column("residual_decomp")]), tr.decomp_residual[3]);
}

TEST(Envelope, FormulaExamples) {
  EnvelopeParams p;
  p.schedule = Schedule::theorem_main(1.0);
  p.C1 = 1.0;
  p.C2 = 1.0;
  EXPECT_NEAR(envelope_U(p, std::exp(-1.0), 0), 2.0 * std::log(2.0), 1e-15);
  EXPECT_THROW(envelope_U(p, 0.5, 3), std::invalid_argument);
  EXPECT_THROW(envelope_U(p, 0.0, 3), std::invalid_argument);
  for (std::int64_t k : {0, 1, 10, 1000}) {
    EXPECT_GT(envelope_U(p, 0.1, k), envelope_U(p, 0.4, k));
  }
  const double ref = envelope_U(p, 0.05, 0) / std::log(2.0);
  for (std::int64_t k : {1, 7, 100, 100000}) {
    const double kd = static_cast<double>(k);
    EXPECT_NEAR(envelope_U(p, 0.05, k) * std::sqrt(kd + 1.0) / std::log(kd + 2.0), ref, 1e-12 * ref);
  }
}

TEST(Envelope, SigmaZeroCollapse) {
  for (double L : {1.0, 2.5}) {
    const auto p = envelope_constants(Schedule::theorem_main(L), 0.0, 3.7, 1e-6);
    EXPECT_EQ(p.gamma2.lower(), 1.0);
    EXPECT_EQ(p.gamma2.upper(), 1.0);
    EXPECT_EQ(p.C1, L * 3.7);
    EXPECT_EQ(p.C2, L);
  }
}

TEST(Envelope, ConstantsFollowFormulas) {
  const auto p = envelope_constants(Schedule::theorem_main(1.0), 1.0, 2.0, 1e-6);
  const double g1 = p.gamma1.upper(), g2 = p.gamma2.upper();
  EXPECT_DOUBLE_EQ(p.C1, g2 * 2.0 + (1.0 + g1 * g2) * g1);
  EXPECT_DOUBLE_EQ(p.C2, g2 + (1.0 + g1 * g2) * g1);
  EXPECT_GE(p.gamma2.lower(), 1.0);
  EXPECT_THROW(envelope_constants(Schedule::theorem_main(1.0), 1.0, 2.0, 1e-2), std::invalid_argument);
}

TEST(Envelope, PropositionVariant) {
  const auto s = Schedule::proposition_eps(1.0, 0.3);
  const auto p = envelope_constants(s, 1.0, 2.0, 1e-6);
  EXPECT_NEAR(p.zeta, boost::math::zeta(1.3), 1e-10 * p.zeta);
  EXPECT_NEAR(p.h_sigma, std::exp(p.zeta) * p.zeta * p.zeta, 1e-12 * p.h_sigma);
  for (double beta : {0.01, 0.05, 0.2, 0.45}) {
    const double lb = std::log(1.0 / beta);
    EXPECT_GE(p.C0 * p.h_sigma * (1.0 + lb), std::sqrt(s.c0_prime) * (p.C1 + p.C2 * lb) * (1.0 - 1e-12));
  }
  const double u = envelope_U(p, 0.05, 10);
  EXPECT_NEAR(u, p.C0 * p.h_sigma * (1.0 + std::log(20.0)) * std::pow(std::log(12.0), 0.65) / std::sqrt(11.0),
              1e-12 * u);
}

TEST(Zeta, ClosedForms) {
  const double pi = std::numbers::pi;
  EXPECT_NEAR(riemann_zeta(2.0), pi * pi / 6.0, 1e-10 * pi * pi / 6.0);
  EXPECT_NEAR(riemann_zeta(4.0), std::pow(pi, 4) / 90.0, 1e-10);
  EXPECT_THROW(riemann_zeta(1.0), std::invalid_argument);
  EXPECT_THROW(riemann_zeta(0.5), std::invalid_argument);
}

TEST(Zeta, MatchesIndependentOracles) {
  const auto b = oracle::zeta_bracket(1.5, 2000000);
  EXPECT_GE(riemann_zeta(1.5), b.lower - 1e-12);
  EXPECT_LE(riemann_zeta(1.5), b.upper + 1e-12);
  for (double s : {1.01, 1.1, 1.3, 1.49, 1.5, 2.5, 3.0, 7.0}) {
    EXPECT_NEAR(riemann_zeta(s), boost::math::zeta(s), 1e-10 * boost::math::zeta(s)) << s;
  }
}
