#include "sgdmlab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "sgdmlab/errors.hpp"
#include "sgdmlab/martingale.hpp"

namespace sgdmlab {

std::optional<int> workers_from_env() {
  const char* v = std::getenv("SGDMLAB_WORKERS");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("SGDMLAB_WORKERS must be a positive integer");
  return static_cast<int>(n);
}

void run_with_workers(std::optional<int> workers, const std::function<void()>& body) {
  if (!workers) {
    body();
    return;
  }
  if (*workers < 1) throw std::invalid_argument("workers must be positive");
  tbb::global_control limit(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(*workers));
  tbb::task_arena arena(*workers);
  arena.execute(body);
}

void PathwiseStats::merge(const PathwiseStats& o) {
  if (o.steps == 0) return;
  if (steps == 0) {
    *this = o;
    return;
  }
  steps += o.steps;
  lemma_violations += o.lemma_violations;
  mid_violations += o.mid_violations;
  decomp_violations += o.decomp_violations;
  p1_violations += o.p1_violations;
  sandwich_violations += o.sandwich_violations;
  min_lemma = std::min(min_lemma, o.min_lemma);
  min_mid = std::min(min_mid, o.min_mid);
  min_decomp = std::min(min_decomp, o.min_decomp);
  min_p1 = std::min(min_p1, o.min_p1);
  min_sandwich = std::min(min_sandwich, o.min_sandwich);
}

namespace {

void record(double residual, double scale, double tol, std::int64_t& violations, double& min_norm,
            bool first) {
  const double r = residual / scale;
  if (r < -tol) ++violations;
  min_norm = first ? r : std::min(min_norm, r);
}

}  // namespace

TrajectorySummary run_one(const Setup& setup, std::int64_t K, std::int64_t index, std::uint64_t seed,
                          const EnsembleOptions& opts, const std::vector<StoppingRule>& adversarial) {
  const Schedule& sched = setup.schedule;
  const Vector& xstar = setup.objective.minimizer();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  TrajectorySummary s;
  s.index = index;
  s.seed = seed;
  const std::size_t n_env = opts.envelopes.size();
  s.first_violation.assign(n_env, 0);
  s.adversarial_tau.assign(n_env, 0);
  s.adversarial_fgap.assign(n_env, nan);
  s.rule_tau.assign(opts.rules.size(), 0);
  s.rule_fgap.assign(opts.rules.size(), nan);

  const bool keep = index < opts.keep_traces;
  if (keep) {
    s.trace.emplace();
    for (auto* col : {&s.trace->fgap, &s.trace->E, &s.trace->S, &s.trace->M, &s.trace->residual_lemma,
                      &s.trace->residual_decomp}) {
      col->reserve(static_cast<std::size_t>(K + 1));
    }
  }

  SgdmStepper st(setup.objective, setup.noise, sched, setup.x0, seed);
  const double fgap0 = st.fgap_curr();
  s.E0 = energy(sched, 0, setup.x0, setup.x0, xstar, fgap0);
  s.sup_E = s.E0;
  s.fgap_K = fgap0;

  std::optional<LogNTracker> tracker;
  if (opts.martingale) {
    tracker.emplace(sched, opts.sigma, opts.gamma2, opts.t, s.E0);
    s.sup_logN = tracker->logN();
  }

  std::vector<RuleEvaluator> adv, rules;
  adv.reserve(n_env);
  for (const auto& r : adversarial) adv.emplace_back(r);
  rules.reserve(opts.rules.size());
  for (const auto& r : opts.rules) rules.emplace_back(r);
  for (auto& e : adv) e.observe(0, setup.x0, fgap0);
  for (auto& e : rules) e.observe(0, setup.x0, fgap0);

  if (keep) {
    s.trace->fgap.push_back(fgap0);
    s.trace->E.push_back(s.E0);
    s.trace->S.push_back(0.0);
    s.trace->M.push_back(s.E0);
    s.trace->residual_lemma.push_back(nan);
    s.trace->residual_decomp.push_back(nan);
  }

  const bool pathwise = opts.pathwise || keep;
  double S = 0.0;
  try {
    for (std::int64_t k = 1; k <= K; ++k) {
      st.advance();
      const double fgap_k = st.fgap_curr();
      const double theta_sq = st.theta().squaredNorm();
      double E_k;
      double res_lemma = nan, res_decomp = nan;
      if (pathwise) {
        const StepCheck c = check_step(window_of(st), sched, xstar);
        E_k = c.E_curr;
        res_lemma = c.residual_lemma();
        res_decomp = c.residual_decomp();
        if (opts.pathwise) {
          auto& p = s.pathwise;
          const double scale = c.scale();
          const bool first = p.steps == 0;
          record(res_lemma, scale, opts.residual_tol, p.lemma_violations, p.min_lemma, first);
          record(c.residual_mid(), scale, opts.residual_tol, p.mid_violations, p.min_mid, first);
          record(res_decomp, scale, opts.residual_tol, p.decomp_violations, p.min_decomp, first);
          record(c.residual_p1(), scale, opts.residual_tol, p.p1_violations, p.min_p1, first);
          record(c.residual_sandwich(), scale, opts.residual_tol, p.sandwich_violations, p.min_sandwich,
                 first);
          ++p.steps;
        }
      } else {
        E_k = energy(sched, k, st.x_curr(), st.x_next(), xstar, fgap_k);
      }
      S += sched.a_coeff(k) * theta_sq;
      s.sup_E = std::max(s.sup_E, E_k);
      s.sup_S = std::max(s.sup_S, S);
      if (tracker) {
        tracker->push(k, theta_sq, E_k);
        s.sup_logN = std::max(s.sup_logN, tracker->logN());
      }
      for (std::size_t j = 0; j < n_env; ++j) {
        if (s.first_violation[j] == 0 && fgap_k > opts.envelopes[j](k)) s.first_violation[j] = k;
      }
      for (auto& e : adv) e.observe(k, st.x_curr(), fgap_k);
      for (auto& e : rules) e.observe(k, st.x_curr(), fgap_k);
      if (keep) {
        s.trace->fgap.push_back(fgap_k);
        s.trace->E.push_back(E_k);
        s.trace->S.push_back(S);
        s.trace->M.push_back(E_k - S);
        s.trace->residual_lemma.push_back(res_lemma);
        s.trace->residual_decomp.push_back(res_decomp);
      }
      s.fgap_K = fgap_k;
      s.steps = k;
    }
  } catch (const DivergenceError& e) {
    s.diverged = true;
    s.divergence_step = e.step();
    s.divergence_what = e.what();
  }

  for (std::size_t j = 0; j < n_env; ++j) {
    if (adv[j].stopped()) {
      s.adversarial_tau[j] = adv[j].tau();
      s.adversarial_fgap[j] = adv[j].fgap_at_tau();
    }
  }
  for (std::size_t j = 0; j < rules.size(); ++j) {
    if (rules[j].stopped()) {
      s.rule_tau[j] = rules[j].tau();
      s.rule_fgap[j] = rules[j].fgap_at_tau();
    }
  }
  return s;
}

std::vector<TrajectorySummary> run_ensemble(const Setup& setup, std::int64_t K, std::int64_t R,
                                            std::uint64_t base_seed, const EnsembleOptions& opts) {
  if (K < 2) throw std::invalid_argument("run_ensemble: K must be >= 2");
  if (R < 1) throw std::invalid_argument("run_ensemble: R must be >= 1");
  for (const auto& r : opts.rules) {
    if (r.k_max > K) throw std::invalid_argument("run_ensemble: rule k_max exceeds K");
  }
  std::vector<StoppingRule> adversarial;
  adversarial.reserve(opts.envelopes.size());
  for (const auto& env : opts.envelopes) adversarial.push_back(StoppingRule::first_violation(env, K));

  std::vector<TrajectorySummary> out(static_cast<std::size_t>(R));
  tbb::parallel_for(std::int64_t{0}, R, [&](std::int64_t i) {
    out[static_cast<std::size_t>(i)] =
        run_one(setup, K, i, trajectory_seed(base_seed, static_cast<std::uint64_t>(i)), opts, adversarial);
  });
  return out;
}

}  // namespace sgdmlab
