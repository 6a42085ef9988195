#include "sgdmlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sgdmlab/concentration.hpp"
#include "sgdmlab/csv.hpp"
#include "sgdmlab/ensemble.hpp"
#include "sgdmlab/errors.hpp"
#include "sgdmlab/martingale.hpp"

namespace sgdmlab {

namespace {

Json interval_json(const Interval& ci) { return Json::array({ci.lo, ci.hi}); }

Json bracket_json(const Bracket& b) {
  return Json{{"lower", b.lower()}, {"upper", b.upper()}, {"terms", b.terms}};
}

Json check_record(const std::string& name, Json params, double estimate, Json ci, Json bound, bool pass,
                  Json details) {
  return Json{{"name", name},   {"params", std::move(params)}, {"estimate", estimate}, {"ci", std::move(ci)},
              {"bound", std::move(bound)}, {"pass", pass}, {"details", std::move(details)}};
}

Json coverage_json(const CoverageResult& c) {
  return Json{{"covered", c.covered}, {"R", c.R}, {"frequency", c.frequency}, {"ci", interval_json(c.ci)}};
}

Json moments_json(const std::vector<TrajectorySummary>& ens, double TrajectorySummary::*field) {
  RunningMoments m;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : ens) {
    const double v = s.*field;
    m.push(v);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return Json{{"mean", m.mean()}, {"sd", std::sqrt(m.variance())}, {"min", lo}, {"max", hi}};
}

void write_trace_csv(const std::filesystem::path& path, const TraceTable& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  CsvWriter w(out, {"k", "fgap", "E", "S", "M", "residual_lemma", "residual_decomp"});
  for (std::size_t k = 0; k < t.E.size(); ++k) {
    w.row(static_cast<std::int64_t>(k), t.fgap[k], t.E[k], t.S[k], t.M[k], t.residual_lemma[k],
          t.residual_decomp[k]);
  }
}

void write_constants_csv(const std::filesystem::path& path, const EnvelopeParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  CsvWriter w(out, {"quantity", "lower", "upper"});
  w.row("gamma1", p.gamma1.lower(), p.gamma1.upper());
  w.row("gamma2", p.gamma2.lower(), p.gamma2.upper());
  w.row("C1", p.C1, p.C1);
  w.row("C2", p.C2, p.C2);
  w.row("E0", p.E0, p.E0);
  if (p.schedule.kind == ScheduleKind::PropositionEps) {
    w.row("zeta", p.zeta, p.zeta);
    w.row("h_sigma", p.h_sigma, p.h_sigma);
    w.row("C0", p.C0, p.C0);
  }
}

bool needs_constants(const RunConfig& cfg) {
  for (const char* c : {"supermartingale", "ville", "coverage", "constants", "tail"}) {
    if (cfg.checks.count(c)) return true;
  }
  return false;
}

}  // namespace

Json config_to_json(const RunConfig& cfg) {
  Json o{{"kind", cfg.objective.kind}};
  if (!cfg.objective.diag.empty()) o["diag"] = cfg.objective.diag;
  if (!cfg.objective.center.empty()) o["center"] = cfg.objective.center;
  if (!cfg.objective.A.empty()) o["A"] = cfg.objective.A;
  if (!cfg.objective.b.empty()) o["b"] = cfg.objective.b;
  if (cfg.objective.kind == "huberized_abs") {
    o["dim"] = cfg.objective.dim;
    o["delta"] = cfg.objective.delta;
  }
  Json s{{"kind", cfg.schedule.kind}};
  if (cfg.schedule.L) s["L"] = *cfg.schedule.L;
  if (cfg.schedule.kind == "proposition_eps") {
    s["epsilon"] = cfg.schedule.epsilon;
    s["c0_prime"] = cfg.schedule.c0_prime;
  }
  Json rules = Json::array();
  for (const auto& r : cfg.rules) {
    Json j{{"kind", r.kind}, {"epsilon", r.epsilon}};
    if (r.k_max) j["k_max"] = *r.k_max;
    rules.push_back(j);
  }
  return Json{
      {"objective", o},
      {"noise", {{"kind", cfg.noise.kind}, {"sigma", cfg.noise.sigma}}},
      {"schedule", s},
      {"x0", cfg.x0},
      {"K", cfg.K},
      {"R", cfg.R},
      {"base_seed", cfg.base_seed},
      {"betas", cfg.betas},
      {"rules", rules},
      {"checks", std::vector<std::string>(cfg.checks.begin(), cfg.checks.end())},
      {"output_dir", cfg.output_dir.generic_string()},
      {"tolerances", {{"residual", cfg.tolerances.residual}, {"gamma", cfg.tolerances.gamma}}},
      {"supermartingale",
       {{"ks", cfg.supermartingale.ks},
        {"branches", cfg.supermartingale.branches},
        {"trajectory", cfg.supermartingale.trajectory}}},
      {"ville", {{"target", cfg.ville.target}}},
      {"mgf", {{"lambdas", cfg.mgf.lambdas}, {"samples", cfg.mgf.samples}}},
      {"tail", {{"omegas", cfg.tail.omegas}, {"runs", cfg.tail.runs}, {"prefix", cfg.tail.prefix}}},
      {"output", {{"max_trajectory_csv", cfg.output.max_trajectory_csv}}},
  };
}

namespace {

Report run_checks(const RunConfig& cfg) {
  const Setup setup = build_setup(cfg);
  const Schedule& sched = setup.schedule;
  const Objective& obj = setup.objective;
  const double sigma = setup.noise.sigma_certificate;
  const double E0 = energy(sched, 0, setup.x0, setup.x0, obj.minimizer(), obj.gap(setup.x0));

  std::optional<EnvelopeParams> consts;
  if (needs_constants(cfg)) consts = envelope_constants(sched, sigma, E0, cfg.tolerances.gamma);
  const double g2 = consts ? consts->gamma2.upper() : 1.0;
  const double t = 1.0 / g2;  // B / gamma2 with B = 1

  EnsembleOptions opts;
  opts.pathwise = cfg.checks.count("descent") || cfg.checks.count("decomposition");
  opts.residual_tol = cfg.tolerances.residual;
  opts.martingale = cfg.checks.count("ville") > 0;
  opts.sigma = sigma;
  opts.gamma2 = g2;
  opts.t = t;
  const bool cov = cfg.checks.count("coverage") > 0;
  if (cov) {
    for (double beta : cfg.betas) opts.envelopes.push_back(make_envelope(*consts, beta));
  }
  for (const auto& r : cfg.rules) {
    const auto k_max = r.k_max.value_or(cfg.K);
    const auto kind = rule_kind_from_string(r.kind);
    opts.rules.push_back(kind == RuleKind::IterateDelta ? StoppingRule::iterate_delta(r.epsilon, k_max)
                         : kind == RuleKind::ValueDelta ? StoppingRule::value_delta(r.epsilon, k_max)
                                                        : StoppingRule::fixed_k(k_max));
  }
  opts.keep_traces = std::min(cfg.output.max_trajectory_csv, cfg.R);

  const auto ensemble = run_ensemble(setup, cfg.K, cfg.R, cfg.base_seed, opts);
  std::int64_t n_diverged = 0;
  for (const auto& s : ensemble) n_diverged += s.diverged ? 1 : 0;

  std::filesystem::create_directories(cfg.output_dir);
  for (const auto& s : ensemble) {
    if (s.trace) write_trace_csv(cfg.output_dir / ("trajectory_" + std::to_string(s.index) + ".csv"), *s.trace);
  }

  Json checks = Json::array();
  bool all_pass = true;
  auto add = [&](Json rec) {
    all_pass = all_pass && rec["pass"].get<bool>();
    checks.push_back(std::move(rec));
  };

  if (cfg.checks.count("descent")) {
    PathwiseStats p;
    for (const auto& s : ensemble) p.merge(s.pathwise);
    const bool pass = n_diverged == 0 && p.lemma_violations == 0 && p.p1_violations == 0 &&
                      p.sandwich_violations == 0;
    add(check_record("descent", {{"tolerance", cfg.tolerances.residual}, {"steps", p.steps}}, p.min_lemma,
                     nullptr, -cfg.tolerances.residual, pass,
                     {{"lemma_violations", p.lemma_violations},
                      {"p1_violations", p.p1_violations},
                      {"sandwich_violations", p.sandwich_violations},
                      {"min_residual_p1", p.min_p1},
                      {"min_residual_sandwich", p.min_sandwich},
                      {"diverged", n_diverged}}));
  }

  if (cfg.checks.count("decomposition")) {
    PathwiseStats p;
    for (const auto& s : ensemble) p.merge(s.pathwise);
    const bool pass = n_diverged == 0 && p.decomp_violations == 0 && p.mid_violations == 0;
    add(check_record("decomposition", {{"tolerance", cfg.tolerances.residual}, {"steps", p.steps}},
                     p.min_decomp, nullptr, -cfg.tolerances.residual, pass,
                     {{"decomp_violations", p.decomp_violations},
                      {"mid_violations", p.mid_violations},
                      {"min_residual_mid", p.min_mid},
                      {"diverged", n_diverged}}));
  }

  if (cfg.checks.count("supermartingale")) {
    SupermartingaleSetup sm{&obj, &setup.noise, &sched, setup.x0, sigma, g2, 1.0};
    const auto prefix_seed =
        trajectory_seed(cfg.base_seed, static_cast<std::uint64_t>(cfg.supermartingale.trajectory));
    Json per_k = Json::array();
    bool pass = true;
    double worst = -INFINITY;
    for (auto k : cfg.supermartingale.ks) {
      const auto r = check_supermartingale(sm, prefix_seed, k, t, cfg.supermartingale.branches);
      pass = pass && r.pass;
      worst = std::max(worst, r.estimate);
      per_k.push_back(Json{{"k", k},
                           {"estimate", r.estimate},
                           {"ci_halfwidth", r.ci_halfwidth},
                           {"bootstrap_upper99", r.bootstrap_upper99},
                           {"n_branches", r.n_branches},
                           {"deterministic", r.deterministic},
                           {"pass", r.pass}});
    }
    add(check_record("supermartingale",
                     {{"t", t}, {"gamma2", g2}, {"branches", cfg.supermartingale.branches},
                      {"ks", cfg.supermartingale.ks}},
                     worst, nullptr, 0.0, pass, {{"per_k", per_k}}));
  }

  if (cfg.checks.count("ville")) {
    std::vector<double> sups;
    sups.reserve(ensemble.size());
    for (const auto& s : ensemble) sups.push_back(s.diverged ? INFINITY : s.sup_logN);
    const double alpha = ville_alpha_for_bound(cfg.ville.target, t, g2, E0);
    const auto v = ville_monitor(sups, t, alpha, g2, E0);
    add(check_record("ville", {{"t", t}, {"alpha", alpha}, {"target", cfg.ville.target}}, v.empirical_rate,
                     interval_json(v.ci), v.bound, v.pass, {{"exceedances", v.exceedances}, {"R", v.R}}));
  }

  if (cfg.checks.count("mgf")) {
    MgfCheckConfig mc{cfg.mgf.lambdas, cfg.mgf.samples, setup.noise, Vector::Unit(obj.dim(), 0),
                      derive_key(cfg.base_seed, 0x6d6766ULL)};
    const auto pts = mgf_check(mc);
    Json per = Json::array();
    bool pass = true;
    double worst = 0.0;
    for (const auto& p : pts) {
      pass = pass && p.pass;
      worst = std::max(worst, p.estimate / p.bound);
      per.push_back(Json{{"lambda", p.lambda},
                         {"estimate", p.estimate},
                         {"std_error", p.std_error},
                         {"bound", p.bound},
                         {"oracle", p.oracle},
                         {"skipped", p.skipped},
                         {"pass", p.pass}});
    }
    add(check_record("mgf", {{"samples", cfg.mgf.samples}, {"lambdas", cfg.mgf.lambdas}}, worst, nullptr, 1.0,
                     pass, {{"per_lambda", per}}));
  }

  if (cfg.checks.count("tail")) {
    std::vector<double> c;
    for (std::int64_t l = 1; l <= cfg.tail.prefix; ++l) c.push_back(sched.a_coeff(l));
    const auto pts = weighted_square_tail_check(c, setup.noise, cfg.tail.omegas, cfg.tail.runs,
                                                derive_key(cfg.base_seed, 0x7461696cULL));
    Json per = Json::array();
    bool pass = true;
    double worst = 0.0;
    for (const auto& p : pts) {
      pass = pass && p.pass;
      worst = std::max(worst, p.frequency - p.bound);
      per.push_back(Json{{"omega", p.omega},
                         {"threshold", p.threshold},
                         {"frequency", p.frequency},
                         {"ci", interval_json(p.ci)},
                         {"bound", p.bound},
                         {"pass", p.pass}});
    }
    Json s_tail = Json::array();
    for (double beta : cfg.betas) {
      const double thr = s_tail_threshold(*consts, beta);
      std::vector<std::uint8_t> exceed;
      for (const auto& s : ensemble) exceed.push_back(s.diverged || s.sup_S >= thr);
      const auto cr = coverage_from_indicators(exceed);
      const bool ok = cr.ci.lo <= beta;
      pass = pass && ok;
      s_tail.push_back(Json{{"beta", beta},
                            {"threshold", thr},
                            {"frequency", cr.frequency},
                            {"ci", interval_json(cr.ci)},
                            {"bound", beta},
                            {"pass", ok}});
    }
    add(check_record("tail", {{"runs", cfg.tail.runs}, {"prefix", cfg.tail.prefix}, {"omegas", cfg.tail.omegas}},
                     worst, nullptr, 0.0, pass, {{"per_omega", per}, {"sup_S", s_tail}}));
  }

  if (cov) {
    std::ofstream csv(cfg.output_dir / "coverage.csv", std::ios::binary);
    CsvWriter w(csv, {"beta", "rule", "R", "K", "frequency", "ci_lo", "ci_hi", "bound", "pass"});
    Json per_beta = Json::array();
    bool pass = true;
    double worst = 1.0;
    Interval worst_ci{1.0, 1.0};
    double worst_bound = 0.0;
    double worst_margin = INFINITY;
    for (std::size_t j = 0; j < cfg.betas.size(); ++j) {
      const double beta = cfg.betas[j];
      const double bound = 1.0 - 2.0 * beta;
      const auto& env = opts.envelopes[j];
      std::vector<std::uint8_t> sup_ind, adv_ind;
      std::vector<std::vector<std::uint8_t>> rule_ind(opts.rules.size());
      std::int64_t mismatches = 0, dominance_failures = 0;
      std::vector<std::uint8_t> gron;
      const double gthr = gronwall_threshold(*consts, beta);
      for (const auto& s : ensemble) {
        const bool sup_ok = !s.diverged && s.first_violation[j] == 0;
        const bool adv_ok = !s.diverged && s.adversarial_fgap[j] <= env(s.adversarial_tau[j]);
        sup_ind.push_back(sup_ok);
        adv_ind.push_back(adv_ok);
        mismatches += sup_ok != adv_ok;
        for (std::size_t r = 0; r < opts.rules.size(); ++r) {
          const bool ok = !s.diverged && s.rule_fgap[r] <= env(s.rule_tau[r]);
          rule_ind[r].push_back(ok);
          dominance_failures += adv_ok && !ok;
        }
        gron.push_back(s.diverged || s.sup_E >= gthr);
      }
      const auto sup_c = coverage_from_indicators(sup_ind);
      const auto adv_c = coverage_from_indicators(adv_ind);
      const auto gron_c = coverage_from_indicators(gron);
      const bool sup_pass = coverage_pass(sup_c, beta);
      const bool adv_pass = coverage_pass(adv_c, beta);
      const bool gron_pass = gron_c.ci.lo <= 2.0 * beta;
      w.row(beta, "sup", cfg.R, cfg.K, sup_c.frequency, sup_c.ci.lo, sup_c.ci.hi, bound, sup_pass ? "true" : "false");
      w.row(beta, "adversarial", cfg.R, cfg.K, adv_c.frequency, adv_c.ci.lo, adv_c.ci.hi, bound,
            adv_pass ? "true" : "false");
      Json rules = Json::array();
      bool rules_pass = true;
      for (std::size_t r = 0; r < opts.rules.size(); ++r) {
        const auto rc = coverage_from_indicators(rule_ind[r]);
        const bool ok = coverage_pass(rc, beta);
        rules_pass = rules_pass && ok;
        w.row(beta, opts.rules[r].describe(), cfg.R, cfg.K, rc.frequency, rc.ci.lo, rc.ci.hi, bound,
              ok ? "true" : "false");
        Json rj = coverage_json(rc);
        rj["rule"] = opts.rules[r].describe();
        rj["pass"] = ok;
        rules.push_back(rj);
      }
      const bool beta_pass =
          sup_pass && adv_pass && rules_pass && gron_pass && mismatches == 0 && dominance_failures == 0;
      pass = pass && beta_pass;
      if (sup_c.ci.lo - bound < worst_margin) {
        worst_margin = sup_c.ci.lo - bound;
        worst = sup_c.frequency;
        worst_ci = sup_c.ci;
        worst_bound = bound;
      }
      per_beta.push_back(Json{{"beta", beta},
                              {"bound", bound},
                              {"sup", coverage_json(sup_c)},
                              {"adversarial", coverage_json(adv_c)},
                              {"identity_mismatches", mismatches},
                              {"rules", rules},
                              {"dominance_failures", dominance_failures},
                              {"gronwall", {{"threshold", gthr}, {"frequency", gron_c.frequency},
                                            {"ci", interval_json(gron_c.ci)}, {"bound", 2.0 * beta},
                                            {"pass", gron_pass}}},
                              {"pass", beta_pass}});
    }
    add(check_record("coverage", {{"betas", cfg.betas}, {"K", cfg.K}, {"R", cfg.R}, {"k0", cfg.K - 1}}, worst,
                     interval_json(worst_ci), worst_bound, pass, {{"per_beta", per_beta}}));
  }

  if (consts) write_constants_csv(cfg.output_dir / "constants.csv", *consts);

  if (cfg.checks.count("constants")) {
    const auto& p = *consts;
    bool pass = std::isfinite(p.gamma1.upper()) && std::isfinite(p.gamma2.upper()) && std::isfinite(p.C1) &&
                std::isfinite(p.C2) && p.gamma1.lower() > 0.0 && p.gamma2.lower() >= 1.0;
    Json details{{"gamma1", bracket_json(p.gamma1)}, {"gamma2", bracket_json(p.gamma2)}, {"C1", p.C1},
                 {"C2", p.C2}, {"E0", p.E0}};
    double bound = INFINITY;
    if (sched.kind == ScheduleKind::PropositionEps) {
      bound = p.zeta;
      const bool g1_ok = p.gamma1.upper() <= p.zeta;
      const bool g2_ok = p.gamma2.upper() <= std::exp(sigma * sigma * p.zeta);
      pass = pass && g1_ok && g2_ok;
      details["zeta"] = p.zeta;
      details["h_sigma"] = p.h_sigma;
      details["C0"] = p.C0;
      details["gamma1_le_zeta"] = g1_ok;
      details["gamma2_le_exp_sigma2_zeta"] = g2_ok;
    }
    add(check_record("constants", {{"schedule", sched.describe()}, {"sigma", sigma}, {"tol", cfg.tolerances.gamma}},
                     p.gamma1.lower(), Json::array({p.gamma1.lower(), p.gamma1.upper()}),
                     std::isfinite(bound) ? Json(bound) : Json(nullptr), pass, details));
  }

  Json summary{{"trajectories", cfg.R},
               {"diverged", n_diverged},
               {"E0", E0},
               {"fgap_K", moments_json(ensemble, &TrajectorySummary::fgap_K)},
               {"sup_E", moments_json(ensemble, &TrajectorySummary::sup_E)},
               {"sup_S", moments_json(ensemble, &TrajectorySummary::sup_S)}};
  Json failures = Json::array();
  for (const auto& s : ensemble) {
    if (s.diverged) failures.push_back(Json{{"index", s.index}, {"step", s.divergence_step}, {"what", s.divergence_what}});
  }
  summary["failures"] = failures;

  Report rep;
  rep.pass = all_pass;
  rep.json = Json{{"schema_version", kReportSchemaVersion},
                  {"software", {{"name", "sgdmlab"}, {"version", kSoftwareVersion}}},
                  {"config", config_to_json(cfg)},
                  {"setup", {{"objective", obj.describe()}, {"noise", to_string(setup.noise.kind)},
                             {"sigma", sigma}, {"schedule", sched.describe()}, {"L", sched.L}}},
                  {"checks", checks},
                  {"summary", summary},
                  {"pass", all_pass}};
  std::ofstream out(cfg.output_dir / "report.json", std::ios::binary);
  out << rep.json.dump(2) << '\n';
  return rep;
}

}  // namespace

Report run_experiment(const RunConfig& cfg, std::optional<int> workers) {
  if (auto errs = validate(cfg); !errs.empty()) throw ConfigError(errs);
  Report rep;
  run_with_workers(workers ? workers : workers_from_env(), [&] { rep = run_checks(cfg); });
  return rep;
}

std::string render_summary(const Json& report) {
  std::ostringstream os;
  for (const auto& c : report.at("checks")) {
    os << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>()
       << "  estimate=" << c.at("estimate").dump() << "  bound=" << c.at("bound").dump();
    if (!c.at("ci").is_null()) os << "  ci=" << c.at("ci").dump();
    os << '\n';
  }
  os << "overall: " << (report.at("pass").get<bool>() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

}  // namespace sgdmlab
