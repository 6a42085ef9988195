#include "sgdmlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "sgdmlab/errors.hpp"

namespace sgdmlab {

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>& errs) : errs_(errs) {}

  void keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) {
      errs_.push_back(path + ": expected a mapping");
      return;
    }
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        errs_.push_back((path.empty() ? "" : path + ".") + key + ": unknown key");
      }
    }
  }

  template <class T>
  void get(const YAML::Node& node, const char* key, const std::string& path, T& out) {
    const auto child = node[key];
    if (!child) return;
    try {
      out = child.as<T>();
    } catch (const YAML::Exception&) {
      errs_.push_back(join(path, key) + ": wrong type");
    }
  }

  template <class T>
  void get(const YAML::Node& node, const char* key, const std::string& path, std::optional<T>& out) {
    const auto child = node[key];
    if (!child) return;
    try {
      out = child.as<T>();
    } catch (const YAML::Exception&) {
      errs_.push_back(join(path, key) + ": wrong type");
    }
  }

  static std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
  }

 private:
  std::vector<std::string>& errs_;
};

RunConfig from_yaml(const YAML::Node& root) {
  std::vector<std::string> errs;
  Reader rd(errs);
  RunConfig cfg;
  if (!root || !root.IsMap()) throw ConfigError("config: top level must be a mapping");

  rd.keys(root, "", {"objective", "noise", "schedule", "x0", "K", "R", "base_seed", "betas", "rules",
                     "checks", "output_dir", "tolerances", "supermartingale", "ville", "mgf", "tail",
                     "output"});

  if (auto n = root["objective"]) {
    rd.keys(n, "objective", {"kind", "diag", "center", "A", "b", "dim", "delta"});
    rd.get(n, "kind", "objective", cfg.objective.kind);
    rd.get(n, "diag", "objective", cfg.objective.diag);
    rd.get(n, "center", "objective", cfg.objective.center);
    rd.get(n, "A", "objective", cfg.objective.A);
    rd.get(n, "b", "objective", cfg.objective.b);
    rd.get(n, "dim", "objective", cfg.objective.dim);
    rd.get(n, "delta", "objective", cfg.objective.delta);
  } else {
    errs.push_back("objective: missing");
  }
  if (auto n = root["noise"]) {
    rd.keys(n, "noise", {"kind", "sigma"});
    rd.get(n, "kind", "noise", cfg.noise.kind);
    rd.get(n, "sigma", "noise", cfg.noise.sigma);
  }
  if (auto n = root["schedule"]) {
    rd.keys(n, "schedule", {"kind", "L", "epsilon", "c0_prime"});
    rd.get(n, "kind", "schedule", cfg.schedule.kind);
    rd.get(n, "L", "schedule", cfg.schedule.L);
    rd.get(n, "epsilon", "schedule", cfg.schedule.epsilon);
    rd.get(n, "c0_prime", "schedule", cfg.schedule.c0_prime);
  }
  rd.get(root, "x0", "", cfg.x0);
  if (!root["K"]) errs.push_back("K: missing");
  if (!root["R"]) errs.push_back("R: missing");
  rd.get(root, "K", "", cfg.K);
  rd.get(root, "R", "", cfg.R);
  rd.get(root, "base_seed", "", cfg.base_seed);
  rd.get(root, "betas", "", cfg.betas);
  if (auto n = root["rules"]) {
    if (!n.IsSequence()) {
      errs.push_back("rules: expected a sequence");
    } else {
      for (std::size_t i = 0; i < n.size(); ++i) {
        const std::string path = "rules[" + std::to_string(i) + "]";
        RuleSpec r;
        rd.keys(n[i], path, {"kind", "epsilon", "k_max"});
        if (n[i].IsMap()) {
          rd.get(n[i], "kind", path, r.kind);
          rd.get(n[i], "epsilon", path, r.epsilon);
          rd.get(n[i], "k_max", path, r.k_max);
        }
        cfg.rules.push_back(r);
      }
    }
  }
  if (auto n = root["checks"]) {
    std::vector<std::string> checks;
    rd.get(root, "checks", "", checks);
    for (const auto& c : checks) {
      if (!cfg.checks.insert(c).second) errs.push_back("checks: duplicate '" + c + "'");
    }
  }
  std::string output_dir = cfg.output_dir.string();
  rd.get(root, "output_dir", "", output_dir);
  cfg.output_dir = output_dir;
  if (auto n = root["tolerances"]) {
    rd.keys(n, "tolerances", {"residual", "gamma"});
    rd.get(n, "residual", "tolerances", cfg.tolerances.residual);
    rd.get(n, "gamma", "tolerances", cfg.tolerances.gamma);
  }
  if (auto n = root["supermartingale"]) {
    rd.keys(n, "supermartingale", {"ks", "branches", "trajectory"});
    rd.get(n, "ks", "supermartingale", cfg.supermartingale.ks);
    rd.get(n, "branches", "supermartingale", cfg.supermartingale.branches);
    rd.get(n, "trajectory", "supermartingale", cfg.supermartingale.trajectory);
  }
  if (auto n = root["ville"]) {
    rd.keys(n, "ville", {"target"});
    rd.get(n, "target", "ville", cfg.ville.target);
  }
  if (auto n = root["mgf"]) {
    rd.keys(n, "mgf", {"lambdas", "samples"});
    rd.get(n, "lambdas", "mgf", cfg.mgf.lambdas);
    rd.get(n, "samples", "mgf", cfg.mgf.samples);
  }
  if (auto n = root["tail"]) {
    rd.keys(n, "tail", {"omegas", "runs", "prefix"});
    rd.get(n, "omegas", "tail", cfg.tail.omegas);
    rd.get(n, "runs", "tail", cfg.tail.runs);
    rd.get(n, "prefix", "tail", cfg.tail.prefix);
  }
  if (auto n = root["output"]) {
    rd.keys(n, "output", {"max_trajectory_csv"});
    rd.get(n, "max_trajectory_csv", "output", cfg.output.max_trajectory_csv);
  }

  for (auto& e : validate(cfg)) errs.push_back(std::move(e));
  if (!errs.empty()) throw ConfigError(errs);
  return cfg;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::Index objective_dim(const ObjectiveSpec& o) {
  if (o.kind == "quadratic") return static_cast<Eigen::Index>(o.diag.size());
  if (o.kind == "least_squares") return o.A.empty() ? 0 : static_cast<Eigen::Index>(o.A.front().size());
  if (o.kind == "huberized_abs") {
    return o.center.empty() ? static_cast<Eigen::Index>(o.dim) : static_cast<Eigen::Index>(o.center.size());
  }
  return 0;
}

}  // namespace

std::vector<std::string> validate(const RunConfig& cfg) {
  std::vector<std::string> errs;
  const auto& o = cfg.objective;
  if (o.kind != "quadratic" && o.kind != "least_squares" && o.kind != "huberized_abs") {
    errs.push_back("objective.kind: must be quadratic, least_squares or huberized_abs");
  }
  const auto dim = objective_dim(o);
  if (dim < 1) errs.push_back("objective: dimension must be >= 1");
  if (o.kind == "quadratic" && !o.center.empty() && o.center.size() != o.diag.size()) {
    errs.push_back("objective.center: length differs from diag");
  }
  if (o.kind == "least_squares") {
    for (const auto& row : o.A) {
      if (row.size() != static_cast<std::size_t>(dim)) errs.push_back("objective.A: ragged rows");
    }
    if (o.b.size() != o.A.size()) errs.push_back("objective.b: length differs from rows of A");
  }
  if (o.kind == "huberized_abs" && !(o.delta > 0.0)) errs.push_back("objective.delta: must be positive");

  if (cfg.noise.kind != "none" && cfg.noise.kind != "gaussian" && cfg.noise.kind != "sphere") {
    errs.push_back("noise.kind: must be none, gaussian or sphere");
  }
  if (cfg.noise.kind != "none" && !(cfg.noise.sigma > 0.0)) errs.push_back("noise.sigma: must be positive");
  if (cfg.noise.sigma < 0.0) errs.push_back("noise.sigma: must be >= 0");

  const auto& s = cfg.schedule;
  if (s.kind != "theorem_main" && s.kind != "proposition_eps") {
    errs.push_back("schedule.kind: must be theorem_main or proposition_eps");
  }
  if (s.L && !(*s.L > 0.0)) errs.push_back("schedule.L: must be positive");
  if (s.kind == "proposition_eps") {
    if (!(s.epsilon > 0.0 && s.epsilon < 0.5)) errs.push_back("schedule.epsilon: must lie in (0, 0.5)");
    if (!(s.c0_prime >= 100.0)) errs.push_back("schedule.c0_prime: must be >= 100");
  }

  if (!cfg.x0.empty() && dim >= 1 && cfg.x0.size() != static_cast<std::size_t>(dim)) {
    errs.push_back("x0: length differs from the objective dimension");
  }
  if (cfg.K < 2) errs.push_back("K: must be >= 2");
  if (cfg.R < 1) errs.push_back("R: must be >= 1");
  if (cfg.betas.empty()) errs.push_back("betas: must not be empty");
  for (double b : cfg.betas) {
    if (!(b > 0.0 && b < 0.5)) errs.push_back("betas: " + std::to_string(b) + " outside (0, 0.5)");
  }
  for (std::size_t i = 0; i < cfg.rules.size(); ++i) {
    const auto& r = cfg.rules[i];
    const std::string path = "rules[" + std::to_string(i) + "]";
    if (r.kind != "iterate_delta" && r.kind != "value_delta" && r.kind != "fixed_k") {
      errs.push_back(path + ".kind: must be iterate_delta, value_delta or fixed_k");
    }
    if ((r.kind == "iterate_delta" || r.kind == "value_delta") && !(r.epsilon > 0.0)) {
      errs.push_back(path + ".epsilon: must be positive");
    }
    if (r.k_max && (*r.k_max < 1 || *r.k_max > cfg.K)) errs.push_back(path + ".k_max: must lie in [1, K]");
  }
  for (const auto& c : cfg.checks) {
    if (std::find_if(std::begin(kCheckNames), std::end(kCheckNames),
                     [&](const char* n) { return c == n; }) == std::end(kCheckNames)) {
      errs.push_back("checks: unknown check '" + c + "'");
    }
  }
  if (cfg.output_dir.empty()) errs.push_back("output_dir: must not be empty");
  if (!(cfg.tolerances.residual >= 0.0)) errs.push_back("tolerances.residual: must be >= 0");
  if (!(cfg.tolerances.gamma > 1e-12 && cfg.tolerances.gamma < 1e-3)) {
    errs.push_back("tolerances.gamma: must lie in (1e-12, 1e-3)");
  }
  if (cfg.checks.count("supermartingale")) {
    if (cfg.supermartingale.ks.empty()) errs.push_back("supermartingale.ks: must not be empty");
    for (auto k : cfg.supermartingale.ks) {
      if (k < 1 || k > cfg.K) {
        errs.push_back("supermartingale.ks: " + std::to_string(k) + " outside [1, K]");
      }
    }
    if (cfg.supermartingale.branches < 1000) errs.push_back("supermartingale.branches: must be >= 1000");
    if (cfg.supermartingale.trajectory < 0 || cfg.supermartingale.trajectory >= std::max<std::int64_t>(cfg.R, 1)) {
      errs.push_back("supermartingale.trajectory: must lie in [0, R)");
    }
  }
  if (cfg.checks.count("ville") && !(cfg.ville.target > 0.0 && cfg.ville.target < 1.0)) {
    errs.push_back("ville.target: must lie in (0, 1)");
  }
  if (cfg.checks.count("mgf") && cfg.mgf.samples < 2) errs.push_back("mgf.samples: must be >= 2");
  if (cfg.checks.count("tail")) {
    if (cfg.tail.runs < 1) errs.push_back("tail.runs: must be >= 1");
    if (cfg.tail.prefix < 1) errs.push_back("tail.prefix: must be >= 1");
  }
  if (cfg.output.max_trajectory_csv < 0) errs.push_back("output.max_trajectory_csv: must be >= 0");
  return errs;
}

RunConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML syntax error: ") + e.what());
  }
  return from_yaml(root);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Setup build_setup(const RunConfig& cfg) {
  const auto& o = cfg.objective;
  auto objective = [&]() {
    if (o.kind == "quadratic") {
      return o.center.empty() ? Objective::quadratic(to_vector(o.diag))
                              : Objective::quadratic(to_vector(o.diag), to_vector(o.center));
    }
    if (o.kind == "least_squares") {
      Matrix A(static_cast<Eigen::Index>(o.A.size()), objective_dim(o));
      for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = o.A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
      return Objective::least_squares(std::move(A), to_vector(o.b));
    }
    return o.center.empty() ? Objective::huberized_abs(static_cast<Eigen::Index>(o.dim), o.delta)
                            : Objective::huberized_abs(to_vector(o.center), o.delta);
  }();

  const NoiseKind nk = cfg.noise.kind == "gaussian" ? NoiseKind::GaussianIsotropic
                       : cfg.noise.kind == "sphere" ? NoiseKind::BoundedSphere
                                                    : NoiseKind::None;
  NoiseModel noise = calibrate(nk, objective.dim(), cfg.noise.sigma);

  const double L = cfg.schedule.L.value_or(objective.smoothness());
  if (L < objective.smoothness() * (1.0 - 1e-12)) {
    throw ConfigError("schedule.L: smaller than the objective's smoothness " +
                      std::to_string(objective.smoothness()));
  }
  Schedule sched = cfg.schedule.kind == "proposition_eps"
                       ? Schedule::proposition_eps(L, cfg.schedule.epsilon, cfg.schedule.c0_prime)
                       : Schedule::theorem_main(L);
  sched.validate();

  Vector x0 = cfg.x0.empty() ? Vector::Ones(objective.dim()) : to_vector(cfg.x0);
  return Setup{std::move(objective), noise, sched, std::move(x0)};
}

std::string override_config(const std::string& yaml_text, const std::string& dotted_key,
                            const std::string& value) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config: YAML syntax error: ") + e.what());
  }
  if (dotted_key.empty()) throw ConfigError("sweep: empty parameter name");
  std::vector<std::string> parts;
  std::stringstream ss(dotted_key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);

  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsMap()) throw ConfigError("sweep: '" + dotted_key + "' does not name a nested key");
    chain.push_back(next);
  }
  chain.back()[parts.back()] = YAML::Load(value);
  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

}  // namespace sgdmlab
