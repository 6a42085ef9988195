#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgdmlab/noise.hpp"
#include "sgdmlab/objectives.hpp"
#include "sgdmlab/sgdm.hpp"
#include "sgdmlab/stopping.hpp"

namespace sgdmlab {

inline constexpr const char* kCheckNames[] = {"descent", "decomposition", "supermartingale", "ville",
                                              "mgf",     "tail",          "coverage",        "constants"};

struct ObjectiveSpec {
  std::string kind = "quadratic";  // quadratic | least_squares | huberized_abs
  std::vector<double> diag;
  std::vector<double> center;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::int64_t dim = 0;
  double delta = 1.0;
};

struct NoiseSpec {
  std::string kind = "none";  // none | gaussian | sphere
  double sigma = 0.0;
};

struct ScheduleSpec {
  std::string kind = "theorem_main";  // theorem_main | proposition_eps
  std::optional<double> L;            // defaults to the objective's smoothness
  double epsilon = 0.1;
  double c0_prime = 100.0;
};

struct RuleSpec {
  std::string kind;
  double epsilon = 0.0;
  std::optional<std::int64_t> k_max;  // defaults to K
};

struct Tolerances {
  double residual = 1e-9;  // pathwise checks, relative to 1 + |E(k)| + |E(k-1)|
  double gamma = 1e-6;     // relative width of the gamma brackets
};

struct SupermartingaleSpec {
  std::vector<std::int64_t> ks{1, 2, 5, 10, 50};
  std::int64_t branches = 100000;
  std::int64_t trajectory = 0;  // index whose seed drives the prefix
};

struct VilleSpec {
  double target = 0.1;  // alpha is set so that the Ville bound equals this
};

struct MgfSpec {
  std::vector<double> lambdas{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
  std::int64_t samples = 1000000;
};

struct TailSpec {
  std::vector<double> omegas{1.0, 2.0, 3.0};
  std::int64_t runs = 100000;
  std::int64_t prefix = 100;  // c_l = a_l for l = 1..prefix
};

struct OutputSpec {
  std::int64_t max_trajectory_csv = 10;
};

struct RunConfig {
  ObjectiveSpec objective;
  NoiseSpec noise;
  ScheduleSpec schedule;
  std::vector<double> x0;
  std::int64_t K = 0;
  std::int64_t R = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> betas{0.05, 0.1};
  std::vector<RuleSpec> rules;
  std::set<std::string> checks;
  std::filesystem::path output_dir = "out";
  Tolerances tolerances;
  SupermartingaleSpec supermartingale;
  VilleSpec ville;
  MgfSpec mgf;
  TailSpec tail;
  OutputSpec output;
};

// Throws ConfigError listing every violation, including unknown keys.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& yaml_text);

// Structural validation; collects all violations.
std::vector<std::string> validate(const RunConfig& cfg);

// Instantiated model pieces.
struct Setup {
  Objective objective;
  NoiseModel noise;
  Schedule schedule;
  Vector x0;
};

Setup build_setup(const RunConfig& cfg);

// Applies `key=value` overrides (dotted keys, YAML values) to the config text.
std::string override_config(const std::string& yaml_text, const std::string& dotted_key,
                            const std::string& value);

}  // namespace sgdmlab
