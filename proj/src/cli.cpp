#include "sgdmlab/cli.hpp"

#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "sgdmlab/csv.hpp"
#include "sgdmlab/errors.hpp"
#include "sgdmlab/experiment.hpp"
#include "sgdmlab/lyapunov.hpp"

namespace sgdmlab {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_and_print(const RunConfig& cfg, std::optional<int> workers, std::ostream& out) {
  const Report rep = run_experiment(cfg, workers);
  out << render_summary(rep.json);
  out << "wrote " << (cfg.output_dir / "report.json").generic_string() << '\n';
  return rep.pass ? kExitPass : kExitFail;
}

void print_bracket(std::ostream& out, const char* name, const Bracket& b) {
  out << name << " [" << format_double(b.lower()) << ", " << format_double(b.upper()) << "] terms=" << b.terms
      << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pathwise and Monte Carlo verification of high-probability SGDM bounds", "sgdmlab"};
  app.require_subcommand(1);

  std::optional<int> workers;
  app.add_option("--workers", workers, "Worker threads (overrides SGDMLAB_WORKERS)")->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every check enabled in a config");
  run->add_option("config", config_path, "YAML config")->required();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a single check suite from a config");
  verify->add_option("suite", suite, "descent, decomposition, supermartingale, ville, mgf, tail, coverage or constants")
      ->required();
  verify->add_option("config", config_path, "YAML config")->required();

  std::string schedule = "theorem-main";
  double L = 1.0, sigma = 1.0, tol = 1e-6, epsilon = 0.1, c0_prime = 100.0, E0 = 1.0;
  auto* constants = app.add_subcommand("constants", "Print certified gamma brackets and envelope constants");
  constants->add_option("schedule", schedule, "theorem-main or proposition-eps")->required();
  constants->add_option("--L", L, "Smoothness constant");
  constants->add_option("--sigma", sigma, "Noise certificate");
  constants->add_option("--tol", tol, "Relative bracket width");
  constants->add_option("--epsilon", epsilon, "Exponent slack (proposition-eps)");
  constants->add_option("--c0-prime", c0_prime, "Step-size constant C0' (proposition-eps)");
  constants->add_option("--E0", E0, "Initial energy E(0)");

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run a config once per value of one parameter");
  sweep->add_option("config", config_path, "YAML config")->required();
  sweep->add_option("--param", param, "Dotted config key, e.g. noise.sigma")->required();
  sweep->add_option("--values", values, "Comma-separated YAML values")->required()->delimiter(',');

  std::string dir;
  auto* report = app.add_subcommand("report", "Re-render the summary of a finished run");
  report->add_option("dir", dir, "Output directory containing report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*run) return run_and_print(load_config(config_path), workers, out);

    if (*verify) {
      if (std::find_if(std::begin(kCheckNames), std::end(kCheckNames), [&](const char* n) { return suite == n; }) ==
          std::end(kCheckNames)) {
        err << "unknown suite '" << suite << "'\n";
        return kExitUsage;
      }
      RunConfig cfg = load_config(config_path);
      cfg.checks = {suite};
      return run_and_print(cfg, workers, out);
    }

    if (*constants) {
      Schedule sched;
      if (schedule == "theorem-main") {
        sched = Schedule::theorem_main(L);
      } else if (schedule == "proposition-eps") {
        sched = Schedule::proposition_eps(L, epsilon, c0_prime);
      } else {
        err << "unknown schedule '" << schedule << "'\n";
        return kExitUsage;
      }
      const auto p = envelope_constants(sched, sigma, E0, tol);
      out << "schedule " << sched.describe() << '\n';
      print_bracket(out, "gamma1", p.gamma1);
      print_bracket(out, "gamma2", p.gamma2);
      out << "C1 " << format_double(p.C1) << '\n';
      out << "C2 " << format_double(p.C2) << '\n';
      if (sched.kind == ScheduleKind::PropositionEps) {
        out << "zeta " << format_double(p.zeta) << '\n';
        out << "h_sigma " << format_double(p.h_sigma) << '\n';
        out << "C0 " << format_double(p.C0) << '\n';
      }
      return kExitPass;
    }

    if (*sweep) {
      const std::string text = read_file(config_path);
      bool all = true;
      for (const auto& v : values) {
        RunConfig cfg = parse_config(override_config(text, param, v));
        cfg.output_dir /= param + "=" + v;
        const Report rep = run_experiment(cfg, workers);
        all = all && rep.pass;
        out << param << "=" << v << ": " << (rep.pass ? "PASS" : "FAIL") << "  ("
            << cfg.output_dir.generic_string() << ")\n";
      }
      return all ? kExitPass : kExitFail;
    }

    if (*report) {
      std::ifstream in(std::filesystem::path(dir) / "report.json");
      if (!in) {
        err << "no report.json in '" << dir << "'\n";
        return kExitUsage;
      }
      const Json j = Json::parse(in);
      out << render_summary(j);
      return j.at("pass").get<bool>() ? kExitPass : kExitFail;
    }
  } catch (const ConfigError& e) {
    err << "config error:\n";
    for (const auto& v : e.violations()) err << "  " << v << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace sgdmlab
