// elim_cli: command-line front end for the experiment harness.
//
//   elim_cli convergence --method elim -s 3 -k 12 --invariants L1L2 \
//       --steps pi/30,pi/60,pi/120 --horizon 20pi --out conv.csv
//   elim_cli reproduce-paper --out results/

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "elim/harness.hpp"

namespace {

struct Flags {
  std::string config;
  std::string problem;
  double eccentricity = 0.6;
  std::string method;
  int s = 0;
  int k = 0;
  int r = 0;
  std::string invariants;
  std::string steps;
  std::string horizon;
  double tol = 0.0;
  int max_iters = 0;
  bool warm_start = false;
  std::string out;
};

// A value given as a JSON number or as a string such as "pi/30".
double json_quantity(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return elim::parse_quantity(v.get<std::string>());
  throw elim::SpecError("expected a number or numeric string, got " + v.dump());
}

void apply_config_file(const std::string& path, elim::ExperimentSpec& spec) {
  std::ifstream is(path);
  if (!is) throw elim::SpecError("cannot read config file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw elim::SpecError("invalid JSON in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw elim::SpecError("config file must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "problem") spec.problem = v.get<std::string>();
    else if (key == "eccentricity") spec.eccentricity = json_quantity(v);
    else if (key == "method") spec.method = elim::parse_method(v.get<std::string>());
    else if (key == "s") spec.s = v.get<int>();
    else if (key == "k") spec.k = v.get<int>();
    else if (key == "r") spec.r = v.get<int>();
    else if (key == "invariants") spec.invariants = elim::parse_invariants(v.get<std::string>());
    else if (key == "steps") {
      spec.step_sizes.clear();
      if (v.is_array()) {
        for (const auto& item : v) spec.step_sizes.push_back(json_quantity(item));
      } else {
        spec.step_sizes = elim::parse_quantity_list(v.get<std::string>());
      }
    } else if (key == "horizon") spec.horizon = json_quantity(v);
    else if (key == "tol") spec.tolerance = json_quantity(v);
    else if (key == "max_iters") spec.max_iters = v.get<int>();
    else if (key == "warm_start") spec.warm_start = v.get<bool>();
    else if (key == "out") spec.output_path = v.get<std::string>();
    else throw elim::SpecError("unknown config key '" + key + "'");
  }
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON file with default settings (flags override it)");
  cmd->add_option("--problem", f.problem, "kepler, harmonic, quartic, sextic or octic");
  cmd->add_option("--eccentricity", f.eccentricity, "Kepler orbit eccentricity in [0,1)");
  cmd->add_option("--method", f.method, "gauss, hbvm or elim");
  cmd->add_option("-s", f.s, "number of stage coefficients (degree of the polynomial)");
  cmd->add_option("-k", f.k, "quadrature points for H");
  cmd->add_option("-r", f.r, "quadrature points for the invariants (default k)");
  cmd->add_option("--invariants", f.invariants, "none, L1 or L1L2");
  cmd->add_option("--steps", f.steps, "comma separated step sizes, e.g. pi/30,pi/60");
  cmd->add_option("--horizon", f.horizon, "final time, e.g. 20pi or 1000");
  cmd->add_option("--tol", f.tol, "fixed-point tolerance (default 1e-14 or $ELIM_FP_TOL)");
  cmd->add_option("--max-iters", f.max_iters, "fixed-point sweep limit per step");
  cmd->add_flag("--warm-start", f.warm_start, "seed each step with the previous coefficients");
  cmd->add_option("--out", f.out, "output file")->required();
}

elim::ExperimentSpec build_spec(elim::Experiment experiment, const CLI::App* cmd, const Flags& f) {
  elim::ExperimentSpec spec;
  spec.experiment = experiment;
  spec.tolerance = elim::default_tolerance();
  if (experiment == elim::Experiment::drift) {
    spec.step_sizes = {0.1};
    spec.horizon = 1000.0;
  }
  if (!f.config.empty()) apply_config_file(f.config, spec);

  auto given = [cmd](const char* name) { return cmd->count(name) > 0; };
  if (given("--problem")) spec.problem = f.problem;
  if (given("--eccentricity")) spec.eccentricity = f.eccentricity;
  if (given("--method")) spec.method = elim::parse_method(f.method);
  if (given("-s")) spec.s = f.s;
  if (given("-k")) spec.k = f.k;
  if (given("-r")) spec.r = f.r;
  if (given("--invariants")) spec.invariants = elim::parse_invariants(f.invariants);
  if (given("--steps")) spec.step_sizes = elim::parse_quantity_list(f.steps);
  if (given("--horizon")) spec.horizon = elim::parse_quantity(f.horizon);
  if (given("--tol")) spec.tolerance = f.tol;
  if (given("--max-iters")) spec.max_iters = f.max_iters;
  if (given("--warm-start")) spec.warm_start = f.warm_start;
  if (given("--out")) spec.output_path = f.out;
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy- and invariant-conserving line integral methods: experiment runner"};
  app.require_subcommand(1);

  Flags flags;
  struct Sub {
    const char* name;
    elim::Experiment experiment;
    const char* help;
  };
  const Sub subs[] = {
      {"tableau", elim::Experiment::tableau, "export the HBVM(k,s) Butcher tableau as JSON"},
      {"convergence", elim::Experiment::convergence, "terminal error and observed order per step size"},
      {"alpha-norm", elim::Experiment::alpha_norm, "max |alpha| per step size plus per-step components"},
      {"iterations", elim::Experiment::iterations, "total fixed-point sweeps per step size"},
      {"drift", elim::Experiment::drift, "invariant errors at every step (default h=0.1, horizon 1000)"},
  };
  std::vector<std::pair<CLI::App*, elim::Experiment>> commands;
  for (const auto& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    add_common(cmd, flags);
    commands.emplace_back(cmd, sub.experiment);
  }
  std::string reproduce_dir;
  double reproduce_tol = 0.0;
  CLI::App* reproduce = app.add_subcommand("reproduce-paper", "run every Kepler experiment with the published setup");
  reproduce->add_option("--out", reproduce_dir, "output directory")->required();
  reproduce->add_option("--tol", reproduce_tol, "fixed-point tolerance for every run (default 1e-14, 1e-15 for iteration counts)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (reproduce->parsed()) {
      const bool given = reproduce->count("--tol") > 0;
      const double tol = given ? reproduce_tol : elim::default_tolerance();
      const double iter_tol = given ? reproduce_tol : elim::kIterationCountTolerance;
      for (const auto& path : elim::reproduce_paper(reproduce_dir, tol, iter_tol)) {
        std::cout << path.string() << '\n';
      }
      return 0;
    }
    for (const auto& [cmd, experiment] : commands) {
      if (!cmd->parsed()) continue;
      const elim::ExperimentSpec spec = build_spec(experiment, cmd, flags);
      for (const auto& path : elim::run_experiment(spec)) std::cout << path.string() << '\n';
      return 0;
    }
  } catch (const elim::SpecError& e) {
    std::cerr << "elim_cli: invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "elim_cli: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
