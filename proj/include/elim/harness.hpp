#pragma once

// Experiment runner behind the elim_cli tool. An ExperimentSpec is validated
// completely before any work starts; results are computed in memory and only
// written once every run has succeeded, so a failed experiment leaves no
// partial output behind.
//
// CSV schemas (all floating-point values printed with 16 significant digits):
//   convergence : h,n_steps,error,order,iterations,alpha_max
//   alpha-norm  : h,n_steps,alpha_max,order
//                 + <stem>_components.csv : t,alpha_<j>...   (first step size)
//   iterations  : h,n_steps,iterations
//   drift       : t,h_error,<L>_error...,iterations,alpha_<j>...,fallback
// Every CSV gets a <stem>.meta.json sidecar describing the run.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "elim/analysis.hpp"
#include "elim/integrators.hpp"
#include "elim/problems.hpp"
#include "elim/tableau.hpp"

namespace elim {

enum class Experiment { convergence, alpha_norm, iterations, drift, tableau };
enum class MethodKind { gauss, hbvm, elim };
enum class InvariantChoice { none, L1, L1L2 };

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
  Experiment experiment = Experiment::convergence;
  std::string problem = "kepler";
  double eccentricity = 0.6;
  MethodKind method = MethodKind::hbvm;
  int s = 3;
  int k = 12;
  std::optional<int> r;  // defaults to k
  InvariantChoice invariants = InvariantChoice::none;
  std::vector<double> step_sizes;
  double horizon = 20.0 * std::numbers::pi;
  double tolerance = 1e-14;
  int max_iters = 200;
  bool warm_start = false;
  std::string output_path;
};

// ---------------------------------------------------------------------------
// Names and parsing

inline std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::convergence: return "convergence";
    case Experiment::alpha_norm: return "alpha-norm";
    case Experiment::iterations: return "iterations";
    case Experiment::drift: return "drift";
    case Experiment::tableau: return "tableau";
  }
  return "?";
}

inline std::string to_string(MethodKind m) {
  switch (m) {
    case MethodKind::gauss: return "gauss";
    case MethodKind::hbvm: return "hbvm";
    case MethodKind::elim: return "elim";
  }
  return "?";
}

inline std::string to_string(InvariantChoice c) {
  switch (c) {
    case InvariantChoice::none: return "none";
    case InvariantChoice::L1: return "L1";
    case InvariantChoice::L1L2: return "L1L2";
  }
  return "?";
}

inline Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::convergence, Experiment::alpha_norm, Experiment::iterations, Experiment::drift,
                 Experiment::tableau}) {
    if (name == to_string(e)) return e;
  }
  throw SpecError("unknown experiment '" + name + "'");
}

inline MethodKind parse_method(const std::string& name) {
  for (auto m : {MethodKind::gauss, MethodKind::hbvm, MethodKind::elim}) {
    if (name == to_string(m)) return m;
  }
  throw SpecError("unknown method '" + name + "' (expected gauss, hbvm or elim)");
}

inline InvariantChoice parse_invariants(const std::string& name) {
  for (auto c : {InvariantChoice::none, InvariantChoice::L1, InvariantChoice::L1L2}) {
    if (name == to_string(c)) return c;
  }
  throw SpecError("unknown invariant selection '" + name + "' (expected none, L1 or L1L2)");
}

/// Parses "0.1", "pi", "pi/30", "20pi", "20*pi", "2*pi/7".
inline double parse_quantity(const std::string& text) {
  std::string t;
  for (char ch : text) {
    if (ch != ' ') t += ch;
  }
  if (t.empty()) throw SpecError("empty numeric value");
  auto to_number = [&](const std::string& part) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(part, &used);
    } catch (const std::exception&) {
      throw SpecError("cannot parse numeric value '" + text + "'");
    }
    if (used != part.size()) throw SpecError("cannot parse numeric value '" + text + "'");
    return value;
  };
  const auto pi_pos = t.find("pi");
  if (pi_pos == std::string::npos) return to_number(t);

  std::string coeff = t.substr(0, pi_pos);
  if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
  double value = (coeff.empty() ? 1.0 : to_number(coeff)) * std::numbers::pi;
  const std::string rest = t.substr(pi_pos + 2);
  if (!rest.empty()) {
    if (rest.front() != '/') throw SpecError("cannot parse numeric value '" + text + "'");
    value /= to_number(rest.substr(1));
  }
  return value;
}

inline std::vector<double> parse_quantity_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_quantity(item));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spec -> library objects

inline HamiltonianProblem make_problem(const ExperimentSpec& spec) {
  if (spec.problem == "kepler") {
    if (!(spec.eccentricity >= 0.0 && spec.eccentricity < 1.0)) {
      throw SpecError("eccentricity must lie in [0,1)");
    }
    return kepler_problem(spec.eccentricity);
  }
  if (spec.problem == "harmonic") return polynomial_oscillator(2);
  if (spec.problem == "quartic") return polynomial_oscillator(4);
  if (spec.problem == "sextic") return polynomial_oscillator(6);
  if (spec.problem == "octic") return polynomial_oscillator(8);
  throw SpecError("unknown problem '" + spec.problem + "' (expected kepler, harmonic, quartic, sextic or octic)");
}

inline std::optional<InvariantSet> make_invariants(const ExperimentSpec& spec) {
  switch (spec.invariants) {
    case InvariantChoice::none: return std::nullopt;
    case InvariantChoice::L1: return kepler_invariants(KeplerInvariants::angular_momentum_only);
    case InvariantChoice::L1L2: return kepler_invariants(KeplerInvariants::angular_momentum_and_lrl);
  }
  return std::nullopt;
}

inline int invariant_count(InvariantChoice c) {
  return c == InvariantChoice::none ? 0 : c == InvariantChoice::L1 ? 1 : 2;
}

inline MethodConfig make_config(const ExperimentSpec& spec) {
  MethodConfig config;
  config.s = spec.s;
  config.k = spec.method == MethodKind::gauss ? spec.s : spec.k;
  config.r = spec.method == MethodKind::elim ? spec.r.value_or(config.k) : config.k;
  config.fp_tolerance = spec.tolerance;
  config.fp_max_iters = spec.max_iters;
  config.warm_start = spec.warm_start;
  return config;
}

/// Short label used in file names and metadata, e.g. "ELIM(12,12,3)".
inline std::string method_label(const ExperimentSpec& spec) {
  const MethodConfig c = make_config(spec);
  switch (spec.method) {
    case MethodKind::gauss: return "GAUSS" + std::to_string(c.s);
    case MethodKind::hbvm: return "HBVM(" + std::to_string(c.k) + "," + std::to_string(c.s) + ")";
    case MethodKind::elim:
      return "ELIM(" + std::to_string(c.r) + "," + std::to_string(c.k) + "," + std::to_string(c.s) + ")";
  }
  return "?";
}

/// Throws SpecError describing the first problem found. Performs no numerical work.
inline void validate(const ExperimentSpec& spec) {
  (void)make_problem(spec);
  if (spec.output_path.empty()) throw SpecError("an output path (--out) is required");
  if (spec.s < 1) throw SpecError("s must be positive");
  if (spec.method != MethodKind::gauss && spec.k < spec.s) {
    throw SpecError("k=" + std::to_string(spec.k) + " must be >= s=" + std::to_string(spec.s));
  }
  if (spec.experiment == Experiment::tableau) return;

  const int nu = invariant_count(spec.invariants);
  if (nu > 0 && spec.problem != "kepler") throw SpecError("invariants L1/L1L2 are only defined for kepler");
  if (spec.method == MethodKind::elim) {
    if (nu == 0) throw SpecError("method elim needs --invariants L1 or L1L2");
    if (spec.r && *spec.r < spec.s) {
      throw SpecError("r=" + std::to_string(*spec.r) + " must be >= s=" + std::to_string(spec.s));
    }
    if (spec.s <= nu) {
      throw SpecError("s=" + std::to_string(spec.s) + " must exceed the number of invariants (" +
                      std::to_string(nu) + ")");
    }
  } else if (nu > 0) {
    throw SpecError("--invariants only applies to --method elim");
  }
  if (!(spec.tolerance > 0.0)) throw SpecError("tolerance must be positive");
  if (spec.max_iters < 1) throw SpecError("max iterations must be positive");
  if (!(spec.horizon > 0.0)) throw SpecError("horizon must be positive");
  if (spec.step_sizes.empty()) throw SpecError("at least one step size (--steps) is required");
  for (double h : spec.step_sizes) {
    if (!(h > 0.0)) throw SpecError("step sizes must be positive");
    try {
      (void)step_count(spec.horizon, h);
    } catch (const std::invalid_argument& e) {
      throw SpecError(e.what());
    }
  }
  try {
    elim::validate(make_config(spec), nu);
  } catch (const ConfigError& e) {
    throw SpecError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Formatting

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", v);
  return buf;
}

inline nlohmann::json tableau_json(int k, int s) {
  const TableauMatrices t = build_hbvm_tableau(k, s);
  nlohmann::json j;
  j["s"] = s;
  j["k"] = k;
  j["c"] = std::vector<double>(t.c.data(), t.c.data() + t.c.size());
  j["b"] = std::vector<double>(t.b.data(), t.b.data() + t.b.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < t.A.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(t.A.cols()));
    for (Eigen::Index c = 0; c < t.A.cols(); ++c) row[static_cast<std::size_t>(c)] = t.A(i, c);
    rows.push_back(row);
  }
  j["A"] = rows;
  return j;
}

inline nlohmann::json spec_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["experiment"] = to_string(spec.experiment);
  j["problem"] = spec.problem;
  if (spec.problem == "kepler") j["eccentricity"] = spec.eccentricity;
  j["method"] = to_string(spec.method);
  j["label"] = method_label(spec);
  const MethodConfig c = make_config(spec);
  j["s"] = c.s;
  j["k"] = c.k;
  if (spec.method == MethodKind::elim) j["r"] = c.r;
  j["invariants"] = to_string(spec.invariants);
  j["steps"] = spec.step_sizes;
  j["horizon"] = spec.horizon;
  j["tol"] = spec.tolerance;
  j["max_iters"] = spec.max_iters;
  j["warm_start"] = spec.warm_start;
  return j;
}

// ---------------------------------------------------------------------------
// Computation

struct RunSummary {
  double h = 0.0;
  std::size_t n_steps = 0;
  double error = 0.0;
  double alpha_max = 0.0;
  long long iterations = 0;
};

/// Runs one (method, h) pair over the experiment horizon.
inline Trajectory run_trajectory(const ExperimentSpec& spec, double h) {
  const HamiltonianProblem problem = make_problem(spec);
  const LineIntegralStepper stepper(problem, make_invariants(spec), make_config(spec));
  return integrate(stepper, problem.initial_state, h, step_count(spec.horizon, h));
}

/// One summary per step size; runs are independent and may execute
/// concurrently, results are assembled in input order.
inline std::vector<RunSummary> run_sweep(const ExperimentSpec& spec) {
  const HamiltonianProblem problem = make_problem(spec);
  const State reference = reference_solution(problem, spec.step_sizes.back() / 4.0, spec.horizon);
  std::vector<std::future<RunSummary>> futures;
  for (double h : spec.step_sizes) {
    futures.push_back(std::async(std::launch::async, [&spec, &reference, h] {
      const Trajectory traj = run_trajectory(spec, h);
      RunSummary out;
      out.h = h;
      out.n_steps = traj.records.size() - 1;
      out.error = solution_error(traj.final_state(), reference);
      out.alpha_max = alpha_max(traj);
      out.iterations = traj.iteration_total;
      return out;
    }));
  }
  std::vector<RunSummary> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

struct OutputFile {
  std::filesystem::path path;
  std::string contents;
};

inline std::filesystem::path sibling(const std::filesystem::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix);
}

inline std::string optional_orders_cell(const std::vector<double>& values, std::size_t row) {
  if (row == 0) return "";
  if (!(values[row - 1] > 0.0) || !(values[row] > 0.0)) return "";
  return format_double(std::log2(values[row - 1] / values[row]));
}

inline std::vector<OutputFile> compute_outputs(const ExperimentSpec& spec) {
  const std::filesystem::path out_path(spec.output_path);
  std::vector<OutputFile> files;
  nlohmann::json meta = spec_json(spec);

  switch (spec.experiment) {
    case Experiment::tableau: {
      const MethodConfig c = make_config(spec);
      files.push_back({out_path, tableau_json(c.k, c.s).dump(2) + "\n"});
      return files;
    }
    case Experiment::convergence:
    case Experiment::iterations: {
      const auto runs = run_sweep(spec);
      std::vector<double> errors;
      for (const auto& r : runs) errors.push_back(r.error);
      std::ostringstream csv;
      if (spec.experiment == Experiment::convergence) {
        csv << "h,n_steps,error,order,iterations,alpha_max\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
          csv << format_double(runs[i].h) << ',' << runs[i].n_steps << ',' << format_double(runs[i].error) << ','
              << optional_orders_cell(errors, i) << ',' << runs[i].iterations << ','
              << format_double(runs[i].alpha_max) << '\n';
        }
      } else {
        csv << "h,n_steps,iterations\n";
        for (const auto& r : runs) csv << format_double(r.h) << ',' << r.n_steps << ',' << r.iterations << '\n';
      }
      files.push_back({out_path, csv.str()});
      break;
    }
    case Experiment::alpha_norm: {
      std::vector<Trajectory> trajs;
      {
        std::vector<std::future<Trajectory>> futures;
        for (double h : spec.step_sizes) {
          futures.push_back(std::async(std::launch::async, [&spec, h] { return run_trajectory(spec, h); }));
        }
        for (auto& f : futures) trajs.push_back(f.get());
      }
      std::vector<double> maxima;
      for (const auto& t : trajs) maxima.push_back(alpha_max(t));
      std::ostringstream csv;
      csv << "h,n_steps,alpha_max,order\n";
      for (std::size_t i = 0; i < trajs.size(); ++i) {
        csv << format_double(spec.step_sizes[i]) << ',' << trajs[i].records.size() - 1 << ','
            << format_double(maxima[i]) << ',' << optional_orders_cell(maxima, i) << '\n';
      }
      files.push_back({out_path, csv.str()});

      const int nu = invariant_count(spec.invariants);
      std::ostringstream comp;
      comp << 't';
      for (int i = 0; i < nu; ++i) comp << ",alpha_" << (spec.s - nu + i);
      comp << '\n';
      for (const StepRecord& rec : trajs.front().records) {
        if (rec.alpha.size() == 0) continue;  // initial record
        comp << format_double(rec.t);
        for (Eigen::Index i = 0; i < rec.alpha.size(); ++i) comp << ',' << format_double(rec.alpha[i]);
        comp << '\n';
      }
      files.push_back({sibling(out_path, "_components.csv"), comp.str()});
      meta["components_step"] = spec.step_sizes.front();
      break;
    }
    case Experiment::drift: {
      const double h = spec.step_sizes.front();
      const HamiltonianProblem problem = make_problem(spec);
      const Trajectory traj = run_trajectory(spec, h);
      // On Kepler both invariants are monitored whether or not they are imposed.
      std::optional<InvariantSet> observed;
      if (spec.problem == "kepler") observed = kepler_invariants(KeplerInvariants::angular_momentum_and_lrl);
      const DriftReport report = drift_report(traj, problem, observed);
      const int nu = invariant_count(spec.invariants);

      std::ostringstream csv;
      csv << "t,h_error";
      for (const auto& name : report.invariant_names) csv << ',' << name << "_error";
      csv << ",iterations";
      for (int i = 0; i < nu; ++i) csv << ",alpha_" << (spec.s - nu + i);
      csv << ",fallback\n";
      for (std::size_t n = 0; n < traj.records.size(); ++n) {
        const StepRecord& rec = traj.records[n];
        csv << format_double(report.times[n]) << ',' << format_double(report.h_error[n]);
        for (const auto& series : report.invariant_errors) csv << ',' << format_double(series[n]);
        csv << ',' << rec.iterations;
        for (int i = 0; i < nu; ++i) csv << ',' << format_double(rec.alpha.size() > i ? rec.alpha[i] : 0.0);
        csv << ',' << (rec.gamma_fallback_used ? 1 : 0) << '\n';
      }
      files.push_back({out_path, csv.str()});
      meta["drift_step"] = h;
      meta["iteration_total"] = report.iteration_total;
      meta["alpha_max"] = report.alpha_max;
      meta["h_error_slope"] = regression_slope(report.times, report.h_error);
      for (std::size_t i = 0; i < report.invariant_names.size(); ++i) {
        meta[report.invariant_names[i] + "_error_slope"] = regression_slope(report.times, report.invariant_errors[i]);
      }
      break;
    }
  }
  files.push_back({sibling(out_path, ".meta.json"), meta.dump(2) + "\n"});
  return files;
}

inline void write_outputs(const std::vector<OutputFile>& files) {
  for (const auto& f : files) {
    if (f.path.has_parent_path()) std::filesystem::create_directories(f.path.parent_path());
    std::ofstream os(f.path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + f.path.string() + " for writing");
    os << f.contents;
    if (!os) throw std::runtime_error("failed writing " + f.path.string());
  }
}

/// Validates, computes and writes. Returns the paths written.
inline std::vector<std::filesystem::path> run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  const auto files = compute_outputs(spec);
  write_outputs(files);
  std::vector<std::filesystem::path> paths;
  for (const auto& f : files) paths.push_back(f.path);
  return paths;
}

// ---------------------------------------------------------------------------
// Kepler experiment suite with the published parameters

/// The four Kepler methods compared throughout: GAUSS3, HBVM(12,3) and
/// EHBVM(12,3) imposing L1, or L1 and L2.
inline std::vector<std::pair<std::string, ExperimentSpec>> kepler_methods(double tolerance = 1e-14) {
  ExperimentSpec base;
  base.problem = "kepler";
  base.eccentricity = 0.6;
  base.s = 3;
  base.k = 12;
  base.tolerance = tolerance;

  ExperimentSpec gauss = base;
  gauss.method = MethodKind::gauss;
  ExperimentSpec hbvm = base;
  hbvm.method = MethodKind::hbvm;
  ExperimentSpec e1 = base;
  e1.method = MethodKind::elim;
  e1.r = 12;
  e1.invariants = InvariantChoice::L1;
  ExperimentSpec e2 = e1;
  e2.invariants = InvariantChoice::L1L2;
  return {{"gauss3", gauss}, {"hbvm12_3", hbvm}, {"ehbvm12_3_L1", e1}, {"ehbvm12_3_L1L2", e2}};
}

inline std::vector<double> halved_steps(double first, int count) {
  std::vector<double> out;
  double h = first;
  for (int i = 0; i < count; ++i, h /= 2.0) out.push_back(h);
  return out;
}

/// All experiments at the published parameters, written into `directory`.
/// The iteration-count runs use `iteration_tolerance`.
inline std::vector<std::filesystem::path> reproduce_paper(const std::filesystem::path& directory,
                                                          double tolerance = 1e-14,
                                                          double iteration_tolerance = kIterationCountTolerance) {
  const double pi = std::numbers::pi;
  std::vector<ExperimentSpec> specs;
  for (auto [name, base] : kepler_methods(tolerance)) {
    ExperimentSpec conv = base;
    conv.experiment = Experiment::convergence;
    conv.step_sizes = halved_steps(pi / 30.0, 5);
    conv.horizon = 20.0 * pi;
    conv.output_path = (directory / ("convergence_" + name + ".csv")).string();
    specs.push_back(conv);

    ExperimentSpec iters = conv;
    iters.experiment = Experiment::iterations;
    iters.tolerance = iteration_tolerance;
    iters.output_path = (directory / ("iterations_" + name + ".csv")).string();
    specs.push_back(iters);

    if (base.method == MethodKind::elim) {
      ExperimentSpec alpha = conv;
      alpha.experiment = Experiment::alpha_norm;
      alpha.output_path = (directory / ("alpha_norm_" + name + ".csv")).string();
      specs.push_back(alpha);
    }

    ExperimentSpec drift = base;
    drift.experiment = Experiment::drift;
    drift.step_sizes = {0.1};
    drift.horizon = 1000.0;
    drift.output_path = (directory / ("drift_" + name + ".csv")).string();
    specs.push_back(drift);
  }
  ExperimentSpec tab;
  tab.experiment = Experiment::tableau;
  tab.method = MethodKind::hbvm;
  tab.k = 2;
  tab.s = 2;
  tab.output_path = (directory / "tableau_hbvm2_2.json").string();
  specs.push_back(tab);

  for (const auto& spec : specs) validate(spec);

  std::vector<OutputFile> files;
  for (const auto& spec : specs) {
    auto out = compute_outputs(spec);
    files.insert(files.end(), std::make_move_iterator(out.begin()), std::make_move_iterator(out.end()));
  }
  nlohmann::json costs;
  costs["lim_over_elim_cost_per_sweep"] = {{"nu1", cost_ratio(12, 12, 12, 12, 1)},
                                          {"nu2", cost_ratio(12, 12, 12, 12, 2)}};
  files.push_back({directory / "cost_ratio.json", costs.dump(2) + "\n"});
  write_outputs(files);

  std::vector<std::filesystem::path> paths;
  for (const auto& f : files) paths.push_back(f.path);
  return paths;
}

/// Default fixed-point tolerance, overridable through ELIM_FP_TOL.
inline double default_tolerance() {
  if (const char* env = std::getenv("ELIM_FP_TOL"); env != nullptr && *env != '\0') {
    const double v = parse_quantity(env);
    if (!(v > 0.0)) throw SpecError("ELIM_FP_TOL must be positive");
    return v;
  }
  return 1e-14;
}

}  // namespace elim
