#pragma once

// Post-processing of completed runs: observed orders, reference solutions,
// drift statistics and the per-iteration cost model of LIM vs ELIM.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "elim/integrators.hpp"
#include "elim/problems.hpp"

namespace elim {

/// log2(e_i / e_{i+1}) for errors measured at successively halved steps.
[[nodiscard]] inline std::vector<double> estimate_orders(const std::vector<double>& errors) {
  if (errors.size() < 2) throw std::invalid_argument("estimate_orders: need at least two errors");
  for (double e : errors) {
    if (!(e > 0.0)) throw std::invalid_argument("estimate_orders: errors must be positive");
  }
  std::vector<double> orders;
  orders.reserve(errors.size() - 1);
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) orders.push_back(std::log2(errors[i] / errors[i + 1]));
  return orders;
}

struct ConvergenceReport {
  std::vector<double> step_sizes;
  std::vector<double> errors;
  std::vector<double> orders;
  std::vector<long long> iterations;
};

[[nodiscard]] inline ConvergenceReport make_convergence_report(std::vector<double> step_sizes,
                                                               std::vector<double> errors,
                                                               std::vector<long long> iterations = {}) {
  if (step_sizes.size() != errors.size()) {
    throw std::invalid_argument("make_convergence_report: size mismatch");
  }
  ConvergenceReport report;
  report.orders = errors.size() >= 2 ? estimate_orders(errors) : std::vector<double>{};
  report.step_sizes = std::move(step_sizes);
  report.errors = std::move(errors);
  report.iterations = std::move(iterations);
  return report;
}

/// Max-norm distance between states.
[[nodiscard]] inline double solution_error(const State& y, const State& reference) {
  return (y - reference).lpNorm<Eigen::Infinity>();
}

/// Number of steps of size h covering [0, horizon]; rejects non-integral ratios.
[[nodiscard]] inline std::size_t step_count(double horizon, double h) {
  if (!(h > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("step_count: h and horizon must be positive");
  const double ratio = horizon / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-8 * std::max(1.0, ratio)) {
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " is not a multiple of step " +
                                std::to_string(h));
  }
  return static_cast<std::size_t>(rounded);
}

/// State at time T. Uses the exact periodic orbit when the problem declares a
/// period dividing T; otherwise integrates with HBVM(12,6) at step ~h_ref.
[[nodiscard]] inline State reference_solution(const HamiltonianProblem& problem, double h_ref, double horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("reference_solution: horizon must be positive");
  if (problem.period) {
    const double periods = horizon / *problem.period;
    if (std::abs(periods - std::round(periods)) <= 1e-12 * std::max(1.0, periods)) return problem.initial_state;
  }
  if (!(h_ref > 0.0)) throw std::invalid_argument("reference_solution: h_ref must be positive");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / h_ref - 1e-9)));
  const Trajectory traj = integrate(problem, std::nullopt, MethodConfig::hbvm(12, 6), horizon / n, n);
  return traj.final_state();
}

/// Relative cost of one LIM(r1,k1,s) sweep to one ELIM(r2,k2,s) sweep when nu
/// invariants are imposed besides H: (k1 + (nu+1) r1) / (k2 + nu r2).
[[nodiscard]] inline double cost_ratio(int r1, int k1, int r2, int k2, int nu) {
  if (r1 <= 0 || k1 <= 0 || r2 <= 0 || k2 <= 0 || nu <= 0) {
    throw std::invalid_argument("cost_ratio: arguments must be positive");
  }
  return static_cast<double>(k1 + (nu + 1) * r1) / static_cast<double>(k2 + nu * r2);
}

struct DriftReport {
  std::vector<double> times;
  std::vector<double> h_error;
  std::vector<std::vector<double>> invariant_errors;  // [invariant][sample]
  std::vector<std::string> invariant_names;
  double alpha_max = 0.0;
  long long iteration_total = 0;
};

/// Builds a drift report. `observed` lets invariants be monitored on runs that
/// do not impose them (e.g. GAUSS3 or HBVM on the Kepler problem).
[[nodiscard]] inline DriftReport drift_report(const Trajectory& traj, const HamiltonianProblem& problem,
                                              const std::optional<InvariantSet>& observed = std::nullopt) {
  DriftReport report;
  report.iteration_total = traj.iteration_total;
  if (traj.records.empty()) return report;
  const State& y0 = traj.records.front().state;
  const double h0 = problem.hamiltonian(y0);
  Eigen::VectorXd l0;
  if (observed) {
    l0 = observed->l(y0);
    report.invariant_names = observed->names;
    report.invariant_errors.assign(static_cast<std::size_t>(observed->nu), {});
  }
  for (const StepRecord& rec : traj.records) {
    report.times.push_back(rec.t);
    report.h_error.push_back(std::abs(problem.hamiltonian(rec.state) - h0));
    if (observed) {
      const Eigen::VectorXd l = observed->l(rec.state);
      for (int i = 0; i < observed->nu; ++i) report.invariant_errors[i].push_back(std::abs(l[i] - l0[i]));
    }
    if (rec.alpha.size() > 0) report.alpha_max = std::max(report.alpha_max, rec.alpha.lpNorm<Eigen::Infinity>());
  }
  return report;
}

/// max_n |alpha_n|_inf over a trajectory (0 for runs without invariants).
[[nodiscard]] inline double alpha_max(const Trajectory& traj) {
  double out = 0.0;
  for (const StepRecord& rec : traj.records) {
    if (rec.alpha.size() > 0) out = std::max(out, rec.alpha.lpNorm<Eigen::Infinity>());
  }
  return out;
}

/// Least-squares slope of values against times.
[[nodiscard]] inline double regression_slope(const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw std::invalid_argument("regression_slope: need two or more paired samples");
  }
  const double n = static_cast<double>(times.size());
  double mean_t = 0.0;
  double mean_v = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    mean_t += times[i];
    mean_v += values[i];
  }
  mean_t /= n;
  mean_v /= n;
  double stt = 0.0;
  double stv = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    stt += (times[i] - mean_t) * (times[i] - mean_t);
    stv += (times[i] - mean_t) * (values[i] - mean_v);
  }
  return stv / stt;
}

/// Slope threshold separating bounded oscillation from drift (per unit time).
inline constexpr double kDriftSlopeThreshold = 1e-12;

[[nodiscard]] inline bool is_bounded(const std::vector<double>& times, const std::vector<double>& errors,
                                     double threshold = kDriftSlopeThreshold) {
  return std::abs(regression_slope(times, errors)) <= threshold;
}

}  // namespace elim
