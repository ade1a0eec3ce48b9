#pragma once

// HBVM(k,s) and ELIM(r,k,s) steppers.
//
// Both methods are solved in the space of the s coefficient vectors gamma_j of
// the stage polynomial
//
//   u(ch) = y0 + h sum_j (int_0^c P_j) eta_j gamma_j,
//   gamma_j = sum_l b_l P_j(c_l) J grad H(u(c_l h)),
//
// by a plain fixed-point iteration. HBVM uses eta_j = 1. ELIM replaces the last
// nu scalars by eta_j = 1 - h^{2(s-1-j)} alpha_j, where alpha solves a nu x nu
// linear system expressing that the discrete line integrals of the nu extra
// invariants vanish along u. y1 = y0 + h gamma_0 in both cases.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "elim/polybasis.hpp"
#include "elim/problems.hpp"
#include "elim/tableau.hpp"

namespace elim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  [[nodiscard]] double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Step failure inside integrate(), tagged with the failing step index.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, std::size_t step_index)
      : std::runtime_error(what), step_index_(step_index) {}
  [[nodiscard]] std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

/// Fixed-point tolerance at which total sweep counts on the Kepler benchmark
/// line up with the published ones (the default 1e-14 undercounts by 4-14%).
inline constexpr double kIterationCountTolerance = 1e-15;

struct MethodConfig {
  int s = 3;
  int k = 3;  // quadrature points for the Hamiltonian
  int r = 3;  // quadrature points for the invariants (ignored when nu == 0)
  double fp_tolerance = 1e-14;
  int fp_max_iters = 200;
  bool warm_start = false;
  double gamma_fallback_threshold = 1e8;

  static MethodConfig gauss(int s) { return {s, s, s}; }
  static MethodConfig hbvm(int k, int s) { return {s, k, k}; }
  static MethodConfig elim(int r, int k, int s) { return {s, k, r}; }
};

inline void validate(const MethodConfig& config, int nu) {
  if (config.s < 1) throw ConfigError("s must be positive");
  if (config.k < config.s) {
    throw ConfigError("k=" + std::to_string(config.k) + " must be >= s=" + std::to_string(config.s));
  }
  if (nu > 0) {
    if (config.r < config.s) {
      throw ConfigError("r=" + std::to_string(config.r) + " must be >= s=" + std::to_string(config.s));
    }
    if (config.s <= nu) {
      throw ConfigError("s=" + std::to_string(config.s) + " must exceed the number of invariants nu=" +
                        std::to_string(nu));
    }
  }
  if (!(config.fp_tolerance > 0.0)) throw ConfigError("fp_tolerance must be positive");
  if (config.fp_max_iters < 1) throw ConfigError("fp_max_iters must be positive");
  if (!(config.gamma_fallback_threshold > 0.0)) {
    throw ConfigError("gamma_fallback_threshold must be positive");
  }
}

struct StepWorkspace {
  std::vector<State> gamma;          // gamma_0 .. gamma_{s-1}
  std::vector<Eigen::MatrixXd> phi;  // phi_0 .. phi_{s-1}, each 2m x nu
  std::vector<double> eta;           // eta_0 .. eta_{s-1}
  Eigen::VectorXd alpha;             // alpha_{s-nu} .. alpha_{s-1}
  Eigen::MatrixXd Gamma;             // nu x nu, column i scaled by h^{2(nu-1-i)}
  Eigen::VectorXd rhs;               // sum_j phi_j^T gamma_j
  int iterations = 0;
  /// The accepted sweep could not solve for alpha and used alpha = 0.
  bool gamma_fallback_used = false;
  /// Sweeps (including transient early ones) that fell back to alpha = 0.
  int fallback_sweeps = 0;
  double residual = 0.0;
  double gamma_residual = 0.0;
  double alpha_residual = 0.0;  // alpha increment relative to its tolerance
  /// Accepted at the rounding floor rather than by the tolerance test.
  bool stagnated = false;
};

struct StepResult {
  State y1;
  StepWorkspace workspace;
};

/// u(ch) = y0 + h sum_j (int_0^c P_j) eta_j gamma_j.
[[nodiscard]] inline State stage_polynomial(const State& y0, double h, const std::vector<State>& gamma,
                                            const std::vector<double>& eta, double c) {
  if (gamma.size() != eta.size()) {
    throw std::invalid_argument("stage_polynomial: gamma and eta must have the same length");
  }
  const auto integrals = legendre_integrals(static_cast<int>(gamma.size()), c);
  State u = y0;
  for (std::size_t j = 0; j < gamma.size(); ++j) u += (h * integrals[j] * eta[j]) * gamma[j];
  return u;
}

/// h^{2(s-1-j)}: the single place where the alpha scaling powers are formed.
[[nodiscard]] inline double alpha_scaling(double h, int s, int j) {
  return std::pow(h, 2 * (s - 1 - j));
}

namespace detail {

// Node data for one quadrature rule: the stage-polynomial integrals at the
// nodes and the weighted basis values b_l P_j(c_l).
struct NodeSet {
  Eigen::MatrixXd integrals;  // n x s
  Eigen::MatrixXd weighted;   // s x n

  NodeSet() = default;
  NodeSet(int n, int s) {
    const QuadratureRule& rule = gauss_rule(n);
    integrals = legendre_integral_matrix(rule.nodes, s);
    const Eigen::MatrixXd p = legendre_vandermonde(rule.nodes, s);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), n);
    weighted = p.transpose() * w.asDiagonal();
  }

  [[nodiscard]] Eigen::Index size() const { return integrals.rows(); }
};

inline double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

}  // namespace detail

/// Fixed-point stepper for HBVM(k,s) (no invariants) and ELIM(r,k,s).
/// Immutable after construction; step() is reentrant.
class LineIntegralStepper {
 public:
  /// Increments that stop decreasing below this multiple of the tolerance are
  /// treated as converged to rounding.
  static constexpr double kStagnationFactor = 1e4;

  LineIntegralStepper(HamiltonianProblem problem, std::optional<InvariantSet> invariants, MethodConfig config)
      : problem_(std::move(problem)), invariants_(std::move(invariants)), config_(config) {
    if (invariants_ && invariants_->nu == 0) invariants_.reset();
    validate(config_, nu());
    k_nodes_ = detail::NodeSet(config_.k, config_.s);
    if (invariants_) r_nodes_ = detail::NodeSet(config_.r, config_.s);
  }

  [[nodiscard]] int nu() const { return invariants_ ? invariants_->nu : 0; }
  [[nodiscard]] const MethodConfig& config() const { return config_; }
  [[nodiscard]] const HamiltonianProblem& problem() const { return problem_; }
  [[nodiscard]] const std::optional<InvariantSet>& invariants() const { return invariants_; }

  /// One step of size h (negative h allowed). `previous` seeds gamma and alpha
  /// when warm starting is enabled.
  [[nodiscard]] StepResult step(const State& y0, double h, const StepWorkspace* previous = nullptr) const {
    const int s = config_.s;
    const int nu = this->nu();
    const Eigen::Index dim = y0.size();

    StepWorkspace ws;
    ws.gamma.assign(static_cast<std::size_t>(s), State::Zero(dim));
    ws.eta.assign(static_cast<std::size_t>(s), 1.0);
    ws.alpha = Eigen::VectorXd::Zero(nu);
    if (config_.warm_start && previous != nullptr && previous->gamma.size() == ws.gamma.size() &&
        previous->alpha.size() == nu) {
      ws.gamma = previous->gamma;
      ws.alpha = previous->alpha;
      update_eta(ws, h);
    }

    std::vector<State> next(static_cast<std::size_t>(s), State::Zero(dim));
    double residual = std::numeric_limits<double>::infinity();
    double previous_gamma_residual = std::numeric_limits<double>::infinity();

    for (int sweep = 1; sweep <= config_.fp_max_iters; ++sweep) {
      // gamma_j <- sum_l b_l P_j(c_l) J grad H(u_l)
      for (auto& g : next) g.setZero();
      for (Eigen::Index l = 0; l < k_nodes_.size(); ++l) {
        const State f = problem_.vector_field(stage_at(y0, h, ws.gamma, ws.eta, k_nodes_, l));
        for (int j = 0; j < s; ++j) next[j] += k_nodes_.weighted(j, l) * f;
      }

      AlphaSolve alpha_step;
      if (nu > 0) {
        update_phi(ws, y0, h, ws.gamma);
        alpha_step = solve_alpha(ws, next, h);
      }

      double gamma_change = 0.0;
      for (int j = 0; j < s; ++j) {
        gamma_change = std::max(gamma_change, detail::max_abs(next[j] - ws.gamma[j]));
      }
      const double gamma_scale = 1.0 + detail::max_abs(next[0]);
      bool converged = gamma_change <= config_.fp_tolerance * gamma_scale;
      residual = gamma_change / gamma_scale;
      ws.gamma_residual = residual;

      ws.gamma.swap(next);
      if (nu > 0) {
        const double alpha_change = detail::max_abs(alpha_step.alpha - ws.alpha);
        const double alpha_scale = 1.0 + detail::max_abs(alpha_step.alpha);
        const double alpha_tol = std::max(config_.fp_tolerance * alpha_scale, alpha_step.rounding);
        converged = converged && alpha_change <= alpha_tol;
        residual = std::max(residual, alpha_change / alpha_scale);
        ws.alpha_residual = alpha_change / alpha_tol;
        ws.alpha = std::move(alpha_step.alpha);
        ws.gamma_fallback_used = alpha_step.fallback;
        if (alpha_step.fallback) ++ws.fallback_sweeps;
        update_eta(ws, h);
      }
      // Rounding floor: the increments stopped contracting while already
      // small. Only the gamma increments count here; alpha may be dominated by
      // cancellation in b^ (see solve_alpha) without affecting the solution.
      if (!converged && ws.gamma_residual <= kStagnationFactor * config_.fp_tolerance &&
          ws.gamma_residual >= previous_gamma_residual) {
        converged = true;
        ws.stagnated = true;
      }
      previous_gamma_residual = ws.gamma_residual;
      ws.iterations = sweep;
      ws.residual = residual;
      if (converged) return {y0 + h * ws.gamma[0], std::move(ws)};
    }
    throw NonConvergence("fixed-point iteration did not converge in " + std::to_string(config_.fp_max_iters) +
                             " sweeps (last residual " + std::to_string(residual) + ")",
                         residual);
  }

 private:
  [[nodiscard]] static State stage_at(const State& y0, double h, const std::vector<State>& gamma,
                                      const std::vector<double>& eta, const detail::NodeSet& nodes,
                                      Eigen::Index l) {
    State u = y0;
    for (std::size_t j = 0; j < gamma.size(); ++j) {
      u += (h * nodes.integrals(l, static_cast<Eigen::Index>(j)) * eta[j]) * gamma[j];
    }
    return u;
  }

  void update_phi(StepWorkspace& ws, const State& y0, double h, const std::vector<State>& gamma) const {
    const int s = config_.s;
    const Eigen::Index dim = y0.size();
    ws.phi.assign(static_cast<std::size_t>(s), Eigen::MatrixXd::Zero(dim, nu()));
    for (Eigen::Index l = 0; l < r_nodes_.size(); ++l) {
      const Eigen::MatrixXd grad = invariants_->grad_l(stage_at(y0, h, gamma, ws.eta, r_nodes_, l));
      for (int j = 0; j < s; ++j) ws.phi[j] += r_nodes_.weighted(j, l) * grad;
    }
  }

  struct AlphaSolve {
    Eigen::VectorXd alpha;
    bool fallback = false;
    // Bound on the rounding error of alpha. b^ is a sum of O(1) products that
    // cancel down to O(h^{2s}), so alpha cannot settle below ~eps |Gamma^-1|.
    double rounding = 0.0;
  };

  // Assembles Gamma^ and b^ from phi and the new gamma, then solves for alpha.
  [[nodiscard]] AlphaSolve solve_alpha(StepWorkspace& ws, const std::vector<State>& gamma, double h) const {
    const int s = config_.s;
    const int nu = this->nu();
    ws.rhs = Eigen::VectorXd::Zero(nu);
    Eigen::VectorXd rhs_magnitude = Eigen::VectorXd::Zero(nu);
    for (int j = 0; j < s; ++j) {
      ws.rhs += ws.phi[j].transpose() * gamma[j];
      rhs_magnitude += ws.phi[j].cwiseAbs().transpose() * gamma[j].cwiseAbs();
    }
    ws.Gamma.resize(nu, nu);
    for (int i = 0; i < nu; ++i) {
      const int j = s - nu + i;
      ws.Gamma.col(i) = alpha_scaling(h, s, j) * (ws.phi[j].transpose() * gamma[j]);
    }

    AlphaSolve out{Eigen::VectorXd::Zero(nu), true, 0.0};
    if (!ws.Gamma.allFinite() || !ws.rhs.allFinite() || ws.Gamma.isZero(0.0)) return out;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(ws.Gamma);
    const double rcond = lu.rcond();
    if (!(rcond > 0.0) || 1.0 / rcond > config_.gamma_fallback_threshold) return out;
    Eigen::VectorXd alpha = lu.solve(ws.rhs);
    if (!alpha.allFinite()) return out;

    // Componentwise rounding bound of alpha; entries within it are shrunk
    // towards zero (continuously, so the fixed-point map stays continuous).
    constexpr double kRoundingFactor = 1.0;
    const Eigen::VectorXd bound = kRoundingFactor * std::numeric_limits<double>::epsilon() *
                                  (lu.inverse().cwiseAbs() * rhs_magnitude);
    for (int i = 0; i < nu; ++i) {
      const double shrunk = std::max(std::abs(alpha[i]) - bound[i], 0.0);
      alpha[i] = std::copysign(shrunk, alpha[i]);
    }
    out.rounding = detail::max_abs(bound);
    out.alpha = std::move(alpha);
    out.fallback = false;
    return out;
  }

  void update_eta(StepWorkspace& ws, double h) const {
    const int s = config_.s;
    const int nu = this->nu();
    std::fill(ws.eta.begin(), ws.eta.end(), 1.0);
    for (int i = 0; i < nu; ++i) {
      const int j = s - nu + i;
      ws.eta[j] = 1.0 - alpha_scaling(h, s, j) * ws.alpha[i];
    }
  }

  HamiltonianProblem problem_;
  std::optional<InvariantSet> invariants_;
  MethodConfig config_;
  detail::NodeSet k_nodes_;
  detail::NodeSet r_nodes_;
};

[[nodiscard]] inline StepResult hbvm_step(const HamiltonianProblem& problem, const MethodConfig& config,
                                          const State& y0, double h) {
  return LineIntegralStepper(problem, std::nullopt, config).step(y0, h);
}

[[nodiscard]] inline StepResult elim_step(const HamiltonianProblem& problem, const InvariantSet& invariants,
                                          const MethodConfig& config, const State& y0, double h) {
  if (invariants.nu < 1) throw ConfigError("elim_step needs at least one invariant");
  return LineIntegralStepper(problem, invariants, config).step(y0, h);
}

struct StepRecord {
  double t = 0.0;
  State state;
  double h_error = 0.0;
  std::vector<double> invariant_errors;
  int iterations = 0;
  Eigen::VectorXd alpha;
  bool gamma_fallback_used = false;
  int fallback_sweeps = 0;
};

/// records[0] is the initial state at t = 0; records[n] follows step n.
struct Trajectory {
  std::vector<StepRecord> records;
  long long iteration_total = 0;

  [[nodiscard]] const State& final_state() const { return records.back().state; }
};

[[nodiscard]] inline Trajectory integrate(const LineIntegralStepper& stepper, const State& y0, double h,
                                          std::size_t n_steps) {
  if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be at least 1");
  const HamiltonianProblem& problem = stepper.problem();
  const auto& invariants = stepper.invariants();
  const double h0 = problem.hamiltonian(y0);
  const Eigen::VectorXd l0 = invariants ? invariants->l(y0) : Eigen::VectorXd();

  Trajectory traj;
  traj.records.reserve(n_steps + 1);
  auto record = [&](double t, const State& y) {
    StepRecord rec;
    rec.t = t;
    rec.state = y;
    rec.h_error = std::abs(problem.hamiltonian(y) - h0);
    if (invariants) {
      const Eigen::VectorXd l = invariants->l(y);
      for (Eigen::Index i = 0; i < l.size(); ++i) rec.invariant_errors.push_back(std::abs(l[i] - l0[i]));
    }
    return rec;
  };
  traj.records.push_back(record(0.0, y0));

  State y = y0;
  std::optional<StepWorkspace> previous;
  for (std::size_t n = 1; n <= n_steps; ++n) {
    StepResult step;
    try {
      step = stepper.step(y, h, previous ? &*previous : nullptr);
    } catch (const std::exception& e) {
      throw IntegrationError("step " + std::to_string(n) + ": " + e.what(), n);
    }
    y = step.y1;
    StepRecord rec = record(static_cast<double>(n) * h, y);
    rec.iterations = step.workspace.iterations;
    rec.alpha = step.workspace.alpha;
    rec.gamma_fallback_used = step.workspace.gamma_fallback_used;
    rec.fallback_sweeps = step.workspace.fallback_sweeps;
    traj.iteration_total += rec.iterations;
    traj.records.push_back(std::move(rec));
    previous = std::move(step.workspace);
  }
  return traj;
}

[[nodiscard]] inline Trajectory integrate(const HamiltonianProblem& problem,
                                          const std::optional<InvariantSet>& invariants, const MethodConfig& config,
                                          double h, std::size_t n_steps) {
  const LineIntegralStepper stepper(problem, invariants, config);
  return integrate(stepper, problem.initial_state, h, n_steps);
}

}  // namespace elim
