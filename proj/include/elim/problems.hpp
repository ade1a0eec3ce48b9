#pragma once

// Hamiltonian problems y' = J grad H(y), y = (q, p), and sets of additional
// first integrals L : R^{2m} -> R^nu.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace elim {

using State = Eigen::VectorXd;

/// J v with J = [[0, I_m], [-I_m, 0]].
[[nodiscard]] inline State apply_j(const State& v) {
  const Eigen::Index m = v.size() / 2;
  State out(v.size());
  out.head(m) = v.tail(m);
  out.tail(m) = -v.head(m);
  return out;
}

struct HamiltonianProblem {
  int m = 0;
  std::function<double(const State&)> hamiltonian;
  std::function<State(const State&)> grad_h;
  State initial_state;
  std::string name;
  /// Period of the exact flow from initial_state, when known analytically.
  std::optional<double> period;

  [[nodiscard]] State vector_field(const State& y) const { return apply_j(grad_h(y)); }
};

struct InvariantSet {
  int nu = 0;
  std::function<Eigen::VectorXd(const State&)> l;
  /// 2m x nu; column i is the gradient of L_i.
  std::function<Eigen::MatrixXd(const State&)> grad_l;
  std::vector<std::string> names;
};

/// Kepler problem, H = |p|^2/2 - 1/|q|, starting at pericenter of an ellipse
/// of the given eccentricity. The orbit has period 2 pi.
[[nodiscard]] inline HamiltonianProblem kepler_problem(double eccentricity) {
  if (!(eccentricity >= 0.0 && eccentricity < 1.0)) {
    throw std::invalid_argument("kepler_problem: eccentricity must lie in [0,1)");
  }
  HamiltonianProblem pb;
  pb.m = 2;
  pb.name = "kepler";
  pb.period = 2.0 * std::numbers::pi;
  pb.hamiltonian = [](const State& y) {
    return 0.5 * y.tail<2>().squaredNorm() - 1.0 / y.head<2>().norm();
  };
  pb.grad_h = [](const State& y) {
    const double r = y.head<2>().norm();
    State g(4);
    g.head<2>() = y.head<2>() / (r * r * r);
    g.tail<2>() = y.tail<2>();
    return g;
  };
  pb.initial_state = State(4);
  pb.initial_state << 1.0 - eccentricity, 0.0, 0.0,
      std::sqrt((1.0 + eccentricity) / (1.0 - eccentricity));
  return pb;
}

enum class KeplerInvariants { angular_momentum_only, angular_momentum_and_lrl };

/// Angular momentum L1 = q^T J2 p = q1 p2 - q2 p1 and, optionally, the
/// Laplace-Runge-Lenz component L2 = p1 L1 + q2/|q| (conserved for the
/// attractive potential; it vanishes at the pericenter start on the q1 axis).
[[nodiscard]] inline InvariantSet kepler_invariants(KeplerInvariants which) {
  const bool with_lrl = which == KeplerInvariants::angular_momentum_and_lrl;
  InvariantSet set;
  set.nu = with_lrl ? 2 : 1;
  set.names = with_lrl ? std::vector<std::string>{"L1", "L2"} : std::vector<std::string>{"L1"};
  set.l = [with_lrl](const State& y) {
    const double q1 = y[0], q2 = y[1], p1 = y[2], p2 = y[3];
    const double l1 = q1 * p2 - q2 * p1;
    Eigen::VectorXd out(with_lrl ? 2 : 1);
    out[0] = l1;
    if (with_lrl) out[1] = p1 * l1 + q2 / std::hypot(q1, q2);
    return out;
  };
  set.grad_l = [with_lrl](const State& y) {
    const double q1 = y[0], q2 = y[1], p1 = y[2], p2 = y[3];
    const double l1 = q1 * p2 - q2 * p1;
    Eigen::MatrixXd g(4, with_lrl ? 2 : 1);
    // grad_q L1 = J2 p, grad_p L1 = -J2 q
    g.col(0) << p2, -p1, -q2, q1;
    if (with_lrl) {
      const double r = std::hypot(q1, q2);
      const double r3 = r * r * r;
      g(0, 1) = p1 * p2 - q2 * q1 / r3;
      g(1, 1) = -p1 * p1 + 1.0 / r - q2 * q2 / r3;
      g(2, 1) = l1 - p1 * q2;
      g(3, 1) = p1 * q1;
    }
    return g;
  };
  return set;
}

/// H(q,p) = p^2/2 + q^degree/degree, started from (1, 0).
[[nodiscard]] inline HamiltonianProblem polynomial_oscillator(int degree) {
  if (degree <= 0 || degree % 2 != 0) {
    throw std::invalid_argument("polynomial_oscillator: degree must be even and positive");
  }
  HamiltonianProblem pb;
  pb.m = 1;
  pb.name = degree == 2 ? "harmonic" : degree == 4 ? "quartic" : "oscillator" + std::to_string(degree);
  const double d = degree;
  pb.hamiltonian = [d](const State& y) { return 0.5 * y[1] * y[1] + std::pow(y[0], d) / d; };
  pb.grad_h = [d](const State& y) {
    State g(2);
    g << std::pow(y[0], d - 1.0), y[1];
    return g;
  };
  if (degree == 2) pb.period = 2.0 * std::numbers::pi;
  pb.initial_state = State(2);
  pb.initial_state << 1.0, 0.0;
  return pb;
}

}  // namespace elim
