#pragma once

// Coefficient matrices of HBVM(k,s) and of the Runge-Kutta type form of
// ELIM(r,k,s). The steppers work in the s-dimensional coefficient space and
// never use A directly; these matrices are for inspection and verification.

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include "elim/polybasis.hpp"

namespace elim {

struct TableauMatrices {
  int s = 0;
  int k = 0;
  Eigen::MatrixXd P;      // k x s, P_{j-1}(c_i)
  Eigen::MatrixXd I;      // k x s, int_0^{c_i} P_{j-1}
  Eigen::VectorXd omega;  // diagonal of Omega (= b)
  Eigen::MatrixXd A;      // k x k Butcher matrix
  Eigen::VectorXd c;
  Eigen::VectorXd b;
};

/// Diagonal Sigma_s = diag(1, eta_1, ..., eta_{s-1}).
struct SigmaScaling {
  int s = 0;
  std::vector<double> eta;

  static SigmaScaling identity(int s) { return {s, std::vector<double>(static_cast<std::size_t>(s), 1.0)}; }
};

/// Rows are nodes, columns are P_0..P_{cols-1}.
[[nodiscard]] inline Eigen::MatrixXd legendre_vandermonde(const std::vector<double>& nodes, int cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nodes.size()), cols);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = legendre_values(cols - 1, nodes[i]);
    for (int j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), j) = p[j];
  }
  return out;
}

[[nodiscard]] inline Eigen::MatrixXd legendre_integral_matrix(const std::vector<double>& nodes, int cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(nodes.size()), cols);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto q = legendre_integrals(cols, nodes[i]);
    for (int j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), j) = q[j];
  }
  return out;
}

/// The (s+1) x s matrix X^_s: tridiagonal X_s (1/2 in the corner, -xi_i above
/// and xi_i below the diagonal) plus a last row (0 ... 0 xi_s).
[[nodiscard]] inline Eigen::MatrixXd w_transformation_matrix(int s) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(s + 1, s);
  x(0, 0) = 0.5;
  for (int i = 1; i <= s; ++i) {
    x(i, i - 1) = xi(i);
    if (i < s) x(i - 1, i) = -xi(i);
  }
  return x;
}

[[nodiscard]] inline TableauMatrices build_hbvm_tableau(int k, int s) {
  if (s < 1) throw std::invalid_argument("build_hbvm_tableau: s must be positive");
  if (k < s) {
    throw std::invalid_argument("build_hbvm_tableau: k=" + std::to_string(k) + " < s=" +
                                std::to_string(s));
  }
  const QuadratureRule& rule = gauss_rule(k);
  TableauMatrices t;
  t.s = s;
  t.k = k;
  t.P = legendre_vandermonde(rule.nodes, s);
  t.I = legendre_integral_matrix(rule.nodes, s);
  t.c = Eigen::Map<const Eigen::VectorXd>(rule.nodes.data(), k);
  t.b = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), k);
  t.omega = t.b;
  t.A = t.I * t.P.transpose() * t.omega.asDiagonal();
  return t;
}

/// A = I Sigma_s P^T Omega.
[[nodiscard]] inline Eigen::MatrixXd build_elim_tableau(int k, int s, const SigmaScaling& sigma) {
  if (sigma.s != s || static_cast<int>(sigma.eta.size()) != s) {
    throw std::invalid_argument("build_elim_tableau: scaling size does not match s");
  }
  if (sigma.eta[0] != 1.0) throw std::invalid_argument("build_elim_tableau: eta[0] must be 1");
  const TableauMatrices t = build_hbvm_tableau(k, s);
  const Eigen::VectorXd eta = Eigen::Map<const Eigen::VectorXd>(sigma.eta.data(), s);
  return t.I * eta.asDiagonal() * t.P.transpose() * t.omega.asDiagonal();
}

}  // namespace elim
